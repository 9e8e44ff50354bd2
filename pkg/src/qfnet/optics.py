"""Linear optics of the balanced beam-splitter tree.

The network interfering N = 2**s coherent pulses is a binary tree of 50/50
splitters.  Each splitter takes the running *sum* fields of its two subtrees;
its difference output is tapped straight onto a detector while the sum output
feeds the next level, and the root's sum output gets the last detector.  Only
sums propagate, so for N >= 4 the detector rows are *not* the rows of the
full Sylvester-Hadamard transform: e.g. for N = 4 they are

    D1 = (1,  1,  1,  1)/2        root sum
    D2 = (1, -1,  0,  0)/sqrt(2)  left-pair difference tap
    D3 = (1,  1, -1, -1)/2        root difference
    D4 = (0,  0,  1, -1)/sqrt(2)  right-pair difference tap

The row set is still orthonormal, so total intensity is conserved.  Each
row's *complement* is the same combination with its second operand's sign
flipped (the other output of the final splitter feeding that detector); with
interference visibility nu < 1 a fraction (1 - nu) of the light behaves as if
it exited that complement port instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    ChannelModel,
    DomainError,
    Encoding,
    ProtocolParams,
    Relationship,
    RunConfig,
    worst_case_regions,
)
from .probmodel import ClickProfile

__all__ = [
    "transfer_rows",
    "complement_rows",
    "sylvester_hadamard",
    "PulsePattern",
    "DetectorIntensities",
    "tree_transfer",
    "click_probability",
    "oracle_click_profile",
]


def _check_ports(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise DomainError(f"port count must be a power of two >= 2, got {n}")


def transfer_rows(n: int) -> np.ndarray:
    """Detector amplitude rows of the n-port splitter tree (orthonormal, n x n).

    Row ordering: [root sum, left subtree taps..., root difference, right
    subtree taps...], which for n = 4 gives the D1..D4 order above.
    """
    _check_ports(n)
    if n == 2:
        return np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    half = transfer_rows(n // 2)
    sub_sum = half[0]
    zeros = np.zeros(n // 2)
    rows = [np.concatenate([sub_sum, sub_sum]) / math.sqrt(2.0)]
    rows += [np.concatenate([r, zeros]) for r in half[1:]]
    rows.append(np.concatenate([sub_sum, -sub_sum]) / math.sqrt(2.0))
    rows += [np.concatenate([zeros, r]) for r in half[1:]]
    return np.array(rows)


def complement_rows(n: int) -> np.ndarray:
    """Complement-port amplitude rows, aligned with transfer_rows(n).

    Each detector's final splitter has two outputs; the complement row is the
    one the detector does *not* sit on (second operand's sign flipped).  For
    n = 4: comp(D1) = D3's row, comp(D3) = D1's row, comp(D2) = (1,1,0,0)/
    sqrt(2), comp(D4) = (0,0,1,1)/sqrt(2).
    """
    _check_ports(n)
    if n == 2:
        return np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2.0)
    half = transfer_rows(n // 2)
    half_c = complement_rows(n // 2)
    sub_sum = half[0]
    zeros = np.zeros(n // 2)
    rows = [np.concatenate([sub_sum, -sub_sum]) / math.sqrt(2.0)]
    rows += [np.concatenate([r, zeros]) for r in half_c[1:]]
    rows.append(np.concatenate([sub_sum, sub_sum]) / math.sqrt(2.0))
    rows += [np.concatenate([zeros, r]) for r in half_c[1:]]
    return np.array(rows)


def sylvester_hadamard(n: int) -> np.ndarray:
    """The +-1 Sylvester-Hadamard matrix of order n (helper; H @ H.T = n*I).

    Not the device transfer for n > 2 — the tree taps differences early — but
    useful as an orthogonality reference in tests.
    """
    _check_ports(n)
    h = np.array([[1, 1], [1, -1]])
    out = h
    while out.shape[0] < n:
        out = np.kron(h, out)
    return out


@dataclass(frozen=True)
class PulsePattern:
    """Input fields of one pulse slot: per-port phase factors and amplitudes.

    phases           unit-modulus complex factors (the encoded bits)
    amplitude_scale  nonnegative per-port field amplitudes
    """

    phases: tuple[complex, ...]
    amplitude_scale: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "phases", tuple(complex(p) for p in self.phases))
        object.__setattr__(
            self, "amplitude_scale", tuple(float(a) for a in self.amplitude_scale)
        )
        if len(self.phases) != len(self.amplitude_scale):
            raise DomainError("phases and amplitude_scale must have equal length")
        _check_ports(len(self.phases))
        for p in self.phases:
            if abs(abs(p) - 1.0) > 1e-9:
                raise DomainError(f"phase factors must have unit modulus, got {p!r}")
        for a in self.amplitude_scale:
            if not (a >= 0.0 and math.isfinite(a)):
                raise DomainError(f"amplitudes must be finite and >= 0, got {a!r}")


@dataclass(frozen=True)
class DetectorIntensities:
    """Mean photon number arriving at each detector in one pulse slot."""

    intensities: tuple[float, ...]

    @property
    def total(self) -> float:
        return math.fsum(self.intensities)


def tree_transfer(pattern: PulsePattern) -> DetectorIntensities:
    """Propagate one pulse slot through the tree; return detector intensities.

    Total output intensity equals total input intensity (the rows are
    orthonormal).
    """
    fields = np.array(pattern.phases) * np.array(pattern.amplitude_scale)
    out = transfer_rows(len(pattern.phases)) @ fields
    return DetectorIntensities(tuple(float(x) for x in np.abs(out) ** 2))


def click_probability(
    intensity: float,
    dark_count: float,
    visibility: float = 1.0,
    complement_intensity: float = 0.0,
) -> float:
    """Per-pulse click probability of a threshold detector.

    A coherent field of mean photon number I clicks with probability
    1 - exp(-I); with visibility nu a fraction (1 - nu) of the light behaves
    as if routed to the complement port, and dark counts add on top.  Clamped
    to [0, 1].
    """
    if not (intensity >= 0.0 and math.isfinite(intensity)):
        raise DomainError(f"intensity must be finite and >= 0, got {intensity!r}")
    if not (complement_intensity >= 0.0 and math.isfinite(complement_intensity)):
        raise DomainError(
            f"complement intensity must be finite and >= 0, got {complement_intensity!r}"
        )
    if not (0.0 <= dark_count < 1.0):
        raise DomainError(f"dark_count must lie in [0, 1), got {dark_count!r}")
    if not (0.0 <= visibility <= 1.0):
        raise DomainError(f"visibility must lie in [0, 1], got {visibility!r}")
    p = (
        visibility * -math.expm1(-intensity)
        + (1.0 - visibility) * -math.expm1(-complement_intensity)
        + dark_count
    )
    return min(1.0, max(0.0, p))


def _region_phase_weights(
    rel: Relationship, encoding: Encoding, delta: float, n: int
) -> list[tuple[tuple[complex, ...], float]]:
    # Joint per-sender phase factors with their position-fraction weights.
    if encoding is Encoding.SINGLE_BIT:
        return [
            (tuple(1.0 - 2.0 * b for b in r.bits), r.weight)
            for r in worst_case_regions(rel, delta)
        ]
    # Two-bit encoding: pairs of codeword bits map onto quarter phases, so a
    # sender whose codeword differs on a fraction delta of *bits* differs on
    # one bit of a pair with probability 2*delta*(1-delta) (relative phase
    # +-i) and on both with probability delta**2 (relative phase -1).
    if n != 2:
        raise DomainError("two-bit encoding is defined for two senders only")
    if rel.all_equal:
        return [((1.0, 1.0), 1.0)]
    return [
        ((1.0, 1.0), (1.0 - delta) ** 2),
        ((1.0, 1.0j), delta * (1.0 - delta)),
        ((1.0, -1.0j), delta * (1.0 - delta)),
        ((1.0, -1.0), delta**2),
    ]


def oracle_click_profile(
    rel: Relationship,
    run: RunConfig,
    channel: ChannelModel,
    protocol: ProtocolParams,
) -> ClickProfile:
    """Per-pulse click probabilities by direct enumeration through the tree.

    Enumerates the worst-case pattern regions, propagates each joint phase
    pattern through transfer_rows/complement_rows, and mixes the resulting
    click probabilities by region weight.  Independent of the closed-form
    route, which never touches the transfer matrix — the two are compared in
    tests.
    """
    n = rel.n
    if n not in (2, 4):
        raise DomainError(f"oracle defined for 2 or 4 senders, got {n}")
    if run.n_senders != n or channel.n_senders != n or protocol.N != n:
        raise DomainError("relationship, run, channel and protocol sizes must agree")
    pulses = run.encoding.pulses(protocol.m)
    sqrt_eta = channel.sqrt_eta
    amps = tuple(
        sqrt_eta[s - 1] * run.alphas[s - 1] / math.sqrt(pulses) for s in run.pairing
    )
    rows = transfer_rows(n)
    crows = complement_rows(n)
    acc = np.zeros(n)
    acc_c = np.zeros(n)
    for sender_phases, weight in _region_phase_weights(rel, run.encoding, protocol.delta, n):
        port_fields = np.array(
            [sender_phases[s - 1] for s in run.pairing], dtype=complex
        ) * np.array(amps)
        inten = np.abs(rows @ port_fields) ** 2
        inten_c = np.abs(crows @ port_fields) ** 2
        acc += weight * -np.expm1(-inten)
        acc_c += weight * -np.expm1(-inten_c)
    nu = channel.visibility
    probs = np.clip(nu * acc + (1.0 - nu) * acc_c + channel.dark_count, 0.0, 1.0)
    return ClickProfile(
        per_detector=tuple(float(p) for p in probs),
        condition=f"rel:{rel.canonical_label}",
        pulses=pulses,
    )
