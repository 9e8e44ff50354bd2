"""Closed-form per-pulse click probabilities.

Every detector's click probability is a weighted mixture of terms

    P = sum_i w_i * [nu*(1 - exp(-I_i)) + (1 - nu)*(1 - exp(-Ic_i))] + P_dark

where the weights w_i are position fractions of the worst-case codeword
patterns, I_i is the mean photon number the pattern sends to the detector,
and Ic_i is what the pattern sends to the detector's complement port (the
other output of its final splitter) — which is where a fraction (1 - nu) of
the light effectively goes when the interference visibility nu is below one.

This module never touches the transfer matrix: intensities come from the
pattern fractions and algebraic port sums, so it forms an independent route
against the enumeration oracle in the optics module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    ChannelModel,
    DomainError,
    Encoding,
    PatternFractions,
    ProtocolParams,
    Relationship,
    RunConfig,
    relationship_profile,
    run_pairing,
)

__all__ = [
    "ClickProfile",
    "ClickTerm",
    "CONDITION_EQUAL",
    "CONDITION_DIFFERENT",
    "apply_visibility",
    "four_party_symmetric",
    "four_party_equal_diff",
    "two_party_asymmetric",
    "four_party_asymmetric",
]

CONDITION_EQUAL = "equal"
CONDITION_DIFFERENT = "different"


@dataclass(frozen=True)
class ClickProfile:
    """Per-pulse click probability of each detector under one condition.

    per_detector  probabilities indexed by detector (all tree outputs for the
                  symmetric four-party model; observed detectors only for the
                  Equal/Different pair models)
    condition     label of the modeled condition ("equal", "different",
                  "rel:<label>")
    pulses        pulses per codeword the counts are accumulated over
    """

    per_detector: tuple[float, ...]
    condition: str
    pulses: int

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "per_detector", tuple(float(p) for p in self.per_detector)
        )
        if not self.per_detector:
            raise DomainError("per_detector must be non-empty")
        for p in self.per_detector:
            if not (0.0 <= p <= 1.0):
                raise DomainError(f"click probabilities must lie in [0, 1], got {p!r}")
        if self.pulses < 1:
            raise DomainError(f"pulses must be >= 1, got {self.pulses}")


@dataclass(frozen=True)
class ClickTerm:
    """One mixture term: weight, direct intensity, complement intensity."""

    weight: float
    intensity: float
    complement: float


def apply_visibility(
    detector_terms: Sequence[Sequence[ClickTerm]],
    dark_count: float,
    visibility: float,
    pulses: int,
    condition: str,
) -> ClickProfile:
    """Collapse per-detector term tables into a ClickProfile.

    With visibility 1 the complement intensities drop out and each detector
    reduces to sum_i w_i*(1 - exp(-I_i)) + P_dark.
    """
    if not (0.0 <= visibility <= 1.0):
        raise DomainError(f"visibility must lie in [0, 1], got {visibility!r}")
    if not (0.0 <= dark_count < 1.0):
        raise DomainError(f"dark_count must lie in [0, 1), got {dark_count!r}")
    probs = []
    for terms in detector_terms:
        total_w = math.fsum(t.weight for t in terms)
        if not math.isclose(total_w, 1.0, rel_tol=0.0, abs_tol=1e-9):
            raise DomainError(f"term weights must sum to 1, got {total_w!r}")
        p = 0.0
        for t in terms:
            if t.weight < -1e-12:
                raise DomainError(f"term weights must be >= 0, got {t.weight!r}")
            if t.intensity < 0.0 or t.complement < 0.0:
                raise DomainError("term intensities must be >= 0")
            p += t.weight * (
                visibility * -math.expm1(-t.intensity)
                + (1.0 - visibility) * -math.expm1(-t.complement)
            )
        probs.append(min(1.0, max(0.0, p + dark_count)))
    return ClickProfile(tuple(probs), condition, pulses)


def _check_four_party(channel: ChannelModel, protocol: ProtocolParams) -> None:
    if protocol.N != 4 or channel.n_senders != 4:
        raise DomainError("four-party model needs N = 4 in protocol and channel")


def four_party_symmetric(
    rel: Relationship,
    mu: float,
    channel: ChannelModel,
    protocol: ProtocolParams,
    pairing: Sequence[int] | None = None,
) -> ClickProfile:
    """All four detectors' probabilities for one relationship, equal channels.

    Every sender uses mean photon number mu over m pulses through identical
    transmission eta.  Per position class the detectors see (in units of
    e1 = eta*mu/m):

        detector 1: 4*e1 when all ports agree, e1 when exactly one disagrees,
                    0 on a 2-2 split (complement: the mirror of detector 3)
        detector 2: 2*e1 when ports 1,2 differ, else 0 (complement mirrored)
        detector 3: mirror of detector 1 (pair-split bright, all-agree dark)
        detector 4: like detector 2 for ports 3,4
    """
    _check_four_party(channel, protocol)
    if not channel.symmetric():
        raise DomainError("channel transmissions differ: use four_party_asymmetric")
    if not (mu >= 0.0 and math.isfinite(mu)):
        raise DomainError(f"mu must be finite and >= 0, got {mu!r}")
    if pairing is None:
        pairing = run_pairing(1, 4)
    fr = relationship_profile(rel, pairing, protocol.delta)
    e1 = channel.eta[0] * mu / protocol.m
    # 2-2 splits that are not along the (1,2)(3,4) pair boundary send nothing
    # to detectors 1 and 3 or their complements.
    w_cross = max(0.0, fr.d_total - fr.d_single - fr.d_pairs)
    w_agree = max(0.0, 1.0 - fr.d_total)
    d1 = [
        ClickTerm(w_agree, 4 * e1, 0.0),
        ClickTerm(fr.d_single, e1, e1),
        ClickTerm(fr.d_pairs, 0.0, 4 * e1),
        ClickTerm(w_cross, 0.0, 0.0),
    ]
    d2 = [
        ClickTerm(fr.d12, 2 * e1, 0.0),
        ClickTerm(1.0 - fr.d12, 0.0, 2 * e1),
    ]
    d3 = [
        ClickTerm(w_agree, 0.0, 4 * e1),
        ClickTerm(fr.d_single, e1, e1),
        ClickTerm(fr.d_pairs, 4 * e1, 0.0),
        ClickTerm(w_cross, 0.0, 0.0),
    ]
    d4 = [
        ClickTerm(fr.d34, 2 * e1, 0.0),
        ClickTerm(1.0 - fr.d34, 0.0, 2 * e1),
    ]
    return apply_visibility(
        [d1, d2, d3, d4],
        channel.dark_count,
        channel.visibility,
        protocol.m,
        f"rel:{rel.canonical_label}",
    )


def four_party_equal_diff(
    mu: float, channel: ChannelModel, protocol: ProtocolParams
) -> tuple[ClickProfile, ClickProfile]:
    """Observed detectors under the Equal vs. Different pair hypotheses.

    The decision at each observed detector compares the sender pair it
    watches (detector 2: ports 1,2; detector 4: ports 3,4; detector 3: the
    two pairs).  "Equal" means the compared senders hold the same codeword;
    "Different" means they differ on a fraction delta of positions.  Equal
    channels, mean photon number mu per sender.

    With visibility 1 this reduces to

        P_equal     = P_dark                       (all observed detectors)
        P_different = delta*(1 - exp(-2*eta*mu/m)) + P_dark   (detectors 2, 4)
        P_different = delta*(1 - exp(-eta*mu/m))   + P_dark   (detector 3)
    """
    _check_four_party(channel, protocol)
    if not channel.symmetric():
        raise DomainError("channel transmissions differ: use four_party_asymmetric")
    if not (mu >= 0.0 and math.isfinite(mu)):
        raise DomainError(f"mu must be finite and >= 0, got {mu!r}")
    delta = protocol.delta
    e1 = channel.eta[0] * mu / protocol.m
    eq = [
        [ClickTerm(1.0, 0.0, 2 * e1)],
        [ClickTerm(1.0, 0.0, 4 * e1)],
        [ClickTerm(1.0, 0.0, 2 * e1)],
    ]
    pair_term = [ClickTerm(delta, 2 * e1, 0.0), ClickTerm(1.0 - delta, 0.0, 2 * e1)]
    diff = [
        pair_term,
        [ClickTerm(delta, e1, e1), ClickTerm(1.0 - delta, 0.0, 4 * e1)],
        pair_term,
    ]
    args = (channel.dark_count, channel.visibility, protocol.m)
    return (
        apply_visibility(eq, *args, CONDITION_EQUAL),
        apply_visibility(diff, *args, CONDITION_DIFFERENT),
    )


def two_party_asymmetric(
    alphas: Sequence[float],
    channel: ChannelModel,
    protocol: ProtocolParams,
    encoding: Encoding = Encoding.SINGLE_BIT,
) -> tuple[ClickProfile, ClickProfile]:
    """Two-party Equal/Different profiles (one observed detector).

    With attenuated amplitudes beta_k = sqrt(eta_k)*alpha_k the difference
    port sees per-pulse intensity (b1 - b2)**2 / (2m) on agreeing positions
    and (b1 + b2)**2 / (2m) on disagreeing ones.  The two-bit encoding packs
    bit pairs into quarter phases over m/2 pulses: agreeing pairs keep the
    difference intensity (b1 - b2)**2 / m, fully flipped pairs the sum
    intensity, and half-flipped pairs (relative phase +-i) land on the
    self-complementary cross intensity (b1**2 + b2**2) / m.
    """
    if protocol.N != 2 or channel.n_senders != 2 or len(alphas) != 2:
        raise DomainError("two-party model needs N = 2 throughout")
    for a in alphas:
        if not (float(a) >= 0.0 and math.isfinite(float(a))):
            raise DomainError(f"amplitudes must be finite and >= 0, got {a!r}")
    delta = protocol.delta
    m = protocol.m
    pulses = encoding.pulses(m)
    b1, b2 = (s * float(a) for s, a in zip(channel.sqrt_eta, alphas))
    if encoding is Encoding.SINGLE_BIT:
        i_diff = (b1 - b2) ** 2 / (2 * m)
        i_sum = (b1 + b2) ** 2 / (2 * m)
        eq = [[ClickTerm(1.0, i_diff, i_sum)]]
        diff = [
            [ClickTerm(delta, i_sum, i_diff), ClickTerm(1.0 - delta, i_diff, i_sum)]
        ]
    else:
        i_diff = (b1 - b2) ** 2 / m
        i_sum = (b1 + b2) ** 2 / m
        i_cross = (b1**2 + b2**2) / m
        eq = [[ClickTerm(1.0, i_diff, i_sum)]]
        diff = [
            [
                ClickTerm((1.0 - delta) ** 2, i_diff, i_sum),
                ClickTerm(2.0 * delta * (1.0 - delta), i_cross, i_cross),
                ClickTerm(delta**2, i_sum, i_diff),
            ]
        ]
    args = (channel.dark_count, channel.visibility, pulses)
    return (
        apply_visibility(eq, *args, CONDITION_EQUAL),
        apply_visibility(diff, *args, CONDITION_DIFFERENT),
    )


def four_party_asymmetric(
    run_index: int,
    run: RunConfig,
    channel: ChannelModel,
    protocol: ProtocolParams,
) -> tuple[ClickProfile, ClickProfile]:
    """Equal/Different profiles of one run with per-sender amplitudes.

    Ports hold senders (i,j,k,l) = run_pairing(run_index); with b_x =
    sqrt(eta_x)*alpha_x the observed detectors see

        detector 2:  Equal (b_i - b_j)**2/(2m);  Different mixes the flipped
                     pair (b_i + b_j)**2/(2m) with weight delta
        detector 4:  same for (b_k, b_l)
        detector 3:  Equal (b_i + b_j - b_k - b_l)**2/(4m); Different flips
                     the single sender that leaves the smallest magnitude
                     |±b_i ± b_j - b_k - b_l| (the adversary's best choice),
                     with weight delta

    Complement intensities flip the sign of the second operand (detector 2:
    the port-j field; detector 3: the right-pair sum; detector 4: the port-l
    field).  With equal amplitudes and transmissions this reduces to
    four_party_equal_diff.
    """
    _check_four_party(channel, protocol)
    if run.encoding is not Encoding.SINGLE_BIT:
        raise DomainError("two-bit encoding is defined for two senders only")
    expected = run_pairing(run_index, 4)
    if run.pairing != expected:
        raise DomainError(
            f"run {run_index} uses pairing {expected}, got {run.pairing}"
        )
    delta = protocol.delta
    m = protocol.m
    sqrt_eta = channel.sqrt_eta
    bi, bj, bk, bl = (sqrt_eta[s - 1] * run.alphas[s - 1] for s in run.pairing)

    def pair_terms(ba: float, bb: float) -> tuple[list[ClickTerm], list[ClickTerm]]:
        i_diff = (ba - bb) ** 2 / (2 * m)
        i_sum = (ba + bb) ** 2 / (2 * m)
        eq = [ClickTerm(1.0, i_diff, i_sum)]
        df = [ClickTerm(delta, i_sum, i_diff), ClickTerm(1.0 - delta, i_diff, i_sum)]
        return eq, df

    eq2, df2 = pair_terms(bi, bj)
    eq4, df4 = pair_terms(bk, bl)

    i_eq3 = (bi + bj - bk - bl) ** 2 / (4 * m)
    i_eq3c = (bi + bj + bk + bl) ** 2 / (4 * m)
    # Single-sender flips change one sign in (b_i + b_j) - (b_k + b_l); the
    # worst case (hardest to distinguish from Equal) minimizes the magnitude.
    flips = [
        ((-bi + bj) - (bk + bl), (-bi + bj) + (bk + bl)),
        ((bi - bj) - (bk + bl), (bi - bj) + (bk + bl)),
        ((bi + bj) - (-bk + bl), (bi + bj) + (-bk + bl)),
        ((bi + bj) - (bk - bl), (bi + bj) + (bk - bl)),
    ]
    x, xc = min(flips, key=lambda f: abs(f[0]))
    eq3 = [ClickTerm(1.0, i_eq3, i_eq3c)]
    df3 = [
        ClickTerm(delta, x**2 / (4 * m), xc**2 / (4 * m)),
        ClickTerm(1.0 - delta, i_eq3, i_eq3c),
    ]
    args = (channel.dark_count, channel.visibility, m)
    return (
        apply_visibility([eq2, eq3, eq4], *args, CONDITION_EQUAL),
        apply_visibility([df2, df3, df4], *args, CONDITION_DIFFERENT),
    )
