"""Shared domain types for the fingerprinting-network toolkit.

Senders are numbered 1..N.  A *relationship* is a set partition of the
senders into equality groups (senders in one group hold identical messages).
Codewords of two senders in different groups disagree on at least a fraction
``delta`` of positions; the worst case for distinguishing them is every
pairwise distance sitting exactly at ``delta``.  That worst case is modeled
by *pattern regions*: classes of codeword positions sharing one joint bit
pattern across the groups, with sender 1's group as the phase reference.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

__all__ = [
    "DomainError",
    "ProtocolParams",
    "ChannelModel",
    "Encoding",
    "Relationship",
    "PatternRegion",
    "PatternFractions",
    "RunConfig",
    "enumerate_relationships",
    "worst_case_regions",
    "relationship_profile",
    "run_pairing",
    "observed_detectors",
]

MAX_SENDERS = 12


class DomainError(ValueError):
    """An argument is outside an operation's documented domain."""


@dataclass(frozen=True)
class ProtocolParams:
    """Global protocol parameters.

    n        message length in bits
    c        expansion factor of the error-correcting code; the codeword
             length is m = round(c * n)
    delta    minimum relative Hamming distance between distinct codewords
    epsilon  error budget the protocol must stay under
    N        number of senders
    """

    n: int
    c: float
    delta: float
    epsilon: float
    N: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise DomainError(f"c must be positive and finite, got {self.c!r}")
        if not (0.0 < self.delta < 1.0):
            raise DomainError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not isinstance(self.N, int) or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N!r}")
        if self.m < 1:
            raise DomainError(f"round(c*n) = {self.m} gives an empty codeword")
        if self.c <= 1.0:
            # Expansion <= 1 cannot give a distance-delta encoding of n-bit
            # messages; the published operating points use it anyway, so warn
            # instead of refusing.
            warnings.warn(
                f"expansion factor c = {self.c} <= 1: codewords are shorter than "
                "messages, which no distance-preserving code achieves",
                UserWarning,
                stacklevel=2,
            )

    @property
    def m(self) -> int:
        """Codeword length in bits."""
        return int(round(self.c * self.n))


@dataclass(frozen=True)
class ChannelModel:
    """Per-sender transmission and detector imperfections.

    eta         per-sender power transmission, one entry per sender
    dark_count  per-pulse dark-click probability of every detector
    visibility  interference visibility of the splitter network (1 = ideal)
    """

    eta: tuple[float, ...]
    dark_count: float = 0.0
    visibility: float = 1.0

    def __post_init__(self) -> None:
        eta = tuple(float(e) for e in self.eta)
        object.__setattr__(self, "eta", eta)
        if len(eta) < 2:
            raise DomainError("eta needs one entry per sender (>= 2 senders)")
        for e in eta:
            if not (0.0 < e <= 1.0):
                raise DomainError(f"eta entries must lie in (0, 1], got {e!r}")
        if not (0.0 <= self.dark_count < 1.0):
            raise DomainError(f"dark_count must lie in [0, 1), got {self.dark_count!r}")
        if not (0.0 <= self.visibility <= 1.0):
            raise DomainError(f"visibility must lie in [0, 1], got {self.visibility!r}")

    @classmethod
    def from_sqrt_eta(
        cls,
        sqrt_eta: Sequence[float],
        dark_count: float = 0.0,
        visibility: float = 1.0,
    ) -> "ChannelModel":
        """Build from amplitude transmissions (eta = sqrt_eta**2)."""
        for s in sqrt_eta:
            if not (0.0 < float(s) <= 1.0):
                raise DomainError(f"sqrt_eta entries must lie in (0, 1], got {s!r}")
        return cls(tuple(float(s) ** 2 for s in sqrt_eta), dark_count, visibility)

    @property
    def sqrt_eta(self) -> tuple[float, ...]:
        return tuple(math.sqrt(e) for e in self.eta)

    @property
    def n_senders(self) -> int:
        return len(self.eta)

    def symmetric(self) -> bool:
        """True when all senders see the same transmission."""
        return all(e == self.eta[0] for e in self.eta)


class Encoding(str, Enum):
    """Phase encoding of codeword bits onto pulses.

    SINGLE_BIT  one bit per pulse, phases {0, pi}
    TWO_BIT     two bits per pulse, phases {0, pi/2, pi, 3pi/2}; halves the
                pulse count at fixed codeword length (two-party networks only)
    """

    SINGLE_BIT = "single-bit"
    TWO_BIT = "two-bit"

    def pulses(self, m: int) -> int:
        """Pulses per codeword of length m."""
        if m < 1:
            raise DomainError(f"codeword length must be positive, got {m}")
        if self is Encoding.TWO_BIT:
            if m % 2:
                raise DomainError(f"two-bit encoding needs an even codeword length, got {m}")
            return m // 2
        return m


# ---------------------------------------------------------------------------
# relationships (set partitions of senders)
# ---------------------------------------------------------------------------


def _rgs_codes(n: int) -> Iterator[tuple[int, ...]]:
    # Restricted growth strings of length n in lexicographic order: a[0] = 0
    # and a[i] <= max(a[:i]) + 1.  One string per set partition.
    def rec(prefix: list[int], top: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for g in range(top + 2):
            prefix.append(g)
            yield from rec(prefix, max(top, g))
            prefix.pop()

    yield from rec([0], 0)


@dataclass(frozen=True)
class Relationship:
    """A set partition of senders 1..n into equality groups.

    ``groups`` is ordered by first appearance (the group of sender 1 comes
    first), so equal partitions compare equal regardless of how they were
    constructed.
    """

    groups: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for g in self.groups:
            if not g:
                raise DomainError("empty group in relationship")
            if seen & g:
                raise DomainError("groups must be disjoint")
            seen |= g
        n = len(seen)
        if seen != set(range(1, n + 1)):
            raise DomainError(f"groups must cover senders 1..{n} exactly, got {sorted(seen)}")
        firsts = [min(g) for g in self.groups]
        if firsts != sorted(firsts):
            raise DomainError("groups must be ordered by first appearance")

    @classmethod
    def from_label(cls, label: str) -> "Relationship":
        """Parse a letter label like ``"AABC"`` (one letter per sender).

        Any letters are accepted and canonicalized by first appearance, so
        ``"BAAC"`` parses to the same partition as ``"ABBC"``.
        """
        if not label or not label.isalpha():
            raise DomainError(f"relationship label must be non-empty letters, got {label!r}")
        if len(label) > MAX_SENDERS:
            raise DomainError(f"at most {MAX_SENDERS} senders supported, got {len(label)}")
        by_letter: dict[str, list[int]] = {}
        for k, letter in enumerate(label.upper(), start=1):
            by_letter.setdefault(letter, []).append(k)
        groups = sorted((frozenset(v) for v in by_letter.values()), key=min)
        return cls(tuple(groups))

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]]) -> "Relationship":
        return cls(tuple(sorted((frozenset(g) for g in groups), key=min)))

    @property
    def n(self) -> int:
        """Number of senders."""
        return sum(len(g) for g in self.groups)

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def group_sizes(self) -> tuple[int, ...]:
        """Group sizes, largest first."""
        return tuple(sorted((len(g) for g in self.groups), reverse=True))

    def group_of(self, sender: int) -> int:
        """Index (0-based, first-appearance order) of the group holding ``sender``."""
        for i, g in enumerate(self.groups):
            if sender in g:
                return i
        raise DomainError(f"sender {sender} not in relationship over {self.n} senders")

    @property
    def canonical_label(self) -> str:
        """First-appearance letter label (a restricted growth string): AABC etc."""
        return "".join(chr(ord("A") + self.group_of(k)) for k in range(1, self.n + 1))

    @property
    def display_label(self) -> str:
        """Size-ranked letter label: A is the largest group (ties: smallest member).

        This is the labeling convention of the published decision table, where
        e.g. the partition {1}{2,3,4} reads BAAA rather than ABBB.
        """
        order = sorted(range(len(self.groups)), key=lambda i: (-len(self.groups[i]), min(self.groups[i])))
        letter_of_group = {gi: chr(ord("A") + rank) for rank, gi in enumerate(order)}
        return "".join(letter_of_group[self.group_of(k)] for k in range(1, self.n + 1))

    @property
    def all_equal(self) -> bool:
        return self.num_groups == 1

    @property
    def any_equal(self) -> bool:
        """True when at least two senders hold the same message."""
        return any(len(g) >= 2 for g in self.groups)

    def permuted(self, order: Sequence[int]) -> "Relationship":
        """Relationship as seen at the ports when port p holds sender order[p-1].

        ``order`` is a permutation of 1..n; the result's "sender" p is the
        original sender ``order[p-1]``.
        """
        if sorted(order) != list(range(1, self.n + 1)):
            raise DomainError(f"order must permute 1..{self.n}, got {tuple(order)}")
        labels = [self.group_of(s) for s in order]
        by_group: dict[int, list[int]] = {}
        for p, g in enumerate(labels, start=1):
            by_group.setdefault(g, []).append(p)
        return Relationship.from_groups(list(by_group.values()))

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.canonical_label


def enumerate_relationships(n: int) -> list[Relationship]:
    """All set partitions of senders 1..n, in lexicographic label order.

    The count is the n-th Bell number; n is capped to keep the enumeration
    snappy.
    """
    if not isinstance(n, int) or not (2 <= n <= MAX_SENDERS):
        raise DomainError(f"n must be an integer in [2, {MAX_SENDERS}], got {n!r}")
    out = []
    for code in _rgs_codes(n):
        by_group: dict[int, list[int]] = {}
        for k, g in enumerate(code, start=1):
            by_group.setdefault(g, []).append(k)
        out.append(Relationship.from_groups(list(by_group.values())))
    return out


# ---------------------------------------------------------------------------
# worst-case position regions and per-pairing pattern fractions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PatternRegion:
    """A class of codeword positions sharing one joint bit pattern.

    ``bits[k]`` is the bit sender k+1 holds at these positions *relative to
    sender 1's group* (whose bit is 0 by convention); ``weight`` is the
    fraction of the m positions in the class.
    """

    bits: tuple[int, ...]
    weight: float


def worst_case_regions(rel: Relationship, delta: float) -> tuple[PatternRegion, ...]:
    """Minimum-distance worst case for a relationship.

    Every pair of distinct groups must disagree on at least a fraction delta
    of positions; the hardest instance puts each pair exactly at delta.  With
    q = num_groups - 1 non-reference groups, spreading the flips uniformly
    over the 2**q - 1 nonempty subsets T (each subset flipped on a fraction
    delta / 2**(q-1) of positions) achieves exactly that: any two groups
    land on opposite bits in precisely 2**(q-1) of the subsets.  The
    all-agree pattern takes the remaining weight.

    Raises DomainError when the total flipped fraction (2**q - 1) * delta /
    2**(q-1) exceeds 1 (for q = 3 that caps delta at 4/7).
    """
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    n = rel.n
    q = rel.num_groups - 1
    if q == 0:
        return (PatternRegion((0,) * n, 1.0),)
    w = delta / 2 ** (q - 1)
    flipped = (2**q - 1) * w
    if flipped > 1.0 + 1e-12:
        raise DomainError(
            f"delta = {delta} infeasible for {q + 1} groups: total flipped "
            f"fraction {flipped:.6g} > 1"
        )
    group_idx = [rel.group_of(k) for k in range(1, n + 1)]
    regions = []
    for mask in range(1, 2**q):
        bits = tuple((mask >> (group_idx[k] - 1)) & 1 if group_idx[k] else 0 for k in range(n))
        regions.append(PatternRegion(bits, w))
    regions.append(PatternRegion((0,) * n, max(0.0, 1.0 - flipped)))
    return tuple(regions)


@dataclass(frozen=True)
class PatternFractions:
    """Position fractions by joint bit pattern *at the interferometer ports*.

    For four ports (port p holds the sender a pairing assigns to it):

    d12      ports 1 and 2 carry different bits
    d34      ports 3 and 4 carry different bits
    d_single exactly one port differs from the other three
    d_pairs  ports 1,2 agree and ports 3,4 agree, but the pairs differ
    d_total  any mismatch among the ports at all

    For two ports only d12 (= d_total) is meaningful; the rest are zero.
    """

    d12: float
    d34: float
    d_single: float
    d_pairs: float
    d_total: float


def run_pairing(run_index: int, n_senders: int = 4) -> tuple[int, ...]:
    """Port order for the adaptive schedule's runs.

    Sender 1 stays at port 1 (it is the phase/grouping reference).  For four
    senders: run 1 pairs (1,2)(3,4), run 2 pairs (1,3)(2,4), run 3 pairs
    (1,4)(2,3).  Two senders have a single run.
    """
    if n_senders == 2:
        if run_index != 1:
            raise DomainError(f"two senders have a single run, got run {run_index}")
        return (1, 2)
    if n_senders == 4:
        table = {1: (1, 2, 3, 4), 2: (1, 3, 2, 4), 3: (1, 4, 2, 3)}
        if run_index not in table:
            raise DomainError(f"run index must be 1..3, got {run_index}")
        return table[run_index]
    raise DomainError(f"pairing schedule defined for 2 or 4 senders, got {n_senders}")


def observed_detectors(n_senders: int) -> tuple[int, ...]:
    """0-based indices of the detectors the decision rule reads.

    The final-sum detector (index 0) clicks for every relationship and is not
    observed; the difference-port detectors are.
    """
    if n_senders == 2:
        return (1,)
    if n_senders == 4:
        return (1, 2, 3)
    raise DomainError(f"observed detectors defined for 2 or 4 senders, got {n_senders}")


def relationship_profile(
    rel: Relationship, pairing: Sequence[int], delta: float
) -> PatternFractions:
    """Pattern fractions seen at the ports for one relationship and pairing.

    ``pairing[p-1]`` is the sender at port p.  Computed from the worst-case
    regions, so the fractions are exact for the minimum-distance instance.
    """
    n = rel.n
    if n not in (2, 4):
        raise DomainError(f"profiles defined for 2 or 4 senders, got {n}")
    if sorted(pairing) != list(range(1, n + 1)):
        raise DomainError(f"pairing must permute 1..{n}, got {tuple(pairing)}")
    d12 = d34 = d_single = d_pairs = d_total = 0.0
    for region in worst_case_regions(rel, delta):
        v = tuple(region.bits[s - 1] for s in pairing)
        w = region.weight
        if any(v):
            d_total += w
        if n == 2:
            if v[0] != v[1]:
                d12 += w
            continue
        if v[0] != v[1]:
            d12 += w
        if v[2] != v[3]:
            d34 += w
        weight4 = sum(v)
        if weight4 in (1, 3):
            d_single += w
        if v[0] == v[1] and v[2] == v[3] and v[0] != v[2]:
            d_pairs += w
    return PatternFractions(d12, d34, d_single, d_pairs, d_total)


@dataclass(frozen=True)
class RunConfig:
    """One interferometer run: amplitudes, port order, decision thresholds.

    alphas      per-sender coherent amplitudes (sender k uses alphas[k-1])
    pairing     sender at each port, a permutation of 1..N
    thresholds  click-count threshold per *observed* detector
    encoding    phase encoding of the codeword bits
    """

    alphas: tuple[float, ...]
    pairing: tuple[int, ...]
    thresholds: tuple[int, ...]
    encoding: Encoding = Encoding.SINGLE_BIT

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "pairing", tuple(int(p) for p in self.pairing))
        object.__setattr__(self, "thresholds", tuple(int(t) for t in self.thresholds))
        n = len(self.alphas)
        if sorted(self.pairing) != list(range(1, n + 1)):
            raise DomainError(
                f"pairing must permute 1..{n}, got {self.pairing}"
            )
        for a in self.alphas:
            if not (a >= 0.0 and math.isfinite(a)):
                raise DomainError(f"amplitudes must be finite and >= 0, got {a!r}")
        expected = len(observed_detectors(n))
        if len(self.thresholds) != expected:
            raise DomainError(
                f"{n} senders observe {expected} detectors, got "
                f"{len(self.thresholds)} thresholds"
            )
        for t in self.thresholds:
            if t < 0:
                raise DomainError(f"thresholds must be >= 0, got {t}")
        if not isinstance(self.encoding, Encoding):
            raise DomainError(f"encoding must be an Encoding, got {self.encoding!r}")

    @property
    def n_senders(self) -> int:
        return len(self.alphas)

    @property
    def mus(self) -> tuple[float, ...]:
        """Per-sender mean photon numbers (alpha**2)."""
        return tuple(a * a for a in self.alphas)
