"""Referee decision logic.

Per run the referee thresholds the observed detector counts into outcome
bits (0 = count below threshold).  For four senders the observed detectors
are D2 (compares ports 1,2), D3 (compares the port pairs) and D4 (ports
3,4); an adaptive schedule swaps which senders sit at which ports between
runs, and the outcome-bit sequence indexes a lookup table that pins down the
full relationship f_R.  Three-party instances reuse the four-port device
with sender 1 duplicated on port 4.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import (
    DomainError,
    Relationship,
    relationship_profile,
    run_pairing,
)

__all__ = [
    "RunOutcome",
    "DecisionOutcome",
    "NeedMoreRuns",
    "InconsistentOutcome",
    "MODE_REFERENCE",
    "MODE_SUM",
    "MODE_TWO_DETECTOR",
    "ABCD_SIGNATURES",
    "outcome_bits",
    "resolve_f_r",
    "resolve_f_ae",
    "resolve_three_party",
    "run_budget",
    "pairwise_run_count",
    "forward_bits",
    "forward_signature",
    "relationship_by_f_r",
    "decision_table_rows",
]


class InconsistentOutcome(Exception):
    """Outcome sequence matches no row of the decision table.

    Signals a model violation or error budget blown by noise — deliberately
    an error rather than a nearest-row guess.
    """

    def __init__(self, outcomes: Sequence[str]):
        super().__init__(f"outcome sequence {list(outcomes)} matches no decision row")
        self.outcomes = tuple(outcomes)


@dataclass(frozen=True)
class RunOutcome:
    """Threshold outcome bits of one run, one bit per observed detector."""

    bits: str

    def __post_init__(self) -> None:
        if not self.bits or any(b not in "01" for b in self.bits):
            raise DomainError(f"outcome bits must be a non-empty 0/1 string, got {self.bits!r}")


@dataclass(frozen=True)
class DecisionOutcome:
    """Resolved relationship with its label and the coarser predicates.

    f_r counts down from 14 (all equal) to 0 (all distinct) for four
    senders, and from 4 to 0 for three.
    """

    f_r: int
    relationship: Relationship
    runs_used: int
    f_ae: bool
    f_ee: bool


@dataclass(frozen=True)
class NeedMoreRuns:
    """The outcome prefix is ambiguous; run again with ``next_pairing``."""

    next_pairing: tuple[int, ...]


MODE_REFERENCE = "ReferenceDetector"
MODE_SUM = "SumDetectors"
MODE_TWO_DETECTOR = "TwoDetector"


def outcome_bits(counts: Sequence[int], thresholds: Sequence[int]) -> RunOutcome:
    """Threshold counts into bits: 0 iff count < threshold."""
    if len(counts) != len(thresholds) or not counts:
        raise DomainError(
            f"counts and thresholds must have equal nonzero length, got "
            f"{len(counts)} and {len(thresholds)}"
        )
    for c in counts:
        if c < 0:
            raise DomainError(f"counts must be >= 0, got {c}")
    return RunOutcome("".join("0" if c < t else "1" for c, t in zip(counts, thresholds)))


# Relationship label by f_R value (canonical first-appearance labels; e.g. the
# published table's BAAA/BAAC/BACA/BCAA rows are ABBB/ABBC/ABCB/ABCC here).
_LABEL_BY_FR: Mapping[int, str] = {
    14: "AAAA",
    13: "AAAB",
    12: "AABA",
    11: "ABAA",
    10: "ABBB",
    9: "AABB",
    8: "ABAB",
    7: "ABBA",
    6: "AABC",
    5: "ABAC",
    4: "ABCA",
    3: "ABBC",
    2: "ABCB",
    1: "ABCC",
    0: "ABCD",
}

# Outcome-sequence trie: leaves are f_R values, internal nodes map the next
# run's bits.  Built from the published table and validated by the forward
# model in tests.
_TABLE: Mapping[str, object] = {
    "000": 14,
    "010": 9,
    "011": {"011": 13, "110": 12, "111": 6},
    "110": {"011": 11, "110": 10, "111": 1},
    "101": {"010": 8, "101": 7, "111": 0},
    "111": {
        "011": 5,
        "110": 2,
        "101": 0,
        "111": {"011": 4, "110": 3, "101": 0, "111": 0},
    },
}

# The four outcome sequences that identify the all-distinct relationship.
ABCD_SIGNATURES: tuple[tuple[str, ...], ...] = (
    ("101", "111"),
    ("111", "101"),
    ("111", "111", "101"),
    ("111", "111", "111"),
)


def relationship_by_f_r(f_r: int) -> Relationship:
    """The four-party relationship a decision label denotes (14 down to 0)."""
    if f_r not in _LABEL_BY_FR:
        raise DomainError(f"f_r must lie in [0, 14], got {f_r}")
    return Relationship.from_label(_LABEL_BY_FR[f_r])


def _decision(f_r: int, runs_used: int) -> DecisionOutcome:
    rel = Relationship.from_label(_LABEL_BY_FR[f_r])
    return DecisionOutcome(
        f_r=f_r,
        relationship=rel,
        runs_used=runs_used,
        f_ae=rel.all_equal,
        f_ee=rel.any_equal,
    )


def _as_bits(outcome: RunOutcome | str, width: int) -> str:
    bits = outcome.bits if isinstance(outcome, RunOutcome) else str(outcome)
    if len(bits) != width or any(b not in "01" for b in bits):
        raise DomainError(f"expected {width} outcome bits, got {bits!r}")
    return bits


def resolve_f_r(
    outcomes: Sequence[RunOutcome | str],
) -> DecisionOutcome | NeedMoreRuns:
    """Resolve a four-party outcome sequence against the decision table.

    Returns NeedMoreRuns(next_pairing) when the prefix is ambiguous, the
    DecisionOutcome when it identifies a relationship, and raises
    InconsistentOutcome when it matches no row.
    """
    if not outcomes:
        return NeedMoreRuns(run_pairing(1, 4))
    seq = [_as_bits(o, 3) for o in outcomes]
    node: object = _TABLE
    for bits in seq:
        if not isinstance(node, Mapping):
            raise InconsistentOutcome(seq)  # longer than any table row
        node = node.get(bits)
        if node is None:
            raise InconsistentOutcome(seq)
    if isinstance(node, Mapping):
        if len(seq) >= 3:
            raise InconsistentOutcome(seq)
        return NeedMoreRuns(run_pairing(len(seq) + 1, 4))
    return _decision(int(node), len(seq))


def resolve_three_party(outcome: RunOutcome | str) -> DecisionOutcome:
    """Resolve a one-run three-party outcome (sender 1 duplicated at port 4)."""
    bits = _as_bits(outcome, 3)
    table = {"000": 4, "011": 3, "110": 2, "101": 1, "111": 0}
    labels = {4: "AAA", 3: "AAB", 2: "ABA", 1: "ABB", 0: "ABC"}
    if bits not in table:
        raise InconsistentOutcome([bits])
    f_r = table[bits]
    rel = Relationship.from_label(labels[f_r])
    return DecisionOutcome(f_r, rel, 1, rel.all_equal, rel.any_equal)


def resolve_f_ae(
    counts: Sequence[int], thresholds: Sequence[int], mode: str
) -> bool:
    """One-run all-equal decision under one of the three published rules.

    ReferenceDetector: equal iff the constructive-port count reaches its
    threshold.  SumDetectors: equal iff the non-reference counts sum below a
    single threshold.  TwoDetector: equal iff both observed counts are below
    their thresholds.
    """
    if any(c < 0 for c in counts):
        raise DomainError("counts must be >= 0")
    if mode == MODE_REFERENCE:
        if len(counts) != 1 or len(thresholds) != 1:
            raise DomainError("ReferenceDetector mode takes one count and one threshold")
        return counts[0] >= thresholds[0]
    if mode == MODE_SUM:
        if len(thresholds) != 1 or not counts:
            raise DomainError("SumDetectors mode takes the non-reference counts and one threshold")
        return sum(counts) < thresholds[0]
    if mode == MODE_TWO_DETECTOR:
        if len(counts) != 2 or len(thresholds) != 2:
            raise DomainError("TwoDetector mode takes two counts and two thresholds")
        return all(c < t for c, t in zip(counts, thresholds))
    raise DomainError(f"unknown mode {mode!r}")


def run_budget(N: int, target: str, scheme: str) -> int:
    """Worst-case number of runs budgeted for a scheme/target combination."""
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if target not in ("AE", "R"):
        raise DomainError(f"target must be 'AE' or 'R', got {target!r}")
    if scheme == "MultiParty":
        if N & (N - 1):
            raise DomainError(f"multi-party scheme needs N a power of two, got {N}")
        return 1 if target == "AE" else N - 1
    if scheme == "TwoPartyPairwise":
        return N - 1 if target == "AE" else N * (N - 1) // 2
    raise DomainError(f"unknown scheme {scheme!r}")


def forward_bits(rel: Relationship, pairing: Sequence[int]) -> str:
    """Ideal noiseless outcome bits of one run for a known relationship.

    A difference-tap detector clicks (bit 1) exactly when the positions it
    can see contain any mismatch: D2 on ports 1,2; D4 on ports 3,4; D3 on
    any pattern that splits the two pairs or a single port.
    """
    # delta's actual value cancels in the > 0 tests; any feasible one works.
    fr = relationship_profile(rel, pairing, 0.5)
    tol = 1e-12
    return "".join(
        "1" if frac > tol else "0"
        for frac in (fr.d12, fr.d_single + fr.d_pairs, fr.d34)
    )


def forward_signature(rel: Relationship) -> tuple[str, ...]:
    """Outcome-bit sequence the adaptive schedule produces for a relationship."""
    if rel.n != 4:
        raise DomainError(f"forward signatures defined for 4 senders, got {rel.n}")
    outcomes: list[str] = []
    while True:
        outcomes.append(forward_bits(rel, run_pairing(len(outcomes) + 1, 4)))
        resolved = resolve_f_r(outcomes)
        if isinstance(resolved, DecisionOutcome):
            if resolved.relationship != rel:
                raise AssertionError(
                    f"table/forward mismatch: {rel.canonical_label} resolved as "
                    f"{resolved.relationship.canonical_label}"
                )
            return tuple(outcomes)


def pairwise_run_count(rel: Relationship) -> tuple[int, int]:
    """Runs needed to pin down a four-party relationship: (two-party, multi-party).

    The two-party scheme compares pairs in the order (1,2), (1,3), (1,4),
    (2,3), (2,4), (3,4) and skips any comparison whose result is already
    implied by transitivity over earlier results (equalities merge senders;
    an inequality between members extends to their whole groups).  The
    multi-party count is what the adaptive schedule uses.
    """
    if rel.n != 4:
        raise DomainError(f"run counts defined for 4 senders, got {rel.n}")
    parent = list(range(5))  # union-find over senders 1..4

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    unequal: set[frozenset[int]] = set()
    t_t = 0
    for a, b in ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)):
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        if frozenset((ra, rb)) in unequal:
            continue
        t_t += 1
        if rel.group_of(a) == rel.group_of(b):
            parent[rb] = ra
            unequal = {frozenset(find(x) for x in pair) for pair in unequal}
        else:
            unequal.add(frozenset((ra, rb)))
    return t_t, len(forward_signature(rel))


def decision_table_rows(n_senders: int) -> list[dict[str, object]]:
    """Exportable decision table.

    For four senders: one row per outcome signature — 14 uniquely-signed
    relationships plus the four signatures of the all-distinct one.  For
    three senders: the 5-row single-run table with the port pattern fed to
    the four-port device.
    """
    if n_senders == 4:
        rows = []
        for f_r in sorted(_LABEL_BY_FR, reverse=True):
            rel = Relationship.from_label(_LABEL_BY_FR[f_r])
            signatures = [forward_signature(rel)] if f_r else list(ABCD_SIGNATURES)
            for sig in signatures:
                padded = list(sig) + [""] * (3 - len(sig))
                rows.append(
                    {
                        "relationship": rel.display_label,
                        "canonical": rel.canonical_label,
                        "r1": padded[0],
                        "r2": padded[1],
                        "r3": padded[2],
                        "f_r": f_r,
                    }
                )
        return rows
    if n_senders == 3:
        rows = []
        for bits in ("000", "011", "110", "101", "111"):
            out = resolve_three_party(bits)
            rel3 = out.relationship
            # pattern actually interfered: senders (1, 2, 3, 1) at the ports,
            # lettered by group size like the relationship column
            disp = rel3.display_label
            fed = "".join(disp[s - 1] for s in (1, 2, 3, 1))
            rows.append(
                {
                    "relationship": rel3.display_label,
                    "canonical": rel3.canonical_label,
                    "device_pattern": fed,
                    "r1": bits,
                    "f_r": out.f_r,
                }
            )
        return rows
    raise DomainError(f"decision tables defined for 3 or 4 senders, got {n_senders}")
