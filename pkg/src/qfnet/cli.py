"""Command-line interface.

Subcommands:

    reproduce       audit a bundled benchmark instance (or export one of the
                    bundled reference tables) to CSV
    optimize        run the amplitude/threshold search for a JSON config
    simulate        Monte Carlo campaign for a config and a relationship
    decision-table  export the referee's decision table as CSV

Exit codes: 0 success/feasible, 2 usage or config error, 3 I/O error,
4 optimizer found no feasible point.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from typing import Any, Mapping, Sequence

from . import __version__
from .benchmarks import BENCHMARKS, Benchmark
from .complexity import classical_limit_ae, classical_optimal_ae, q_total
from .core import (
    ChannelModel,
    DomainError,
    Encoding,
    ProtocolParams,
    Relationship,
)
from .decision import (
    decision_table_rows,
    pairwise_run_count,
    relationship_by_f_r,
    run_budget,
)
from .montecarlo import TrialSpec, simulate
from .optimizer import OptimizationProblem, evaluate_fixed, optimize

__all__ = ["main", "build_parser", "ConfigError", "load_config"]


class ConfigError(Exception):
    """Configuration document rejected; message names the offending field."""


# ---------------------------------------------------------------------------
# config ingestion
# ---------------------------------------------------------------------------

_SECTION_KEYS: Mapping[str, set[str]] = {
    "protocol": {"n", "c", "delta", "epsilon", "N"},
    "channel": {"sqrt_eta", "eta", "dark_count", "visibility"},
    "encoding": {"variant"},
    "optimizer": {"bounds", "grid"},
    "montecarlo": {"m", "trials", "seed"},
}
_TOP_KEYS = {"schema_version"} | set(_SECTION_KEYS)


def load_config(path: str) -> dict:
    """Load and structurally validate a configuration document."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    if doc.get("schema_version") != 1:
        raise ConfigError(f"schema_version must be 1, got {doc.get('schema_version')!r}")
    for section, keys in _SECTION_KEYS.items():
        if section in doc:
            if not isinstance(doc[section], dict):
                raise ConfigError(f"section {section!r} must be an object")
            unknown = set(doc[section]) - keys
            if unknown:
                raise ConfigError(f"unknown keys in {section!r}: {sorted(unknown)}")
    for section in ("protocol", "channel"):
        if section not in doc:
            raise ConfigError(f"missing required section {section!r}")
    return doc


def _require(section: Mapping[str, Any], name: str, key: str) -> Any:
    if key not in section:
        raise ConfigError(f"missing field {name}.{key}")
    return section[key]


def build_protocol(doc: Mapping[str, Any]) -> ProtocolParams:
    sec = doc["protocol"]
    try:
        return ProtocolParams(
            n=int(_require(sec, "protocol", "n")),
            c=float(_require(sec, "protocol", "c")),
            delta=float(_require(sec, "protocol", "delta")),
            epsilon=float(_require(sec, "protocol", "epsilon")),
            N=int(_require(sec, "protocol", "N")),
        )
    except DomainError as exc:
        raise ConfigError(f"protocol: {exc}") from exc


def build_channel(doc: Mapping[str, Any], n_senders: int) -> ChannelModel:
    sec = doc["channel"]
    if ("sqrt_eta" in sec) == ("eta" in sec):
        raise ConfigError("channel: provide exactly one of 'sqrt_eta' or 'eta'")
    dark = float(sec.get("dark_count", 0.0))
    vis = float(sec.get("visibility", 1.0))
    try:
        if "sqrt_eta" in sec:
            ch = ChannelModel.from_sqrt_eta(
                [float(x) for x in sec["sqrt_eta"]], dark, vis
            )
        else:
            ch = ChannelModel(tuple(float(x) for x in sec["eta"]), dark, vis)
    except (DomainError, TypeError) as exc:
        raise ConfigError(f"channel: {exc}") from exc
    if ch.n_senders != n_senders:
        raise ConfigError(
            f"channel: {ch.n_senders} transmissions for protocol.N = {n_senders}"
        )
    return ch


def build_encoding(doc: Mapping[str, Any]) -> Encoding:
    variant = doc.get("encoding", {}).get("variant", Encoding.SINGLE_BIT.value)
    try:
        return Encoding(variant)
    except ValueError as exc:
        raise ConfigError(
            f"encoding.variant must be one of {[e.value for e in Encoding]}, got {variant!r}"
        ) from exc


def build_problem(doc: Mapping[str, Any], target: str) -> OptimizationProblem:
    pp = build_protocol(doc)
    ch = build_channel(doc, pp.N)
    enc = build_encoding(doc)
    opt = doc.get("optimizer", {})
    bounds = opt.get("bounds", [1.0, 32768.0])
    if not (isinstance(bounds, (list, tuple)) and len(bounds) == 2):
        raise ConfigError(f"optimizer.bounds must be [lo, hi], got {bounds!r}")
    grid = float(opt.get("grid", 1e-3))
    runs = 1 if target == "ae" else None
    try:
        return OptimizationProblem(
            pp=pp,
            ch=ch,
            encoding=enc,
            runs=runs,
            bounds=(float(bounds[0]), float(bounds[1])),
            grid=grid,
        )
    except DomainError as exc:
        raise ConfigError(f"optimizer: {exc}") from exc


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(value: Any) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _config_hash(payload: Any) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _write_csv(
    path: str | None,
    comment_lines: Sequence[str],
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
) -> None:
    buf = io.StringIO()
    for line in comment_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    _write_text(path, buf.getvalue())


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _meta(subject: str, payload: Any) -> list[str]:
    return [f"qfnet {__version__}", subject, f"config_hash: {_config_hash(payload)}"]


def _benchmark_payload(bench: Benchmark) -> dict:
    return {
        "table": bench.table_id,
        "protocol": {
            "n": bench.pp.n,
            "c": bench.pp.c,
            "delta": bench.pp.delta,
            "epsilon": bench.pp.epsilon,
            "N": bench.pp.N,
        },
        "channel": {
            "eta": list(bench.ch.eta),
            "dark_count": bench.ch.dark_count,
            "visibility": bench.ch.visibility,
        },
        "encoding": bench.encoding.value,
        "runs": [
            {
                "alphas": list(rc.alphas),
                "pairing": list(rc.pairing),
                "thresholds": list(rc.thresholds),
            }
            for rc in bench.runs
        ],
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_reproduce(args: argparse.Namespace) -> int:
    table_id = args.table
    if table_id == "TE1":
        rows = decision_table_rows(3)
        _write_csv(
            args.out,
            _meta("table: TE1 (three-party decision table)", "TE1"),
            ["relationship", "canonical", "device_pattern", "r1", "f_r"],
            [
                [r["relationship"], r["canonical"], r["device_pattern"], r["r1"], r["f_r"]]
                for r in rows
            ],
        )
        return 0
    if table_id == "TC1":
        out_rows = []
        for f_r in range(14, -1, -1):
            rel = relationship_by_f_r(f_r)
            t_t, t_m = pairwise_run_count(rel)
            out_rows.append([rel.display_label, rel.canonical_label, t_t, t_m])
        _write_csv(
            args.out,
            _meta("table: TC1 (pairwise vs multi-party run counts)", "TC1"),
            ["relationship", "canonical", "t_pairwise", "t_multiparty"],
            out_rows,
        )
        return 0
    if table_id == "TV":
        n = 4
        out_rows = [
            ["MultiParty", "AE", "1", run_budget(n, "AE", "MultiParty")],
            ["TwoPartyPairwise", "AE", "N-1", run_budget(n, "AE", "TwoPartyPairwise")],
            ["MultiParty", "R", "N-1", run_budget(n, "R", "MultiParty")],
            ["TwoPartyPairwise", "R", "N(N-1)/2", run_budget(n, "R", "TwoPartyPairwise")],
        ]
        _write_csv(
            args.out,
            _meta("table: TV (worst-case run budgets, evaluated at N=4)", "TV"),
            ["scheme", "target", "runs_formula", "runs_at_N4"],
            out_rows,
        )
        return 0

    bench = BENCHMARKS[table_id]
    problem = OptimizationProblem(
        pp=bench.pp, ch=bench.ch, encoding=bench.encoding, runs=len(bench.runs)
    )
    audited = evaluate_fixed(bench.runs, problem)
    optimized = optimize(problem)
    rows: list[list[Any]] = []

    def rel_diff(a: float, b: float) -> float:
        return abs(a - b) / abs(b)

    rows.append(
        [
            "q_r",
            bench.reported["q_r"],
            audited.q_r,
            optimized.q_r,
            rel_diff(audited.q_r, bench.reported["q_r"]),
            "",
        ]
    )
    if "q_r_first_run" in bench.reported:
        first_q = q_total(bench.runs[:1], bench.pp.n)
        opt_first = q_total(optimized.per_run[:1], bench.pp.n)
        rows.append(
            [
                "q_r_first_run",
                bench.reported["q_r_first_run"],
                first_q,
                opt_first,
                rel_diff(first_q, bench.reported["q_r_first_run"]),
                "",
            ]
        )
    rows.append(
        ["p_e_published_params", bench.pp.epsilon, audited.p_e, "", "", audited.feasible]
    )
    rows.append(
        ["p_e_optimized", bench.pp.epsilon, "", optimized.p_e, "", optimized.feasible]
    )
    c_o = classical_optimal_ae(bench.pp.n, bench.pp.N, bench.pp.epsilon)
    c_l = classical_limit_ae(bench.pp.n, bench.pp.N, bench.pp.epsilon)
    rows.append(
        ["c_o_ae", bench.reported["c_o_ae"], c_o, "", rel_diff(c_o, bench.reported["c_o_ae"]), ""]
    )
    rows.append(
        ["c_l_ae", bench.reported["c_l_ae"], c_l, "", rel_diff(c_l, bench.reported["c_l_ae"]), ""]
    )
    _write_csv(
        args.out,
        _meta(f"table: {table_id} ({bench.description})", _benchmark_payload(bench)),
        ["quantity", "paper_value", "audited_value", "optimized_value", "relative_difference", "feasible"],
        rows,
    )
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    doc = load_config(args.config)
    problem = build_problem(doc, args.target)
    result = optimize(problem)
    payload = {
        "meta": {
            "tool": f"qfnet {__version__}",
            "config_hash": _config_hash(doc),
            "target": args.target,
        },
        "result": result.to_jsonable(),
    }
    _write_text(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if args.out:
        print(f"wrote {args.out} (feasible={result.feasible}, q_r={_fmt(result.q_r)})")
    return 0 if result.feasible else 4


def cmd_simulate(args: argparse.Namespace) -> int:
    doc = load_config(args.config)
    if "montecarlo" not in doc:
        raise ConfigError("missing required section 'montecarlo'")
    mc = doc["montecarlo"]
    m = int(_require(mc, "montecarlo", "m"))
    trials = int(_require(mc, "montecarlo", "trials"))
    seed = int(_require(mc, "montecarlo", "seed"))
    problem = build_problem(doc, "r")
    if m != problem.pp.m:
        raise ConfigError(
            f"montecarlo.m = {m} but protocol gives m = round(c*n) = {problem.pp.m}"
        )
    try:
        rel = Relationship.from_label(args.relationship)
    except DomainError as exc:
        raise ConfigError(f"relationship: {exc}") from exc
    if rel.n != problem.pp.N:
        raise ConfigError(
            f"relationship {args.relationship!r} names {rel.n} senders, protocol.N = {problem.pp.N}"
        )
    optimized = optimize(problem)
    if not optimized.feasible:
        print(
            f"no feasible operating point within bounds (best p_e = {_fmt(optimized.p_e)})",
            file=sys.stderr,
        )
        return 4
    spec = TrialSpec(
        rel=rel,
        pp=problem.pp,
        ch=problem.ch,
        runs=optimized.per_run,
        trials=trials,
        seed=seed,
    )
    report = simulate(spec)
    payload = {
        "meta": {
            "tool": f"qfnet {__version__}",
            "config_hash": _config_hash(doc),
            "relationship": rel.canonical_label,
            "operating_point": optimized.to_jsonable(),
        },
        "report": report.to_jsonable(),
    }
    _write_text(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    lo, hi = report.wilson_95
    print(
        f"correct rate {report.empirical_correct_rate:.6f} "
        f"(95% Wilson interval [{lo:.6f}, {hi:.6f}]) over {report.trials} trials"
    )
    return 0


def cmd_decision_table(args: argparse.Namespace) -> int:
    rows = decision_table_rows(args.n)
    if args.n == 4:
        header = ["relationship", "canonical", "r1", "r2", "r3", "f_r"]
    else:
        header = ["relationship", "canonical", "device_pattern", "r1", "f_r"]
    _write_csv(
        args.out,
        _meta(f"decision table for {args.n} senders", {"n": args.n}),
        header,
        [[row[k] for k in header] for row in rows],
    )
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfnet",
        description="Fingerprinting-network simulator and optimization toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rep = sub.add_parser("reproduce", help="audit a bundled benchmark instance")
    p_rep.add_argument(
        "table",
        choices=sorted(BENCHMARKS) + ["TE1", "TC1", "TV"],
        help="bundled instance or reference table",
    )
    p_rep.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p_rep.set_defaults(func=cmd_reproduce)

    p_opt = sub.add_parser("optimize", help="search amplitudes/thresholds for a config")
    p_opt.add_argument("config", help="JSON configuration document")
    p_opt.add_argument("--target", choices=["ae", "r"], default="r")
    p_opt.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p_opt.set_defaults(func=cmd_optimize)

    p_sim = sub.add_parser("simulate", help="Monte Carlo campaign for a config")
    p_sim.add_argument("config", help="JSON configuration document")
    p_sim.add_argument("--relationship", required=True, help="ground-truth label, e.g. AABC")
    p_sim.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p_sim.set_defaults(func=cmd_simulate)

    p_dec = sub.add_parser("decision-table", help="export the referee decision table")
    p_dec.add_argument("--n", type=int, choices=[3, 4], default=4)
    p_dec.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p_dec.set_defaults(func=cmd_decision_table)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
