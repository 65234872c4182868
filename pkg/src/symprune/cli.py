"""Command-line front end: ``symprune solve|classes|verify|problem``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import List, Optional, Sequence, TextIO, Tuple

from . import codes
from .csym import NotACube, OutOfRange, csym1
from .interval import Box
from .problems import ProblemParseError, cyclic_n_roots, emit_problem, example_sphere, parse_problem
from .solver import BudgetExceeded, SolutionSet, SolverConfig, branch_and_prune
from .symmetry import find_symmetry_violation

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_A_CUBE = 2
EXIT_BUDGET = 3
EXIT_ASYMMETRIC = 4

MAX_COUNT_N = 64
MAX_GEN_N = 30

BoxRow = Tuple[List[float], List[float], Optional[int], int]


# ---------------------------------------------------------------------------
# run records
# ---------------------------------------------------------------------------


@dataclass
class RunRecord:
    """Everything a solve produced, reloadable without losing a bit."""

    mode: str
    config: dict
    stats: dict
    boxes: List[BoxRow] = field(default_factory=list)
    complete: bool = True

    def to_json(self) -> str:
        data = asdict(self)
        data["boxes"] = [
            {"lo": [v.hex() for v in lo], "hi": [v.hex() for v in hi], "rep": rep, "shift": shift}
            for lo, hi, rep, shift in self.boxes
        ]
        return json.dumps(data, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        data = json.loads(text)
        data["boxes"] = [
            ([float.fromhex(v) for v in b["lo"]], [float.fromhex(v) for v in b["hi"]], b["rep"], b["shift"])
            for b in data["boxes"]
        ]
        return cls(**data)

    def solution_boxes(self) -> List[Box]:
        return [Box.from_bounds(lo, hi) for lo, hi, _, _ in self.boxes]


def _rows(solutions: SolutionSet) -> List[BoxRow]:
    return [(list(b.lo), list(b.hi), prov.representative, prov.shift) for b, prov in solutions.boxes]


def format_float(v: float, hex_floats: bool) -> str:
    return v.hex() if hex_floats else repr(v)


def write_boxes(out: TextIO, rows: Sequence[BoxRow], hex_floats: bool = False, partial: bool = False) -> None:
    """Tab-separated ``lo_1 hi_1 ... lo_n hi_n rep shift``, one box per line."""
    if partial:
        out.write("# partial: box budget exceeded\n")
    for lo, hi, rep, shift in rows:
        cols = []
        for a, b in zip(lo, hi):
            cols.append(format_float(a, hex_floats))
            cols.append(format_float(b, hex_floats))
        cols.append("-" if rep is None else str(rep))
        cols.append(str(shift))
        out.write("\t".join(cols) + "\n")


def read_boxes(text: str) -> List[BoxRow]:
    rows = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        vals = [float.fromhex(c) if "0x" in c else float(c) for c in cols[:-2]]
        rep = None if cols[-2] == "-" else int(cols[-2])
        rows.append((vals[0::2], vals[1::2], rep, int(cols[-1])))
    return rows


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def stats_report(record: RunRecord, source: str, report=None) -> str:
    lines = [
        f"timestamp: {datetime.now(timezone.utc).isoformat(timespec='seconds')}",
        f"problem: {source}",
        f"mode: {record.mode}",
        f"status: {'complete' if record.complete else 'partial (box budget exceeded)'}",
    ]
    lines += [f"{k}: {v}" for k, v in sorted(record.config.items())]
    st = record.stats
    lines += [
        f"processed_boxes: {st['boxes_processed']}",
        f"rejected_boxes: {st['boxes_rejected']}",
        f"solution_boxes: {st['solution_boxes']}",
        f"total_solution_boxes: {len(record.boxes)}",
        f"time_s: {st['wall_time']:.3f}",
    ]
    if report is not None:
        lines += [
            f"cycle_length: {report.cycle_length}",
            f"bisection_point: {report.bisection_point!r}",
            f"representatives_solved: {report.representatives_solved}",
            f"total_subboxes: {report.total_subboxes}",
            f"fraction_processed: {report.fraction_processed}",
            f"ifdp: {codes.ifdp_fraction(report.cycle_length)} ({report.ifdp:.4f})",
            f"expansion_factor: {report.expansion_factor:.4f}",
        ]
        for i, r in enumerate(report.per_representative):
            lines.append(
                f"rep.{i}: code={r.code.text()} period={r.period} "
                f"processed={r.stats.boxes_processed} rejected={r.stats.boxes_rejected} "
                f"solutions={r.n_solutions} expanded={r.n_expanded}"
            )
    return "\n".join(lines) + "\n"


def _bisection_policy(text: str):
    if text == "midpoint":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'midpoint' or a number, got {text!r}")


def _open_out(path: Optional[str], default: TextIO):
    return open(path, "w", encoding="utf-8") if path else default


def cmd_solve(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            problem = parse_problem(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ProblemParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = SolverConfig(epsilon=args.epsilon, max_boxes=args.max_boxes)
    use_symmetry = not args.no_symmetry and problem.symmetry is not None
    mode = "csym" if use_symmetry else "plain"
    config = {"epsilon": cfg.epsilon, "max_boxes": cfg.max_boxes,
              "contraction_rounds": cfg.contraction_rounds}
    if use_symmetry:
        config["bisection"] = args.bisection
        config["parallel"] = args.parallel
    report = None
    complete = True
    try:
        if use_symmetry:
            solutions, report = csym1(problem, cfg, args.bisection, args.parallel)
            stats = report.totals
        else:
            solutions, stats = branch_and_prune(problem, cfg=cfg)
    except NotACube as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_A_CUBE
    except OutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"warning: {exc}", file=sys.stderr)
        complete = False
        solutions = exc.solutions or SolutionSet()
        if use_symmetry:
            report = exc.stats
            stats = report.totals
        else:
            stats = exc.stats
    record = RunRecord(mode, config, asdict(stats), _rows(solutions), complete)

    out = _open_out(args.output, sys.stdout)
    try:
        write_boxes(out, record.boxes, args.hex_floats, partial=not complete)
    finally:
        if out is not sys.stdout:
            out.close()
    st = _open_out(args.stats, sys.stderr)
    try:
        st.write(stats_report(record, args.file, report))
    finally:
        if st is not sys.stderr:
            st.close()
    if args.record:
        with open(args.record, "w", encoding="utf-8") as fh:
            fh.write(record.to_json())
    return EXIT_OK if complete else EXIT_BUDGET


# ---------------------------------------------------------------------------
# classes
# ---------------------------------------------------------------------------


def cmd_classes_gen(args) -> int:
    n, m = args.n, args.m
    if not 1 <= n <= MAX_GEN_N:
        print(f"error: n must be in 1..{MAX_GEN_N}", file=sys.stderr)
        return EXIT_INPUT
    if m is not None and not 0 <= m <= n:
        print(f"error: m must be in 0..{n}", file=sys.stderr)
        return EXIT_INPUT
    out = sys.stdout
    for entry in codes.iter_sr(n):
        if m is not None and entry.code.m != m:
            continue
        if args.full_period and entry.period != n:
            continue
        out.write(f"{entry.code.text()}\t{codes.code_to_binary(entry.code)}\t{entry.period}\n")
    return EXIT_OK


def class_counts(n: int) -> dict:
    ratio = codes.ifdp_fraction(n)
    return {
        "n": n,
        "N": codes.count_n(n),
        "FP": codes.count_fp(n),
        "IFDP": float(ratio),
        "IFDP_exact": str(ratio),
        "by_period": {str(p): codes.count_np(n, p) for p in codes.divisors(n)},
        "by_popcount": {
            str(m): {"N": codes.count_n_nm(n, m), "FP": codes.count_fp_nm(n, m)} for m in range(n + 1)
        },
    }


def cmd_classes_count(args) -> int:
    n = args.n
    if not 1 <= n <= MAX_COUNT_N:
        print(f"error: n must be in 1..{MAX_COUNT_N}", file=sys.stderr)
        return EXIT_INPUT
    data = class_counts(n)
    if args.json:
        print(json.dumps(data, indent=1))
        return EXIT_OK
    print(f"n: {n}")
    print(f"N: {data['N']}")
    print(f"FP: {data['FP']}")
    print(f"IFDP: {data['IFDP']:.4f} ({data['IFDP_exact']})")
    print("period\tclasses")
    for p, c in data["by_period"].items():
        print(f"{p}\t{c}")
    print("ones\tclasses\tfull_period")
    for m, row in data["by_popcount"].items():
        print(f"{m}\t{row['N']}\t{row['FP']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify / problem
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            problem = parse_problem(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ProblemParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if problem.symmetry is None:
        print("error: cycle required", file=sys.stderr)
        return EXIT_INPUT
    if problem.sigma is None:
        print("error: sigma required", file=sys.stderr)
        return EXIT_INPUT
    bad = find_symmetry_violation(problem, problem.symmetry, problem.sigma, args.samples)
    if bad is None:
        print("OK")
        return EXIT_OK
    index, point = bad
    where = "constraint ranges differ" if point is None else "at x = " + ", ".join(map(repr, point))
    print(f"FAIL constraint {index + 1}: {where}")
    return EXIT_ASYMMETRIC


def cmd_problem(args) -> int:
    if args.kind == "sphere":
        p = example_sphere()
    else:
        if args.n < 2:
            print("error: n must be >= 2", file=sys.stderr)
            return EXIT_INPUT
        p = cyclic_n_roots(args.n, tuple(args.domain) if args.domain else None)
    sys.stdout.write(emit_problem(p))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symprune", description="Interval constraint solving with cycle symmetries.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a problem file")
    s.add_argument("file")
    s.add_argument("--no-symmetry", action="store_true", help="solve the whole box without class splitting")
    s.add_argument("--epsilon", type=float, default=SolverConfig.epsilon)
    s.add_argument("--max-boxes", type=int, default=SolverConfig.max_boxes)
    s.add_argument("--bisection", type=_bisection_policy, default="midpoint")
    s.add_argument("--parallel", type=int, default=1, metavar="N")
    s.add_argument("--hex-floats", action="store_true")
    s.add_argument("-o", "--output", help="box file (default stdout)")
    s.add_argument("--stats", help="stats report file (default stderr)")
    s.add_argument("--record", help="write a JSON run record here")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("classes", help="generate or count subbox classes")
    csub = c.add_subparsers(dest="action", required=True)
    g = csub.add_parser("gen")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int)
    g.add_argument("--full-period", action="store_true")
    g.set_defaults(func=cmd_classes_gen)
    k = csub.add_parser("count")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--json", action="store_true")
    k.set_defaults(func=cmd_classes_count)

    v = sub.add_parser("verify", help="check a declared cycle symmetry")
    v.add_argument("file")
    v.add_argument("--samples", type=int, default=100)
    v.set_defaults(func=cmd_verify)

    p = sub.add_parser("problem", help="print a built-in problem file")
    p.add_argument("kind", choices=["cyclic", "sphere"])
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--domain", type=float, nargs=2, metavar=("LO", "HI"))
    p.set_defaults(func=cmd_problem)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
