"""``oneway`` command-line interface."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from oneway import formats, runtime
from oneway.circuit import CircuitError
from oneway.compiler import CompileError, compile, embed_rectangular
from oneway.config import DEFAULT, SimConfig
from oneway.qsim import SizeLimitError
from oneway.scheduler import ConeError, ScheduleError, build_schedule, check_schedule

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_COMPILE, EXIT_CYCLE, EXIT_SIZE, EXIT_ORACLE = range(7)


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fail(code, msg):
    raise CliError(code, msg)


def _load_circuit(path):
    try:
        return formats.read_circuit(path)
    except (formats.FormatError, CircuitError, OSError) as exc:
        _fail(EXIT_PARSE, str(exc))


def _load_pattern(path):
    try:
        return formats.read_pattern(path)
    except (formats.FormatError, CircuitError, OSError) as exc:
        _fail(EXIT_PARSE, str(exc))


def _schedule(p):
    try:
        s = build_schedule(p)
        check_schedule(p, s)
        return s
    except ScheduleError as exc:
        _fail(EXIT_CYCLE, str(exc))
    except ConeError as exc:
        _fail(EXIT_PARSE, str(exc))


def _config(args) -> SimConfig:
    return dataclasses.replace(DEFAULT, max_qubits=args.max_qubits)


def cmd_compile(args) -> int:
    c = _load_circuit(args.circuit)
    cfg = _config(args)
    try:
        p = compile(c, align=args.align, config=cfg)
        if args.rectangular:
            p = embed_rectangular(p, cfg.max_qubits)
    except CompileError as exc:
        _fail(EXIT_COMPILE, str(exc))
    except SizeLimitError as exc:
        _fail(EXIT_SIZE, str(exc))
    Path(args.out).write_text(formats.dumps(formats.pattern_to_dict(p)))
    q0 = sum(1 for s in p.measured if s not in p.adaptive)
    print(json.dumps({"pattern": str(args.out), "sites": len(p.cluster), "edges": len(p.cluster.edges),
                      "adaptive": len(p.adaptive), "q0_estimate": q0}, sort_keys=True))
    return EXIT_OK


def cmd_schedule(args) -> int:
    p = _load_pattern(args.pattern)
    s = _schedule(p)
    out = Path(args.out) if args.out else Path(args.pattern).with_suffix(".schedule.json")
    out.write_text(formats.dumps(formats.schedule_to_dict(s)))
    print(f"rounds = {len(s.rounds)}")
    print(f"t_max = {s.t_max}")
    for t, q in enumerate(s.rounds):
        print(f"Q_{t}: {' '.join(str(x) for x in q)}")
    return EXIT_OK


def _run(p, s, args, mode, shots, cfg):
    try:
        return runtime.run_experiment(p, shots, args.seed, mode, schedule=s, threads=args.threads,
                                      config=cfg, trace=bool(getattr(args, "trace", None)))
    except SizeLimitError as exc:
        _fail(EXIT_SIZE, str(exc))


def _write_trace(path, records):
    with open(path, "w") as fh:
        for i, r in enumerate(records):
            for row in r.trace or ():
                fh.write(json.dumps({"shot": i, "seed": r.seed, **row}, sort_keys=True) + "\n")


def cmd_run(args) -> int:
    p = _load_pattern(args.pattern)
    s = _schedule(p)
    summary, records = _run(p, s, args, args.mode, args.shots, _config(args))
    text = formats.dumps(summary)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        _write_trace(args.trace, records)
    return EXIT_OK


def cmd_verify(args) -> int:
    c = _load_circuit(args.circuit)
    cfg = _config(args)
    if c.n > cfg.oracle_max_qubits:
        _fail(EXIT_ORACLE, f"{c.n} wires exceeds the oracle limit of {cfg.oracle_max_qubits}")
    if args.pattern:
        p = dataclasses.replace(_load_pattern(args.pattern), circuit=c)
    else:
        try:
            p = compile(c, config=cfg)
        except CompileError as exc:
            _fail(EXIT_COMPILE, str(exc))
    s = _schedule(p)
    rows = []

    def check(name, ok, detail):
        rows.append((name, ok, detail))

    if c.is_clifford:
        check("clifford_unit_depth", s.t_max == 0, f"t_max={s.t_max}")
    if len(p.cluster) <= cfg.max_qubits:
        full, _ = _run(p, s, args, "full", args.full_shots, cfg)
        fmin = full["min_final_fidelity"]
        check("fidelity", fmin is not None and fmin >= 1 - cfg.fidelity_tol, f"min={fmin!r}")
        if full["readout_mismatches"] is not None:
            check("readout", full["readout_mismatches"] == 0, f"mismatches={full['readout_mismatches']}")
    else:
        rows.append(("fidelity", None, f"skipped: {len(p.cluster)} sites > {cfg.max_qubits}"))
    st, _ = _run(p, s, args, "streamed", args.shots, cfg)
    check("tv_distance", st["tv_distance"] <= st["tv_bound"],
          f"tv={st['tv_distance']:.4g} bound={st['tv_bound']:.4g}")
    check("chi_square", st["chi2_pvalue"] > cfg.chi2_pvalue, f"p={st['chi2_pvalue']:.4g}")
    failed = [name for name, ok, _ in rows if ok is False]
    for name, ok, detail in rows:
        tag = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        print(f"{tag}  {name:<20} {detail}")
    if failed:
        print(f"verify failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oneway", description="One-way quantum computer simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--max-qubits", type=int, default=DEFAULT.max_qubits)

    sp = sub.add_parser("compile", help="compile a circuit file to a measurement pattern")
    sp.add_argument("circuit")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--align", action="store_true", help="pad wires so CNOT columns line up")
    sp.add_argument("--rectangular", action="store_true", help="fill the layout box with Z-measured sites")
    common(sp)
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("schedule", help="print measurement rounds of a pattern")
    sp.add_argument("pattern")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_schedule)

    def shots(sp, default):
        sp.add_argument("--shots", type=int, default=default)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("run", help="execute a pattern and summarize the results")
    sp.add_argument("pattern")
    shots(sp, 1000)
    sp.add_argument("--mode", choices=("streamed", "full"), default="streamed")
    sp.add_argument("--trace", metavar="PATH", help="write per-round JSON lines")
    sp.add_argument("-o", "--out")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("verify", help="compile, run both modes, compare against the direct simulation")
    sp.add_argument("circuit")
    shots(sp, 10_000)
    sp.add_argument("--full-shots", type=int, default=50)
    sp.add_argument("--pattern", help="use this pattern instead of compiling the circuit")
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
