"""Command line entry point: ``odometer-oe {plan,verify,simulate,report,fuzz}``.

Exit codes: 0 success, 1 a check failed, 2 omega not sublinear, 3 a cap was
exceeded, 4 a finite target ran out of primes, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from typing import Optional, Sequence

from .errors import CapExceeded, NoFillerPrime, NotSublinear
from .omega import OmegaFn, parse_fraction, parse_omega
from .oracle import DEFAULT_CAP, FUZZ_OMEGAS, fuzz_plans, plan_hash, verify_plan
from .planner import SequencePlan, check_plan, plan, series_bound
from .reporting import RunManifest, plot_csv, write_csv, write_json, write_manifest, write_text
from .simulate import PARITIES, stabilization_profile, summarize
from .supernatural import BaseSequence, SupernaturalNumber

EXIT_OK, EXIT_FAIL, EXIT_NOT_SUBLINEAR, EXIT_CAP, EXIT_NO_FILLER, EXIT_USAGE = 0, 1, 2, 3, 4, 64
THREADS_ENV = "ODOMETER_OE_THREADS"

CSV_HELP = """\
CSV schemas:
  verify/report.csv          plan_hash,level,check,passed,value,bound,detail
  verify/defect_vs_level.csv level,kind,measure,measure_float,bound,bound_float
  verify/norm_vs_level.csv   level,omega,map,exact,bound
  simulate/samples.csv       seed,parity,sample,stable_index,final_stage,final_cocycle,omega_value
  simulate/norm_partial_means.csv   parity,samples,mean
  simulate/stabilization_curve.csv  parity,stage,fraction_stable
Every output directory also holds manifest.json (RunManifest).
Thread count defaults to $ODOMETER_OE_THREADS, else 1.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which is taken
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _fmt(x) -> str:
    return f"{x.numerator}/{x.denominator}" if isinstance(x, Fraction) else repr(x)


def load_plan(path: str) -> SequencePlan | BaseSequence:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if isinstance(obj, list):
        return BaseSequence.from_json(obj)
    if "omega" in obj and "delta" in obj:
        return SequencePlan.from_json(obj)
    return BaseSequence.from_json(obj["ks"])


# -- plan ----------------------------------------------------------------------


def cmd_plan(args) -> int:
    t0 = time.perf_counter()
    if args.depth < 2:
        print("error: --depth must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    tx = SupernaturalNumber.parse(args.target_x)
    ty = SupernaturalNumber.parse(args.target_y)
    omega = parse_omega(args.omega)
    delta = parse_fraction(args.delta)
    params = {"target_x": tx.to_json(), "target_y": ty.to_json(), "omega": omega.to_json(),
              "delta": _fmt(delta), "depth": args.depth}
    code = EXIT_OK
    try:
        p = plan(tx, ty, omega, delta, args.depth)
    except NotSublinear as exc:
        print(f"condition III: {exc}", file=sys.stderr)
        return EXIT_NOT_SUBLINEAR
    except CapExceeded as exc:
        print(f"conditions II/III: {exc}", file=sys.stderr)
        return EXIT_CAP
    except NoFillerPrime as exc:
        print(f"condition I: {exc}", file=sys.stderr)
        return EXIT_NO_FILLER
    cert = check_plan(p)
    if not cert.passed:
        code = EXIT_FAIL
        for item in cert.failures:
            print(f"not certified: {item.condition} at n={item.index}", file=sys.stderr)
    if args.out:
        out = _ensure_dir(args.out)
        write_json(os.path.join(out, "plan.json"), p.to_json())
        write_json(os.path.join(out, "certificate.json"), cert.to_json())
        write_manifest(out, RunManifest(
            "plan", params, plan_hash(p.seq), None,
            {"certified": cert.passed, "depth": p.depth, "sum_II": repr(cert.sum_II), "sum_III": repr(cert.sum_III)},
            round(time.perf_counter() - t0, 6)))
    else:
        json.dump({"plan": p.to_json(), "certificate": cert.to_json()}, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    print(f"plan depth {p.depth}: {'certified' if cert.passed else 'NOT certified'}; "
          f"sum II = {cert.sum_II:.3e}, sum III = {cert.sum_III:.3e}, delta/3 = {float(delta) / 3:.3e}",
          file=sys.stderr)
    return code


# -- verify --------------------------------------------------------------------


def _verify_omegas(args, loaded) -> list[OmegaFn]:
    if args.omega:
        return [parse_omega(o) for o in args.omega]
    if isinstance(loaded, SequencePlan):
        return [loaded.omega]
    return list(FUZZ_OMEGAS)


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    if args.ks:
        loaded = BaseSequence.from_tail([int(v) for v in args.ks.split(",")])
    elif args.plan:
        loaded = load_plan(args.plan)
    else:
        print("error: one of --plan or --ks is required", file=sys.stderr)
        return EXIT_USAGE
    seq = loaded.seq if isinstance(loaded, SequencePlan) else loaded
    omegas = _verify_omegas(args, loaded)
    rep = verify_plan(seq, omegas, cap=args.max_enumeration, threads=args.threads)

    code = EXIT_OK
    if not rep.passed:
        code = EXIT_FAIL
        for c in rep.failures:
            print(f"FAIL level {c.level}: {c.name} value={c.value} bound={c.bound}", file=sys.stderr)
    elif rep.skipped and args.strict:
        code = EXIT_CAP
    for s in rep.skipped:
        print(f"skipped {s}", file=sys.stderr)

    out = _ensure_dir(args.out)
    write_json(os.path.join(out, "report.json"), rep.to_json())
    write_text(os.path.join(out, "report.csv"), rep.to_csv())
    defect_rows, norm_rows = [], []
    for c in rep.checks:
        if c.name in ("diagram_defect", "composition_defect"):
            defect_rows.append([c.level, c.name, c.value, repr(float(Fraction(c.value))),
                                c.bound, repr(float(Fraction(c.bound)))])
        elif c.name.startswith("norm_"):
            label, _, omega = c.name[len("norm_"):].partition("[")
            norm_rows.append([c.level, omega.rstrip("]"), label, c.value, c.bound])
    write_csv(os.path.join(out, "defect_vs_level.csv"),
              ["level", "kind", "measure", "measure_float", "bound", "bound_float"], defect_rows)
    write_csv(os.path.join(out, "norm_vs_level.csv"), ["level", "omega", "map", "exact", "bound"], norm_rows)
    if args.plot:
        _plot_verify(out)
    params = {"ks": seq.to_json(), "omegas": [w.to_json() for w in omegas],
              "max_enumeration": args.max_enumeration, "strict": args.strict}
    write_manifest(out, RunManifest(
        "verify", params, rep.plan_hash, None,
        {"passed": rep.passed, "checks": len(rep.checks), "failures": len(rep.failures),
         "skipped_levels": len(rep.skipped), "exit_code": code},
        round(time.perf_counter() - t0, 6)))
    print(f"{len(rep.checks)} checks, {len(rep.failures)} failures, {len(rep.skipped)} levels skipped",
          file=sys.stderr)
    return code


def _plot_verify(out: str) -> None:
    import csv

    path = os.path.join(out, "defect_vs_level.csv")
    with open(path, newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["kind"] == "diagram_defect"]
    tmp = os.path.join(out, "diagram_defect.csv")
    write_csv(tmp, ["level", "measure", "bound"], [[r["level"], r["measure_float"], r["bound_float"]] for r in rows])
    plot_csv(tmp, os.path.join(out, "defect_vs_level.png"), "level", ["measure", "bound"], "diagram defect")


# -- simulate ------------------------------------------------------------------


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    loaded = load_plan(args.plan)
    if not isinstance(loaded, SequencePlan):
        print("error: simulate needs a full plan (omega and delta)", file=sys.stderr)
        return EXIT_USAGE
    p = loaded
    omega = parse_omega(args.omega) if args.omega else p.omega
    out = _ensure_dir(args.out)
    limit = omega.eval(1) + float(p.delta)
    bound = series_bound(p, omega)

    rows, partial_rows, curve_rows, estimates = [], [], [], {}
    stab_ok = True
    stab_fraction = None
    if args.samples > 0:
        if p.depth < 5:
            print("error: simulate needs plan depth >= 5", file=sys.stderr)
            return EXIT_USAGE
        prof = stabilization_profile(p, args.samples, args.seed, threads=args.threads)
        stab_fraction = prof.fraction_stabilized
        stab_ok = stab_fraction >= args.stabilization_target
        for parity in PARITIES:
            recs = [r for r in prof.records if r.parity == parity]
            vals = [omega.eval(abs(r.cocycles[-1])) for r in recs]
            lvl = 2 * recs[0].final_stage + (0 if parity == "X" else 1)
            est = summarize(parity, lvl, vals)
            estimates[parity] = est
            for r, v in zip(recs, vals):
                rows.append([args.seed, parity, r.sample, r.stable_index, r.final_stage, r.cocycles[-1], repr(v)])
            running = 0.0
            for i, v in enumerate(vals, start=1):
                running += v
                if i % args.partial_every == 0 or i == len(vals):
                    partial_rows.append([parity, i, repr(running / i)])
            for stage, frac in prof.curve.get(parity, []):
                curve_rows.append([parity, stage, repr(frac)])

    write_csv(os.path.join(out, "samples.csv"),
              ["seed", "parity", "sample", "stable_index", "final_stage", "final_cocycle", "omega_value"], rows)
    write_csv(os.path.join(out, "norm_partial_means.csv"), ["parity", "samples", "mean"], partial_rows)
    write_csv(os.path.join(out, "stabilization_curve.csv"), ["parity", "stage", "fraction_stable"], curve_rows)

    norm_ok = all(e.below(limit) and e.below(bound) for e in estimates.values())
    passed = norm_ok and stab_ok
    summary = {
        "samples": args.samples,
        "seed": args.seed,
        "omega": omega.to_json(),
        "omega(1)+delta": repr(limit),
        "series_bound": repr(bound),
        "estimates": {k: {"level": e.level, "mean": repr(e.mean), "stderr": repr(e.stderr),
                          "below_limit": e.below(limit), "below_series_bound": e.below(bound)}
                      for k, e in estimates.items()},
        "fraction_stabilized": None if stab_fraction is None else repr(stab_fraction),
        "stabilization_target": repr(args.stabilization_target),
        "passed": passed,
    }
    write_json(os.path.join(out, "summary.json"), summary)
    if args.plot and partial_rows:
        for parity in PARITIES:
            sub = os.path.join(out, f"partial_{parity}.csv")
            write_csv(sub, ["samples", "mean"], [[r[1], r[2]] for r in partial_rows if r[0] == parity])
            plot_csv(sub, os.path.join(out, f"partial_means_{parity}.png"), "samples", ["mean"],
                     f"running omega-norm estimate ({parity})")
    params = {"plan": p.to_json(), "omega": omega.to_json(), "samples": args.samples,
              "stabilization_target": repr(args.stabilization_target), "partial_every": args.partial_every}
    write_manifest(out, RunManifest("simulate", params, plan_hash(p.seq), args.seed,
                                    {"passed": passed}, round(time.perf_counter() - t0, 6)))
    for k, e in estimates.items():
        print(f"{k}: phi_{e.level} norm ~ {e.mean:.6f} +/- {e.stderr:.2e} (limit {limit:.4f}, series {bound:.4f})",
              file=sys.stderr)
    if stab_fraction is not None:
        print(f"stabilized fraction {stab_fraction:.4f}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


# -- report / fuzz ---------------------------------------------------------------


def cmd_report(args) -> int:
    path = os.path.join(args.dir, "manifest.json")
    if not os.path.exists(path):
        print(f"error: no manifest.json in {args.dir}", file=sys.stderr)
        return EXIT_USAGE
    with open(path, encoding="utf-8") as fh:
        man = json.load(fh)
    lines = [f"run: {man['subcommand']} (tool {man['tool_version']}, plan {man['plan_hash'] or '-'})"]
    for k, v in sorted(man["outcome"].items()):
        lines.append(f"  {k}: {v}")
    if man["subcommand"] == "verify":
        with open(os.path.join(args.dir, "report.json"), encoding="utf-8") as fh:
            rep = json.load(fh)
        for c in rep["checks"]:
            if c["name"] in ("diagram_defect", "composition_defect", "fiber_max") or not c["passed"]:
                mark = "ok  " if c["passed"] else "FAIL"
                lines.append(f"  [{mark}] level {c['level']:>2} {c['name']:<22} {c['value']} <= {c['bound']}")
        if args.plot:
            _plot_verify(args.dir)
    elif man["subcommand"] == "simulate":
        with open(os.path.join(args.dir, "summary.json"), encoding="utf-8") as fh:
            summ = json.load(fh)
        for k, e in summ["estimates"].items():
            lines.append(f"  {k}: mean {e['mean']} stderr {e['stderr']} (limit {summ['omega(1)+delta']})")
    print("\n".join(lines))
    return EXIT_OK


def cmd_fuzz(args) -> int:
    t0 = time.perf_counter()
    summ = fuzz_plans(args.seed, args.count, args.depth_cap, args.size_cap, FUZZ_OMEGAS,
                      cap=args.max_enumeration, threads=args.threads)
    out = _ensure_dir(args.out)
    write_text(os.path.join(out, "fuzz.csv"),
               "".join(r.to_csv() if i == 0 else r.to_csv().split("\n", 1)[1] for i, r in enumerate(summ.reports)))
    write_manifest(out, RunManifest(
        "fuzz", {"count": args.count, "depth_cap": args.depth_cap, "size_cap": args.size_cap,
                 "max_enumeration": args.max_enumeration}, "", args.seed,
        {"plans": len(summ.reports), "checks": summ.n_checks, "violations": len(summ.violations)},
        round(time.perf_counter() - t0, 6)))
    for h, c in summ.violations:
        print(f"FAIL plan {h} level {c.level}: {c.name} {c.value} > {c.bound}", file=sys.stderr)
    print(f"{len(summ.reports)} plans, {summ.n_checks} checks, {len(summ.violations)} violations", file=sys.stderr)
    return EXIT_OK if summ.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="odometer-oe", description=__doc__.splitlines()[0], epilog=CSV_HELP,
                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sp = sub.add_parser("plan", help="choose a certified base sequence", epilog=CSV_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    sp.add_argument("--target-x", required=True, help='supernatural number, e.g. "2^inf" or \'{"2":"inf"}\'')
    sp.add_argument("--target-y", required=True)
    sp.add_argument("--omega", default="power:1/2", help="power:P | powerlog:P,Q | log | const:C | table:v0,v1,...")
    sp.add_argument("--delta", default="1/10")
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--out", help="output directory (stdout JSON when omitted)")
    sp.set_defaults(func=cmd_plan)

    sv = sub.add_parser("verify", help="enumerate every level and check all bounds", epilog=CSV_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    sv.add_argument("--plan", help="plan JSON (or a bare JSON array of k_{-1}..k_D)")
    sv.add_argument("--ks", help="comma separated k_1,k_2,... instead of --plan")
    sv.add_argument("--omega", action="append", help="weight function(s); repeatable")
    sv.add_argument("--max-enumeration", type=int, default=DEFAULT_CAP)
    sv.add_argument("--threads", type=int, default=_default_threads())
    sv.add_argument("--strict", action="store_true", help="exit 3 when a level is skipped for size")
    sv.add_argument("--plot", action="store_true", help="also write PNG plots (needs matplotlib)")
    sv.add_argument("--out", required=True)
    sv.set_defaults(func=cmd_verify)

    ss = sub.add_parser("simulate", help="sample limit points and estimate the cocycle norm", epilog=CSV_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    ss.add_argument("--plan", required=True)
    ss.add_argument("--samples", type=int, default=10_000)
    ss.add_argument("--seed", type=int, default=0)
    ss.add_argument("--omega", help="override the plan's weight function")
    ss.add_argument("--stabilization-target", type=float, default=0.99)
    ss.add_argument("--partial-every", type=int, default=100)
    ss.add_argument("--threads", type=int, default=_default_threads())
    ss.add_argument("--plot", action="store_true")
    ss.add_argument("--out", required=True)
    ss.set_defaults(func=cmd_simulate)

    sr = sub.add_parser("report", help="summarize an output directory")
    sr.add_argument("--dir", required=True)
    sr.add_argument("--plot", action="store_true")
    sr.set_defaults(func=cmd_report)

    sf = sub.add_parser("fuzz", help="verify random valid sequences")
    sf.add_argument("--seed", type=int, default=0)
    sf.add_argument("--count", type=int, default=100)
    sf.add_argument("--depth-cap", type=int, default=4)
    sf.add_argument("--size-cap", type=int, default=5000)
    sf.add_argument("--max-enumeration", type=int, default=DEFAULT_CAP)
    sf.add_argument("--threads", type=int, default=_default_threads())
    sf.add_argument("--out", required=True)
    sf.set_defaults(func=cmd_fuzz)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
