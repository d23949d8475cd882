"""Command line: run scenarios, probe constants, run the acceptance suite.

    crackset run SCENARIO [--out DIR] [--svg] [--adaptive-eps]
    crackset probe-korn FAMILY [--samples N] [--seed S]
    crackset accept [--filter NAME]
    crackset validate SCENARIO

Exit codes: 0 ok, 1 usage or schema error, 2 engine anomaly, 3 acceptance failure.
The default output directory is taken from CRACKSET_OUT (else ./crackset_out).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .grid_sets import InvalidInput, Rect
from .neighborhoods import layers

EXIT_OK, EXIT_USAGE, EXIT_ANOMALY, EXIT_ACCEPT = 0, 1, 2, 3
OUT_ENV = "CRACKSET_OUT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="crackset", description="Crack-set modification engine and verification tools.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run a scenario and write its report")
    r.add_argument("scenario")
    r.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./crackset_out)")
    r.add_argument("--svg", action="store_true", help="write one SVG frame per iteration plus a final overlay")
    r.add_argument("--adaptive-eps", action="store_true", help="use eps = alpha(W) / H^1(J_u)")
    k = sub.add_parser("probe-korn", help="measure Korn-Poincare ratios on a shape family")
    k.add_argument("family", choices=["strip", "square", "lpath", "all"])
    k.add_argument("--samples", type=int, default=4)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--json", action="store_true", help="print the full table as JSON")
    a = sub.add_parser("accept", help="run the acceptance criteria")
    a.add_argument("--filter", default=None, help="comma separated criterion numbers or names")
    v = sub.add_parser("validate", help="check a scenario file without running it")
    v.add_argument("scenario")
    return ap


def _frame_writer(directory: str):
    from .svg import frame
    os.makedirs(directory, exist_ok=True)

    def on_frame(state, rec):
        X = Rect(*rec["bbox"])
        box = None
        pb = rec.get("property_b") or {}
        if "tau_hat" in pb:
            box = X.dilate(layers(2 * pb["tau_hat"], state.config.spec))
        label = f"iteration {rec['index']}  case {rec['case']}"
        with open(os.path.join(directory, f"iter_{rec['index']:03d}.svg"), "w") as f:
            f.write(frame(state.config, state.B_sets, X, box, label))
    return on_frame


def cmd_run(args) -> int:
    from .report import dumps, run_scenario
    from .scenario import load_scenario
    from .svg import frame
    sc = load_scenario(args.scenario)
    out = args.out or os.environ.get(OUT_ENV) or "crackset_out"
    os.makedirs(out, exist_ok=True)
    frames_dir = os.path.join(out, f"{sc.name}_frames")
    on_frame = _frame_writer(frames_dir) if args.svg else None
    report, result = run_scenario(sc, adaptive_eps=True if args.adaptive_eps else None, on_frame=on_frame)
    path = os.path.join(out, f"{sc.name}.json")
    with open(path, "w") as f:
        f.write(dumps(report))
    if args.svg:
        rects = [Rect(*r) for r in report["final"]["rectangles"]]
        with open(os.path.join(frames_dir, "final.svg"), "w") as f:
            svg = frame(result.U, result.state.B_sets, None, None, "final")
            # overlay the output rectangles
            extra = "".join(f'<rect x="{R.x0}" y="{sc.spec.n - R.y1}" width="{R.width}" height="{R.height}" '
                            f'fill="none" stroke="#e80" stroke-width="0.25"/>\n' for R in rects)
            f.write(svg.replace("</svg>", extra + "</svg>"))
    fin = report["final"]
    print(f"{sc.name}: {len(report['iterations'])} iterations, cases "
          f"{[it['case'] for it in report['iterations']]}")
    print(f"  surface budget {fin['surface_budget'].get('lhs')} <= {fin['surface_budget'].get('rhs')}")
    korn = fin["korn"]
    print("  korn " + ("vacuous" if korn.get("vacuous") else f"ratio {korn.get('ratio')}"))
    print(f"  report written to {path}")
    if report["anomalies"]:
        print(json.dumps(report["anomalies"], indent=1, sort_keys=True), file=sys.stderr)
        return EXIT_ANOMALY
    return EXIT_OK


def cmd_probe(args) -> int:
    from .probe import FAMILIES, probe_korn_constant
    fams = FAMILIES if args.family == "all" else (args.family,)
    for fam in fams:
        res = probe_korn_constant(fam, samples=args.samples, seed=args.seed)
        if args.json:
            print(json.dumps(res, indent=1, sort_keys=True))
            continue
        print(f"family {fam}: nondecreasing={res['nondecreasing']} within cubic envelope={res['within_envelope']}")
        print(f"  {'k':>3} {'cells':>5} {'s^-2|U|':>8} {'max ratio':>10} {'envelope':>12}  worst field")
        for r in res["rows"]:
            print(f"  {r['k']:>3} {r['cells']:>5} {r['size']:>8} {r['max_ratio']:>10.4f} {r['envelope']:>12.4g}  {r['worst_field']}")
    return EXIT_OK


def cmd_accept(args) -> int:
    from .acceptance import run_suite, select
    if args.filter and not select(args.filter):
        print(f"no criterion matches {args.filter!r}", file=sys.stderr)
        return EXIT_USAGE
    results = run_suite(args.filter)
    failed = [r for r in results if not r["passed"]]
    for r in failed:
        print(f"criterion {r['number']} details: {json.dumps(r['details'], sort_keys=True, default=str)[:2000]}")
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_ACCEPT if failed else EXIT_OK


def cmd_validate(args) -> int:
    from .scenario import load_scenario
    sc = load_scenario(args.scenario)
    print(f"{sc.name}: ok ({sc.spec.n}x{sc.spec.n} lattice, {len(sc.config0.components)} components)")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "probe-korn": cmd_probe, "accept": cmd_accept, "validate": cmd_validate}[args.cmd]
    try:
        return handler(args)
    except InvalidInput as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
