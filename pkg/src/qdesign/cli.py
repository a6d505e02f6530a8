"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 verification failure,
3 non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, auxiliary, designs, design_search, entdetect, eur, selftest
from .errors import QDesignError

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_NOCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    command: str
    argv: list
    params: dict
    seed: int | None
    version: str
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def default_seed() -> int:
    raw = os.environ.get("QDESIGN_SEED")
    if raw is None:
        return 0
    if not raw.isdigit():
        raise UsageError(f"QDESIGN_SEED must be a decimal unsigned integer, got {raw!r}")
    return int(raw)


def float_list(text: str) -> list[float]:
    try:
        return [math.inf if s.strip() in ("inf", "infinity") else float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def alpha_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list."""
    if ":" not in text:
        return float_list(text)
    try:
        start, stop, step = (float(s) for s in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
    n = int(round((stop - start) / step))
    return [round(start + k * step, 12) for k in range(n + 1)]


# design -------------------------------------------------------------------

def cmd_design_list(args, out):
    for name in designs.BUILTIN_NAMES:
        d = designs.builtin_design(name)
        out.write(f"{name}\tdim={d.dim}\tK={d.size}\tstrength={d.strength}\n")
    return EXIT_OK, None


def cmd_design_verify(args, out):
    if (args.name is None) == (args.file is None):
        raise UsageError("give exactly one of --name or --file")
    design = designs.builtin_design(args.name) if args.name else designs.load_design(args.file)
    t = args.t if args.t is not None else design.strength
    rep = designs.verify_design(design, t, args.tol)
    out.write(
        f"design {design.name or args.file}: K={design.size} d={design.dim} t={t}\n"
        f"residual {fmt(rep.residual)}\nframe_potential {fmt(rep.frame_potential)}\n"
        f"welch_bound {fmt(rep.welch_bound)}\ncapped {fmt(rep.capped)}\n"
        f"{'PASS' if rep.passed else 'FAIL'}\n"
    )
    return (EXIT_OK if rep.passed else EXIT_CHECK), None


def cmd_design_search(args, out):
    cfg = design_search.SearchConfig(args.d, args.K, args.t, args.seed, args.max_iters, args.tol, args.restarts)
    res = design_search.search_design(cfg)
    out.write(f"converged {fmt(res.converged)}\ngap {fmt(res.residual)}\niterations {res.iterations}\nrestart {res.restart}\n")
    if not res.converged:
        return EXIT_NOCONV, None
    if args.out:
        designs.save_design(res.design, args.out)
        return EXIT_OK, [str(args.out)]
    out.write(json.dumps(designs.design_to_dict(res.design)) + "\n")
    return EXIT_OK, None


# eur ----------------------------------------------------------------------

def cmd_eur_diagram(args, out):
    data = eur.info_diagram_samples(args.L, args.a, args.alphas, args.samples, args.seed, args.resolution)
    rows = []
    for alpha in data.alphas:
        for c, h in zip(data.sample_ic, data.sample_entropy[alpha]):
            rows.append((c, h, alpha, "sample"))
        for c, h in zip(data.curve_c, data.upper[alpha]):
            rows.append((c, h, alpha, "ub"))
        for c, h in zip(data.curve_c, data.lower[alpha]):
            rows.append((c, h, alpha, "lb"))
    return EXIT_OK, render_csv(("c_a", "H_alpha", "alpha", "kind"), rows)


def _compare_setup(name: str, a: int):
    if name in ("snub-cube", "snub_cube"):
        dsm = designs.single_povm(designs.snub_cube_7())
    elif name == "icosahedron":
        dsm = designs.icosahedron_pairs()
    else:
        raise UsageError(f"unknown design {name!r} (snub-cube or icosahedron)")
    if not 2 <= a <= dsm.strength:
        raise UsageError(f"a must lie in [2, {dsm.strength}] for {name}")
    L = dsm.outcomes_per_povm
    return L, eur.design_ic_bound(L, dsm.dim, a)


def cmd_eur_compare(args, out):
    L, c = _compare_setup(args.design, args.a)
    if args.steps < 1 or args.alpha_max < args.alpha_min or args.alpha_min <= 0:
        raise UsageError("need steps >= 1 and 0 < alpha-min <= alpha-max")
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.steps + 1)
    rows = []
    for alpha in alphas:
        rep = eur.compare_bounds(eur.BoundParams(L, args.a, float(alpha), c))
        rows.append((alpha, rep.q1, rep.q2, rep.q_ras, rep.q_ket))
    return EXIT_OK, render_csv(("alpha", "q1", "q2", "q_ras", "q_ket"), rows)


def cmd_eur_ico_best(args, out):
    rows = []
    for alpha in args.alpha_grid:
        best = eur.ico_best_bound(alpha)
        rows.append((alpha, best.a_star, best.value))
    return EXIT_OK, render_csv(("alpha", "a_star", "value"), rows)


# entdetect ----------------------------------------------------------------

FAMILIES = {"psi-beta-phi": "psi_beta_phi", "rho-x-phi": "rho_x_phi", "isotropic": "isotropic"}


def _scheme(args, family):
    if family == "isotropic":
        dsm = designs.mub_dsm() if args.design == "mub" else designs.group_to_povms(
            designs.builtin_design(args.design), designs.antipodal_pairs(designs.builtin_design(args.design)))
        local = entdetect.LocalMeasurements.from_dsm(dsm)
        return entdetect.LocalScheme((local, local.conjugated())), 2
    design = designs.builtin_design(args.design)
    local = entdetect.LocalMeasurements.from_dsm(designs.single_povm(design))
    return entdetect.LocalScheme.uniform(local, 4), 4


def cmd_entdetect_scan(args, out):
    if args.family == "unbiasedness":
        trials = auxiliary.random_bases_experiment(args.sets, args.seed)
        return EXIT_OK, render_csv(("U", "x_critical"), [(t.U, t.x_critical) for t in trials])
    family = FAMILIES[args.family]
    scheme, n = _scheme(args, family)
    a = args.a if args.a is not None else n
    exps = entdetect.ExponentVector((a,) * n)
    points = entdetect.detect_scan(family, scheme, exps, args.grid, args.theorem)
    rows = [(p.param1, p.param2, p.lhs, p.rhs, p.violated) for p in points]
    return EXIT_OK, render_csv(("param1", "param2", "lhs", "rhs", "violated"), rows)


def cmd_entdetect_oracle(args, out):
    design = designs.builtin_design(args.design)
    local = entdetect.LocalMeasurements.from_dsm(designs.single_povm(design))
    scheme = entdetect.LocalScheme.uniform(local, args.parties)
    a = args.a if args.a is not None else args.parties
    exps = entdetect.ExponentVector((a,) * args.parties)
    rows = []
    for theorem in (3, 4):
        if theorem == 4 and not exps.all_even:
            continue
        rhs = entdetect.theorem4_rhs(scheme, exps) if theorem == 4 else entdetect.theorem3_rhs(scheme, exps)
        best = entdetect.separable_oracle(scheme, exps, args.samples, args.seed, theorem)
        rows.append((theorem, best, rhs, rhs - best))
    return EXIT_OK, render_csv(("theorem", "oracle_max", "rhs", "margin"), rows)


# selftest -----------------------------------------------------------------

def cmd_selftest(args, out):
    names = list(selftest.SUITES) if args.suite is None else [args.suite]
    failed = 0
    for name in names:
        results = selftest.run_suite(name, args.design_file)
        passed = sum(r.passed for r in results)
        out.write(f"{name}: {passed}/{len(results)} passed\n")
        for r in results:
            if not r.passed:
                failed += 1
                out.write(f"  FAIL {r.name}{': ' + r.detail if r.detail else ''}\n")
    return (EXIT_CHECK if failed else EXIT_OK), None


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qdesign", description="Quantum design measurements: uncertainty and entanglement numerics.")
    p.add_argument("--version", action="version", version=f"qdesign {__version__}")
    sub = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def seeded(sp):
        sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: QDESIGN_SEED or 0)")

    def csv_out(sp):
        sp.add_argument("--out", type=Path, help="CSV destination (stdout if omitted); a manifest is written next to it")

    d = sub.add_parser("design", help="builtin designs, certification and search")
    dsub = d.add_subparsers(dest="action", required=True, parser_class=_Parser)
    dl = dsub.add_parser("list")
    dl.set_defaults(func=cmd_design_list)
    dv = dsub.add_parser("verify")
    dv.add_argument("--name")
    dv.add_argument("--file", type=Path)
    dv.add_argument("--t", type=int)
    dv.add_argument("--tol", type=float, default=1e-9)
    dv.set_defaults(func=cmd_design_verify)
    ds = dsub.add_parser("search")
    ds.add_argument("--d", type=int, required=True)
    ds.add_argument("--K", type=int, required=True)
    ds.add_argument("--t", type=int, required=True)
    ds.add_argument("--tol", type=float, default=1e-9)
    ds.add_argument("--max-iters", type=int, default=100_000)
    ds.add_argument("--restarts", type=int, default=8)
    ds.add_argument("--out", type=Path)
    seeded(ds)
    ds.set_defaults(func=cmd_design_search)

    e = sub.add_parser("eur", help="entropic uncertainty data")
    esub = e.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ed = esub.add_parser("diagram")
    ed.add_argument("--L", type=int, required=True)
    ed.add_argument("--a", type=int, required=True)
    ed.add_argument("--alphas", type=float_list, default=[1.0])
    ed.add_argument("--samples", type=int, default=20_000)
    ed.add_argument("--resolution", type=int, default=512)
    seeded(ed)
    csv_out(ed)
    ed.set_defaults(func=cmd_eur_diagram)
    ec = esub.add_parser("compare")
    ec.add_argument("--design", default="snub-cube")
    ec.add_argument("--a", type=int, default=2)
    ec.add_argument("--alpha-min", type=float, default=2.0)
    ec.add_argument("--alpha-max", type=float, default=12.0)
    ec.add_argument("--steps", type=int, default=200)
    csv_out(ec)
    ec.set_defaults(func=cmd_eur_compare)
    ei = esub.add_parser("ico-best")
    ei.add_argument("--alpha-grid", type=alpha_grid, default=alpha_grid("2:12:0.01"))
    csv_out(ei)
    ei.set_defaults(func=cmd_eur_ico_best)

    n = sub.add_parser("entdetect", help="entanglement detection scans")
    nsub = n.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ns = nsub.add_parser("scan")
    ns.add_argument("--family", required=True, choices=[*FAMILIES, "unbiasedness"])
    ns.add_argument("--grid", type=int, default=200)
    ns.add_argument("--a", type=int, help="exponent per party (default: number of parties)")
    ns.add_argument("--theorem", type=int, choices=(3, 4))
    ns.add_argument("--design", default=None, help="icosahedron (4-qubit families) or mub (isotropic)")
    ns.add_argument("--sets", type=int, default=500)
    seeded(ns)
    csv_out(ns)
    ns.set_defaults(func=cmd_entdetect_scan)
    no = nsub.add_parser("oracle")
    no.add_argument("--design", default="icosahedron")
    no.add_argument("--parties", type=int, default=4)
    no.add_argument("--a", type=int)
    no.add_argument("--samples", type=int, default=2000)
    seeded(no)
    csv_out(no)
    no.set_defaults(func=cmd_entdetect_oracle)

    st = sub.add_parser("selftest", help="run the property suites")
    st.add_argument("--suite", choices=list(selftest.SUITES))
    st.add_argument("--design-file", type=Path)
    st.set_defaults(func=cmd_selftest)

    rp = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    rp.add_argument("manifest", type=Path)
    return p


def _params(args) -> dict:
    skip = {"func", "group", "action", "manifest"}
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k not in skip}


def run(argv: list[str], stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.group == "replay":
        try:
            doc = json.loads(args.manifest.read_text())
            recorded, seed = list(doc["argv"]), doc.get("seed")
        except (OSError, ValueError, KeyError) as exc:
            print(f"qdesign: cannot read manifest {args.manifest}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        # a seed taken from the environment is pinned so replay does not depend on it
        if seed is not None and "--seed" not in recorded:
            recorded += ["--seed", str(seed)]
        return run(recorded, stdout)
    if getattr(args, "design", "") is None:
        args.design = "mub" if getattr(args, "family", None) == "isotropic" else "icosahedron"
    start = time.perf_counter()
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = default_seed()
        code, payload = args.func(args, stdout)
    except (UsageError, ValueError, QDesignError, OSError) as exc:
        print(f"qdesign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    outputs = payload if isinstance(payload, list) else []
    out_path = getattr(args, "out", None)
    if isinstance(payload, str):
        if out_path is None:
            stdout.write(payload)
        else:
            out_path.write_text(payload)
            outputs = [str(out_path)]
    if outputs:
        manifest = RunManifest(
            f"{args.group} {args.action}", list(argv), _params(args), getattr(args, "seed", None),
            __version__, outputs, time.perf_counter() - start,
        )
        manifest.write(Path(outputs[0] + ".manifest.json"))
    return code


def main(argv: list[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
