"""Command line driver: ``curvedis {minimize,decay,construct,verify,export,ingest}``."""

import argparse
import json
import logging
import os
import sys

from .errors import CurvedisError

log = logging.getLogger("curvedis")


def _limit_threads():
    """Honour CURVEDIS_THREADS by capping the BLAS thread pools.

    Must run before numpy is first imported, which is why every numpy
    dependent import in this module is local to a command.
    """
    n = os.environ.get("CURVEDIS_THREADS")
    if not n:
        return
    if not n.isdigit() or int(n) < 1:
        raise CurvedisError(f"CURVEDIS_THREADS must be a positive integer, got {n!r}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = n


def _experiment(args):
    from .config import experiment_from_dict, load_experiment

    overrides = {"manifold": args.manifold, "measure": args.measure, "L0": args.L0, "stages": args.stages,
                 "seed": args.seed or None}
    if args.config:
        return load_experiment(args.config, overrides)
    if not args.manifold:
        raise CurvedisError("give --config or --manifold")
    doc = {"manifold": args.manifold, "schedule": {}}
    return experiment_from_dict(doc, overrides)


def _stage_meta(res):
    p = res.params
    return {"stage": res.stage, "polished": res.polished, "L": p.L, "N": p.N, "r": p.r, "lam": p.lam,
            "disc_sq": res.disc_sq, "length": res.length, "max_speed": res.max_speed,
            "objective": res.objective, "status": res.status}


def _write_results(out, results):
    from .io import atomic_write, save_curve

    for res in results:
        tag = f"stage{res.stage:02d}" + ("-polish" if res.polished else "")
        save_curve(os.path.join(out, f"{tag}.json"), res.curve, _stage_meta(res))
        if res.trace is not None:
            atomic_write(os.path.join(out, f"{tag}-trace.csv"), res.trace.to_csv())


def _progress(res):
    log.info("stage %d%s L=%.4g N=%d r=%d D2=%.4e length=%.4g %s", res.stage, " polish" if res.polished else "",
             res.params.L, res.params.N, res.params.r, res.disc_sq, res.length, res.status)


def cmd_minimize(args):
    from .experiments import run_continuation
    from .io import save_csv

    exp = _experiment(args)
    results = run_continuation(exp.measure, exp.schedule, exp.x0, exp.cg, polish_all=exp.polish_all, log=_progress)
    _write_results(args.out, results)
    rows = [r.row() for r in results if not r.polished]
    save_csv(os.path.join(args.out, "stages.csv"), ("L", "disc_sq", "length", "max_speed"), rows)
    failed = [r for r in results if r.status.startswith("failed")]
    print(json.dumps({"experiment": exp.name, "stages": [_stage_meta(r) for r in results]}, indent=1))
    return 1 if failed else 0


def cmd_decay(args):
    from .experiments import decay_experiment
    from .io import atomic_write, save_csv
    from .spectral import smoothness

    exp = _experiment(args)
    d_mu = exp.support_dim or exp.manifold.dim
    table = decay_experiment(exp.measure, exp.schedule, exp.x0, exp.cg, d_mu=d_mu,
                             s=smoothness(exp.manifold), log=_progress)
    _write_results(args.out, table.results)
    save_csv(os.path.join(args.out, "decay.csv"), table.header, table.rows)
    summary = {"experiment": exp.name, "slope_L": table.slope_L, "slope_length": table.slope_length,
               "theory": table.theory}
    atomic_write(os.path.join(args.out, "decay.json"), json.dumps(summary, indent=1))
    print(json.dumps(summary, indent=1))
    return 0


def cmd_construct(args):
    from . import quadrature_curves as qc
    from .io import save_curve
    from .manifolds import from_tag

    if args.manifold is None:
        raise CurvedisError("construct needs --manifold")
    m = from_tag(args.manifold)
    r = args.degree
    density = None
    if m.tag in ("torus2", "torus3"):
        curve = qc.torus_quadrature_curve(m.dim, r)
    elif m.tag == "sphere2":
        curve = qc.sphere2_quadrature_curve(r)
    elif m.tag == "so3":
        curve, density = qc.so3_quadrature_curve(r)
        curve = qc.reparametrize_constant_speed(curve, density)
    else:
        raise CurvedisError(f"no quadrature curve construction on {args.manifold}")
    n = args.points or 64 * (r + 1) ** 2
    dc = qc.discretize(curve, n)
    meta = {"construction": curve.meta.get("construction"), "degree": r}
    if hasattr(curve, "length") and callable(curve.length):
        meta["length"] = curve.length()
    save_curve(os.path.join(args.out, f"quadrature-{m.tag}-r{r}.json"), dc, meta)
    print(json.dumps(dict(meta, N=n, manifold=m.tag), indent=1))
    return 0


def cmd_verify(args):
    from .io import atomic_write
    from .verify import run_suite

    report = run_suite(args.suite, seed=args.seed)
    text = json.dumps(report, indent=1)
    if args.out:
        atomic_write(os.path.join(args.out, f"verify-{args.suite}.json"), text)
    print(text)
    return 0 if report["passed"] else 1


def cmd_export(args):
    from .export import export_visualization
    from .io import load_curve

    curve, _ = load_curve(args.curve)
    fmt = args.format
    ext = fmt or ("svg" if curve.manifold.tag == "torus2" else "csv")
    base = os.path.splitext(os.path.basename(args.curve))[0]
    path = os.path.join(args.out, f"{base}.{ext}")
    export_visualization(curve, path, fmt)
    print(path)
    return 0


def cmd_ingest(args):
    from .io import save_measure
    from .measures import from_sphere_grid, from_torus_image, read_pgm, read_sphere_grid

    if bool(args.image) == bool(args.grid):
        raise CurvedisError("ingest needs exactly one of --image or --grid")
    if args.image:
        mu = from_torus_image(read_pgm(args.image), args.degree, invert=args.invert)
        src = args.image
    else:
        mu = from_sphere_grid(read_sphere_grid(args.grid), args.degree)
        src = args.grid
    base = os.path.splitext(os.path.basename(src))[0]
    path = os.path.join(args.out, f"{base}-r{args.degree}.json")
    save_measure(path, mu)
    print(path)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="curvedis", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log stage progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, schedule=True):
        sp.add_argument("--manifold", choices=("torus2", "torus3", "sphere2", "so3", "grass24"))
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=0, help="seed of randomized builtin measures")
        if schedule:
            sp.add_argument("--config", help="experiment TOML file")
            sp.add_argument("--measure", help="builtin measure name or measure JSON file")
            sp.add_argument("--L0", type=float, help="first speed bound of a scaling law ladder")
            sp.add_argument("--stages", type=int, help="number of ladder stages")

    for name, fn, hlp in (("minimize", cmd_minimize, "run the continuation ladder"),
                          ("decay", cmd_decay, "ladder with polish and decay table")):
        sp = sub.add_parser(name, help=hlp)
        common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("construct", help="sample an exact quadrature curve")
    common(sp, schedule=False)
    sp.add_argument("--degree", type=int, default=4)
    sp.add_argument("--points", type=int, help="number of sample points (default 64 (r+1)^2)")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("verify", help="run a self-check suite")
    sp.add_argument("suite", choices=("quadrature", "gradient", "kernel", "gamma-proxy"))
    sp.add_argument("--out", help="also write the JSON report to this directory")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("export", help="figure data for a curve file")
    sp.add_argument("curve", help="curve JSON written by minimize or decay")
    sp.add_argument("--format", choices=("svg", "csv"))
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("ingest", help="convert an image or sphere grid into a measure file")
    sp.add_argument("--image", help="PGM image (P2 or P5) for a T² measure")
    sp.add_argument("--grid", help="180 x 360 text matrix for an S² measure")
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--invert", action="store_true", help="dark pixels carry the mass")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_ingest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        _limit_threads()
        out = getattr(args, "out", None)
        if out:
            os.makedirs(out, exist_ok=True)
        return args.func(args)
    except (CurvedisError, OSError, ValueError) as err:
        print(f"curvedis: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
