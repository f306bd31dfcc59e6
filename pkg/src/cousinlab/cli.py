"""Command-line entry point.

Every subcommand builds a JSON report of checks, each carrying the value,
the tolerance it was held to and a verdict.  The exit status is 0 iff all
checks pass; errors exit with status 2 and a module-qualified message.
"""

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import cousin as C
from . import delaunay as D
from . import devmap as DM
from . import io
from . import moduli as M
from . import quat as Q
from . import surface as S
from .config import RunConfig, Tolerances, worker_count
from .errors import CousinLabError, InvalidInputError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_ERROR = 0, 1, 2


class Report:
    """Accumulates inputs, checks and measurements for one run."""

    def __init__(self, subcommand, inputs):
        self.data = {"subcommand": subcommand, "inputs": inputs, "checks": {}, "measurements": {}}

    def check(self, name, value, tol, passed=None):
        value = float(value)
        ok = bool(value <= tol) if passed is None else bool(passed)
        self.data["checks"][name] = {"value": value, "tolerance": float(tol), "passed": ok}
        return ok

    def measure(self, **kw):
        self.data["measurements"].update(kw)

    @property
    def passed(self):
        return all(c["passed"] for c in self.data["checks"].values())

    def finish(self, wall_time=None):
        self.data["passed"] = self.passed
        if wall_time is not None:
            self.data["wall_time"] = wall_time
        return self.data


# ---------------------------------------------------------------- pipelines


def _parallel_lengths(g):
    return np.array([D.circumference_at(g, i) for i in range(g.nx)])


def unduloid_checks(pair, n, tol, report, oracle=True):
    """Geometry and structure checks on a generated half-unduloid pair."""
    f, ft = pair.f, pair.ftilde
    ring = C.GATE_RING
    dens = S.interior(C.loop_density(ft, pair.order), ring - 1)
    report.check("loop_density", dens.max(), tol.loop_factor * ft.h**2)
    report.check("isometry", C.isometry_error(f, ft, pair.order, ring), tol.tau_isom)
    H = S.shape_operator(f, pair.order).H
    report.check("mean_curvature", np.abs(S.interior(H, ring) - 1.0).max(), tol.tau_cmc)
    # the normal relation is checked on differenced samples; attached
    # tangents would make it hold by construction
    report.check("normal_relation", C.verify_normal_relation(D.without_tangents(pair)).max(), tol.tau_normal)
    report.check("shape_relation", C.verify_shape_relation(pair).max(), tol.tau_shape)

    circ = _parallel_lengths(f)
    quarter = int(np.argmax(circ[: max(2, f.nx // 2)]))
    report.check("neck_circumference", abs(circ[0] - n), tol.tau_necksize)
    report.check("bulge_circumference", abs(circ[quarter] - (2 * np.pi - n)), tol.tau_necksize)
    mer = D.meridian_length(f, 0, quarter) if quarter > 0 else 0.0
    if n < np.pi:
        report.check("meridian_length", abs(mer - np.pi / 2), tol.tau_necksize)
        measured = D.measure_necksize(f)
        report.check("measured_necksize", abs(measured - n), tol.tau_necksize)
    else:
        measured = float(circ.min())
    p_plus, p_minus = D.boundary_hopf_points(pair, radius=tol.tau_hopf)
    dist = float(Q.angle(p_plus, p_minus))
    report.check("hopf_distance", abs(dist - n), tol.tau_hopf)
    axis_period = C.period(pair, C.staircase_path((0, 0), (f.nx - 1, f.ny - 1), "y"), Q.I, tol.tau_period)
    mirror_period = C.period(pair, C.staircase_path((0, 0), (0, f.ny - 1)), Q.K, tol.tau_period)
    report.check("mirror_period", abs(mirror_period), 1e-6)
    if oracle:
        prof = D.unduloid_profile_oracle(n)
        report.check("oracle_hausdorff", D.profile_hausdorff(f, prof), tol.tau_hausdorff)
    report.measure(neck_circumference=float(circ[0]), bulge_circumference=float(circ[quarter]),
                   meridian_length=float(mer), measured_necksize=float(measured),
                   hopf_points=[Q.vec(p_plus).tolist(), Q.vec(p_minus).tolist()], hopf_distance=dist,
                   axis_period=float(axis_period), cousin=pair.report())


def run_gen_unduloid(cfg):
    n = cfg.necksizes[0]
    tol = cfg.tolerances
    report = Report("gen-unduloid", {"necksize": n, "resolution": list(cfg.resolution)})
    pair = D.generate_unduloid(n, tuple(cfg.resolution))
    unduloid_checks(pair, D.check_unduloid_necksize(n), tol, report, oracle=not cfg.options.get("no_oracle"))
    out = cfg.outputs
    if out.get("out"):
        io.export_mesh(pair.f, out["out"], "half_unduloid")
    if out.get("cousin_out"):
        io.save_grid(pair.ftilde, out["cousin_out"])
    if out.get("profile_csv"):
        D.unduloid_profile_oracle(n).to_csv(out["profile_csv"])
    return report


def run_gen_helicoid(cfg):
    n = cfg.necksizes[0]
    h = cfg.options.get("h", 0.005)
    tol = cfg.tolerances
    report = Report("gen-helicoid", {"necksize": n, "h": h})
    g = D.conformal_helicoid(n, h)
    report.check("conformality", S.conformality_defect(g).max(), tol.tau_conf)
    report.check("minimal_residual", S.minimal_residual_s3(g, tol_conf=tol.tau_conf).max(), tol.tau_min)
    report.measure(shape=list(g.shape), sigma_quarter=float(D.sigma_of_x(np.pi / 2, n)))
    if cfg.outputs.get("out"):
        io.save_grid(g, cfg.outputs["out"])
    if cfg.outputs.get("profile_csv") and 0 < n <= np.pi:
        D.unduloid_profile_oracle(n).to_csv(cfg.outputs["profile_csv"])
    return report


def run_cousin(cfg):
    g = io.load_grid(cfg.outputs["in"])
    tol = cfg.tolerances
    report = Report("cousin", {"in": str(cfg.outputs["in"]), "ambient": g.ambient, "shape": list(g.shape)})
    loop_tol = tol.loop_factor * g.h**2
    if g.ambient == "R3":
        pair = C.integrate_to_s3(g, loop_tol=loop_tol)
        out_grid = pair.ftilde
    else:
        pair = C.integrate_to_r3(g, loop_tol=loop_tol)
        out_grid = pair.f
    report.check("isometry", C.isometry_error(pair.f, pair.ftilde, pair.order, C.GATE_RING), tol.tau_isom)
    report.check("drift", pair.drift_log, tol.max_drift)
    report.check("normal_relation", S.interior(C.verify_normal_relation(pair), C.GATE_RING).max(), tol.tau_normal)
    report.check("shape_relation", S.interior(C.verify_shape_relation(pair), C.GATE_RING).max(), tol.tau_shape)
    report.measure(cousin=pair.report())
    if cfg.outputs.get("out"):
        io.save_grid(out_grid, cfg.outputs["out"])
    return report


def run_classify(cfg):
    g = io.load_grid(cfg.outputs["in"])
    tol = cfg.tolerances
    report = Report("classify", {"in": str(cfg.outputs["in"])})
    res = M.classify_boundary(g, radius=tol.rho_cluster)
    if isinstance(res, M.SphericalTriple):
        record = M.triple_record(res)
    else:
        record = {"points": [p.tolist() for p in res], "distance": float(Q.angle(*res))}
    report.measure(**record)
    if cfg.outputs.get("out"):
        io.write_json(record, cfg.outputs["out"])
    return report


def run_necksizes(cfg):
    report = Report("necksizes", {"triple": list(cfg.triple), "values": list(cfg.necksizes)})
    if cfg.triple:
        t = M.CanonicalTripleCoords(*cfg.triple).to_triple()
        record = M.triple_record(t)
        verdict = M.check_necksize_inequalities(record["necksizes"])
    else:
        try:
            verdict = M.check_necksize_inequalities(cfg.necksizes)
        except InvalidInputError as exc:
            # out-of-range values are simply not admissible here
            report.check("admissible", 1.0, 0.0, passed=False)
            report.measure(necksizes=list(cfg.necksizes), admissible=False, reason=str(exc))
            return report
        record = {"necksizes": list(cfg.necksizes), "admissible": verdict.admissible, "margins": verdict.margins}
        if verdict:
            record["triples"] = {ch: M.triple_record(M.triple_from_necksizes(cfg.necksizes, ch))
                                 for ch in M.CHIRALITIES}
    report.check("admissible", -verdict.margin, 0.0, passed=verdict.admissible)
    report.measure(**record)
    return report


def run_forces(cfg):
    n = cfg.necksizes
    report = Report("forces", {"necksizes": list(n)})
    fs = M.axis_angles_from_necksizes(n)
    report.check("force_closure", fs.residual, 1e-10)
    report.measure(**M.force_record(fs, n))
    return report


def run_devmap(cfg):
    depth = int(cfg.options.get("depth", 1))
    report = Report("devmap", {"triple": list(cfg.triple), "depth": depth})
    t = M.CanonicalTripleCoords(*cfg.triple).to_triple()
    m = DM.three_point_metric(t, depth)
    dev = max(min(np.linalg.norm(p - c) for c in m.completion_points) for p in t.points)
    report.check("completion_points", dev, 1e-12)
    report.measure(triangle_area=DM.triangle_area(t), area=m.area, cells=len(m.cells))
    q = cfg.options.get("query_degree")
    if q is not None:
        report.measure(query=list(q), degree=DM.developing_degree(m, DM.lonlat_to_point(*q)))
    if cfg.outputs.get("out"):
        io.write_json(m.to_dict(), cfg.outputs["out"])
    return report


def _sweep_one(n, resolution, tol):
    r = Report("gen-unduloid", {"necksize": n})
    try:
        pair = D.generate_unduloid(n, resolution)
        unduloid_checks(pair, n, tol, r, oracle=False)
    except CousinLabError as exc:
        r.check("error", 1.0, 0.0, passed=False)
        r.measure(error=str(exc))
    return r.finish()


def run_sweep(cfg):
    lo, hi, count = cfg.options["range"]
    ns = np.linspace(lo, hi, int(count)).tolist()
    report = Report("sweep", {"range": [lo, hi, int(count)], "resolution": list(cfg.resolution)})
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(lambda n: _sweep_one(n, tuple(cfg.resolution), cfg.tolerances), ns))
    for n, res in zip(ns, results):
        report.check(f"necksize_{n:.6f}", 0.0 if res["passed"] else 1.0, 0.5, passed=res["passed"])
    report.measure(runs=results)
    return report


RUNNERS = {
    "gen-unduloid": run_gen_unduloid,
    "gen-helicoid": run_gen_helicoid,
    "cousin": run_cousin,
    "classify": run_classify,
    "necksizes": run_necksizes,
    "forces": run_forces,
    "devmap": run_devmap,
    "sweep": run_sweep,
}


def run(cfg):
    """Execute one configured pipeline and return its :class:`Report`."""
    return RUNNERS[cfg.subcommand](cfg)


# -------------------------------------------------------------------- argv


def _floats(text, count=None):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"expected {count} numbers, got {len(vals)}")
    return vals


def _resolution(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"resolution must look like 400x200, got {text!r}") from exc
    return nx, ny


def build_parser():
    p = argparse.ArgumentParser(prog="cousinlab", description="CMC/minimal cousin toolkit", allow_abbrev=False)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--report", help="write the JSON report here (default: stdout)")
        sp.add_argument("--timing", action="store_true", help="include wall time (reports stop being byte-stable)")
        for f in Tolerances.__dataclass_fields__:
            sp.add_argument("--" + f.replace("_", "-"), dest=f, type=float, default=None)
        return sp

    g = common(sub.add_parser("gen-unduloid", allow_abbrev=False))
    g.add_argument("--necksize", type=float, required=True)
    g.add_argument("--resolution", type=_resolution, default=(400, 200))
    g.add_argument("--out", help="OBJ mesh of the half-unduloid")
    g.add_argument("--cousin-out", help="grid file of the helicoid cousin")
    g.add_argument("--profile-csv", help="oracle meridian profile (s, r, z, phi, force)")
    g.add_argument("--no-oracle", action="store_true")

    g = common(sub.add_parser("gen-helicoid", allow_abbrev=False))
    g.add_argument("--necksize", type=float, required=True)
    g.add_argument("--h", type=float, default=0.005)
    g.add_argument("--out", help="grid file of the conformal helicoid")
    g.add_argument("--profile-csv")

    g = common(sub.add_parser("cousin", allow_abbrev=False))
    g.add_argument("--in", dest="infile", required=True)
    g.add_argument("--out")

    g = common(sub.add_parser("classify", allow_abbrev=False))
    g.add_argument("--in", dest="infile", required=True)
    g.add_argument("--out")

    g = common(sub.add_parser("necksizes", allow_abbrev=False))
    x = g.add_mutually_exclusive_group(required=True)
    x.add_argument("--triple", type=lambda s: _floats(s, 3), help="lat,lon2,lon3")
    x.add_argument("--values", type=lambda s: _floats(s, 3), help="n1,n2,n3")

    g = common(sub.add_parser("forces", allow_abbrev=False))
    g.add_argument("--necksizes", type=lambda s: _floats(s, 3), required=True)

    g = common(sub.add_parser("devmap", allow_abbrev=False))
    g.add_argument("--triple", type=lambda s: _floats(s, 3), required=True, help="lat,lon2,lon3")
    g.add_argument("--depth", type=int, default=1)
    g.add_argument("--query-degree", type=lambda s: _floats(s, 2), help="lon,lat")
    g.add_argument("--out")

    g = common(sub.add_parser("sweep", allow_abbrev=False))
    g.add_argument("--necksizes", type=lambda s: _floats(s, 3), required=True, help="lo,hi,count")
    g.add_argument("--resolution", type=_resolution, default=(400, 200))
    return p


def config_from_args(a):
    tol = Tolerances(**{f: getattr(a, f) for f in Tolerances.__dataclass_fields__ if getattr(a, f) is not None})
    outputs = {k: getattr(a, k) for k in ("out", "cousin_out", "profile_csv") if getattr(a, k, None)}
    if getattr(a, "infile", None):
        outputs["in"] = a.infile
    kw = {"tolerances": tol, "outputs": outputs}
    if getattr(a, "resolution", None):
        kw["resolution"] = a.resolution
    cmd = a.subcommand
    if cmd in ("gen-unduloid", "gen-helicoid"):
        kw["necksizes"] = (a.necksize,)
        kw["options"] = {"h": getattr(a, "h", 0.005), "no_oracle": getattr(a, "no_oracle", False)}
    elif cmd == "necksizes":
        kw["triple"] = a.triple or ()
        kw["necksizes"] = a.values or ()
    elif cmd == "forces":
        kw["necksizes"] = a.necksizes
    elif cmd == "devmap":
        kw["triple"] = a.triple
        kw["options"] = {"depth": a.depth, "query_degree": a.query_degree}
    elif cmd == "sweep":
        kw["options"] = {"range": a.necksizes}
    return RunConfig(cmd, **kw)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = config_from_args(args)
        report = run(cfg)
    except CousinLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    data = report.finish(round(time.perf_counter() - t0, 3) if args.timing else None)
    text = io.dumps(data)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
