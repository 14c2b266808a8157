"""Command-line entry point: ``topoqubits <subcommand> ...``.

Every run writes its artifacts and a ``manifest.json`` (configuration echo
plus SHA-256 of each artifact) into ``--out``.  Floats are written in
12-significant-digit scientific notation so repeated runs are
byte-identical.  ``TOPOQUBITS_THREADS`` sets the BLAS thread count when it
is read before numpy is loaded.
"""

from __future__ import annotations

import os

if "TOPOQUBITS_THREADS" in os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["TOPOQUBITS_THREADS"])

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import codes, ed, models, sun, twist, vbs
from .errors import ContractError, ResourceError, TopoQubitsError
from .pauli import QuditPauli, stabilizer_gsd

EXIT_BREACH = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


# -- formatting -----------------------------------------------------------------

def fmt(x) -> str:
    return f"{float(x):.11e}"


def jsonable(obj):
    """Convert results to JSON-ready values with fixed float formatting."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(fmt(obj.real)), float(fmt(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return None
        return float(fmt(obj))
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def to_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


class Artifacts:
    """Collects output files and writes the manifest."""

    def __init__(self, out: Path, config: dict):
        self.out = Path(out)
        self.config = config
        self.files: dict[str, str] = {}

    def write(self, name: str, text: str) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        (self.out / name).write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def finish(self, status: str, checks=()) -> None:
        manifest = {
            "tool": "topoqubits",
            "version": __version__,
            "config": self.config,
            "status": status,
            "checks": [{"name": n, "passed": bool(ok), "detail": d} for n, ok, d in checks],
            "artifacts": dict(sorted(self.files.items())),
        }
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "manifest.json").write_text(to_json(manifest))


# -- model selection ------------------------------------------------------------

def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def model_from_args(args):
    if args.model_file:
        return models.load_model_file(args.model_file)
    if not args.model:
        raise ContractError("give --model-file or --model")
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise ContractError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        params[k] = _parse_value(v)
    return models.model_from_config({"model": args.model, **params})


def _add_model_args(p):
    p.add_argument("--model-file", help="TOML model file with a 'schema' and 'model' key")
    p.add_argument("--model", help="model name (tfim, mg, dimer, heisenberg, vbs_parent, cluster1d, wen1d, "
                                   "toric, wen2d, gauged_ising)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="model parameter, repeatable")


def _model_summary(model) -> dict:
    if isinstance(model, models.StabilizerModel):
        return {"kind": "stabilizer", "name": model.name, "d": model.d, "n": model.n,
                "terms": len(model.terms), "lattice": model.lattice, "params": model.params,
                "gsd_by_rank": stabilizer_gsd(list(model.terms), model.n, model.d),
                "symmetries": sorted(model.symmetries), "logicals": sorted(model.logicals)}
    return {"kind": "spin", "name": model.name, "L": model.L, "spin": str(Fraction(model.two_s, 2)),
            "dim": model.dim, "terms": len(model.terms), "params": model.params,
            "symmetries": list(model.symmetries)}


# -- subcommands ----------------------------------------------------------------

def cmd_model(args, art: Artifacts):
    model = model_from_args(args)
    art.write("model.json", to_json(_model_summary(model)))
    if args.dump:
        if not args.model:
            raise ContractError("--dump needs --model and --param")
        params = dict(item.split("=", 1) for item in args.param or [])
        models.dump_model_file(args.dump, args.model, **{k: _parse_value(v) for k, v in params.items()})
    return []


def _ground_summary(model, g: ed.GroundSpace) -> dict:
    out = {"degeneracy": g.degeneracy, "ground_energy": g.ground_energy, "energies": list(g.energies),
           "gap": g.gap, "splitting": g.splitting, "degeneracy_tol": g.degeneracy_tol,
           "reduced_frame": g.frame is not None}
    if isinstance(model, models.StabilizerModel):
        out["gsd_by_rank"] = stabilizer_gsd(list(model.terms), model.n, model.d)
    return out


def cmd_ed(args, art: Artifacts):
    model = model_from_args(args)
    g = ed.ground_space(model, k_max=args.k_max, degeneracy_tol=args.tol, sector=args.sector,
                        method=args.method, seed=args.seed, cap=args.max_dim)
    res = _ground_summary(model, g)
    art.write("ground_space.json", to_json(res))
    checks = []
    if "gsd_by_rank" in res:
        checks.append(("gsd-rank-vs-ed", res["gsd_by_rank"] == g.degeneracy,
                       f"rank {res['gsd_by_rank']} vs ED {g.degeneracy}"))
    return checks


def _profile(args, L):
    if args.profile == "uniform":
        return twist.TwistSpec.uniform(L, alternating=args.alternating)
    if args.profile == "random":
        return twist.TwistSpec.random_monotone(L, seed=args.seed, alternating=args.alternating)
    return twist.TwistSpec.from_file(args.profile_file, alternating=args.alternating).with_theta(2 * math.pi)


def cmd_twist(args, art: Artifacts):
    model = model_from_args(args)
    if not isinstance(model, models.SpinHamiltonian):
        raise ContractError("twist sweeps need a spin model")
    g = ed.ground_space(model, k_max=args.k_max, seed=args.seed, cap=args.max_dim)
    spec = _profile(args, model.L)
    D = model.local_dim
    # diagonalize F inside the ground space so each state has a definite twist value
    Fm = ed.expectation(g.basis, lambda V: twist.apply_twist(V, spec, D))
    _, U = np.linalg.eig(Fm)
    U, _ = np.linalg.qr(U)
    states = g.basis @ U
    rows = []
    summary = []
    for i in range(states.shape[1]):
        psi = states[:, i] / np.linalg.norm(states[:, i])
        lam = twist.order_parameter(psi, spec, D)
        omega = twist.geometric_phase(psi, spec, args.steps, D)
        summary.append({"state": i, "order_parameter": lam, "geometric_phase": omega})
        for th in np.linspace(0, 2 * math.pi, args.theta_points):
            val = twist.twist_expectation(psi, spec.with_theta(float(th)), D)
            rows.append([i, float(th), float(np.real(val)), float(np.imag(val))])
    art.write("twist_curve.csv", to_csv(["state", "theta", "re", "im"], rows))
    art.write("twist_summary.json", to_json({"degeneracy": g.degeneracy, "states": summary}))
    return []


def cmd_code(args, art: Artifacts):
    model = model_from_args(args)
    report = {}
    checks = []
    if isinstance(model, models.StabilizerModel):
        dist = {}
        for tf in ("any", "x-type", "z-type"):
            r = codes.stabilizer_distance(model, tf, max_weight=args.max_weight, cap=args.cap)
            dist[tf] = {"distance": r.distance, "witness": str(r.witness) if r.witness else None,
                        "complete": r.complete, "lower_bound": r.lower_bound}
        report["distance"] = dist
        report["logical_basis"] = [{"X": str(x), "Z": str(z)} for x, z in codes.logical_basis(model)]
    g = ed.ground_space(model, seed=args.seed, cap=args.max_dim)
    report["ground_space"] = _ground_summary(model, g)
    n = model.n if isinstance(model, models.StabilizerModel) else model.L
    d = model.d if isinstance(model, models.StabilizerModel) else model.local_dim
    if args.kl_weight1 and d == 2:
        errs = [QuditPauli.identity(2, n)] + [QuditPauli.single(2, n, s, a) for s in range(n) for a in "XYZ"]
        r = codes.kl_check(g, errs)
        report["kl_weight1"] = {"correctable": r.correctable, "violation": r.violation,
                                "condition": r.condition, "tol": r.tol}
    if args.scan_weight:
        w, witness = codes.weight_scan(g, n, d, args.scan_weight)
        report["pauli_scan"] = {"max_weight": args.scan_weight, "first_nontrivial_weight": w,
                                "witness": str(witness) if witness else None}
    art.write("code_report.json", to_json(report))
    return checks


def cmd_vbs(args, art: Artifacts):
    S = Fraction(args.S)
    two_s = int(2 * S)
    pairs = [tuple(int(t) for t in p.split(",")) for p in args.pairs] if args.pairs else \
        [(m, two_s - m) for m in range(two_s, -1, -1)]
    deltas = np.linspace(args.delta_min, args.delta_max, args.delta_points)
    rows = vbs.spin_peierls_curve(S, pairs, deltas)
    art.write("spin_peierls.csv", to_csv(["S", "m", "n", "anchor", "delta", "value"],
                                         [[r["S"], r["m"], r["n"], r["anchor"], r["delta"], r["value"]] for r in rows]))
    slopes = []
    for m, n in pairs:
        for anchor in ("even", "odd"):
            s, res = vbs.curve_slope(rows, m, n, anchor)
            slopes.append([str(S), m, n, anchor, s, res])
    art.write("slopes.csv", to_csv(["S", "m", "n", "anchor", "slope", "max_residual"], slopes))
    if args.order_parameter:
        out = []
        for m, n in pairs:
            e = vbs.extrapolate_order_parameter(m, n)
            out.append({"m": m, "n": n, "values": list(e.values), "limit": e.limit, "stability": e.stability})
        art.write("order_parameter.json", to_json(out))
    return []


def cmd_sun(args, art: Artifacts):
    if args.action == "table":
        entries = sun.reproduce_table()
        art.write("table.txt", sun.format_table(entries))
        art.write("table.csv", sun.format_table(entries, "csv"))
        sys.stdout.write(sun.format_table(entries))
        return [("table-rows", all(e.spec.type == e.row.type and e.spec.uc_size == e.row.uc_size for e in entries),
                 "type and unit cell of every row")]
    if not args.N or not args.irrep:
        raise ContractError("sun classify needs --N and --irrep")
    irreps = [sun.irrep(args.N, lab) for lab in args.irrep]
    spec = sun.classify_vbs(args.N, irreps if len(irreps) > 1 else irreps[0])
    art.write("classification.json", to_json({
        "N": spec.N, "on_site": [str(r) for r in spec.on_site], "dims": [sun.dimension(r) for r in irreps],
        "classes": [sun.congruence_class(r) for r in irreps], "type": spec.type, "x": spec.x, "y": spec.y,
        "eta": spec.eta, "uc_size": spec.uc_size, "codes": spec.codes_text()}))
    return []


# -- reproduction recipes --------------------------------------------------------

FIG3_PAIRS = {Fraction(1, 2): [(1, 0), (0, 1)], Fraction(1): [(2, 0), (1, 1), (0, 2)],
              Fraction(3, 2): [(3, 0), (2, 1), (1, 2), (0, 3)]}


def recipe_fig3(art: Artifacts):
    deltas = np.linspace(-1.0, 1.0, 9)
    rows, slopes, checks = [], [], []
    for S, pairs in FIG3_PAIRS.items():
        curve = vbs.spin_peierls_curve(S, pairs, deltas)
        rows += curve
        per = {}
        for m, n in pairs:
            s, res = vbs.curve_slope(curve, m, n, "even")
            per[(m, n)] = s
            slopes.append([str(S), m, n, s, res])
            checks.append((f"fig3-linear-S{S}-{m}{n}", res < 1e-8, f"residual {res:.3e}"))
        ref = [(abs(m - n), s) for (m, n), s in per.items() if m != n]
        unit = abs(ref[0][1]) / ref[0][0]
        dev = max(abs(abs(s) - unit * abs(m - n)) / unit for (m, n), s in per.items())
        checks.append((f"fig3-slope-ratio-S{S}", dev < 1e-6, f"max relative deviation {dev:.3e}"))
    v11 = vbs.spin_peierls_value(1, 1, 0.0)
    v20 = vbs.spin_peierls_value(2, 0, 0.0)
    checks.append(("fig3-S1-delta0-order", v11 < v20, f"(1,1) {v11:.6f} vs (2,0) {v20:.6f}"))
    art.write("fig3_curves.csv", to_csv(["S", "m", "n", "anchor", "delta", "value"],
                                        [[r["S"], r["m"], r["n"], r["anchor"], r["delta"], r["value"]] for r in rows]))
    art.write("fig3_slopes.csv", to_csv(["S", "m", "n", "slope", "max_residual"], slopes))
    return checks


def mg_closed_forms(L: int, theta: float) -> tuple[float, float]:
    c = math.cos(theta / (2 * L))
    return c ** (L / 2), c ** (L / 2 - 1) * math.cos(theta / 2 * (1 - 1 / L))


def recipe_mg_twist(art: Artifacts):
    rows, checks, phases = [], [], []
    for L in (8, 10, 12):
        states = [vbs.to_dense(vbs.build_vbs(1, 0, L)), vbs.to_dense(vbs.build_vbs(0, 1, L))]
        err = 0.0
        for th in np.linspace(2 * math.pi / 16, 2 * math.pi, 16):
            spec = twist.TwistSpec.uniform(L, th)
            exact = mg_closed_forms(L, th)
            for k, psi in enumerate(states):
                val = twist.twist_expectation(psi, spec)
                err = max(err, abs(val - exact[k]))
                rows.append([L, k, float(th), float(val.real), float(val.imag), exact[k]])
        checks.append((f"mg-closed-form-L{L}", err < 1e-9, f"max error {err:.3e}"))
        spec = twist.TwistSpec.uniform(L)
        for k, psi in enumerate(states):
            om = twist.geometric_phase(psi, spec, 256)
            target = 0.0 if k == 0 else math.pi
            dev = abs(math.remainder(om - target, 2 * math.pi))
            phases.append([L, k, om, dev])
            checks.append((f"mg-geometric-phase-L{L}-{k}", dev < 1e-3, f"Omega {om:.6f}"))
    art.write("mg_twist.csv", to_csv(["L", "state", "theta", "re", "im", "closed_form"], rows))
    art.write("mg_phases.csv", to_csv(["L", "state", "geometric_phase", "deviation"], phases))
    return checks


def dimer_algebra(L: int) -> dict:
    """Code-space matrices of translation and the full twist on the MG ground pair."""
    g = ed.ground_space(models.build_mg(L))
    spec = twist.TwistSpec.uniform(L)
    T = ed.expectation(g.basis, lambda V: ed.translate(V, L, 2, 1))
    F = ed.expectation(g.basis, lambda V: twist.apply_twist(V, spec, 2))
    I = np.eye(2)
    return {"L": L, "anticommutator": float(np.max(np.abs(T @ F + F @ T))),
            "T2": float(np.max(np.abs(T @ T - I))), "F2": float(np.max(np.abs(F @ F - I)))}


def recipe_table1(art: Artifacts):
    out, checks = {}, []
    # SSB: Ising chain deep in the ordered phase
    L = 8
    g = ed.ground_space(models.build_tfim(L, 50.0))
    r = codes.candidate_sweep(g, [codes.pauli_candidate(QuditPauli(2, (1,) * L, (0,) * L, 0), "prodX"),
                                  codes.pauli_candidate(QuditPauli.single(2, L, 0, "Z"), "Z1")])
    out["SSB"] = r
    # SPT+SSB: Majumdar-Ghosh
    g = ed.ground_space(models.build_mg(L))
    r = codes.candidate_sweep(g, [codes.translation_candidate(L, 2),
                                  codes.twist_candidate(twist.TwistSpec.uniform(L), 2)])
    out["SPT+SSB"] = r
    # TOP: toric code
    m = models.build_toric(3, 3)
    g = ed.ground_space(m)
    r = codes.candidate_sweep(g, [codes.pauli_candidate(m.logicals[k], k) for k in ("X1", "Z1", "X2", "Z2")],
                              lattice=m.lattice, n_sites=m.n)
    out["TOP"] = r
    expected = {"SSB": ({"point", "bulk"}, 1, 1), "SPT+SSB": ({"bulk"}, L, L), "TOP": ({"string"}, 1, 3)}
    rows = []
    for cls, rep in out.items():
        shapes = {rep.shapes[rep.x_bar], rep.shapes[rep.z_bar]} if rep.x_bar else set()
        dist = rep.distances.get("d")
        exp = expected[cls]
        ok = shapes == exp[0] and rep.logical_support == exp[1] and dist == exp[2]
        checks.append((f"table1-{cls}", ok, f"shape {sorted(shapes)}, support {rep.logical_support}, d {dist}"))
        rows.append([cls, ",".join(sorted(shapes)), rep.logical_support, dist, rep.x_bar, rep.z_bar])
        art.write(f"table1_{cls.replace('+', '_')}.json", rep.to_json() + "\n")
    art.write("table1.csv", to_csv(["class", "shape", "support", "distance", "x_bar", "z_bar"], rows))
    return checks


def recipe_table2(art: Artifacts):
    entries = sun.reproduce_table()
    art.write("table2.txt", sun.format_table(entries))
    art.write("table2.csv", sun.format_table(entries, "csv"))
    ok = all(e.spec.type == e.row.type and e.spec.uc_size == e.row.uc_size for e in entries)
    disagree = [f"SU({e.row.N}) {e.spec.label}" for e in entries if not e.rule_agrees]
    return [("table2-type-and-unit-cell", ok, f"16 rows; structural code rule differs on {disagree}")]


def recipe_wen2d_gsd(art: Artifacts):
    expected = {(4, 4): 4, (4, 3): 2, (3, 3): 2}
    rows, checks = [], []
    for (m, n), gsd in expected.items():
        model = models.build_wen_2d(m, n)
        rank = stabilizer_gsd(list(model.terms), model.n, model.d)
        deg = ed.ground_space(model).degeneracy
        rows.append([m, n, rank, deg, gsd])
        checks.append((f"wen2d-{m}x{n}", rank == deg == gsd, f"rank {rank}, ED {deg}, expected {gsd}"))
    art.write("wen2d_gsd.csv", to_csv(["m", "n", "gsd_rank", "gsd_ed", "expected"], rows))
    return checks


def recipe_fivequbit_kl(art: Artifacts):
    model = models.build_wen_1d(5, 2)
    g = ed.ground_space(model)
    errs = [QuditPauli.identity(2, 5)] + [QuditPauli.single(2, 5, s, a) for s in range(5) for a in "XYZ"]
    kl = codes.kl_check(g, errs, tol=1e-10)
    dist = codes.stabilizer_distance(model)
    rows = []
    for L in range(5, 12):
        mdl = models.build_wen_1d(L, 2)
        dz = codes.stabilizer_distance(mdl, "z-type")
        dx = codes.stabilizer_distance(mdl, "x-type")
        rows.append([L, dz.distance, str(dz.witness), dx.distance, str(dx.witness), math.ceil(L / 3)])
    art.write("fivequbit_kl.json", to_json({"correctable": kl.correctable, "violation": kl.violation,
                                            "condition": kl.condition, "distance": dist.distance,
                                            "witness": str(dist.witness)}))
    art.write("wen1d_distances.csv", to_csv(["L", "d_z", "z_witness", "d_x", "x_witness", "ceil_L_over_3"], rows))
    return [("fivequbit-distance", dist.distance == 3, f"distance {dist.distance}"),
            ("fivequbit-kl", kl.correctable, f"violation {kl.violation:.3e}"),
            ("wen1d-dz", all(r[1] == 3 for r in rows), "d_z = 3 for L = 5..11"),
            ("wen1d-dx", all(abs(r[3] - r[5]) <= 1 for r in rows), "d_x within 1 of ceil(L/3)")]


RECIPES = {
    "fig3": recipe_fig3,
    "mg-twist": recipe_mg_twist,
    "table1": recipe_table1,
    "table2": recipe_table2,
    "wen2d-gsd": recipe_wen2d_gsd,
    "fivequbit-kl": recipe_fivequbit_kl,
}


def cmd_repro(args, art: Artifacts):
    names = list(RECIPES) if args.recipe == "all" else [args.recipe]
    checks = []
    for name in names:
        checks += RECIPES[name](art)
    return checks


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topoqubits", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="topoqubits-out", help="output directory (default: topoqubits-out)")
    common.add_argument("--seed", type=int, default=0, help="seed for Lanczos start vectors and random profiles")
    common.add_argument("--max-dim", type=int, default=ed.DIM_CAP, help="largest Hilbert-space dimension allowed")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("model", parents=[common], help="build a model and print its summary")
    _add_model_args(s)
    s.add_argument("--dump", help="also write the model as a TOML model file")

    s = sub.add_parser("ed", parents=[common], help="ground space by exact diagonalization")
    _add_model_args(s)
    s.add_argument("--k-max", type=int, default=6, help="initial number of lowest levels")
    s.add_argument("--tol", type=float, default=ed.DEFAULT_TOL, help="degeneracy tolerance")
    s.add_argument("--sector", type=float, default=None, help="total S^z sector (spin models)")
    s.add_argument("--method", choices=("auto", "dense", "lanczos"), default="auto", help="eigensolver")

    s = sub.add_parser("twist", parents=[common], help="twist expectation, order parameter and geometric phase")
    _add_model_args(s)
    s.add_argument("--k-max", type=int, default=6, help="initial number of lowest levels")
    s.add_argument("--profile", choices=("uniform", "random", "file"), default="uniform", help="twist profile")
    s.add_argument("--profile-file", help="site angles for --profile file")
    s.add_argument("--alternating", action="store_true", help="alternate the twist sign between sites")
    s.add_argument("--theta-points", type=int, default=16, help="number of twist angles in [0, 2π]")
    s.add_argument("--steps", type=int, default=256, help="discretization steps of the geometric phase")

    s = sub.add_parser("code", parents=[common], help="distances, logical basis and Knill-Laflamme checks")
    _add_model_args(s)
    s.add_argument("--max-weight", type=int, default=None, help="largest Pauli weight enumerated")
    s.add_argument("--cap", type=int, default=50_000_000, help="enumeration budget before a partial result")
    s.add_argument("--kl-weight1", action="store_true", help="check all weight-1 Pauli errors (qubits)")
    s.add_argument("--scan-weight", type=int, default=0, help="Pauli-weight scan up to this weight")

    s = sub.add_parser("vbs", parents=[common], help="spin-Peierls curves of VBS states")
    s.add_argument("--S", default="1", help="spin, e.g. 1/2, 1, 3/2")
    s.add_argument("--pairs", nargs="*", help="bond pairs m,n (default: all with m+n=2S)")
    s.add_argument("--delta-min", type=float, default=-1.0, help="smallest dimerization")
    s.add_argument("--delta-max", type=float, default=1.0, help="largest dimerization")
    s.add_argument("--delta-points", type=int, default=9, help="number of dimerization values")
    s.add_argument("--order-parameter", action="store_true", help="also extrapolate the full-twist value")

    s = sub.add_parser("sun", parents=[common], help="SU(N) VBS classification")
    s.add_argument("action", choices=("table", "classify"), help="print the reference table or classify")
    s.add_argument("--N", type=int, help="SU(N) rank for classify")
    s.add_argument("--irrep", nargs="+", help="irrep label(s), e.g. 8 or 3 3bar")

    s = sub.add_parser("repro", parents=[common], help="run a bundled reproduction recipe")
    s.add_argument("recipe", choices=sorted(RECIPES) + ["all"], help="recipe name")
    return p


COMMANDS = {"model": cmd_model, "ed": cmd_ed, "twist": cmd_twist, "code": cmd_code,
            "vbs": cmd_vbs, "sun": cmd_sun, "repro": cmd_repro}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in sorted(vars(args).items())}
    art = Artifacts(Path(args.out), config)
    try:
        checks = COMMANDS[args.command](args, art)
    except ResourceError as exc:
        art.finish(f"resource error: {exc}")
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ContractError, KeyError, ValueError) as exc:
        art.finish(f"usage error: {exc}")
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TopoQubitsError as exc:
        art.finish(f"error: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BREACH
    failed = [c for c in checks if not c[1]]
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    art.finish("breach" if failed else "ok", checks)
    return EXIT_BREACH if failed else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
