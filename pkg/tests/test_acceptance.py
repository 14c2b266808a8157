"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line (collected again in the terminal summary)
and then asserts the criterion at its stated tolerance.
"""

import math
import time
from fractions import Fraction

import numpy as np

from topoqubits import codes, ed, sun, twist, vbs
from topoqubits import models as M
from topoqubits.pauli import QuditPauli, stabilizer_gsd


def test_01_stabilizer_gsd_suite(verdict):
    start = time.perf_counter()
    cases = []
    cases += [(f"cluster1d L={L} d={d}", M.build_cluster_1d(L, d), None) for d in (2, 3) for L in range(5, 9)]
    cases += [(f"wen1d L={L} d=2", M.build_wen_1d(L, 2), None) for L in range(5, 11)]
    cases += [(f"wen1d L={L} d=3", M.build_wen_1d(L, 3), None) for L in (5, 6)]
    cases += [(f"toric {s}", M.build_toric(*s), None) for s in ((2, 2), (3, 3))]
    cases += [(f"wen2d {s}", M.build_wen_2d(*s), g) for s, g in (((4, 4), 4), ((4, 3), 2), ((3, 3), 2))]
    cases += [("graph-state (3,3)", M.build_gauged_ising(3, 3, "graph-state"), 1),
              ("decorated-toric (3,3)", M.build_gauged_ising(3, 3, "decorated-toric"), 4)]
    bad = []
    for name, model, expected in cases:
        rank = stabilizer_gsd(list(model.terms), model.n, model.d)
        deg = ed.ground_space(model).degeneracy
        if rank != deg or (expected is not None and deg != expected):
            bad.append(f"{name}: rank {rank}, ED {deg}, expected {expected}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 300
    verdict(1, ok, f"{len(cases)} models, mismatches {bad or 'none'}, {elapsed:.1f} s")
    assert ok


def _letters(p: QuditPauli) -> str:
    return "".join({(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(p.x[k], p.z[k])] for k in sorted(p.support))


def test_02_five_qubit_code(verdict):
    model = M.build_wen_1d(5, 2)
    dist = codes.stabilizer_distance(model)
    g = ed.ground_space(model)
    errs = [QuditPauli.identity(2, 5)] + [QuditPauli.single(2, 5, s, a) for s in range(5) for a in "XYZ"]
    kl = codes.kl_check(g, errs, tol=1e-10)
    rows = []
    for L in range(5, 12):
        m = M.build_wen_1d(L, 2)
        dz = codes.stabilizer_distance(m, "z-type")
        dx = codes.stabilizer_distance(m, "x-type")
        rows.append((L, dz.distance, _letters(dz.witness), dx.distance))
    dz_ok = all(d == 3 and w == "XZX" for _, d, w, _ in rows)
    dx_ok = all(abs(dx - math.ceil(L / 3)) <= 1 for L, _, _, dx in rows)
    ok = dist.distance == 3 and kl.correctable and kl.violation < 1e-10 and dz_ok and dx_ok
    verdict(2, ok, f"d={dist.distance}, KL violation {kl.violation:.1e}, "
                   f"d_z witnesses {sorted({w for *_, w, _ in rows})}, d_x {[r[3] for r in rows]}")
    assert ok


def _closed_forms(L, theta):
    c = math.cos(theta / (2 * L))
    return c ** (L / 2), c ** (L / 2 - 1) * math.cos(theta / 2 * (1 - 1 / L))


def test_03_dimer_twist_closed_forms(verdict):
    err, phase_dev = 0.0, 0.0
    for L in (8, 10, 12):
        states = [vbs.to_dense(vbs.build_vbs(1, 0, L)), vbs.to_dense(vbs.build_vbs(0, 1, L))]
        for th in np.linspace(2 * math.pi / 16, 2 * math.pi, 16):
            exact = _closed_forms(L, th)
            for k, psi in enumerate(states):
                err = max(err, abs(twist.twist_expectation(psi, twist.TwistSpec.uniform(L, th)) - exact[k]))
        for k, psi in enumerate(states):
            om = twist.geometric_phase(psi, twist.TwistSpec.uniform(L), 256)
            phase_dev = max(phase_dev, abs(math.remainder(om - k * math.pi, 2 * math.pi)))
    ok = err < 1e-9 and phase_dev < 1e-3
    verdict(3, ok, f"closed-form error {err:.1e}, geometric-phase deviation {phase_dev:.1e}")
    assert ok


def test_04_dimer_logical_algebra(verdict):
    devs = []
    for L in (8, 10, 12):
        g = ed.ground_space(M.build_mg(L))
        T = ed.expectation(g.basis, lambda V: ed.translate(V, L, 2, 1))
        F = ed.expectation(g.basis, lambda V: twist.apply_twist(V, twist.TwistSpec.uniform(L), 2))
        I = np.eye(2)
        devs.append(max(np.abs(T @ F + F @ T).max(), np.abs(T @ T - I).max(), np.abs(F @ F - I).max()))
    decreasing = all(a > b for a, b in zip(devs, devs[1:]))
    ok = max(devs) < 1e-6 and decreasing
    verdict(4, ok, f"max deviation per L=8,10,12: {[f'{d:.3g}' for d in devs]}, decreasing {decreasing}")
    assert ok


def test_05_spin_peierls_curves(verdict):
    pairs = {Fraction(1, 2): [(1, 0), (0, 1)], Fraction(1): [(2, 0), (1, 1), (0, 2)],
             Fraction(3, 2): [(3, 0), (2, 1), (1, 2), (0, 3)]}
    deltas = np.linspace(-1, 1, 9)
    worst_res, ratio_dev = 0.0, {}
    for S, ps in pairs.items():
        rows = vbs.spin_peierls_curve(S, ps, deltas)
        slopes = {}
        for m, n in ps:
            s, res = vbs.curve_slope(rows, m, n, "even")
            slopes[(m, n)] = s
            worst_res = max(worst_res, res)
        unit = max(abs(s) / abs(m - n) for (m, n), s in slopes.items() if m != n)
        ratio_dev[str(S)] = max(abs(abs(s) - unit * abs(m - n)) / unit for (m, n), s in slopes.items())
    v11, v20 = vbs.spin_peierls_value(1, 1, 0.0), vbs.spin_peierls_value(2, 0, 0.0)
    ok = worst_res < 1e-8 and max(ratio_dev.values()) < 1e-6 and v11 < v20
    verdict(5, ok, f"residual {worst_res:.1e}, slope-ratio deviation by S "
                   f"{ {k: float(f'{v:.3g}') for k, v in ratio_dev.items()} }, "
                   f"value(1,1)={v11:.4f} < value(2,0)={v20:.4f}")
    assert ok


def test_06_vbs_twist_limits(verdict):
    worst = {}
    for m, n in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]:
        ex = vbs.extrapolate_order_parameter(m, n, sizes=(8, 12, 16))
        worst[(m, n)] = abs(ex.limit - (-1) ** n)
    best, peak = min(worst.values()), max(worst.values())
    ok = peak < 1e-4
    verdict(6, ok, f"|limit - (-1)^n| from {best:.1e} to {peak:.1e}")
    assert ok


def test_07_parent_ground_spaces(verdict):
    cases = [(Fraction(1, 2), 1, 0), (1, 2, 0), (1, 1, 1), (Fraction(3, 2), 3, 0), (Fraction(3, 2), 2, 1)]
    bad = []
    for S, m, n in cases:
        for L in (6, 8):
            H = M.build_vbs_parent(S, m, n, L)
            g = ed.ground_space(H)
            expected = 1 if m == n else 2
            A = ed.assemble(H)
            zero_modes = max(np.linalg.norm(A @ vbs.to_dense(vbs.build_vbs(a, b, L))) for a, b in {(m, n), (n, m)})
            if g.degeneracy != expected or abs(g.ground_energy) > 1e-9 or zero_modes > 1e-9:
                bad.append((str(S), m, n, L, g.degeneracy, g.ground_energy, zero_modes))
    ok = not bad
    verdict(7, ok, f"{2 * len(cases)} chains, failures {bad or 'none'}")
    assert ok


def _phase(spec, j, sign=1):
    if spec.type == "II":
        return sun.twist_phase_prediction(spec, edge_exponent=sign * (j + 1))
    eta_l, eta_r = (j % (spec.eta + 1), spec.eta - j % (spec.eta + 1))
    if sign < 0:
        eta_l, eta_r = eta_r, eta_l
    return sun.twist_phase_prediction(spec, eta_l, eta_r, edge_exponent=sign * (j + 1))


def test_08_sun_table(verdict):
    entries = sun.reproduce_table()
    mismatched = [f"SU({e.row.N}) {e.spec.label}: {e.spec.codes_text()} vs {e.row.codes}"
                  for e in entries if not e.rule_agrees]
    phases_ok = True
    for e in entries:
        for j in range(3):
            p = _phase(e.spec, j)
            phases_ok &= (p ** e.spec.N).is_one and _phase(e.spec, j, -1) == p.conjugate()
    ok = not mismatched and phases_ok
    verdict(8, ok, f"{len(entries) - len(mismatched)}/16 rows exact, phase checks {'ok' if phases_ok else 'failed'}, "
                   f"mismatches {mismatched or 'none'}")
    assert ok


def test_09_classical_bit(verdict):
    L = 10
    g = ed.ground_space(M.build_tfim(L, 50.0))
    flips = [QuditPauli.identity(2, L)] + [QuditPauli.single(2, L, s, "X") for s in range(L)]
    kx = codes.kl_check(g, flips)
    kz = codes.kl_check(g, [QuditPauli.identity(2, L), QuditPauli.single(2, L, 0, "Z")])
    ok = g.degeneracy == 2 and kx.correctable and not kz.correctable and kz.violation > 0.5
    verdict(9, ok, f"GSD {g.degeneracy}, X errors violation {kx.violation:.1e}, Z_1 violation {kz.violation:.3f}")
    assert ok


def test_10_tfim_gap_minimum(verdict):
    L = 12
    start = time.perf_counter()
    parity = QuditPauli.from_string("X" * L)
    lam, gap = ed.locate_gap_minimum(lambda x: M.build_tfim(L, x), parity, (0.5, 1.5))
    elapsed = time.perf_counter() - start
    ok = abs(lam - 1) < 0.1 and elapsed < 60
    verdict(10, ok, f"lambda* = {lam:.4f}, gap {gap:.4f}, {elapsed:.1f} s")
    assert ok
