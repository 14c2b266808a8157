import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topoqubits import codes, ed, twist
from topoqubits import models as M
from topoqubits.errors import ContractError
from topoqubits.pauli import QuditPauli, commutation_exponent, to_dense


def repetition_code():
    """|000>, |111> as columns."""
    G = np.zeros((8, 2))
    G[0, 0] = G[7, 1] = 1
    return G


def five_qubit_code():
    gens = [QuditPauli.from_string(w) for w in ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")]
    P = np.eye(32)
    for g in gens:
        P = P @ (np.eye(32) + to_dense(g)) / 2
    w, v = np.linalg.eigh(P)
    return v[:, w > 0.5]


def bit_flips(n):
    return [QuditPauli.identity(2, n)] + [QuditPauli.single(2, n, s, "X") for s in range(n)]


def all_single(n):
    return [QuditPauli.identity(2, n)] + [QuditPauli.single(2, n, s, a) for s in range(n) for a in "XYZ"]


class TestKnillLaflamme:
    def test_repetition_corrects_bit_flips(self):
        r = codes.kl_check(repetition_code(), bit_flips(3))
        assert r.correctable and r.violation < 1e-14
        assert np.allclose(r.C, np.eye(4))

    def test_repetition_fails_phase_flip(self):
        errs = [QuditPauli.identity(2, 3), QuditPauli.single(2, 3, 0, "Z")]
        r = codes.kl_check(repetition_code(), errs)
        assert not r.correctable
        assert r.violation == pytest.approx(1.0)

    def test_five_qubit_code(self):
        G = five_qubit_code()
        assert G.shape[1] == 2
        r = codes.kl_check(G, all_single(5))
        assert r.correctable

    def test_five_qubit_logical_error_fails(self):
        G = five_qubit_code()
        _, logical = codes.weight_scan(G, 5)
        assert not codes.kl_check(G, [QuditPauli.identity(2, 5), logical]).correctable

    def test_nonorthonormal_rejected(self):
        with pytest.raises(ContractError):
            codes.kl_check(2 * repetition_code(), bit_flips(3))

    def test_ground_space_tolerance_tracks_splitting(self):
        g = ed.ground_space(M.build_tfim(8, 50.0))
        r = codes.kl_check(g, bit_flips(8))
        assert r.tol == pytest.approx(max(1e-8, 10 * g.splitting))

    def test_frame_ground_space(self):
        m = M.build_toric(3, 3)
        g = ed.ground_space(m)
        errs = [QuditPauli.identity(2, m.n)] + [QuditPauli.single(2, m.n, s, a) for s in range(m.n) for a in "XZ"]
        r = codes.kl_check(g, errs)
        assert r.correctable
        with pytest.raises(ContractError):
            codes.kl_check(g, [lambda V: V])


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(0, 15), min_size=1))
def test_subsets_of_correctable_sets_stay_correctable(keep):
    G = five_qubit_code()
    errs = all_single(5)
    sub = [errs[i] for i in sorted(keep)]
    r = codes.kl_check(G, sub)
    assert r.correctable
    assert np.allclose(r.C, r.C.conj().T)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.sampled_from("XYZ")), min_size=1, max_size=4))
def test_kl_matrix_hermitian(picks):
    G = five_qubit_code()
    errs = [QuditPauli.single(2, 5, s, a) for s, a in picks]
    r = codes.kl_check(G, errs)
    assert np.allclose(r.C, r.C.conj().T)


class TestWeightScan:
    def test_repetition(self):
        w, p = codes.weight_scan(repetition_code(), 3)
        assert w == 1 and p.weight == 1

    def test_five_qubit(self):
        w, p = codes.weight_scan(five_qubit_code(), 5)
        assert w == 3

    def test_none_below_bound(self):
        assert codes.weight_scan(five_qubit_code(), 5, max_weight=2) == (None, None)


class TestStabilizerDistance:
    def test_five_qubit(self):
        r = codes.stabilizer_distance(M.build_wen_1d(5, 2))
        assert r.distance == 3 and r.complete
        assert r.witness.weight == 3

    @pytest.mark.parametrize("build,d", [
        (lambda: M.build_toric(2, 2), 2), (lambda: M.build_toric(3, 3), 3),
        (lambda: M.build_wen_2d(3, 3), 3), (lambda: M.build_wen_1d(5, 3), 3),
    ])
    def test_known(self, build, d):
        assert codes.stabilizer_distance(build()).distance == d

    def test_wen_chain_types(self):
        for L in range(5, 10):
            m = M.build_wen_1d(L, 2)
            dz = codes.stabilizer_distance(m, "z-type")
            dx = codes.stabilizer_distance(m, "x-type")
            assert dz.distance == 3
            assert abs(dx.distance - math.ceil(L / 3)) <= 1

    def test_cap_gives_partial_result(self):
        r = codes.stabilizer_distance(M.build_toric(3, 3), cap=10)
        assert not r.complete
        assert r.lower_bound >= 1

    def test_witness_is_logical(self):
        m = M.build_toric(3, 3)
        r = codes.stabilizer_distance(m)
        assert all(commutation_exponent(r.witness, t) == 0 for t in m.terms)
        assert not r.witness.is_identity()

    def test_bad_filter(self):
        with pytest.raises(ValueError):
            codes.stabilizer_distance(M.build_wen_1d(5, 2), "y-type")


class TestLogicalBasis:
    def test_pairs_are_symplectic(self):
        m = M.build_toric(3, 3)
        pairs = codes.logical_basis(m)
        assert len(pairs) == 2
        for i, (xi, zi) in enumerate(pairs):
            for j, (xj, zj) in enumerate(pairs):
                assert commutation_exponent(zi, xj) % 2 == (i == j)
                assert commutation_exponent(xi, xj) % 2 == 0
                assert commutation_exponent(zi, zj) % 2 == 0

    def test_coordinates_of_declared(self):
        m = M.build_toric(3, 3)
        pairs = codes.logical_basis(m)
        a, b = codes.logical_coordinates(pairs[0][0], pairs)
        assert a == [1, 0] and b == [0, 0]
        a, b = codes.logical_coordinates(pairs[1][1], pairs)
        assert a == [0, 0] and b == [0, 1]

    def test_normalizer_contains_stabilizers(self):
        m = M.build_wen_1d(5, 2)
        N = codes.normalizer(m)
        assert N.shape[0] == 2 * 5 - 4


class TestShapes:
    def test_chain(self):
        lat = {"kind": "chain", "L": 10}
        assert codes.support_shape({0}, lat, 10) == "point"
        assert codes.support_shape(range(6), lat, 10) == "bulk"
        assert codes.support_shape(range(5, 10), lat, 20) == "segment"

    def test_torus_string(self):
        m = M.build_toric(3, 3)
        assert codes.support_shape(m.logicals["Z1"].support, m.lattice, m.n) == "string"

    def test_unknown_lattice(self):
        with pytest.raises(ValueError):
            codes.lattice_coords({"kind": "hexagon", "Lx": 2, "Ly": 2}, 4)


class TestCandidateSweep:
    def test_ising_ordered(self):
        L = 8
        g = ed.ground_space(M.build_tfim(L, 50.0))
        r = codes.candidate_sweep(g, [
            codes.pauli_candidate(QuditPauli(2, (1,) * L, (0,) * L, 0), "prodX"),
            codes.pauli_candidate(QuditPauli.single(2, L, 0, "Z"), "Z1"),
        ])
        assert r.gsd == 2
        assert {r.x_bar, r.z_bar} == {"prodX", "Z1"}
        statuses = {o.name: o.status for o in r.logical_ops}
        assert statuses["prodX"] == "logical" and statuses["Z1"] == "approximate"
        assert r.shapes == {"prodX": "bulk", "Z1": "point"}

    def test_mg_translation_and_twist(self):
        L = 8
        g = ed.ground_space(M.build_mg(L))
        r = codes.candidate_sweep(g, [codes.translation_candidate(L, 2),
                                      codes.twist_candidate(twist.TwistSpec.uniform(L), 2)])
        assert (r.x_bar, r.z_bar) == ("T", "F")
        assert r.distances["d"] == L
        assert any("approximate" in n for n in r.notes)

    def test_toric_pair_inside_gsd4(self):
        m = M.build_toric(3, 3)
        g = ed.ground_space(m)
        cands = [codes.pauli_candidate(m.logicals[k], k) for k in ("X1", "Z1", "X2", "Z2")]
        r = codes.candidate_sweep(g, cands, lattice=m.lattice, n_sites=m.n)
        assert r.gsd == 4
        assert r.distances["d"] == 3 and r.logical_support == 1
        assert any("2-dimensional factor" in n for n in r.notes)
        payload = json.loads(r.to_json())
        assert payload["gsd"] == 4 and len(payload["logical_ops"]) == 4

    def test_trivial_and_incomplete(self):
        G = repetition_code()
        r = codes.candidate_sweep(G, [codes.pauli_candidate(QuditPauli.from_string("ZZI"), "ZZ")])
        assert r.logical_ops[0].status == "trivial"
        assert r.incomplete and r.x_bar is None

    def test_roles_respected(self):
        G = repetition_code()
        X = codes.pauli_candidate(QuditPauli.from_string("XXX"), "X", role="X")
        Z = codes.pauli_candidate(QuditPauli.from_string("ZII"), "Z", role="Z")
        r = codes.candidate_sweep(G, [Z, X])
        assert (r.x_bar, r.z_bar) == ("X", "Z")

    def test_kl_sets_recorded(self):
        G = repetition_code()
        r = codes.candidate_sweep(G, [codes.pauli_candidate(QuditPauli.from_string("XXX"), "X")],
                                  kl_sets={"bit-flip": bit_flips(3)})
        assert r.kl_results[0]["correctable"]

    def test_reflection_and_global(self):
        L = 6
        g = ed.ground_space(M.build_mg(L))
        X = np.array([[0, 1], [1, 0]])
        r = codes.candidate_sweep(g, [codes.reflection_candidate(L, 2, center=0),
                                      codes.global_candidate(X, L, "flip")])
        names = {o.name: o for o in r.logical_ops}
        assert names["R"].leakage < 1e-8
        assert names["flip"].leakage < 1e-8


def test_logical_action_frame_requires_pauli():
    g = ed.ground_space(M.build_toric(3, 3))
    with pytest.raises(ContractError):
        codes.logical_action(lambda V: V, g)


@pytest.mark.parametrize("build", [lambda: M.build_wen_1d(5, 2), lambda: M.build_wen_1d(7, 2),
                                   lambda: M.build_toric(2, 2), lambda: M.build_wen_2d(3, 3)])
@pytest.mark.parametrize("type_filter", ["any", "x-type", "z-type"])
def test_witness_matches_logical_product(build, type_filter):
    # the witness and X̄^a Z̄^b built from its coordinates act identically up to a phase
    m = build()
    r = codes.stabilizer_distance(m, type_filter)
    pairs = codes.logical_basis(m)
    a, b = codes.logical_coordinates(r.witness, pairs)
    prod = QuditPauli.identity(m.d, m.n)
    for (xb, zb), ai, bi in zip(pairs, a, b):
        prod = prod * xb.power(ai) * zb.power(bi)
    g = ed.ground_space(m)
    Mw, lw = codes.logical_action(r.witness, g)
    Mp, lp = codes.logical_action(prod, g)
    assert lw < 1e-10 and lp < 1e-10
    c = np.vdot(Mp, Mw) / np.vdot(Mp, Mp)
    assert abs(abs(c) - 1) < 1e-10
    assert np.abs(Mw - c * Mp).max() < 1e-10


def test_decorated_toric_xzx():
    r = codes.stabilizer_distance(M.build_gauged_ising(3, 3, "decorated-toric"), "z-type")
    letters = "".join({(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(r.witness.x[k], r.witness.z[k])]
                      for k in sorted(r.witness.support))
    assert r.distance == 3 and letters == "XZX"


def test_wen_chain_is_five_qubit_code_up_to_local_clifford():
    from topoqubits.pauli import rank_mod_p

    def swapped(p):
        # exchange the Y and Z letters on every site (x, z) -> (x, x ^ z)
        return [*p.x, *[(a + b) % 2 for a, b in zip(p.x, p.z)]]

    wen = [swapped(t) for t in M.build_wen_1d(5, 2).terms]
    five = [[*QuditPauli.from_string(w).x, *QuditPauli.from_string(w).z]
            for w in ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")]
    assert rank_mod_p(np.array(wen), 2) == rank_mod_p(np.array(five), 2) == 4
    assert rank_mod_p(np.array(wen + five), 2) == 4
