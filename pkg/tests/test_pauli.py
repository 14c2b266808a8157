import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topoqubits.errors import ContractError, ShapeError
from topoqubits.pauli import (
    QuditPauli,
    commutation_exponent,
    group_order,
    nullspace_mod_p,
    rank_mod_p,
    stabilizer_gsd,
    symplectic_basis,
    symplectic_rank,
    to_dense,
    to_sparse,
)


def words(d_values=(2, 3, 4, 5), n_max=3):
    @st.composite
    def build(draw):
        d = draw(st.sampled_from(d_values))
        n = draw(st.integers(1, n_max))
        x = draw(st.lists(st.integers(0, d - 1), min_size=n, max_size=n))
        z = draw(st.lists(st.integers(0, d - 1), min_size=n, max_size=n))
        ph = draw(st.integers(0, 2 * d - 1))
        return QuditPauli(d, tuple(x), tuple(z), ph)

    return build()


@st.composite
def pairs(draw):
    a = draw(words())
    x = draw(st.lists(st.integers(0, a.d - 1), min_size=a.n, max_size=a.n))
    z = draw(st.lists(st.integers(0, a.d - 1), min_size=a.n, max_size=a.n))
    return a, QuditPauli(a.d, tuple(x), tuple(z), draw(st.integers(0, 2 * a.d - 1)))


class TestSingleSite:
    def test_qubit_letters(self):
        X = to_dense(QuditPauli.single(2, 1, 0, "X"))
        Y = to_dense(QuditPauli.single(2, 1, 0, "Y"))
        Z = to_dense(QuditPauli.single(2, 1, 0, "Z"))
        assert np.allclose(X, [[0, 1], [1, 0]])
        assert np.allclose(Y, [[0, -1j], [1j, 0]])
        assert np.allclose(Z, [[1, 0], [0, -1]])

    def test_shift_and_clock(self):
        d = 3
        X = to_dense(QuditPauli.single(d, 1, 0, "X"))
        Z = to_dense(QuditPauli.single(d, 1, 0, "Z"))
        w = np.exp(2j * np.pi / d)
        assert np.allclose(X @ np.eye(d)[:, 0], np.eye(d)[:, 1])
        assert np.allclose(np.diag(Z), w ** np.arange(d))
        assert np.allclose(Z @ X, w * X @ Z)

    def test_from_ops_dagger_letters(self):
        p = QuditPauli.from_ops(3, 2, {0: "X†", 1: "Z^2"})
        q = QuditPauli.single(3, 2, 0, "X").dagger() * QuditPauli.single(3, 2, 1, "Z", 2)
        assert p == q

    def test_from_string(self):
        p = QuditPauli.from_string("XZZXI")
        assert p.weight == 4 and p.support == frozenset({0, 1, 2, 3})

    def test_parse_round_trip(self):
        p = QuditPauli.from_ops(5, 4, {0: "X^2", 3: "ZX"})
        assert QuditPauli.parse(str(p), 5, 4) == p

    def test_bad_site(self):
        with pytest.raises(ShapeError):
            QuditPauli.single(2, 3, 3, "X")

    def test_bad_letter(self):
        with pytest.raises(ValueError):
            QuditPauli.single(2, 3, 0, "W")

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            QuditPauli.identity(2, 2) * QuditPauli.identity(3, 2)


@settings(max_examples=60, deadline=None)
@given(pairs())
def test_product_matches_matrices(pair):
    a, b = pair
    assert np.allclose(to_dense(a * b), to_dense(a) @ to_dense(b))


@settings(max_examples=60, deadline=None)
@given(pairs())
def test_commutation_exponent_matches_matrices(pair):
    a, b = pair
    k = commutation_exponent(a, b)
    w = np.exp(2j * np.pi / a.d)
    A, B = to_dense(a), to_dense(b)
    assert np.allclose(A @ B, w**k * B @ A)


@settings(max_examples=40, deadline=None)
@given(pairs())
def test_commutation_antisymmetric(pair):
    a, b = pair
    assert (commutation_exponent(a, b) + commutation_exponent(b, a)) % a.d == 0


@settings(max_examples=40, deadline=None)
@given(words())
def test_dagger_is_adjoint_and_inverse(p):
    assert np.allclose(to_dense(p.dagger()), to_dense(p).conj().T)
    assert (p * p.dagger()).is_identity()


@settings(max_examples=40, deadline=None)
@given(words())
def test_order_fixed_has_order_d(p):
    q = p.order_fixed()
    assert q.power(p.d).is_identity()


@settings(max_examples=30, deadline=None)
@given(words(), words())
def test_associativity(p, q):
    if (p.d, p.n) != (q.d, q.n):
        return
    r = p.dagger()
    assert (p * q) * r == p * (q * r)


@settings(max_examples=30, deadline=None)
@given(words())
def test_sparse_matches_dense(p):
    assert np.allclose(to_sparse(p).toarray(), to_dense(p))


class TestLinearAlgebra:
    def test_rank_and_nullspace(self):
        m = np.array([[1, 2, 0], [2, 4, 0], [0, 1, 1]])
        assert rank_mod_p(m, 3) == 2
        N = nullspace_mod_p(m, 3)
        assert N.shape == (1, 3)
        assert not np.any((m @ N.T) % 3)

    def test_group_order_composite(self):
        # Z^2 on one ququart generates {1, Z^2}
        g = [QuditPauli.single(4, 1, 0, "Z", 2)]
        assert group_order(g) == 2
        assert stabilizer_gsd(g, 1, 4) == 2

    def test_noncommuting_rejected(self):
        with pytest.raises(ContractError):
            symplectic_rank([QuditPauli.from_string("X"), QuditPauli.from_string("Z")])

    def test_ghz_stabilizers(self):
        gens = [QuditPauli.from_string(w) for w in ("ZZI", "IZZ", "ZIZ")]
        assert symplectic_rank(gens) == 2
        assert stabilizer_gsd(gens, 3, 2) == 2
        basis = symplectic_basis(gens, 2, 3)
        assert basis.rank == 2 and len(basis.generators) == 2
