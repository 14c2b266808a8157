import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topoqubits import ed, twist
from topoqubits import models as M
from topoqubits.errors import ContractError, PathDegeneracyError, ShapeError
from topoqubits.twist import TwistSpec


def dimer_state(L, shift):
    """Product of singlets on bonds (shift + 2k, shift + 2k + 1 mod L), built site by site."""
    psi = np.zeros(2**L)
    pairs = [((shift + 2 * k) % L, (shift + 2 * k + 1) % L) for k in range(L // 2)]
    for bits in range(2 ** (L // 2)):
        conf = [0] * L
        sign = 1.0
        for b, (i, j) in enumerate(pairs):
            up_first = (bits >> b) & 1
            conf[i], conf[j] = (0, 1) if up_first else (1, 0)
            sign *= 1.0 if up_first else -1.0
        idx = int("".join(map(str, conf)), 2)
        psi[idx] = sign
    return psi / np.linalg.norm(psi)


def closed_form(L, theta, wraps):
    c = math.cos(theta / (2 * L))
    if not wraps:
        return c ** (L / 2)
    return c ** (L / 2 - 1) * math.cos(theta / 2 * (1 - 1 / L))


class TestSpec:
    def test_uniform_angles(self):
        s = TwistSpec.uniform(4)
        assert np.allclose(s.site_angles(), [math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi])

    def test_profile_must_end_at_one(self):
        with pytest.raises(ContractError):
            TwistSpec(3, 2 * math.pi, (0.2, 0.4, 0.9))

    def test_step_bound(self):
        with pytest.raises(ContractError):
            TwistSpec(8, 2 * math.pi, (0, 0, 0, 0, 0, 0, 0, 1.0))

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            TwistSpec(3, 2 * math.pi, (0.5, 1.0))

    def test_from_file(self, tmp_path):
        p = tmp_path / "angles.txt"
        p.write_text("0.5, 1.0\n1.5 2.0")
        s = TwistSpec.from_file(p)
        assert s.L == 4 and s.theta_total == 2.0
        assert np.allclose(s.site_angles(), [0.5, 1.0, 1.5, 2.0])

    def test_alternating_and_grouping(self):
        s = TwistSpec.uniform(2, alternating=True, grouping=(0, 0, 1, 1))
        assert s.n_sites == 4
        assert np.allclose(s.site_angles(), [math.pi, -math.pi, 2 * math.pi, -2 * math.pi])

    def test_flavor_generator(self):
        s = TwistSpec.uniform(3, generator="flavor", flavor=1)
        assert np.allclose(twist.generator_diagonal(s, 3), [0, 1, 0])
        with pytest.raises(ShapeError):
            twist.generator_diagonal(TwistSpec.uniform(3, generator="flavor", flavor=5), 3)

    def test_realize_matches_diagonal(self):
        s = TwistSpec.random_monotone(4, seed=3)
        ops = twist.realize(s, 2)
        full = reduce(np.kron, ops)
        assert np.allclose(np.diag(full), np.exp(1j * s.theta_total * twist.twist_diagonal(s, 2)))


class TestDimerOverlaps:
    @pytest.mark.parametrize("L", [6, 8, 10])
    @pytest.mark.parametrize("shift", [0, 1])
    def test_closed_forms(self, L, shift):
        psi = dimer_state(L, shift)
        for th in np.linspace(0.3, 2 * math.pi, 7):
            val = twist.twist_expectation(psi, TwistSpec.uniform(L, th))
            assert val == pytest.approx(closed_form(L, th, wraps=shift == 1), abs=1e-12)

    def test_order_parameter_signs(self):
        L = 10
        spec = TwistSpec.uniform(L)
        assert twist.order_parameter(dimer_state(L, 0), spec).real > 0
        assert twist.order_parameter(dimer_state(L, 1), spec).real < 0

    def test_order_parameter_requires_full_twist(self):
        with pytest.raises(ContractError):
            twist.order_parameter(dimer_state(6, 0), TwistSpec.uniform(6, 1.0))

    def test_order_parameter_requires_norm(self):
        with pytest.raises(ContractError):
            twist.order_parameter(2 * dimer_state(6, 0), TwistSpec.uniform(6))

    def test_geometric_phases(self):
        L = 8
        spec = TwistSpec.uniform(L)
        assert abs(twist.geometric_phase(dimer_state(L, 0), spec)) < 1e-3
        om = twist.geometric_phase(dimer_state(L, 1), spec)
        assert abs(abs(om) - math.pi) < 1e-3


class TestGeometricPhase:
    def test_degenerate_path(self):
        # for |00> + |11> the closing link back to G_0 has zero overlap
        psi = np.zeros(4)
        psi[0] = psi[3] = 1 / math.sqrt(2)
        spec = TwistSpec.uniform(2, theta=2 * math.pi, max_step_factor=20)
        with pytest.raises(PathDegeneracyError) as exc:
            twist.geometric_phase(psi, spec, steps=16)
        assert exc.value.segment == 16

    def test_too_few_steps(self):
        with pytest.raises(ContractError):
            twist.geometric_phase(dimer_state(6, 0), TwistSpec.uniform(6), steps=8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_geometric_phase_converges(seed):
    rng = np.random.default_rng(seed)
    L = 6
    psi = rng.standard_normal(2**L) + 1j * rng.standard_normal(2**L)
    psi /= np.linalg.norm(psi)
    spec = TwistSpec.uniform(L)
    try:
        a = twist.geometric_phase(psi, spec, steps=512)
        b = twist.geometric_phase(psi, spec, steps=1024)
    except PathDegeneracyError:
        return
    assert abs(math.remainder(a - b, 2 * math.pi)) < 1e-2


class TestTwistedHamiltonian:
    def test_conjugation(self):
        H = M.build_mg(8)
        th = 1.1
        spec = TwistSpec.uniform(8, th)
        Ht = ed.assemble(twist.twisted_hamiltonian(H, th)).toarray()
        A = ed.assemble(H).toarray()
        f = np.exp(1j * th * twist.twist_diagonal(spec, 2))
        assert np.allclose(Ht, f.conj()[:, None] * A * f[None, :])

    def test_transverse_field_rejected(self):
        H = M.build_tfim(6, 0.0)
        with pytest.raises(ContractError):
            twist.twisted_hamiltonian(H, 1.0)

    def test_dense_terms_twisted(self):
        H = M.build_vbs_parent(1, 1, 1, 4)
        th = 0.7
        spec = TwistSpec.uniform(4, th)
        Ht = ed.assemble(twist.twisted_hamiltonian(H, th)).toarray()
        A = ed.assemble(H).toarray()
        f = np.exp(1j * th * twist.twist_diagonal(spec, 3))
        assert np.allclose(Ht, f.conj()[:, None] * A * f[None, :])

    def test_flavor_rejected(self):
        with pytest.raises(ContractError):
            twist.twisted_hamiltonian(M.build_mg(6), 1.0, TwistSpec.uniform(6, generator="flavor"))


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.integers(0, 1000))
def test_twisted_isospectral(theta, seed):
    H = M.build_dimer_hd(6, 0.3, 0.1)
    spec = TwistSpec.random_monotone(6, seed=seed)
    a = np.linalg.eigvalsh(ed.assemble(H).toarray())
    b = np.linalg.eigvalsh(ed.assemble(twist.twisted_hamiltonian(H, theta, spec)).toarray())
    assert np.allclose(a, b, atol=1e-10)
