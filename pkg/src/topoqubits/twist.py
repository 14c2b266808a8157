"""Twist (flux-insertion) operators ``F = ⊗_n exp(i θ_n g_n)``.

Site ``n`` (0-based) carries the angle ``θ_n = f_n θ`` where the profile
fractions ``f_n`` increase to ``f_{L-1} = 1``; the wrap-around bond
``(L-1, 0)`` is where the accumulated angle drops back to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, PathDegeneracyError, ShapeError
from .models import SpinHamiltonian, Term

GENERATORS = ("sz", "sz-half", "flavor")
DEFAULT_STEP_FACTOR = 4 * math.pi


@dataclass(frozen=True)
class TwistSpec:
    L: int
    theta_total: float
    fractions: tuple
    generator: str = "sz"
    alternating: bool = False
    flavor: int = 0
    grouping: tuple | None = None
    max_step_factor: float = DEFAULT_STEP_FACTOR

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if len(self.fractions) != self.L:
            raise ShapeError(f"profile has {len(self.fractions)} entries for L={self.L}")
        f = np.asarray(self.fractions, dtype=float)
        if abs(f[-1] - 1.0) > 1e-12:
            raise ContractError("profile must end at the full twist (last fraction 1)")
        steps = np.diff(np.concatenate([[0.0], f])) * abs(self.theta_total)
        if np.max(np.abs(steps)) > self.max_step_factor / self.L + 1e-12:
            raise ContractError(
                f"profile step {np.max(np.abs(steps)):.4g} exceeds {self.max_step_factor:.4g}/L"
            )
        if self.grouping is not None and max(self.grouping) >= self.L:
            raise ShapeError("grouping refers to a profile entry beyond L")

    @classmethod
    def uniform(cls, L: int, theta: float = 2 * math.pi, **kw) -> "TwistSpec":
        return cls(L, theta, tuple((n + 1) / L for n in range(L)), **kw)

    @classmethod
    def random_monotone(cls, L: int, theta: float = 2 * math.pi, seed: int = 0, **kw) -> "TwistSpec":
        rng = np.random.default_rng(seed)
        inc = rng.uniform(0.5, 1.5, size=L)
        f = np.cumsum(inc) / inc.sum()
        f[-1] = 1.0
        return cls(L, theta, tuple(float(v) for v in f), **kw)

    @classmethod
    def from_angles(cls, angles, **kw) -> "TwistSpec":
        a = np.asarray(angles, dtype=float)
        total = float(a[-1])
        if total == 0:
            raise ContractError("user profile must accumulate a nonzero total angle")
        return cls(len(a), total, tuple(float(v) for v in a / total), **kw)

    @classmethod
    def from_file(cls, path, **kw) -> "TwistSpec":
        """Angles (radians), whitespace- or comma-separated, one per site."""
        with open(path) as fh:
            text = fh.read().replace(",", " ")
        return cls.from_angles([float(t) for t in text.split()], **kw)

    def with_theta(self, theta: float) -> "TwistSpec":
        return TwistSpec(self.L, theta, self.fractions, self.generator, self.alternating,
                         self.flavor, self.grouping, self.max_step_factor)

    @property
    def n_sites(self) -> int:
        return self.L if self.grouping is None else len(self.grouping)

    def site_angles(self) -> np.ndarray:
        """Signed angle multiplying ``g`` on each physical site."""
        theta = np.asarray(self.fractions) * self.theta_total
        if self.grouping is not None:
            idx = np.asarray(self.grouping)
        else:
            idx = np.arange(self.L)
        ang = theta[idx]
        if self.alternating:
            ang = ang * (-1.0) ** np.arange(len(ang))
        return ang


def generator_diagonal(spec: TwistSpec, local_dim: int) -> np.ndarray:
    """Diagonal of the single-site generator ``g``."""
    s = (local_dim - 1) / 2
    if spec.generator == "sz":
        return s - np.arange(local_dim)
    if spec.generator == "sz-half":
        return s - np.arange(local_dim) - 0.5
    if not 0 <= spec.flavor < local_dim:
        raise ShapeError(f"flavor {spec.flavor} not available on a {local_dim}-level site")
    g = np.zeros(local_dim)
    g[spec.flavor] = 1.0
    return g


def _dims(spec: TwistSpec, local_dim_map):
    if isinstance(local_dim_map, (int, np.integer)):
        return [int(local_dim_map)] * spec.n_sites
    dims = list(local_dim_map)
    if len(dims) != spec.n_sites:
        raise ShapeError(f"{len(dims)} local dimensions for {spec.n_sites} sites")
    return dims


def realize(spec: TwistSpec, local_dim_map) -> list:
    """Per-site unitaries ``exp(i θ_n g_n)`` (diagonal matrices)."""
    ang = spec.site_angles()
    return [np.diag(np.exp(1j * a * generator_diagonal(spec, D))) for a, D in zip(ang, _dims(spec, local_dim_map))]


def twist_diagonal(spec: TwistSpec, local_dim: int) -> np.ndarray:
    """``A = Σ_n (θ_n/θ) g_n`` on the full basis, so that ``F(θ) = exp(iθA)``."""
    g = generator_diagonal(spec, local_dim)
    ang = spec.with_theta(1.0).site_angles()
    out = np.zeros(1)
    for a in ang:
        out = (out[:, None] + a * g[None, :]).reshape(-1)
    return out


def apply_twist(states, spec: TwistSpec, local_dim: int) -> np.ndarray:
    phase = np.exp(1j * spec.theta_total * twist_diagonal(spec, local_dim))
    states = np.asarray(states)
    return phase * states if states.ndim == 1 else phase[:, None] * states


def _check_normalized(psi):
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > 1e-8:
        raise ContractError(f"state norm {nrm:.6g} is not 1")


def order_parameter(state, spec: TwistSpec, local_dim: int = 2) -> complex:
    """``λ(G) = <G|F(2π)|G>`` for a normalized state."""
    if abs(spec.theta_total - 2 * math.pi) > 1e-12:
        raise ContractError("the order parameter uses the full 2π twist")
    psi = np.asarray(state)
    _check_normalized(psi)
    return complex(np.vdot(psi, apply_twist(psi, spec, local_dim)))


def twist_expectation(state, spec: TwistSpec, local_dim: int = 2) -> complex:
    """``<G|F(θ)|G>`` for any total angle."""
    psi = np.asarray(state)
    return complex(np.vdot(psi, apply_twist(psi, spec, local_dim)) / np.vdot(psi, psi).real)


def geometric_phase(state, spec: TwistSpec, steps: int = 256, local_dim: int = 2) -> float:
    """Discrete Berry phase of the closed polygon ``G_0, G_1, ..., G_N, G_0``.

    ``G_k = F(θ_k)|G>`` with ``θ_k = 2πk/N``; the last link closes the path
    back to ``G_0`` so the product of overlaps is gauge invariant.  The
    result lies in ``(-π, π]``.
    """
    if steps < 16:
        raise ContractError("geometric phase needs at least 16 steps")
    psi = np.asarray(state)
    _check_normalized(psi)
    a = twist_diagonal(spec, local_dim)
    w = np.abs(psi) ** 2
    total = spec.theta_total
    dt = total / steps
    # every link G_k -> G_{k+1} has the same overlap because F is diagonal
    links = [(k, complex(np.sum(w * np.exp(1j * dt * a)))) for k in range(steps)]
    links.append((steps, complex(np.sum(w * np.exp(-1j * total * a)))))
    acc = 0.0
    for k, ov in links:
        if abs(ov) < 1e-12:
            raise PathDegeneracyError(f"overlap vanishes on segment {k}", segment=k)
        acc += np.angle(ov)
    omega = -acc
    return float(math.remainder(omega, 2 * math.pi))


def twisted_hamiltonian(H: SpinHamiltonian, theta: float, spec: TwistSpec | None = None) -> SpinHamiltonian:
    """``F(θ)† H F(θ)`` written term by term.

    Exchange terms pick up the hopping phase ``exp(i(φ_j - φ_i))`` with
    ``φ_n`` the signed site angle; ``zz`` and field terms are unchanged;
    ``S^z``-conserving dense terms are conjugated explicitly.
    """
    if spec is None:
        spec = TwistSpec.uniform(H.L, theta)
    else:
        spec = spec.with_theta(theta)
    if spec.n_sites != H.L:
        raise ShapeError("twist profile does not match the chain length")
    if spec.generator == "flavor":
        raise ContractError("exchange terms are covariant only under the S^z generators")
    bad = [t for t in H.terms if t.kind == "transverse-x"]
    if bad:
        raise ContractError(f"terms not covariant under the twist: {[(t.kind, t.sites) for t in bad]}")
    phi = spec.site_angles()
    g = generator_diagonal(TwistSpec.uniform(1, 1.0), H.local_dim)
    out = []
    for t in H.terms:
        if t.kind == "heisenberg-exchange":
            i, j = t.sites
            base = 1.0 if t.params is None else t.params
            out.append(Term(t.sites, t.coeff, t.kind, base * np.exp(1j * (phi[j] - phi[i]))))
        elif t.kind in ("zz", "field-z"):
            out.append(t)
        else:
            block = H.block(t)
            d = np.ones(1, dtype=complex)
            for s in t.sites:
                d = np.kron(d, np.exp(1j * phi[s] * g))
            conj = (d.conj()[:, None] * block) * d[None, :]
            # S^z-conserving blocks are covariant; anything else would mix sectors
            if not np.allclose(conj, block, atol=1e-12) and not _conserves(block, H.two_s, len(t.sites)):
                raise ContractError(f"term {t.kind} on {t.sites} is not covariant under the twist")
            out.append(Term(t.sites, 1.0, "custom-dense-block", block=conj))
    return H.with_terms(out, name=H.name + "-twisted", params={**H.params, "theta": theta})


def _conserves(block, two_s, arity) -> bool:
    from .spin import embed_ops, spin_ops

    sz = sum(embed_ops(two_s, {k: spin_ops(two_s)["z"]}, arity) for k in range(arity))
    return bool(np.max(np.abs(block @ sz - sz @ block)) < 1e-12)
