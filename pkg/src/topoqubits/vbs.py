"""SU(2) valence-bond-solid states ``|Ξ_mn>`` as periodic matrix-product states.

Bond ``(r, r+1)`` (0-based) carries ``m`` singlets when ``r`` is even and
``n`` when ``r`` is odd, so the wrap-around bond carries ``n``.  Each site
symmetrizes its ``m + n`` virtual spin-1/2 legs into spin ``S = (m+n)/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import spin as spin_mod
from .errors import ContractError, ResourceError, ShapeError
from .twist import TwistSpec, realize

DENSE_CAP = 2**20


@dataclass(frozen=True)
class MpsState:
    """Periodic MPS; ``tensors[r][s]`` is the matrix for physical index ``s``."""

    L: int
    two_s: int
    m: int
    n: int
    tensors: tuple

    @property
    def phys_dim(self) -> int:
        return self.two_s + 1

    @property
    def bond_dims(self) -> tuple:
        return tuple(t.shape[2] for t in self.tensors)


def _coupling_tensor(p: int, q: int) -> np.ndarray:
    """``<S, s | p/2, a ; q/2, b>`` for the stretched coupling ``S = (p+q)/2``."""
    D = p + q + 1
    C = np.zeros((D, p + 1, q + 1))
    for a in range(p + 1):
        for b in range(q + 1):
            C[a + b, a, b] = math.sqrt(math.comb(p, a) * math.comb(q, b) / math.comb(p + q, a + b))
    return C


def _singlet(q: int) -> np.ndarray:
    """Spin-q/2 singlet ``Σ_m (-1)^(j-m) |m>|-m>`` as a matrix."""
    eps = np.zeros((q + 1, q + 1))
    for b in range(q + 1):
        eps[b, q - b] = (-1) ** b
    return eps


def build_vbs(m: int, n: int, L: int) -> MpsState:
    if L % 2:
        raise ShapeError(f"VBS chains need even L, got {L}")
    if m < 0 or n < 0 or m + n == 0:
        raise ContractError(f"need m, n >= 0 with m + n > 0; got ({m}, {n})")
    tensors = []
    for r in range(L):
        left, right = (n, m) if r % 2 == 0 else (m, n)
        C = _coupling_tensor(left, right)
        tensors.append(np.einsum("sab,bc->sac", C, _singlet(right)))
    return MpsState(L, m + n, m, n, tuple(tensors))


def to_dense(psi: MpsState, normalize: bool = True) -> np.ndarray:
    D = psi.phys_dim
    if D**psi.L > DENSE_CAP:
        raise ResourceError(f"dense dimension {D ** psi.L} exceeds cap {DENSE_CAP}")
    acc = psi.tensors[0]  # (states, left, right)
    for t in psi.tensors[1:]:
        acc = np.einsum("xab,sbc->xsac", acc, t).reshape(-1, acc.shape[1], t.shape[2])
    vec = np.einsum("xaa->x", acc)
    if normalize:
        vec = vec / np.linalg.norm(vec)
    return vec


def _site_transfer(t: np.ndarray, op: np.ndarray | None) -> np.ndarray:
    if op is None:
        E = np.einsum("sab,scd->acbd", t.conj(), t)
    else:
        E = np.einsum("sab,st,tcd->acbd", t.conj(), op, t)
    chi_l, chi_r = t.shape[1], t.shape[2]
    return E.reshape(chi_l * chi_l, chi_r * chi_r)


def _log_trace(psi: MpsState, ops) -> tuple[complex, float]:
    """Trace of the transfer-matrix product as (mantissa, log scale)."""
    M = None
    log = 0.0
    for r, t in enumerate(psi.tensors):
        E = _site_transfer(t, ops[r])
        M = E.astype(complex) if M is None else M @ E
        s = np.max(np.abs(M))
        if s == 0:
            return 0j, 0.0
        M = M / s
        log += math.log(s)
    return complex(np.trace(M)), log


def _normalize_ops(psi: MpsState, ops):
    if isinstance(ops, dict):
        out = [None] * psi.L
        for r, o in ops.items():
            out[r % psi.L] = o
        ops = out
    ops = list(ops)
    if len(ops) != psi.L:
        raise ShapeError(f"{len(ops)} operators for {psi.L} sites")
    for o in ops:
        if o is not None and np.asarray(o).shape != (psi.phys_dim, psi.phys_dim):
            raise ShapeError(f"operator of shape {np.asarray(o).shape} on a {psi.phys_dim}-level site")
    return ops


def transfer_expectation(psi: MpsState, ops) -> complex:
    """``<ψ|⊗_r O_r|ψ> / <ψ|ψ>``; ``ops`` is a list (None = identity) or a site dict."""
    ops = _normalize_ops(psi, ops)
    num, lnum = _log_trace(psi, ops)
    den, lden = _log_trace(psi, [None] * psi.L)
    return num / den * math.exp(lnum - lden)


def norm_squared(psi: MpsState) -> float:
    den, lden = _log_trace(psi, [None] * psi.L)
    return float(den.real * math.exp(lden))


def bond_energy(psi: MpsState, i: int) -> float:
    """``<S_i · S_{i+1}>``."""
    o = spin_mod.spin_ops(psi.two_s)
    j = (i + 1) % psi.L
    val = transfer_expectation(psi, {i: o["z"], j: o["z"]})
    val += 0.5 * transfer_expectation(psi, {i: o["+"], j: o["-"]})
    val += 0.5 * transfer_expectation(psi, {i: o["-"], j: o["+"]})
    return float(val.real)


def twist_order_parameter(psi: MpsState, profile: TwistSpec | None = None) -> complex:
    """``<ψ|F|ψ>/<ψ|ψ>`` with the full uniform twist unless a profile is given."""
    if profile is None:
        profile = TwistSpec.uniform(psi.L)
    if profile.n_sites != psi.L:
        raise ShapeError("twist profile does not match the chain length")
    return transfer_expectation(psi, realize(profile, psi.phys_dim))


@dataclass(frozen=True)
class Extrapolation:
    sizes: tuple
    values: tuple
    limit: complex
    coefficients: tuple
    stability: float


def extrapolate_order_parameter(m: int, n: int, sizes=(8, 12, 16)) -> Extrapolation:
    """Large-L limit of the full-twist order parameter.

    ``ln|λ_L|`` is fitted exactly by ``c0 + c1/L + c3/L^3`` (the corrections
    are odd in 1/L) and the phase is taken from the largest size.  The
    stability figure is the change of the limit when the size window is
    shifted by one step.
    """
    sizes = tuple(sizes)
    if len(sizes) != 3:
        raise ValueError("extrapolation uses exactly three sizes")
    vals = tuple(twist_order_parameter(build_vbs(m, n, L)) for L in sizes)

    def fit(Ls, vs):
        A = np.array([[1.0, 1.0 / L, 1.0 / L**3] for L in Ls])
        c = np.linalg.solve(A, np.log(np.abs(vs)))
        return c

    c = fit(sizes, vals)
    phase = vals[-1] / abs(vals[-1])
    limit = complex(phase * math.exp(c[0]))
    step = sizes[-1] - sizes[-2]
    shifted = sizes[1:] + (sizes[-1] + step,)
    c2 = fit(shifted, vals[1:] + (twist_order_parameter(build_vbs(m, n, shifted[-1])),))
    return Extrapolation(sizes, vals, limit, tuple(c), abs(math.exp(c2[0]) - math.exp(c[0])))


# -- spin-Peierls curves ----------------------------------------------------

def bulk_bond_energies(m: int, n: int, tol: float = 1e-10, L0: int = 16, max_L: int = 512) -> tuple[float, float]:
    """Bulk ``<S_r·S_{r+1}>`` on even and odd bonds (0-based r), converged in L."""
    prev = None
    L = L0
    while L <= max_L:
        psi = build_vbs(m, n, L)
        cur = (bond_energy(psi, 0), bond_energy(psi, 1))
        if prev is not None and max(abs(a - b) for a, b in zip(cur, prev)) < tol:
            return cur
        prev, L = cur, 2 * L
    raise ContractError(f"bond energies of ({m},{n}) did not converge by L={max_L}")


def spin_peierls_value(m: int, n: int, delta: float, anchor: str = "even") -> float:
    """``<(1-δ) h_{r,r+1} + (1+δ) h_{r+1,r+2}>`` in the bulk.

    ``r`` is counted from 1 as in the staggered chain, whose even bonds carry
    weight ``1 - δ``.  The ``even`` anchor therefore evaluates the chain's own
    energy per two bonds; the ``odd`` anchor shifts the pair by one bond.
    """
    if anchor not in ("even", "odd"):
        raise ValueError(f"anchor must be 'even' or 'odd', got {anchor!r}")
    e_even, e_odd = bulk_bond_energies(m, n)
    # an even bond counted from 1 is an odd bond counted from 0
    first, second = (e_odd, e_even) if anchor == "even" else (e_even, e_odd)
    return (1 - delta) * first + (1 + delta) * second


def spin_peierls_curve(S, pairs, deltas, anchors=("even", "odd")) -> list[dict]:
    """Rows ``{S, m, n, anchor, delta, value}`` for every pair, anchor and δ."""
    two_s = spin_mod.as_two_s(S)
    rows = []
    for m, n in pairs:
        if m + n != two_s:
            raise ContractError(f"pair ({m},{n}) does not add up to 2S={two_s}")
        for anchor in anchors:
            for d in deltas:
                rows.append({"S": str(Fraction(two_s, 2)), "m": m, "n": n, "anchor": anchor,
                             "delta": float(d), "value": spin_peierls_value(m, n, float(d), anchor)})
    return rows


def curve_slope(rows, m: int, n: int, anchor: str = "even") -> tuple[float, float]:
    """Least-squares slope and max residual of the value-vs-δ line."""
    pts = [(r["delta"], r["value"]) for r in rows if r["m"] == m and r["n"] == n and r["anchor"] == anchor]
    x, y = np.array(pts).T
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(np.max(np.abs(A @ coef - y)))
