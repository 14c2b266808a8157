"""Sparse assembly and ground-space extraction.

Basis states are indexed with site 0 as the most significant digit; for spin
models digit ``i`` on a site means ``S^z = S - i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ContractError, NumericError, ResourceError, ShapeError
from .models import SpinHamiltonian, StabilizerModel
from .pauli import QuditPauli, basis_digits, nullspace_mod_p, rref_mod_p, to_sparse

DIM_CAP = 2**20
DENSE_LIMIT = 2048
# complex Hermitian dense solves are several times slower; switch earlier
DENSE_LIMIT_COMPLEX = 1024
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class GroundSpace:
    """Quasi-degenerate lowest eigenvectors of a Hamiltonian.

    ``basis`` has one column per state.  When ``frame`` is set the columns
    live in a reduced subspace (see :class:`StabilizerFrame`) rather than the
    full Hilbert space.
    """

    energies: np.ndarray
    basis: np.ndarray
    degeneracy_tol: float
    gap: float
    spectrum: np.ndarray = field(repr=False, default=None)
    sector: float | None = None
    frame: "StabilizerFrame | None" = field(default=None, repr=False)

    @property
    def degeneracy(self) -> int:
        return self.basis.shape[1]

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def splitting(self) -> float:
        return float(self.energies[-1] - self.energies[0])


# -- spin Hamiltonians ------------------------------------------------------

def sector_states(L: int, two_s: int, sector) -> np.ndarray:
    """Full-basis indices with total ``S^z`` equal to ``sector``."""
    D = two_s + 1
    two_target = int(round(2 * float(sector)))
    if D**L > DIM_CAP * 16:
        raise ResourceError(f"chain of dimension {D**L} too large to enumerate")
    digits = basis_digits(D, L)
    two_m = (two_s - 2 * digits).sum(axis=1)
    return np.flatnonzero(two_m == two_target)


def _term_coo(H: SpinHamiltonian, term, states, digits, lookup):
    D = H.local_dim
    block = np.asarray(H.block(term))
    sites = term.sites
    k = len(sites)
    loc_w = D ** np.arange(k - 1, -1, -1)
    site_w = D ** (H.L - 1 - np.array(sites))
    loc = digits[:, sites] @ loc_w
    local_digits = basis_digits(D, k)
    rows, cols, vals = [], [], []
    for b in range(block.shape[1]):
        sel = np.flatnonzero(loc == b)
        if sel.size == 0:
            continue
        for a in np.flatnonzero(np.abs(block[:, b]) > 1e-15):
            shift = (local_digits[a] - local_digits[b]) @ site_w
            target = lookup(states[sel] + shift)
            ok = target >= 0
            rows.append(target[ok])
            cols.append(sel[ok])
            vals.append(np.full(ok.sum(), block[a, b]))
    return rows, cols, vals


def _assemble_spin(H: SpinHamiltonian, sector, cap: int) -> sp.csr_matrix:
    D = H.local_dim
    full = D**H.L
    if sector is not None:
        if not H.conserves_sz():
            raise ContractError("sector restriction requested but H does not conserve total S^z")
        states = sector_states(H.L, H.two_s, sector)
    else:
        if full > cap:
            raise ResourceError(f"dimension {full} exceeds cap {cap}")
        states = np.arange(full)
    dim = states.size
    if dim > cap:
        raise ResourceError(f"sector dimension {dim} exceeds cap {cap}")
    digits = (states[:, None] // D ** np.arange(H.L - 1, -1, -1)) % D

    if sector is None:
        def lookup(idx):
            return idx
    else:
        def lookup(idx):
            pos = np.searchsorted(states, idx)
            pos = np.minimum(pos, dim - 1)
            return np.where(states[pos] == idx, pos, -1)

    rows, cols, vals = [], [], []
    for term in H.terms:
        r, c, v = _term_coo(H, term, states, digits, lookup)
        rows += r
        cols += c
        vals += v
    if not rows:
        return sp.csr_matrix((dim, dim))
    vals = np.concatenate(vals)
    if np.all(np.abs(np.imag(vals)) < 1e-15):
        vals = np.real(vals)
    m = sp.coo_matrix((vals, (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
    return m.tocsr()


# -- stabilizer models ------------------------------------------------------

def _assemble_stabilizer(model: StabilizerModel, cap: int) -> sp.csr_matrix:
    dim = model.dim
    if dim > cap:
        raise ResourceError(f"dimension {dim} exceeds cap {cap}")
    digits = basis_digits(model.d, model.n)
    H = sp.csr_matrix((dim, dim), dtype=complex)
    for t in model.terms:
        P = to_sparse(t, digits)
        H = H - P if model.d == 2 else H - P - P.conj().T
    if np.all(np.abs(H.data.imag) < 1e-12):
        H = H.real.tocsr()
    return H


def assemble(H, sector=None, cap: int = DIM_CAP) -> sp.csr_matrix:
    """Sparse Hermitian matrix of a spin or stabilizer Hamiltonian."""
    if isinstance(H, SpinHamiltonian):
        return _assemble_spin(H, sector, cap)
    if isinstance(H, StabilizerModel):
        if sector is not None:
            raise ContractError("S^z sectors are not defined for stabilizer models")
        return _assemble_stabilizer(H, cap)
    raise TypeError(f"cannot assemble {type(H).__name__}")


def embed_sector(vecs: np.ndarray, H: SpinHamiltonian, sector) -> np.ndarray:
    """Lift sector-restricted vectors back into the full Hilbert space."""
    states = sector_states(H.L, H.two_s, sector)
    vecs = np.asarray(vecs)
    out = np.zeros((H.dim,) + vecs.shape[1:], dtype=vecs.dtype)
    out[states] = vecs
    return out


# -- eigensolvers -----------------------------------------------------------

def _uses_dense(M, k: int, method: str) -> bool:
    dim = M.shape[0]
    is_complex = np.iscomplexobj(M.data if sp.issparse(M) else M)
    limit = DENSE_LIMIT_COMPLEX if is_complex else DENSE_LIMIT
    return method == "dense" or (method == "auto" and dim <= limit) or k >= dim - 1


def lowest_eigs(M, k: int, method: str = "auto", seed: int = 0, maxiter: int | None = None):
    """``k`` lowest eigenpairs, dense below ``DENSE_LIMIT`` unless forced."""
    dim = M.shape[0]
    k = min(k, dim)
    is_complex = np.iscomplexobj(M.data if sp.issparse(M) else M)
    if _uses_dense(M, k, method):
        dense = M.toarray() if sp.issparse(M) else np.asarray(M)
        vals, vecs = sla.eigh(dense, subset_by_index=[0, k - 1], driver="evr")
        return vals, vecs
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim)
    if is_complex:
        v0 = v0 + 1j * rng.standard_normal(dim)
    try:
        vals, vecs = spla.eigsh(M, k=k, which="SA", v0=v0, maxiter=maxiter, tol=1e-12)
    except spla.ArpackNoConvergence as exc:
        if len(exc.eigenvalues):
            res = np.linalg.norm(M @ exc.eigenvectors - exc.eigenvectors * exc.eigenvalues, axis=0).max()
        else:
            res = float("inf")
        raise NumericError(f"Lanczos did not converge ({len(exc.eigenvalues)}/{k} pairs)", residual=res) from None
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _deflated_lowest(M, Q, shift, k, seed):
    """Lowest eigenpairs of ``M`` with the columns of ``Q`` pushed up by ``shift``."""
    dim = M.shape[0]
    dtype = np.result_type(M.dtype, Q.dtype)

    def mv(v):
        return M @ v + shift * (Q @ (Q.conj().T @ v))

    op = spla.LinearOperator((dim, dim), matvec=mv, matmat=mv, dtype=dtype)
    rng = np.random.default_rng(seed + 1)
    v0 = rng.standard_normal(dim).astype(dtype)
    v0 -= Q @ (Q.conj().T @ v0)
    try:
        vals, vecs = spla.eigsh(op, k=k, which="SA", v0=v0, tol=1e-12)
    except spla.ArpackNoConvergence:
        raise NumericError("Lanczos deflation did not converge", residual=float("inf")) from None
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _ground_from_matrix(M, k_max, tol, method, seed, sector=None, frame=None) -> GroundSpace:
    dim = M.shape[0]
    k = min(k_max, dim)
    while True:
        vals, vecs = lowest_eigs(M, k, method=method, seed=seed)
        g = int((vals - vals[0] <= tol).sum())
        if g < len(vals) or k >= dim:
            break
        # every computed state is degenerate: widen the search
        k = min(2 * k, dim)
    e0 = vals[0]
    basis, _ = np.linalg.qr(vecs[:, :g])
    rest = vals[g:]
    if not _uses_dense(M, k, method) and g < dim - 2:
        # a single Krylov sequence can miss copies of an exactly degenerate
        # level, so keep projecting out what was found until the next level
        # sits above the tolerance
        shift = 10.0 * (1.0 + float(np.max(np.abs(vals))))
        while basis.shape[1] < dim - 2:
            kk = min(max(2, k_max - basis.shape[1]), dim - basis.shape[1] - 1)
            dv, dvec = _deflated_lowest(M, basis, shift, kk, seed)
            new = dv - e0 <= tol
            if not new.any():
                rest = dv
                break
            cand = dvec[:, new]
            cand -= basis @ (basis.conj().T @ cand)
            basis, _ = np.linalg.qr(np.concatenate([basis, cand], axis=1))
    energies = np.real(np.einsum("ij,ij->j", basis.conj(), M @ basis))
    energies.sort()
    gap = float(rest[0] - e0) if len(rest) else float("inf")
    spectrum = np.concatenate([energies, rest])
    return GroundSpace(energies, basis, tol, gap, spectrum=spectrum, sector=sector, frame=frame)


def ground_space(H, k_max: int = 6, degeneracy_tol: float = DEFAULT_TOL, sector=None,
                 method: str = "auto", seed: int = 0, cap: int = DIM_CAP) -> GroundSpace:
    """Lowest quasi-degenerate eigenspace plus the gap above it.

    Qubit stabilizer models with more than 16 qubits are diagonalized inside
    a joint eigenspace of a commuting subset of their terms (see
    :func:`stabilizer_frame`); the resulting ``basis`` then lives in that frame.
    """
    if isinstance(H, StabilizerModel) and H.d == 2 and H.n > 16:
        frame = stabilizer_frame(H)
        M = frame.hamiltonian()
        if M.shape[0] > cap:
            raise ResourceError(f"reduced dimension {M.shape[0]} exceeds cap {cap}")
        return _ground_from_matrix(M, k_max, degeneracy_tol, method, seed, frame=frame)
    M = assemble(H, sector=sector, cap=cap)
    return _ground_from_matrix(M, k_max, degeneracy_tol, method, seed, sector=sector)


# -- reduced frames for qubit stabilizer models ------------------------------

# conjugation by the Clifford that maps the chosen letter to Z:
# letter -> (new letter, sign)
_ROTATE = {
    "Z": {"X": ("X", 1), "Y": ("Y", 1), "Z": ("Z", 1)},
    "X": {"X": ("Z", 1), "Y": ("Y", -1), "Z": ("X", 1)},  # Hadamard
    "Y": {"X": ("X", -1), "Y": ("Z", 1), "Z": ("Y", 1)},  # (Y+Z)/sqrt2
}


def _letters(p: QuditPauli):
    out = {}
    for k in p.support:
        out[k] = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(p.x[k], p.z[k])]
    return out


def _hermitian_sign(p: QuditPauli) -> complex:
    """Scalar c with p = c * (product of Hermitian X, Y, Z letters)."""
    ny = sum(1 for k in p.support if p.x[k] and p.z[k])
    # Y = i X Z, so X Z = -i Y
    return p.coefficient * (-1j) ** ny


def _rotate(p: QuditPauli, choice) -> QuditPauli:
    letters = _letters(p)
    coeff = _hermitian_sign(p)
    ops = {}
    for k, a in letters.items():
        new, sign = _ROTATE[choice[k]][a]
        ops[k] = new
        coeff *= sign
    q = QuditPauli.from_ops(2, p.n, ops)
    c0 = _hermitian_sign(q)
    ratio = coeff / c0
    # ratio is a power of i
    ph = int(round(np.angle(ratio) / (np.pi / 2))) % 4
    return q.with_phase((q.phase + ph) % 4)


def _diag_rank(terms, choice) -> int:
    rows = []
    for t in terms:
        lt = _letters(t)
        if all(choice[k] == a for k, a in lt.items()):
            rows.append([1 if k in lt else 0 for k in range(t.n)])
    if not rows:
        return 0
    _, piv = rref_mod_p(np.array(rows), 2)
    return len(piv)


def _choose_frame(model: StabilizerModel):
    n = model.n
    counts = [{"X": 0, "Y": 0, "Z": 0} for _ in range(n)]
    for t in model.terms:
        for k, a in _letters(t).items():
            counts[k][a] += 1
    starts = [["X"] * n, ["Y"] * n, ["Z"] * n, [max(c, key=c.get) for c in counts]]
    best, best_rank = None, -1
    for choice in starts:
        choice = list(choice)
        rank = _diag_rank(model.terms, choice)
        improved = True
        while improved:
            improved = False
            for k in range(n):
                for a in "XYZ":
                    if a == choice[k]:
                        continue
                    trial = choice.copy()
                    trial[k] = a
                    r = _diag_rank(model.terms, trial)
                    if r > rank:
                        choice, rank, improved = trial, r, True
        if rank > best_rank:
            best, best_rank = choice, rank
    return best


@dataclass(frozen=True)
class StabilizerFrame:
    """Joint +1 eigenspace of the terms made diagonal by a local basis change.

    ``states`` are bit strings (site 0 most significant) in the rotated basis.
    Every ground state of a frustration-free commuting model lies here.
    """

    model: StabilizerModel
    choice: tuple
    rotated: tuple
    diagonal: tuple
    states: np.ndarray

    def hamiltonian(self) -> sp.csr_matrix:
        n = self.model.n
        dim = self.states.size
        weights = (1 << np.arange(n - 1, -1, -1, dtype=np.uint64)).astype(np.uint64)
        H = sp.csr_matrix((dim, dim), dtype=complex)
        diag_count = len(self.diagonal)
        H = H - diag_count * sp.identity(dim, format="csr", dtype=complex)
        cols = np.arange(dim)
        for i, t in enumerate(self.rotated):
            if i in self.diagonal:
                continue
            xm = np.uint64(int(np.array(t.x, dtype=np.uint64) @ weights))
            zm = np.uint64(int(np.array(t.z, dtype=np.uint64) @ weights))
            par = np.bitwise_count(self.states & zm) % 2
            target = self.states ^ xm
            pos = np.searchsorted(self.states, target)
            pos = np.minimum(pos, dim - 1)
            if not np.all(self.states[pos] == target):
                raise NumericError("term leaves the reduced frame", residual=float("nan"))
            vals = -t.coefficient * (1 - 2 * par.astype(float))
            H = H + sp.csr_matrix((vals, (pos, cols)), shape=(dim, dim))
        if np.all(np.abs(H.data.imag) < 1e-12):
            H = H.real.tocsr()
        return H

    def apply_pauli(self, p: QuditPauli, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Apply a Pauli word of the original model to frame vectors.

        Returns the part that stays in the frame and, per column, the norm
        of the part pushed out of it.
        """
        n = self.model.n
        if p.d != 2 or p.n != n:
            raise ShapeError("Pauli word does not match the model")
        q = _rotate(p, self.choice)
        weights = (1 << np.arange(n - 1, -1, -1, dtype=np.uint64)).astype(np.uint64)
        xm = np.uint64(int(np.array(q.x, dtype=np.uint64) @ weights))
        zm = np.uint64(int(np.array(q.z, dtype=np.uint64) @ weights))
        par = np.bitwise_count(self.states & zm) % 2
        target = self.states ^ xm
        dim = self.states.size
        pos = np.minimum(np.searchsorted(self.states, target), dim - 1)
        inside = self.states[pos] == target
        vals = q.coefficient * (1 - 2 * par.astype(float))
        V = np.asarray(V)
        V2 = V[:, None] if V.ndim == 1 else V
        W = np.zeros(V2.shape, dtype=complex)
        W[pos[inside]] = vals[inside, None] * V2[inside]
        leak = np.linalg.norm(V2[~inside], axis=0)
        return (W[:, 0] if V.ndim == 1 else W), leak

    @property
    def frustration_free_energy(self) -> float:
        return -float(len(self.model.terms))


def stabilizer_frame(model: StabilizerModel, max_dim: int = DIM_CAP) -> StabilizerFrame:
    if model.d != 2:
        raise ContractError("reduced frames are implemented for qubit models only")
    choice = _choose_frame(model)
    rotated = tuple(_rotate(t, choice) for t in model.terms)
    diag = tuple(i for i, t in enumerate(rotated) if not any(t.x))
    n = model.n
    if diag:
        A = np.array([rotated[i].z for i in diag]) % 2
        # coefficient +1 -> z.b = 0, -1 -> z.b = 1 for the +1 eigenspace
        c = np.array([0 if rotated[i].coefficient.real > 0 else 1 for i in diag])
        aug = np.concatenate([A, c[:, None]], axis=1)
        red, piv = rref_mod_p(aug, 2)
        if n in piv:
            raise NumericError("diagonal terms are inconsistent", residual=float("nan"))
        part = np.zeros(n, dtype=np.int64)
        for r, pc in enumerate(piv):
            part[pc] = red[r, n]
        null = nullspace_mod_p(A, 2)
    else:
        part = np.zeros(n, dtype=np.int64)
        null = np.eye(n, dtype=np.int64)
    k = null.shape[0]
    if 2**k > max_dim:
        raise ResourceError(f"reduced frame of dimension 2^{k} exceeds cap {max_dim}")
    weights = (1 << np.arange(n - 1, -1, -1, dtype=np.uint64)).astype(np.uint64)
    base = np.uint64(int(part.astype(np.uint64) @ weights))
    gens = np.array([int(v.astype(np.uint64) @ weights) for v in null], dtype=np.uint64)
    states = np.full(1, base, dtype=np.uint64)
    for g in gens:
        states = np.concatenate([states, states ^ g])
    states.sort()
    return StabilizerFrame(model, tuple(choice), rotated, diag, states)


# -- expectation values -----------------------------------------------------

def _as_matrix(states) -> np.ndarray:
    if isinstance(states, GroundSpace):
        if states.frame is not None:
            raise ContractError("ground space lives in a reduced frame; apply operators there")
        return states.basis
    a = np.asarray(states)
    return a[:, None] if a.ndim == 1 else a


def apply_product(vecs: np.ndarray, site_ops, local_dim: int) -> np.ndarray:
    """Apply ``⊗_r site_ops[r]`` to the columns of ``vecs``."""
    vecs = np.asarray(vecs)
    single = vecs.ndim == 1
    V = vecs[:, None] if single else vecs
    L = len(site_ops)
    if V.shape[0] != local_dim**L:
        raise ShapeError(f"vector length {V.shape[0]} does not match {L} sites of dim {local_dim}")
    diag = all(np.allclose(o, np.diag(np.diag(o))) for o in site_ops)
    if diag:
        phase = np.ones(1, dtype=complex)
        for o in site_ops:
            phase = np.kron(phase, np.diag(o))
        out = phase[:, None] * V
    else:
        t = V.reshape((local_dim,) * L + (V.shape[1],)).astype(complex)
        for r, o in enumerate(site_ops):
            t = np.moveaxis(np.tensordot(o, t, axes=([1], [r])), 0, r)
        out = t.reshape(V.shape)
    return out[:, 0] if single else out


def translation_indices(L: int, local_dim: int, k: int = 1) -> np.ndarray:
    """Permutation p with (T^k psi)[i] = psi[p[i]], T moving site r to r+1."""
    digits = basis_digits(local_dim, L)
    src = np.roll(digits, -k, axis=1)
    return src @ (local_dim ** np.arange(L - 1, -1, -1))


def translate(vecs: np.ndarray, L: int, local_dim: int, k: int = 1) -> np.ndarray:
    return np.asarray(vecs)[translation_indices(L, local_dim, k)]


def reflection_indices(L: int, local_dim: int, center: int = 0) -> np.ndarray:
    """Permutation for the site reflection r -> 2*center - r (mod L)."""
    digits = basis_digits(local_dim, L)
    src = digits[:, [(2 * center - r) % L for r in range(L)]]
    return src @ (local_dim ** np.arange(L - 1, -1, -1))


def expectation(states, op) -> np.ndarray:
    """Matrix ``<psi_i| O |psi_j>`` over the supplied states.

    ``op`` may be a QuditPauli, a dense or sparse matrix, a callable acting on
    column blocks, or a list of per-site matrices (product operator).
    """
    G = _as_matrix(states)
    if isinstance(op, QuditPauli):
        OG = to_sparse(op) @ G
    elif callable(op):
        OG = op(G)
    elif isinstance(op, (list, tuple)):
        local = np.asarray(op[0]).shape[0]
        OG = apply_product(G, op, local)
    else:
        if op.shape[1] != G.shape[0]:
            raise ShapeError(f"operator of shape {op.shape} cannot act on vectors of length {G.shape[0]}")
        OG = op @ G
    return G.conj().T @ OG


# -- symmetry-resolved low spectrum ---------------------------------------

def resolved_levels(H, op, k: int = 8, tol: float = 1e-8, method: str = "auto", seed: int = 0):
    """Lowest ``k`` levels with the eigenvalue of a unitary symmetry ``op``.

    Degenerate levels are rotated to diagonalize ``op`` inside each cluster.
    Returns a list of ``(energy, symmetry eigenvalue)`` sorted by energy.
    """
    M = assemble(H)
    vals, vecs = lowest_eigs(M, k, method=method, seed=seed)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    out = []
    start = 0
    while start < len(vals):
        stop = start + 1
        while stop < len(vals) and vals[stop] - vals[start] < tol:
            stop += 1
        block = vecs[:, start:stop]
        ev = np.linalg.eigvals(expectation(block, op))
        out += [(float(vals[start + i]), complex(e)) for i, e in enumerate(np.sort_complex(ev))]
        start = stop
    return out


def sector_gap(H, op, eigenvalue: complex = 1.0, k: int = 8, **kw) -> float:
    """Gap between the two lowest levels with symmetry eigenvalue ``eigenvalue``."""
    levels = [e for e, q in resolved_levels(H, op, k, **kw) if abs(q - eigenvalue) < 1e-6]
    if len(levels) < 2:
        raise NumericError(f"fewer than two levels in the requested sector among the lowest {k}",
                           residual=float("nan"))
    return levels[1] - levels[0]


def locate_gap_minimum(build, op, bounds, eigenvalue: complex = 1.0, k: int = 8, xtol: float = 1e-4):
    """Coupling in ``bounds`` minimizing ``sector_gap(build(coupling), op)``.

    A coarse grid brackets the minimum before a bounded scalar search.
    """
    from scipy.optimize import minimize_scalar

    lo, hi = bounds
    grid = np.linspace(lo, hi, 11)
    gaps = [sector_gap(build(x), op, eigenvalue, k) for x in grid]
    i = int(np.argmin(gaps))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda x: sector_gap(build(x), op, eigenvalue, k), bounds=(a, b),
                          method="bounded", options={"xatol": xtol})
    return float(res.x), float(res.fun)
