"""Code-level analysis of a ground space: logical actions, Knill-Laflamme
checks, stabilizer distances, logical support and shape."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ed import GroundSpace, apply_product, reflection_indices, translation_indices
from .errors import ContractError, ShapeError
from .models import StabilizerModel
from .pauli import QuditPauli, commutation_exponent, is_prime, nullspace_mod_p, symplectic_matrix, to_sparse
from .twist import TwistSpec, apply_twist

LEAK_TOL = 1e-8
KL_TOL = 1e-8


# -- operators acting on state blocks ----------------------------------------

def _apply(op, G: np.ndarray) -> np.ndarray:
    if isinstance(op, QuditPauli):
        return to_sparse(op) @ G
    if callable(op):
        return op(G)
    if isinstance(op, (list, tuple)):
        return apply_product(G, op, np.asarray(op[0]).shape[0])
    if op.shape[1] != G.shape[0]:
        raise ShapeError(f"operator of shape {op.shape} cannot act on vectors of length {G.shape[0]}")
    return op @ G


def _basis(ground) -> np.ndarray:
    if isinstance(ground, GroundSpace):
        if ground.frame is not None:
            raise ContractError("ground space lives in a reduced frame")
        return ground.basis
    G = np.asarray(ground)
    return G[:, None] if G.ndim == 1 else G


def logical_action(op, ground) -> tuple[np.ndarray, float]:
    """Matrix ``G† O G`` on the code basis and the leakage ``‖(1-P) O G‖``.

    Ground spaces found in a reduced stabilizer frame accept Pauli words only.
    """
    if isinstance(ground, GroundSpace) and ground.frame is not None:
        if not isinstance(op, QuditPauli):
            raise ContractError("only Pauli words can act on a reduced-frame ground space")
        G = ground.basis
        OG, out = ground.frame.apply_pauli(op, G)
        M = G.conj().T @ OG
        inner = np.linalg.norm(OG - G @ M, 2) if G.size else 0.0
        return M, float(np.hypot(inner, np.linalg.norm(out)))
    G = _basis(ground)
    OG = _apply(op, G)
    M = G.conj().T @ OG
    leak = float(np.linalg.norm(OG - G @ M, 2)) if G.size else 0.0
    return M, leak


# -- Knill-Laflamme ---------------------------------------------------------

@dataclass(frozen=True)
class KLResult:
    correctable: bool
    C: np.ndarray
    violation: float
    condition: float
    tol: float


def _effective_tol(code_basis, tol):
    # quasi-degenerate codes cannot beat their own energy splitting
    if isinstance(code_basis, GroundSpace):
        return max(tol, 10 * code_basis.splitting)
    return tol


def _sandwich(ground, P: QuditPauli) -> np.ndarray:
    """``G† P G`` for a Pauli word, in whatever frame the ground space uses."""
    if isinstance(ground, GroundSpace) and ground.frame is not None:
        G = ground.basis
        return G.conj().T @ ground.frame.apply_pauli(P, G)[0]
    G = _basis(ground)
    return G.conj().T @ (to_sparse(P) @ G)


def kl_check(code_basis, errors, tol: float = KL_TOL) -> KLResult:
    """Test ``P E_i† E_j P = C_ij P`` for every pair of errors.

    For a :class:`GroundSpace` the tolerance is raised to ten times the
    measured splitting of the ground set.
    """
    tol = _effective_tol(code_basis, tol)
    framed = isinstance(code_basis, GroundSpace) and code_basis.frame is not None
    G = code_basis.basis if framed else _basis(code_basis)
    gram = G.conj().T @ G
    k = G.shape[1]
    if np.max(np.abs(gram - np.eye(k))) > 1e-10:
        raise ContractError("code basis is not orthonormal")
    m = len(errors)
    C = np.zeros((m, m), dtype=complex)
    viol = 0.0
    if framed:
        if not all(isinstance(E, QuditPauli) for E in errors):
            raise ContractError("only Pauli errors can act on a reduced-frame ground space")
        blocks = {(i, j): _sandwich(code_basis, errors[i].dagger() * errors[j]) for i in range(m) for j in range(m)}
    else:
        EG = [_apply(E, G) for E in errors]
        blocks = {(i, j): EG[i].conj().T @ EG[j] for i in range(m) for j in range(m)}
    for (i, j), M in blocks.items():
        c = np.trace(M) / k
        C[i, j] = c
        viol = max(viol, float(np.max(np.abs(M - c * np.eye(k)))))
    cond = float(np.linalg.cond(C)) if m else 1.0
    return KLResult(viol < tol, C, viol, cond, tol)


def weight_scan(code_basis, n: int, d: int = 2, max_weight: int = 4, tol: float = KL_TOL):
    """Smallest Pauli weight acting non-trivially on the code space.

    Returns ``(weight, witness)`` or ``(None, None)`` when every Pauli up to
    ``max_weight`` acts as a scalar; the code then has distance above
    ``max_weight`` with respect to Pauli errors.
    """
    tol = _effective_tol(code_basis, tol)
    letters = [(x, z) for x in range(d) for z in range(d) if (x, z) != (0, 0)]
    for w in range(1, max_weight + 1):
        for supp in itertools.combinations(range(n), w):
            for combo in itertools.product(letters, repeat=w):
                x = [0] * n
                z = [0] * n
                for s, (a, b) in zip(supp, combo):
                    x[s], z[s] = a, b
                P = QuditPauli(d, tuple(x), tuple(z), 0).order_fixed()
                M = _sandwich(code_basis, P)
                c = np.trace(M) / M.shape[0]
                if np.max(np.abs(M - c * np.eye(M.shape[0]))) > tol:
                    return w, P
    return None, None


# -- stabilizer logical bases -----------------------------------------------

def _vec(p: QuditPauli) -> np.ndarray:
    return np.concatenate([p.x, p.z]).astype(np.int64)


def _omega(a: np.ndarray, b: np.ndarray, d: int) -> int:
    """Commutation exponent of vectors ``a = (x|z)`` and ``b``."""
    n = a.size // 2
    return int((a[n:] @ b[:n] - a[:n] @ b[n:]) % d)


def _from_vec(v: np.ndarray, d: int) -> QuditPauli:
    n = v.size // 2
    return QuditPauli(d, tuple(int(t) % d for t in v[:n]), tuple(int(t) % d for t in v[n:]), 0).order_fixed()


def normalizer(model: StabilizerModel) -> np.ndarray:
    """Rows spanning all Pauli vectors that commute with every term (prime d)."""
    d = model.d
    if not is_prime(d):
        raise ContractError(f"normalizer computation needs prime d, got {d}")
    S = symplectic_matrix(list(model.terms))
    n = model.n
    K = np.concatenate([S[:, n:], (-S[:, :n]) % d], axis=1) % d
    return nullspace_mod_p(K, d)


def _declared_pairs(model: StabilizerModel):
    decl = model.logicals
    pairs = []
    for key in sorted(k for k in decl if k.startswith("Z")):
        suffix = key[1:]
        pairs.append((decl.get("X" + suffix), decl[key]))
    return pairs


def logical_basis(model: StabilizerModel) -> list[tuple[QuditPauli, QuditPauli]]:
    """Pairs ``(X̄_i, Z̄_i)`` with ``Z̄_i X̄_i = ω X̄_i Z̄_i``, other pairs commuting.

    Declared logicals of the model are used first so reference operators keep
    their familiar form; missing partners are found by symplectic
    Gram-Schmidt on the normalizer.
    """
    d = model.d
    N = normalizer(model)
    declared = _declared_pairs(model)
    pool = []
    for xb, zb in declared:
        pool.append(_vec(zb))
        if xb is not None:
            pool.append(_vec(xb))
    pool += [row.astype(np.int64) for row in N]
    inv = {a: pow(a, -1, d) for a in range(1, d)}
    pairs = []
    while pool:
        u = pool.pop(0)
        partner = next((i for i, w in enumerate(pool) if _omega(u, w, d)), None)
        if partner is None:
            continue  # u is a stabilizer (or dependent) direction
        v = pool.pop(partner)
        v = (v * inv[_omega(u, v, d)]) % d  # now ω(u, v) = 1
        new_pool = []
        for w in pool:
            beta = _omega(w, u, d)
            alpha = (-_omega(w, v, d)) % d
            w2 = (w + alpha * u + beta * v) % d
            if np.any(w2):
                new_pool.append(w2)
        pool = new_pool
        # ω(u, v) = 1 means u v = ω v u, i.e. u plays Z̄ and v plays X̄
        pairs.append((_from_vec(v, d), _from_vec(u, d)))
    return pairs


def logical_coordinates(p: QuditPauli, pairs) -> tuple[list[int], list[int]]:
    """Exponents ``(a, b)`` with ``p ~ ∏ X̄^a Z̄^b`` modulo stabilizers."""
    d = p.d
    a = [(-commutation_exponent(p, zb)) % d for _, zb in pairs]
    b = [commutation_exponent(p, xb) % d for xb, _ in pairs]
    return a, b


# -- brute-force distance ---------------------------------------------------

@dataclass(frozen=True)
class DistanceResult:
    distance: int | None
    witness: QuditPauli | None
    complete: bool
    lower_bound: int
    checked: int


def stabilizer_distance(model: StabilizerModel, type_filter: str = "any", max_weight: int | None = None,
                        cap: int = 50_000_000, batch: int = 20000) -> DistanceResult:
    """Minimal weight of a Pauli commuting with all terms but acting logically.

    Supports are enumerated by increasing weight in lexicographic order, so
    the witness has the lexicographically smallest support among the
    minimal ones; on that support, words made of pure X and Z letters are
    preferred over mixed ones.  ``type_filter`` restricts to logicals with a nonzero X̄
    exponent, i.e. that fail to commute with some Z̄ (``x-type``), or with a
    nonzero Z̄ exponent (``z-type``).  If ``cap``
    candidate operators are exhausted the result is flagged incomplete with
    the weight reached as a lower bound.
    """
    if type_filter not in ("any", "x-type", "z-type"):
        raise ValueError(f"unknown type filter {type_filter!r}")
    d, n = model.d, model.n
    pairs = logical_basis(model)
    if not pairs:
        return DistanceResult(None, None, True, n + 1, 0)
    # within a support, pure shifts come first, then pure clocks, then mixed letters
    letters = sorted(((x, z) for x in range(d) for z in range(d) if (x, z) != (0, 0)),
                     key=lambda xz: (xz[0] > 0 and xz[1] > 0, xz[0] == 0, xz))
    nl = len(letters)
    S = symplectic_matrix(list(model.terms))
    Lx = np.array([_vec(xb) for xb, _ in pairs])
    Lz = np.array([_vec(zb) for _, zb in pairs])
    # per-site, per-letter commutation exponents with terms and logical refs
    syn = np.zeros((n, nl, S.shape[0]), dtype=np.int64)
    cz = np.zeros((n, nl, len(pairs)), dtype=np.int64)  # with Z̄ -> -a
    cx = np.zeros((n, nl, len(pairs)), dtype=np.int64)  # with X̄ -> b
    for s in range(n):
        for li, (x, z) in enumerate(letters):
            syn[s, li] = (z * S[:, s] - x * S[:, n + s]) % d
            cz[s, li] = (z * Lz[:, s] - x * Lz[:, n + s]) % d
            cx[s, li] = (z * Lx[:, s] - x * Lx[:, n + s]) % d
    top = n if max_weight is None else min(n, max_weight)
    checked = 0
    for w in range(1, top + 1):
        combos = np.array(list(itertools.product(range(nl), repeat=w)), dtype=np.int64)
        supports = itertools.combinations(range(n), w)
        while True:
            chunk = np.array(list(itertools.islice(supports, batch)), dtype=np.int64)
            if chunk.size == 0:
                break
            best = None
            for ci, combo in enumerate(combos):
                sy = np.zeros((chunk.shape[0], S.shape[0]), dtype=np.int64)
                a = np.zeros((chunk.shape[0], len(pairs)), dtype=np.int64)
                b = np.zeros_like(a)
                for k in range(w):
                    sy += syn[chunk[:, k], combo[k]]
                    a += cz[chunk[:, k], combo[k]]
                    b += cx[chunk[:, k], combo[k]]
                ok = ~np.any(sy % d, axis=1)
                has_a = np.any(a % d, axis=1)
                has_b = np.any(b % d, axis=1)
                if type_filter == "any":
                    ok &= has_a | has_b
                elif type_filter == "x-type":
                    ok &= has_a
                else:
                    ok &= has_b
                checked += chunk.shape[0]
                hits = np.flatnonzero(ok)
                if hits.size and (best is None or hits[0] < best[0]):
                    best = (int(hits[0]), ci)
            if best is not None:
                # supports come in lexicographic order, so the first hit wins
                witness = _witness(d, n, chunk[best[0]], combos[best[1]], letters)
                return DistanceResult(w, witness, True, w, checked)
            if checked > cap:
                return DistanceResult(None, None, False, w, checked)
    return DistanceResult(None, None, True, top + 1, checked)


def _witness(d, n, supp, combo, letters) -> QuditPauli:
    x = [0] * n
    z = [0] * n
    for s, li in zip(supp, combo):
        x[int(s)], z[int(s)] = letters[li]
    return QuditPauli(d, tuple(x), tuple(z), 0).order_fixed()


# -- candidate sweep ----------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    """A physical operator offered as a possible logical operator."""

    name: str
    op: object
    realization: str
    support: frozenset
    role: str | None = None  # optional hint: "X" or "Z"


@dataclass
class LogicalOp:
    name: str
    realization: str
    matrix: np.ndarray
    weight: int
    support: tuple
    leakage: float
    status: str
    shape: str


@dataclass
class CodeReport:
    gsd: int
    logical_ops: list = field(default_factory=list)
    x_bar: str | None = None
    z_bar: str | None = None
    distances: dict = field(default_factory=dict)
    logical_support: int | None = None
    shapes: dict = field(default_factory=dict)
    kl_results: list = field(default_factory=list)
    incomplete: bool = False
    notes: list = field(default_factory=list)

    def to_json(self) -> str:
        ops = []
        for o in self.logical_ops:
            ops.append({"name": o.name, "realization": o.realization, "status": o.status,
                        "weight": o.weight, "shape": o.shape, "leakage": float(f"{o.leakage:.11e}"),
                        "support": list(o.support),
                        "matrix": [[[float(f"{v.real:.11e}"), float(f"{v.imag:.11e}")] for v in row]
                                   for row in np.asarray(o.matrix)]})
        payload = {
            "gsd": self.gsd,
            "x_bar": self.x_bar,
            "z_bar": self.z_bar,
            "distances": self.distances,
            "logical_support": self.logical_support,
            "shapes": self.shapes,
            "kl_results": self.kl_results,
            "incomplete": self.incomplete,
            "logical_ops": ops,
            "notes": self.notes,
        }
        return json.dumps(payload, indent=2)


def lattice_coords(lattice: dict, n: int):
    """Site index -> integer coordinates for the lattices built in ``models``."""
    kind = lattice.get("kind", "chain")
    if kind == "chain":
        return [(s,) for s in range(n)], (lattice.get("L", n),)
    Lx, Ly = lattice["Lx"], lattice["Ly"]
    if kind == "torus-sites":
        return [divmod(s, Ly) for s in range(n)], (Lx, Ly)
    if kind == "torus-edges":
        return [divmod(s // 2, Ly) for s in range(n)], (Lx, Ly)
    if kind == "gauged-ising":
        return [divmod(s // 3, Ly) for s in range(n)], (Lx, Ly)
    raise ValueError(f"unknown lattice kind {kind!r}")


def support_shape(support, lattice: dict, n: int, point_max: int = 4) -> str:
    """``bulk`` (at least half the system), ``string`` (winds a cycle),
    ``point`` (a few sites) or ``segment``."""
    support = set(support)
    if len(support) >= max(1, n / 2):
        return "bulk"
    coords, dims = lattice_coords(lattice, n)
    pts = [coords[s] for s in support]
    for ax, size in enumerate(dims):
        if len({p[ax] for p in pts}) == size and size > 1 and len(dims) > 1:
            return "string"
    if len(support) <= point_max:
        return "point"
    return "segment"


def _is_scalar(M, tol):
    k = M.shape[0]
    c = np.trace(M) / k
    return np.max(np.abs(M - c * np.eye(k))) < tol


def _phase_order(c: complex, n_max: int, tol: float) -> int | None:
    """Order q > 1 of a root of unity ``c`` with q dividing ``n_max``, else None."""
    for q in range(2, n_max + 1):
        if n_max % q:
            continue
        for j in range(1, q):
            if math.gcd(j, q) == 1 and abs(c - np.exp(2j * np.pi * j / q)) < tol:
                return q
    return None


def candidate_sweep(ground, candidates, lattice: dict | None = None, n_sites: int | None = None,
                    leak_tol: float = LEAK_TOL, approx_tol: float = 0.9, tol: float = 1e-8,
                    kl_sets=None) -> CodeReport:
    """Classify candidates and choose the best X̄/Z̄ pair.

    A candidate is ``logical`` when it maps the code space into itself (leakage
    at most ``leak_tol``) and acts non-trivially, ``approximate`` when it acts
    non-trivially but leaks up to ``approx_tol`` (finite-size versions of
    operators that become logical for large systems), ``trivial`` when it acts
    as a scalar, and ``leaking`` otherwise.

    The pair must satisfy ``Z̄ X̄ = ω X̄ Z̄`` between the projected actions,
    with ``ω = exp(2πi j/q)`` a primitive root whose order ``q`` divides the
    GSD (``q = GSD`` for a single logical qudit).  Among valid pairs, fewer
    approximate members win, then a larger ``q``, then the smaller maximal
    weight, then the smaller support overlap, then the input order.
    """
    G = ground.basis if isinstance(ground, GroundSpace) else _basis(ground)
    gsd = G.shape[1]
    if n_sites is None:
        n_sites = max((max(c.support) for c in candidates if c.support), default=-1) + 1
    lattice = lattice or {"kind": "chain", "L": n_sites}
    report = CodeReport(gsd=gsd)
    logical = []
    for c in candidates:
        M, leak = logical_action(c.op, ground)
        if _is_scalar(M, tol) and leak <= leak_tol:
            status = "trivial"
        elif leak <= leak_tol:
            status = "logical"
        elif leak <= approx_tol and not _is_scalar(M, tol):
            status = "approximate"
        else:
            status = "leaking"
        shape = support_shape(c.support, lattice, n_sites)
        op = LogicalOp(c.name, c.realization, M, len(c.support), tuple(sorted(c.support)), leak, status, shape)
        report.logical_ops.append(op)
        report.shapes[c.name] = shape
        if status in ("logical", "approximate"):
            logical.append((op, c.role))
    best = None
    for (xo, xrole), (zo, zrole) in itertools.permutations(logical, 2):
        if xrole == "Z" or zrole == "X":
            continue
        X, Z = xo.matrix, zo.matrix
        XZ = X @ Z
        nrm = np.linalg.norm(XZ)
        if nrm < tol:
            continue
        c = np.vdot(XZ, Z @ X) / nrm**2
        if np.max(np.abs(Z @ X - c * XZ)) > tol * max(1.0, nrm):
            continue
        q = _phase_order(complex(c), gsd, 1e-8)
        if q is None:
            continue
        n_approx = (xo.status == "approximate") + (zo.status == "approximate")
        key = (n_approx, -q, max(xo.weight, zo.weight), len(set(xo.support) & set(zo.support)))
        if best is None or key < best[0]:
            best = (key, xo, zo)
    if best is None:
        report.incomplete = True
        report.notes.append("no pair with the logical commutation relation among the candidates")
    else:
        key, xo, zo = best
        report.x_bar, report.z_bar = xo.name, zo.name
        report.logical_support = len(set(xo.support) & set(zo.support))
        if key[0]:
            report.notes.append("the chosen pair includes approximate logical operators")
        if -key[1] != gsd:
            report.notes.append(f"the pair generates a {-key[1]}-dimensional factor of the code space")
        # d_x: logicals that do not commute with Z̄; d_z: the remaining ones
        dx = [o.weight for o, _ in logical if not _commutes(o.matrix, zo.matrix, tol)]
        dz = [o.weight for o, _ in logical if _commutes(o.matrix, zo.matrix, tol)]
        report.distances = {"d_x": min(dx) if dx else None, "d_z": min(dz) if dz else None}
        report.distances["d"] = min(v for v in report.distances.values() if v is not None)
    for set_id, errs in (kl_sets or {}).items():
        res = kl_check(ground, errs, tol=tol)
        report.kl_results.append({"error_set": set_id, "correctable": bool(res.correctable),
                                  "violation": float(f"{res.violation:.11e}"),
                                  "condition": float(f"{res.condition:.11e}")})
    return report


def _commutes(A, B, tol):
    return np.max(np.abs(A @ B - B @ A)) < tol


# -- standard candidate families ---------------------------------------------

def translation_candidate(L: int, local_dim: int, k: int = 1, name: str = "T") -> Candidate:
    idx = translation_indices(L, local_dim, k)
    return Candidate(name, lambda V: V[idx], "permutation", frozenset(range(L)))


def reflection_candidate(L: int, local_dim: int, center: int = 0, name: str = "R") -> Candidate:
    idx = reflection_indices(L, local_dim, center)
    return Candidate(name, lambda V: V[idx], "permutation", frozenset(range(L)))


def twist_candidate(spec: TwistSpec, local_dim: int, name: str = "F") -> Candidate:
    return Candidate(name, lambda V: apply_twist(V, spec, local_dim), "twist", frozenset(range(spec.n_sites)))


def pauli_candidate(p: QuditPauli, name: str | None = None, role: str | None = None) -> Candidate:
    return Candidate(name or str(p), p, "pauli-word", frozenset(p.support), role)


def global_candidate(U: np.ndarray, L: int, name: str) -> Candidate:
    ops = [np.asarray(U)] * L
    return Candidate(name, ops, "dense", frozenset(range(L)))
