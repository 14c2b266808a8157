"""Builders for the spin-chain and commuting-Pauli lattice models.

Spin models come back as :class:`SpinHamiltonian` (a list of local coupling
terms), Pauli models as :class:`StabilizerModel` (each term enters the
Hamiltonian with coefficient -1, plus its conjugate when ``d > 2``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import spin as spin_mod
from .errors import ContractError, ShapeError
from .pauli import QuditPauli, symplectic_matrix

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

MODEL_SCHEMA = "topoqubits.model/1"

COUPLING_KINDS = (
    "heisenberg-exchange",
    "zz",
    "transverse-x",
    "field-z",
    "spin-projector",
    "custom-dense-block",
)


@dataclass(frozen=True)
class Term:
    """One coupling: ``coeff * block`` on ``sites``.

    ``params`` holds the hopping phase for exchange terms and the tuple of
    doubled total-spin sectors for projector terms.  ``block`` is only used
    by custom dense terms.
    """

    sites: tuple
    coeff: complex
    kind: str
    params: Any = None
    block: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in COUPLING_KINDS:
            raise ValueError(f"unknown coupling kind {self.kind!r}")
        if self.kind == "spin-projector" and len(self.sites) not in (2, 3):
            raise ShapeError("projector terms act on 2 or 3 sites")


@dataclass(frozen=True)
class SpinHamiltonian:
    L: int
    two_s: int
    terms: tuple
    boundary: str = "periodic"
    name: str = ""
    params: dict = field(default_factory=dict, compare=False)
    symmetries: tuple = ()

    def __post_init__(self):
        for t in self.terms:
            if any(not 0 <= s < self.L for s in t.sites):
                raise ShapeError(f"term on sites {t.sites} outside chain of length {self.L}")

    @property
    def spin(self) -> Fraction:
        return Fraction(self.two_s, 2)

    @property
    def local_dim(self) -> int:
        return self.two_s + 1

    @property
    def dim(self) -> int:
        return self.local_dim**self.L

    def block(self, term: Term) -> np.ndarray:
        """Dense matrix of ``term`` on its own sites (coefficient included)."""
        o = spin_mod.spin_ops(self.two_s)
        k = term.kind
        if k == "heisenberg-exchange":
            phase = 1.0 if term.params is None else term.params
            mat = spin_mod.exchange_block(self.two_s, phase)
        elif k == "zz":
            mat = np.kron(o["z"], o["z"])
        elif k == "transverse-x":
            mat = o["x"]
        elif k == "field-z":
            mat = o["z"]
        elif k == "spin-projector":
            ar = len(term.sites)
            mat = sum(spin_mod.spin_projector(self.two_s, ar, t) for t in term.params)
        else:
            mat = np.asarray(term.block)
        return term.coeff * mat

    def conserves_sz(self) -> bool:
        return all(t.kind != "transverse-x" for t in self.terms) and all(
            t.kind != "custom-dense-block" or _block_conserves_sz(self.two_s, t) for t in self.terms
        )

    def with_terms(self, terms, **changes) -> "SpinHamiltonian":
        kw = dict(L=self.L, two_s=self.two_s, terms=tuple(terms), boundary=self.boundary,
                  name=self.name, params=dict(self.params), symmetries=self.symmetries)
        kw.update(changes)
        return SpinHamiltonian(**kw)


def _block_conserves_sz(two_s: int, term: Term) -> bool:
    ar = len(term.sites)
    o = spin_mod.spin_ops(two_s)
    sz = sum(spin_mod.embed_ops(two_s, {k: o["z"]}, ar) for k in range(ar))
    b = np.asarray(term.block)
    return bool(np.max(np.abs(b @ sz - sz @ b)) < 1e-12)


@dataclass(frozen=True)
class StabilizerModel:
    d: int
    n: int
    lattice: dict
    terms: tuple
    symmetries: dict = field(default_factory=dict)
    logicals: dict = field(default_factory=dict)
    name: str = ""
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for t in self.terms:
            if t.d != self.d or t.n != self.n:
                raise ShapeError("term shape does not match model")
        bad = _first_noncommuting(list(self.terms))
        if bad is not None:
            i, j = bad
            raise ContractError(f"terms {i} and {j} do not commute: {self.terms[i]} / {self.terms[j]}")
        for name, g in self.symmetries.items():
            bad = _first_noncommuting([g], list(self.terms))
            if bad is not None:
                raise ContractError(f"symmetry {name} fails to commute with term {bad[1]}")

    @property
    def dim(self) -> int:
        return self.d**self.n


def _first_noncommuting(a, b=None):
    """Index pair of the first non-commuting pair, or None (vectorized)."""
    if not a or (b is not None and not b):
        return None
    d = a[0].d
    ma = symplectic_matrix(a)
    mb = ma if b is None else symplectic_matrix(b)
    n = ma.shape[1] // 2
    comm = (ma[:, n:] @ mb[:, :n].T - ma[:, :n] @ mb[:, n:].T) % d
    bad = np.argwhere(comm)
    return None if bad.size == 0 else tuple(int(v) for v in bad[0])


# -- spin-chain builders ----------------------------------------------------

def _exchange(i, j, coeff):
    return Term((i, j), coeff, "heisenberg-exchange")


def build_tfim(L: int, lam: float, dual: bool = False) -> SpinHamiltonian:
    """``-sum X_n - lam sum Z_n Z_{n+1}`` in Pauli units on a ring.

    ``dual=True`` gives the dual-lattice form ``-lam sum X - sum ZZ``.
    """
    if L < 3:
        raise ShapeError(f"TFIM needs L >= 3, got {L}")
    hx, hzz = (lam, 1.0) if dual else (1.0, lam)
    terms = [Term((r,), -2.0 * hx, "transverse-x") for r in range(L)]
    terms += [Term((r, (r + 1) % L), -4.0 * hzz, "zz") for r in range(L)]
    return SpinHamiltonian(L, 1, tuple(terms), name="tfim", params={"lambda": lam, "dual": dual},
                           symmetries=("parity-x", "translation"))


def build_dimer_hd(L: int, J: float, B: float) -> SpinHamiltonian:
    if L % 2:
        raise ShapeError(f"dimer chain needs even L, got {L}")
    if L < 4:
        raise ShapeError(f"dimer chain needs L >= 4, got {L}")
    terms = [_exchange(j, (j + 1) % L, 1.0) for j in range(L)]
    terms += [_exchange(j, (j + 2) % L, J) for j in range(L)]
    if B:
        terms += [Term((j,), B, "field-z") for j in range(L)]
    return SpinHamiltonian(L, 1, tuple(terms), name="dimer", params={"J": J, "B": B},
                           symmetries=("sz", "translation"))


def build_mg(L: int) -> SpinHamiltonian:
    """Majumdar-Ghosh chain ``sum S_j.S_{j+1} + 1/2 S_j.S_{j+2}``."""
    if L % 2:
        raise ShapeError(f"Majumdar-Ghosh chain needs even L, got {L}")
    if L < 6:
        raise ShapeError(f"Majumdar-Ghosh chain needs L >= 6, got {L}")
    h = build_dimer_hd(L, 0.5, 0.0)
    return h.with_terms(h.terms, name="mg", params={})


def build_staggered_heisenberg(L: int, S, delta: float) -> SpinHamiltonian:
    """``sum_r (1 - delta (-1)^r) S_r.S_{r+1}`` with ``r`` counted from 1."""
    if L % 2:
        raise ShapeError(f"staggered chain needs even L, got {L}")
    if abs(delta) > 1:
        warnings.warn(f"|delta| = {abs(delta)} > 1 flips the sign of half the bonds", stacklevel=2)
    two_s = spin_mod.as_two_s(S)
    # 0-based bond (r, r+1) is bond r+1 in 1-based counting
    terms = tuple(_exchange(r, (r + 1) % L, 1.0 - delta * (-1) ** (r + 1)) for r in range(L))
    return SpinHamiltonian(L, two_s, terms, name="heisenberg", params={"S": str(Fraction(two_s, 2)), "delta": delta},
                           symmetries=("sz",) if delta else ("sz", "translation"))


def build_heisenberg(L: int, S=Fraction(1, 2)) -> SpinHamiltonian:
    return build_staggered_heisenberg(L, S, 0.0)


def vbs_parent_sectors(two_s: int, m: int, n: int) -> tuple[tuple, tuple]:
    """Doubled total spins penalized on three-site and two-site blocks."""
    three = [t for t in spin_mod.allowed_sectors(two_s, 3)
             if t >= two_s + 2 or t <= abs(m - n) - 2]
    two = [t for t in spin_mod.allowed_sectors(two_s, 2) if t >= 2 * max(m, n) + 2]
    return tuple(three), tuple(two)


def build_vbs_parent(S, m: int, n: int, L: int) -> SpinHamiltonian:
    """Projector parent Hamiltonian whose ground states include the VBS pair (m, n), (n, m)."""
    two_s = spin_mod.as_two_s(S)
    if m < 0 or n < 0 or m + n != two_s:
        raise ContractError(f"need m + n = 2S with m, n >= 0; got m={m}, n={n}, 2S={two_s}")
    if m != n and L % 2:
        raise ShapeError(f"dimerized VBS needs even L, got {L}")
    three, two = vbs_parent_sectors(two_s, m, n)
    terms = []
    if three:
        terms += [Term((i, (i + 1) % L, (i + 2) % L), 1.0, "spin-projector", three) for i in range(L)]
    if two:
        terms += [Term((i, (i + 1) % L), 1.0, "spin-projector", two) for i in range(L)]
    return SpinHamiltonian(L, two_s, tuple(terms), name="vbs_parent",
                           params={"S": str(Fraction(two_s, 2)), "m": m, "n": n},
                           symmetries=("sz", "translation"))


# -- Pauli-model builders ---------------------------------------------------

def _word(d, n, ops):
    return QuditPauli.from_ops(d, n, ops).order_fixed()


def build_cluster_1d(L: int, d: int = 2) -> StabilizerModel:
    """Terms ``X†_{n-1} Z_n X†_{n+1}`` on a ring."""
    if L < 3:
        raise ShapeError(f"cluster chain needs L >= 3, got {L}")
    terms = tuple(_word(d, L, {k - 1: "X†", k: "Z", k + 1: "X†"}) for k in range(L))
    sym = {}
    if L % 2 == 0 and (d == 2 or L % 4 == 0):
        for start, name in ((0, "even-sublattice"), (1, "odd-sublattice")):
            ops = {k: ("Z" if (k // 2) % 2 == 0 else "Z†") for k in range(start, L, 2)}
            sym[name] = QuditPauli.from_ops(d, L, ops)
    return StabilizerModel(d, L, {"kind": "chain", "L": L}, terms, sym, name="cluster1d", params={"L": L, "d": d})


def build_wen_1d(L: int, d: int = 2) -> StabilizerModel:
    """Terms ``X_{n-1} Y†_n Y_{n+1} X†_{n+2}`` (qubits: ``X Y Y X``) on a ring.

    Each term is, up to phase, the product ``C†_n C_{n+1}`` of neighbouring
    qudit cluster terms, which keeps all terms commuting for every ``d``.
    """
    if L < 5:
        raise ShapeError(f"1D Wen chain needs L >= 5, got {L}")
    if d == 2:
        spec = ("X", "Y", "Y", "X")
    else:
        spec = ("X", "Y†", "Y", "X†")
    terms = tuple(_word(d, L, {k - 1 + i: s for i, s in enumerate(spec)}) for k in range(L))
    all_x = QuditPauli.from_ops(d, L, {k: "X" for k in range(L)})
    sym = {"global-x": all_x}
    logicals = {"X": all_x, "Z": _word(d, L, {L - 1: "X†", 0: "Z", 1: "X†"})}
    all_z = QuditPauli.from_ops(d, L, {k: "Z" for k in range(L)})
    if d == 2 and L % 2:
        sym["global-z"] = all_z
    return StabilizerModel(d, L, {"kind": "chain", "L": L}, terms, sym, logicals, name="wen1d", params={"L": L, "d": d})


def toric_edge(Lx: int, Ly: int, x: int, y: int, orient: str) -> int:
    """Qubit index of the edge leaving vertex (x, y) to the east ('h') or north ('v')."""
    base = 2 * ((x % Lx) * Ly + (y % Ly))
    return base if orient == "h" else base + 1


def build_toric(Lx: int, Ly: int) -> StabilizerModel:
    if Lx < 2 or Ly < 2:
        raise ShapeError("toric code needs Lx, Ly >= 2")
    n = 2 * Lx * Ly
    e = lambda x, y, o: toric_edge(Lx, Ly, x, y, o)  # noqa: E731
    stars, plaqs = [], []
    for x in range(Lx):
        for y in range(Ly):
            star = [e(x, y, "h"), e(x - 1, y, "h"), e(x, y, "v"), e(x, y - 1, "v")]
            plaq = [e(x, y, "h"), e(x, y + 1, "h"), e(x, y, "v"), e(x + 1, y, "v")]
            stars.append(QuditPauli.from_ops(2, n, {q: "X" for q in star}))
            plaqs.append(QuditPauli.from_ops(2, n, {q: "Z" for q in plaq}))
    logicals = {
        "X1": QuditPauli.from_ops(2, n, {e(x, 0, "v"): "X" for x in range(Lx)}),
        "Z1": QuditPauli.from_ops(2, n, {e(0, y, "v"): "Z" for y in range(Ly)}),
        "X2": QuditPauli.from_ops(2, n, {e(0, y, "h"): "X" for y in range(Ly)}),
        "Z2": QuditPauli.from_ops(2, n, {e(x, 0, "h"): "Z" for x in range(Lx)}),
    }
    return StabilizerModel(2, n, {"kind": "torus-edges", "Lx": Lx, "Ly": Ly}, tuple(stars + plaqs),
                           logicals=logicals, name="toric", params={"Lx": Lx, "Ly": Ly})


def build_wen_2d(m: int, n: int) -> StabilizerModel:
    """Plaquettes ``X_{i,j} Y_{i-1,j} Y_{i,j+1} X_{i-1,j+1}`` on an m x n torus."""
    if m < 3 or n < 3:
        raise ShapeError("2D Wen model needs m, n >= 3")
    N = m * n
    site = lambda i, j: (i % m) * n + (j % n)  # noqa: E731
    terms = tuple(
        QuditPauli.from_ops(2, N, {site(i, j): "X", site(i - 1, j): "Y", site(i, j + 1): "Y", site(i - 1, j + 1): "X"})
        for i in range(m) for j in range(n)
    )
    sym = {"global-x": QuditPauli.from_ops(2, N, {k: "X" for k in range(N)}),
           "global-z": QuditPauli.from_ops(2, N, {k: "Z" for k in range(N)})}
    for i in range(m):
        sym[f"z-row-{i}"] = QuditPauli.from_ops(2, N, {site(i, j): "Z" for j in range(n)})
    for j in range(n):
        sym[f"z-col-{j}"] = QuditPauli.from_ops(2, N, {site(i, j): "Z" for i in range(m)})
    return StabilizerModel(2, N, {"kind": "torus-sites", "Lx": m, "Ly": n}, terms, sym,
                           name="wen2d", params={"m": m, "n": n})


def alternating_string(m: int, n: int, axis: int, index: int, first: str = "X") -> QuditPauli | None:
    """``XYXY...`` along row (axis 0) or column (axis 1) ``index``; None if it cannot close."""
    length = n if axis == 0 else m
    if length % 2:
        return None
    other = "Y" if first == "X" else "X"
    ops = {}
    for k in range(length):
        s = index * n + k if axis == 0 else k * n + index
        ops[s] = first if k % 2 == 0 else other
    return QuditPauli.from_ops(2, m * n, ops)


def gauged_qubit(Lx: int, Ly: int, x: int, y: int, role: str) -> int:
    """Qubit index of the vertex ('v'), east link ('e') or north link ('n') of cell (x, y)."""
    c = (x % Lx) * Ly + (y % Ly)
    return 3 * c + {"v": 0, "e": 1, "n": 2}[role]


def build_gauged_ising(Lx: int, Ly: int, stage: str = "graph-state") -> StabilizerModel:
    """Gauged 2D Ising model: the graph state, or its folded decorated toric code.

    Layout: cell (x, y) holds a vertex qubit, its east link and its north link.
    The folded stage keeps the vertex terms ``Z X X X X``, the plaquettes
    ``Z Z Z Z`` and products of neighbouring parallel ``X Z X`` bond terms, so
    every single ``X Z X`` bond term becomes a logical operator.
    """
    if stage not in ("graph-state", "decorated-toric"):
        raise ValueError(f"unknown stage {stage!r}")
    if Lx < 2 or Ly < 2:
        raise ShapeError("gauged Ising model needs Lx, Ly >= 2")
    N = 3 * Lx * Ly
    q = lambda x, y, r: gauged_qubit(Lx, Ly, x, y, r)  # noqa: E731
    word = lambda ops: QuditPauli.from_ops(2, N, ops)  # noqa: E731

    def h_bond(x, y):
        return word({q(x, y, "v"): "X", q(x, y, "e"): "Z", q(x + 1, y, "v"): "X"})

    def v_bond(x, y):
        return word({q(x, y, "v"): "X", q(x, y, "n"): "Z", q(x, y + 1, "v"): "X"})

    cells = [(x, y) for x in range(Lx) for y in range(Ly)]
    vertex = [word({q(x, y, "v"): "Z", q(x, y, "e"): "X", q(x, y, "n"): "X",
                    q(x - 1, y, "e"): "X", q(x, y - 1, "n"): "X"}) for x, y in cells]
    lattice = {"kind": "gauged-ising", "Lx": Lx, "Ly": Ly}
    params = {"Lx": Lx, "Ly": Ly, "stage": stage}
    if stage == "graph-state":
        terms = vertex + [h_bond(x, y) for x, y in cells] + [v_bond(x, y) for x, y in cells]
        return StabilizerModel(2, N, lattice, tuple(terms), name="gauged_ising", params=params)
    plaq = [word({q(x, y, "e"): "Z", q(x, y + 1, "e"): "Z", q(x, y, "n"): "Z", q(x + 1, y, "n"): "Z"})
            for x, y in cells]
    folded = []
    for x, y in cells:
        folded += [h_bond(x, y) * h_bond(x + 1, y), h_bond(x, y) * h_bond(x, y + 1),
                   v_bond(x, y) * v_bond(x, y + 1), v_bond(x, y) * v_bond(x + 1, y)]
    logicals = {"Z1": h_bond(0, 0), "Z2": v_bond(0, 0)}
    return StabilizerModel(2, N, lattice, tuple(vertex + plaq + folded), logicals=logicals,
                           name="gauged_ising", params=params)


# -- declarative model files ------------------------------------------------

def _build_from(model: str, p: dict):
    S = p.get("S", "1/2")
    builders = {
        "tfim": lambda: build_tfim(p["L"], float(p.get("lambda", 1.0)), bool(p.get("dual", False))),
        "mg": lambda: build_mg(p["L"]),
        "dimer": lambda: build_dimer_hd(p["L"], float(p.get("J", 0.5)), float(p.get("B", 0.0))),
        "heisenberg": lambda: build_staggered_heisenberg(p["L"], Fraction(str(S)), float(p.get("delta", 0.0))),
        "vbs_parent": lambda: build_vbs_parent(Fraction(str(S)), p["m"], p["n"], p["L"]),
        "cluster1d": lambda: build_cluster_1d(p["L"], p.get("d", 2)),
        "wen1d": lambda: build_wen_1d(p["L"], p.get("d", 2)),
        "toric": lambda: build_toric(p["Lx"], p["Ly"]),
        "wen2d": lambda: build_wen_2d(p["m"], p["n"]),
        "gauged_ising": lambda: build_gauged_ising(p["Lx"], p["Ly"], p.get("stage", "graph-state")),
    }
    if model not in builders:
        raise ContractError(f"unknown model {model!r}; choose from {sorted(builders)}")
    try:
        return builders[model]()
    except KeyError as exc:
        raise ContractError(f"model {model!r} is missing parameter {exc.args[0]!r}") from None


def model_from_config(cfg: dict):
    """Build a model from a parsed model-file mapping."""
    cfg = dict(cfg)
    schema = cfg.pop("schema", MODEL_SCHEMA)
    if schema != MODEL_SCHEMA:
        raise ContractError(f"unsupported schema {schema!r}")
    if "model" not in cfg:
        raise ContractError("model file lacks key 'model'")
    model = cfg.pop("model")
    boundary = cfg.pop("boundary", "periodic")
    if boundary != "periodic":
        raise ContractError(f"only periodic boundaries are supported, got {boundary!r}")
    params = dict(cfg.pop("params", {}))
    params.update(cfg)
    return _build_from(model, params)


def load_model_file(path):
    with open(path, "rb") as fh:
        return model_from_config(tomllib.load(fh))


def dump_model_file(path, model: str, **params) -> None:
    """Write a minimal model file (flat keys)."""
    lines = [f'schema = "{MODEL_SCHEMA}"', f'model = "{model}"', 'boundary = "periodic"']
    for k, v in params.items():
        if isinstance(v, bool):
            lines.append(f"{k} = {str(v).lower()}")
        elif isinstance(v, (int, float)):
            lines.append(f"{k} = {v!r}")
        else:
            lines.append(f'{k} = "{v}"')
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
