"""Generalized (qudit) Pauli words and symplectic linear algebra over Z_d.

A word on ``n`` sites is stored as exponent vectors ``x``, ``z`` in Z_d^n and
a phase exponent in Z_{2d}; its operator is::

    zeta**phase * prod_k X_k**x[k] Z_k**z[k],     zeta = exp(i*pi/d)

with ``X|j> = |j+1>`` and ``Z|j> = omega**j |j>`` (``omega = zeta**2``), so
``Z X = omega X Z``.  Qubit ``Y`` is the Hermitian ``i X Z``; for ``d > 2`` the
letter ``Y`` means ``Z X``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, ResourceError, ShapeError

DENSE_CAP = 2**20

__all__ = [
    "QuditPauli",
    "SymplecticBasis",
    "pauli_mul",
    "commutation_exponent",
    "symplectic_rank",
    "symplectic_basis",
    "group_order",
    "stabilizer_gsd",
    "to_dense",
    "to_sparse",
    "symplectic_matrix",
    "is_prime",
    "rref_mod_p",
    "nullspace_mod_p",
    "rank_mod_p",
]


def is_prime(d: int) -> bool:
    return d >= 2 and all(d % p for p in range(2, math.isqrt(d) + 1))


@dataclass(frozen=True)
class QuditPauli:
    d: int
    x: tuple
    z: tuple
    phase: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise ShapeError(f"local dimension must be >= 2, got {self.d}")
        if len(self.x) != len(self.z):
            raise ShapeError("x and z exponent vectors differ in length")
        object.__setattr__(self, "x", tuple(int(v) % self.d for v in self.x))
        object.__setattr__(self, "z", tuple(int(v) % self.d for v in self.z))
        object.__setattr__(self, "phase", int(self.phase) % (2 * self.d))

    # -- constructors -------------------------------------------------------
    @classmethod
    def identity(cls, d: int, n: int) -> "QuditPauli":
        return cls(d, (0,) * n, (0,) * n, 0)

    @classmethod
    def single(cls, d: int, n: int, site: int, letter: str, power: int = 1) -> "QuditPauli":
        """One-site word ``letter**power`` (letter in X, Y, Z) on ``site``."""
        if not 0 <= site < n:
            raise ShapeError(f"site {site} outside 0..{n - 1}")
        x = [0] * n
        z = [0] * n
        if letter == "X":
            x[site] = 1
            base = cls(d, x, z, 0)
        elif letter == "Z":
            z[site] = 1
            base = cls(d, x, z, 0)
        elif letter == "Y":
            x[site] = 1
            z[site] = 1
            # ZX = omega XZ; the qubit Y = i XZ is one zeta below that
            base = cls(d, x, z, 1 if d == 2 else 2)
        else:
            raise ValueError(f"unknown Pauli letter {letter!r}")
        return base.power(power)

    @classmethod
    def from_ops(cls, d: int, n: int, ops) -> "QuditPauli":
        """Build a word from ``{site: letters}``.

        ``letters`` is a string such as ``"X"``, ``"Y†"``, ``"Z^2"`` or a
        product ``"ZX"`` read left to right.  Sites are taken modulo ``n``.
        """
        out = cls.identity(d, n)
        for site, spec in ops.items():
            for letter, dag, pw in re.findall(r"([XYZ])(†?)(?:\^(-?\d+))?", spec):
                k = int(pw) if pw else 1
                if dag:
                    k = -k
                out = out * cls.single(d, n, site % n, letter, k)
        return out

    @classmethod
    def from_string(cls, word: str, d: int = 2) -> "QuditPauli":
        """Dense label such as ``"XZZXI"``; one letter per site."""
        ops = {k: c for k, c in enumerate(word) if c != "I"}
        return cls.from_ops(d, len(word), ops)

    # -- basic properties ---------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def support(self) -> frozenset:
        return frozenset(k for k in range(self.n) if self.x[k] or self.z[k])

    @property
    def weight(self) -> int:
        return len(self.support)

    def is_identity(self, up_to_phase: bool = False) -> bool:
        trivial = not any(self.x) and not any(self.z)
        return trivial and (up_to_phase or self.phase == 0)

    @property
    def coefficient(self) -> complex:
        return complex(np.exp(1j * np.pi * self.phase / self.d))

    def symplectic(self) -> np.ndarray:
        return np.array(self.x + self.z, dtype=np.int64)

    # -- algebra ------------------------------------------------------------
    def __mul__(self, other: "QuditPauli") -> "QuditPauli":
        return pauli_mul(self, other)

    def dagger(self) -> "QuditPauli":
        xz = sum(a * b for a, b in zip(self.x, self.z))
        return QuditPauli(self.d, [-v for v in self.x], [-v for v in self.z], -self.phase + 2 * xz)

    inverse = dagger

    def power(self, k: int) -> "QuditPauli":
        base = self if k >= 0 else self.dagger()
        out = QuditPauli.identity(self.d, self.n)
        for _ in range(abs(k)):
            out = out * base
        return out

    def with_phase(self, phase: int) -> "QuditPauli":
        return QuditPauli(self.d, self.x, self.z, phase)

    def order_fixed(self) -> "QuditPauli":
        """Same word rescaled by a power of zeta so that ``P**d == 1``."""
        p = self.power(self.d)
        # p is a scalar zeta**k with k in {0, d}
        return self if p.phase == 0 else self.with_phase(self.phase + 1)

    def __str__(self) -> str:
        toks = []
        for k in range(self.n):
            for letter, e in (("X", self.x[k]), ("Z", self.z[k])):
                if e:
                    toks.append(f"{letter}{k}" + (f"^{e}" if e != 1 else ""))
        return f"{self.phase}|" + " ".join(toks)

    @classmethod
    def parse(cls, text: str, d: int, n: int) -> "QuditPauli":
        """Inverse of ``str``: ``"phase|X3^2 Z3 X5"``."""
        try:
            head, _, body = text.partition("|")
            phase = int(head)
        except ValueError as exc:
            raise ValueError(f"malformed Pauli word {text!r}") from exc
        x = [0] * n
        z = [0] * n
        for tok in body.split():
            m = re.fullmatch(r"([XZ])(\d+)(?:\^(\d+))?", tok)
            if m is None:
                raise ValueError(f"malformed token {tok!r} in {text!r}")
            site = int(m.group(2))
            if site >= n:
                raise ShapeError(f"site {site} outside 0..{n - 1}")
            e = int(m.group(3) or 1)
            (x if m.group(1) == "X" else z)[site] += e
        return cls(d, x, z, phase)


def _check_pair(a: QuditPauli, b: QuditPauli) -> None:
    if a.d != b.d or a.n != b.n:
        raise ShapeError(f"shape mismatch: (d={a.d}, n={a.n}) vs (d={b.d}, n={b.n})")


def pauli_mul(a: QuditPauli, b: QuditPauli) -> QuditPauli:
    _check_pair(a, b)
    d = a.d
    reorder = sum(za * xb for za, xb in zip(a.z, b.x))
    return QuditPauli(
        d,
        [(u + v) % d for u, v in zip(a.x, b.x)],
        [(u + v) % d for u, v in zip(a.z, b.z)],
        a.phase + b.phase + 2 * reorder,
    )


def commutation_exponent(a: QuditPauli, b: QuditPauli) -> int:
    """``s`` such that ``a b = omega**s b a``."""
    _check_pair(a, b)
    s = sum(za * xb - xa * zb for xa, za, xb, zb in zip(a.x, a.z, b.x, b.z))
    return s % a.d


def _site_matrix(d: int, x: int, z: int) -> np.ndarray:
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d), x, axis=0)
    return shift @ np.diag(omega ** (z * np.arange(d)))


def to_dense(p: QuditPauli, cap: int = DENSE_CAP) -> np.ndarray:
    dim = p.d**p.n
    if dim > cap:
        raise ResourceError(f"dense dimension {dim} exceeds cap {cap}")
    mats = [_site_matrix(p.d, xk, zk) for xk, zk in zip(p.x, p.z)]
    return p.coefficient * reduce(np.kron, mats, np.eye(1, dtype=complex))


def basis_digits(d: int, n: int) -> np.ndarray:
    """Digits of every basis index; site 0 is the most significant."""
    idx = np.arange(d**n)
    return (idx[:, None] // d ** np.arange(n - 1, -1, -1)) % d


def to_sparse(p: QuditPauli, digits: np.ndarray | None = None) -> sp.csr_matrix:
    """Sparse matrix of ``p`` built by acting on basis indices."""
    d, n = p.d, p.n
    if digits is None:
        digits = basis_digits(d, n)
    x = np.array(p.x)
    z = np.array(p.z)
    weights = d ** np.arange(n - 1, -1, -1)
    rows = ((digits + x) % d) @ weights
    phase_exp = 2 * (digits @ z) + p.phase
    vals = np.exp(1j * np.pi * (phase_exp % (2 * d)) / d)
    cols = np.arange(d**n)
    return sp.csr_matrix((vals, (rows, cols)), shape=(d**n, d**n))


# -- linear algebra over Z_p ------------------------------------------------

def rref_mod_p(mat: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(p); returns (matrix, pivot columns)."""
    a = np.array(mat, dtype=np.int64) % p
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        if others.size:
            a[others] = (a[others] - np.outer(a[others, c], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank_mod_p(mat: np.ndarray, p: int) -> int:
    if np.size(mat) == 0:
        return 0
    return len(rref_mod_p(mat, p)[1])


def nullspace_mod_p(mat: np.ndarray, p: int) -> np.ndarray:
    """Basis (rows) of ``{v : mat @ v = 0 mod p}``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=np.int64))
    cols = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    red, piv = rref_mod_p(mat, p)
    free = [c for c in range(cols) if c not in piv]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, pc in enumerate(piv):
            basis[i, pc] = (-red[r, f]) % p
    return basis


def symplectic_matrix(paulis: Sequence[QuditPauli]) -> np.ndarray:
    if not paulis:
        return np.zeros((0, 0), dtype=np.int64)
    return np.array([q.symplectic() for q in paulis], dtype=np.int64)


def _check_commuting(gens: Sequence[QuditPauli]) -> None:
    for (i, a), (j, b) in itertools.combinations(enumerate(gens), 2):
        if commutation_exponent(a, b):
            raise ContractError(f"generators {i} ({a}) and {j} ({b}) do not commute")


def _invariant_factors(mat: np.ndarray) -> list[int]:
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form
    from sympy.polys.domains import ZZ

    if mat.size == 0:
        return []
    snf = smith_normal_form(Matrix(mat.tolist()), domain=ZZ)
    k = min(snf.shape)
    return [abs(int(snf[i, i])) for i in range(k) if snf[i, i] != 0]


def group_order(gens: Sequence[QuditPauli], n: int | None = None, d: int | None = None) -> int:
    """Size of the group generated by ``gens`` modulo phases."""
    if not gens:
        return 1
    d = gens[0].d
    mat = symplectic_matrix(gens)
    if is_prime(d):
        return d ** rank_mod_p(mat, d)
    return math.prod(d // math.gcd(d, s) for s in _invariant_factors(mat))


def symplectic_rank(gens: Sequence[QuditPauli], check: bool = True) -> int:
    """Rank of the (x|z) exponent matrix over Z_d.

    For composite ``d`` this is the number of nontrivial cyclic factors of the
    generated group (Smith normal form); use :func:`group_order` for its size.
    """
    if not gens:
        return 0
    if check:
        _check_commuting(gens)
    d = gens[0].d
    mat = symplectic_matrix(gens)
    if is_prime(d):
        return rank_mod_p(mat, d)
    return sum(1 for s in _invariant_factors(mat) if s % d)


def stabilizer_gsd(gens: Sequence[QuditPauli], n: int, d: int, check: bool = True) -> int:
    """Dimension ``d**n / |S|`` of each joint eigenspace of a commuting set."""
    if check and gens:
        _check_commuting(gens)
    return d**n // group_order(gens)


@dataclass(frozen=True)
class SymplecticBasis:
    d: int
    n: int
    generators: tuple
    rank: int


def symplectic_basis(gens: Iterable[QuditPauli], d: int, n: int) -> SymplecticBasis:
    """Keep an independent subset of a commuting generator list (prime d)."""
    gens = list(gens)
    _check_commuting(gens)
    kept = []
    r = 0
    for g in gens:
        trial = kept + [g]
        rt = rank_mod_p(symplectic_matrix(trial), d) if is_prime(d) else symplectic_rank(trial, check=False)
        if rt > r:
            kept.append(g)
            r = rt
    return SymplecticBasis(d, n, tuple(kept), r)
