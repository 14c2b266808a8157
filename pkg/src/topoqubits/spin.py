"""Single-site spin matrices and total-spin projectors.

Spin values are carried as doubled integers ``two_s = 2S``.  Basis index ``i``
of a spin-S site is the state with ``S^z = S - i``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np

SECTOR_TOL = 1e-9


def as_two_s(spin) -> int:
    """Doubled spin from ``1/2``, ``"3/2"``, ``Fraction`` or float input."""
    two = Fraction(spin) * 2
    if two.denominator != 1 or two < 0:
        raise ValueError(f"spin must be a non-negative half-integer, got {spin}")
    return int(two)


@lru_cache(maxsize=None)
def spin_ops(two_s: int) -> dict:
    """``{"z", "+", "-", "x", "y", "id"}`` matrices for spin ``two_s/2``."""
    s = two_s / 2
    m = s - np.arange(two_s + 1)
    sp_ = np.zeros((two_s + 1, two_s + 1))
    for i in range(1, two_s + 1):
        # S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and |m+1> sits at index i-1
        sp_[i - 1, i] = np.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
    ops = {
        "z": np.diag(m),
        "+": sp_,
        "-": sp_.T.copy(),
        "id": np.eye(two_s + 1),
    }
    ops["x"] = (ops["+"] + ops["-"]) / 2
    ops["y"] = (ops["+"] - ops["-"]) / 2j
    for v in ops.values():
        v.setflags(write=False)
    return ops


def embed_ops(two_s: int, ops_by_pos: dict, arity: int) -> np.ndarray:
    """Kronecker product over ``arity`` consecutive sites."""
    ident = spin_ops(two_s)["id"]
    mats = [ops_by_pos.get(k, ident) for k in range(arity)]
    return reduce(np.kron, mats)


def exchange_block(two_s: int, hopping_phase: complex = 1.0) -> np.ndarray:
    """Two-site ``(phi S+S- + phi* S-S+)/2 + SzSz`` on spin ``two_s/2``."""
    o = spin_ops(two_s)
    return (
        (hopping_phase * np.kron(o["+"], o["-"]) + np.conj(hopping_phase) * np.kron(o["-"], o["+"])) / 2
        + np.kron(o["z"], o["z"])
    )


@lru_cache(maxsize=None)
def total_spin_squared(two_s: int, arity: int) -> np.ndarray:
    o = spin_ops(two_s)
    out = 0
    for a in ("x", "y", "z"):
        tot = sum(embed_ops(two_s, {k: o[a]}, arity) for k in range(arity))
        out = out + tot @ tot
    return np.real_if_close(out)


@lru_cache(maxsize=None)
def _eigensystem(two_s: int, arity: int):
    vals, vecs = np.linalg.eigh(total_spin_squared(two_s, arity))
    return vals, vecs


@lru_cache(maxsize=None)
def spin_projector(two_s: int, arity: int, two_sector: int) -> np.ndarray:
    """Projector onto total spin ``two_sector/2`` of ``arity`` spin-``two_s/2`` sites."""
    vals, vecs = _eigensystem(two_s, arity)
    j = two_sector / 2
    sel = np.abs(vals - j * (j + 1)) < SECTOR_TOL
    v = vecs[:, sel]
    proj = v @ v.T
    proj.setflags(write=False)
    return proj


def allowed_sectors(two_s: int, arity: int) -> list[int]:
    """Doubled total spins occurring in ``arity`` copies of spin ``two_s/2``."""
    top = arity * two_s
    return [t for t in range(top % 2, top + 1, 2) if t >= 0 and _has_sector(two_s, arity, t)]


def _has_sector(two_s: int, arity: int, two_sector: int) -> bool:
    vals, _ = _eigensystem(two_s, arity)
    j = two_sector / 2
    return bool(np.any(np.abs(vals - j * (j + 1)) < SECTOR_TOL))
