"""Matrix model of the semidefinite relaxation.

Index 0 of every (n+1)x(n+1) matrix is the homogenizing coordinate and
variable ``i`` (1-based) lives at index ``i``. Each constraint matrix has at
most three distinct nonzeros, at (0,0), (0,i)/(i,0) and (i,i), and is never
stored densely.
"""

from __future__ import annotations

import dataclasses
from functools import cached_property
from typing import Sequence

import numpy as np

from .instance import QipInstance

__all__ = [
    "Coord",
    "ZERO",
    "ConstraintMatrix",
    "A0",
    "FacetIndex",
    "build_augmented_q",
    "facet_matrix",
    "rank_class",
    "inner_with",
    "dense_matrix",
]


@dataclasses.dataclass(frozen=True, order=True)
class Coord:
    """Dual coordinate: ``Coord(0, 0)`` is y0, ``Coord(i, j)`` the facet multiplier y_ij.

    For variable ``i`` with domain ``{l, ..., u}``, ``j < u`` is a lower facet
    and ``j == u`` the upper facet. Ordering is the canonical tie-break order.
    """

    i: int
    j: int = 0

    @property
    def is_zero(self) -> bool:
        return self.i == 0

    def __str__(self):
        return "0" if self.i == 0 else f"{self.i}:{self.j}"

    @classmethod
    def parse(cls, text: str) -> "Coord":
        if text.strip() == "0":
            return ZERO
        i, j = text.split(":")
        return cls(int(i), int(j))


ZERO = Coord(0, 0)


@dataclasses.dataclass(frozen=True)
class ConstraintMatrix:
    """Sparse symmetric matrix with entries a00 at (0,0), a0i at (0,i), aii at (i,i)."""

    i: int
    a00: float
    a0i: float
    aii: float

    def block(self) -> np.ndarray:
        """The 2x2 block on rows/columns ``{0, i}``."""
        return np.array([[self.a00, self.a0i], [self.a0i, self.aii]])


A0 = ConstraintMatrix(0, 1.0, 0.0, 0.0)


def build_augmented_q(inst: QipInstance) -> np.ndarray:
    n = inst.n
    q = np.empty((n + 1, n + 1))
    q[0, 0] = inst.chat
    q[0, 1:] = 0.5 * inst.lhat
    q[1:, 0] = 0.5 * inst.lhat
    q[1:, 1:] = inst.qhat
    return q


def facet_matrix(coord: Coord, domains: Sequence[tuple[int, int]]) -> ConstraintMatrix:
    if coord.is_zero:
        return A0
    if not 1 <= coord.i <= len(domains):
        raise IndexError(f"variable index {coord.i} out of range 1..{len(domains)}")
    lo, hi = domains[coord.i - 1]
    j = coord.j
    if not lo <= j <= hi:
        raise IndexError(f"facet index {j} outside [{lo}, {hi}] for variable {coord.i}")
    if j < hi:
        return ConstraintMatrix(coord.i, 1.0 - j * (j + 1.0), (2.0 * j + 1.0) / 2.0, -1.0)
    return ConstraintMatrix(coord.i, 1.0 + lo * float(hi), -(lo + hi) / 2.0, 1.0)


def rank_class(cm: ConstraintMatrix) -> int:
    # Both nonzero 2x2 determinants are exact in floating point for integer domains.
    if cm.i == 0:
        return 1
    return 1 if cm.a00 * cm.aii - cm.a0i * cm.a0i == 0.0 else 2


def inner_with(cm: ConstraintMatrix, W: np.ndarray) -> float:
    """Frobenius inner product <A, W> for a sparse constraint matrix ``A``."""
    i = cm.i
    if i == 0:
        return cm.a00 * W[0, 0]
    return cm.a00 * W[0, 0] + 2.0 * cm.a0i * W[0, i] + cm.aii * W[i, i]


def dense_matrix(cm: ConstraintMatrix, dim: int) -> np.ndarray:
    """Materialize a constraint matrix. Used by oracles and tests only."""
    a = np.zeros((dim, dim))
    a[0, 0] = cm.a00
    if cm.i:
        a[0, cm.i] = a[cm.i, 0] = cm.a0i
        a[cm.i, cm.i] = cm.aii
    return a


class FacetIndex:
    """Flat enumeration of all facet coordinates of a domain box.

    Facet ``(i, j)`` maps to ``offsets[i-1] + (j - l_i)``, so flat order is the
    lexicographic ``(i, j)`` order. Coefficient arrays are aligned with it.
    """

    def __init__(self, domains: Sequence[tuple[int, int]]):
        self.domains = tuple((int(lo), int(hi)) for lo, hi in domains)
        self.lo = np.array([d[0] for d in self.domains], dtype=np.int64)
        self.hi = np.array([d[1] for d in self.domains], dtype=np.int64)
        widths = self.hi - self.lo + 1
        self.offsets = np.concatenate([[0], np.cumsum(widths)]).astype(np.int64)
        self.n = len(self.domains)
        self.m = int(self.offsets[-1])

    def flat(self, coord: Coord) -> int:
        if coord.is_zero:
            return -1
        lo, hi = self.domains[coord.i - 1]
        if not lo <= coord.j <= hi:
            raise IndexError(f"facet {coord} out of range")
        return int(self.offsets[coord.i - 1] + coord.j - lo)

    def coord(self, k: int) -> Coord:
        if k < 0:
            return ZERO
        i = int(np.searchsorted(self.offsets, k, side="right"))
        return Coord(i, int(self.lo[i - 1] + k - self.offsets[i - 1]))

    def matrix(self, k: int) -> ConstraintMatrix:
        if k < 0:
            return A0
        return ConstraintMatrix(int(self.var[k]), float(self.a00[k]), float(self.a0i[k]), float(self.aii[k]))

    @cached_property
    def var(self) -> np.ndarray:
        return np.repeat(np.arange(1, self.n + 1, dtype=np.int64), np.diff(self.offsets))

    @cached_property
    def jval(self) -> np.ndarray:
        return np.arange(self.m, dtype=np.int64) - self.offsets[self.var - 1] + self.lo[self.var - 1]

    @cached_property
    def is_upper(self) -> np.ndarray:
        return self.jval == self.hi[self.var - 1]

    @cached_property
    def a00(self) -> np.ndarray:
        j = self.jval.astype(np.float64)
        lo = self.lo[self.var - 1].astype(np.float64)
        hi = self.hi[self.var - 1].astype(np.float64)
        return np.where(self.is_upper, 1.0 + lo * hi, 1.0 - j * (j + 1.0))

    @cached_property
    def a0i(self) -> np.ndarray:
        j = self.jval.astype(np.float64)
        lo = self.lo[self.var - 1].astype(np.float64)
        hi = self.hi[self.var - 1].astype(np.float64)
        return np.where(self.is_upper, -(lo + hi) / 2.0, (2.0 * j + 1.0) / 2.0)

    @cached_property
    def aii(self) -> np.ndarray:
        return np.where(self.is_upper, 1.0, -1.0)

    def slack_matrix(self, q: np.ndarray, y0: float, y: np.ndarray) -> np.ndarray:
        """Dense ``Q - A^T y`` for flat facet multipliers ``y``."""
        s = np.array(q, dtype=np.float64, copy=True)
        s[0, 0] -= y0 + y @ self.a00
        idx = self.var
        off = np.bincount(idx, weights=y * self.a0i, minlength=self.n + 1)[1:]
        diag = np.bincount(idx, weights=y * self.aii, minlength=self.n + 1)[1:]
        s[0, 1:] -= off
        s[1:, 0] -= off
        s[np.arange(1, self.n + 1), np.arange(1, self.n + 1)] -= diag
        return s
