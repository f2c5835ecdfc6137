"""Slow, dense reference computations used to cross-check the solver.

Nothing here touches the sparse three-entry constraint form or the
incremental inverse: constraint matrices are rebuilt densely from the
chords of the parabola through consecutive (resp. extreme) domain points.
"""

from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np

from .errors import BudgetExceeded, InfeasibleState
from .instance import QipInstance
from .model import Coord, ZERO
from .solver import DualPoint

__all__ = [
    "OracleBudget",
    "brute_force_opt",
    "all_coords",
    "chord_matrix",
    "dense_slack",
    "check_dual_feasible",
    "dense_barrier",
    "finite_diff_gradient",
    "exhaustive_select",
    "random_feasible_point",
]


@dataclasses.dataclass(frozen=True)
class OracleBudget:
    max_points: int = 10**6

    def __post_init__(self):
        if self.max_points < 1:
            raise ValueError("max_points must be positive")


def brute_force_opt(inst: QipInstance, budget: OracleBudget = OracleBudget()) -> tuple[float, np.ndarray]:
    """Exact integer minimum by full enumeration of the domain box."""
    total = inst.num_points
    if total > budget.max_points:
        raise BudgetExceeded(f"{total} points exceed the budget of {budget.max_points}")
    ranges = [np.arange(lo, hi + 1) for lo, hi in inst.domains]
    best_val, best_x = math.inf, None
    chunk = 1 << 15
    it = itertools.product(*ranges)
    while True:
        block = np.array(list(itertools.islice(it, chunk)), dtype=np.float64)
        if block.size == 0:
            break
        vals = np.einsum("ki,ij,kj->k", block, inst.qhat, block) + block @ inst.lhat + inst.chat
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_x = float(vals[k]), block[k].astype(np.int64)
    return best_val, best_x


def all_coords(domains) -> list[Coord]:
    """Every dual coordinate in canonical order, y0 first."""
    out = [ZERO]
    for i, (lo, hi) in enumerate(domains, start=1):
        out.extend(Coord(i, j) for j in range(lo, hi + 1))
    return out


def chord_matrix(coord: Coord, domains, dim: int) -> np.ndarray:
    """Dense constraint matrix from the chord joining two parabola points.

    Lower facet j uses the points j, j+1 (feasible side above the chord),
    the upper facet the extreme points l, u (feasible side below). With the
    chord ``x_ii = (p+q) x_0i - p q`` and ``x_00 = 1`` homogenized into the
    right-hand side 1.
    """
    a = np.zeros((dim, dim))
    if coord.is_zero:
        a[0, 0] = 1.0
        return a
    i = coord.i
    lo, hi = domains[i - 1]
    if coord.j == hi:
        p, q, sign = lo, hi, 1.0
    else:
        p, q, sign = coord.j, coord.j + 1, -1.0
    # sign * (x_ii - (p+q) x_0i + p q) <= 0  ->  ... + x_00 <= 1
    a[0, 0] = 1.0 + sign * p * q
    a[0, i] = a[i, 0] = -sign * (p + q) / 2.0
    a[i, i] = sign
    return a


def dense_slack(inst: QipInstance, y: DualPoint) -> np.ndarray:
    n = inst.n
    s = np.zeros((n + 1, n + 1))
    s[0, 0] = inst.chat
    s[0, 1:] = s[1:, 0] = inst.lhat / 2.0
    s[1:, 1:] = inst.qhat
    s -= y.y0 * chord_matrix(ZERO, inst.domains, n + 1)
    for c, v in y.facet_y.items():
        s -= v * chord_matrix(c, inst.domains, n + 1)
    return s


def check_dual_feasible(inst: QipInstance, y: DualPoint, tol: float = 0.0) -> bool:
    """Dual feasibility up to ``tol``; ``tol = 0`` demands strict positive definiteness."""
    if any(v > tol for v in y.facet_y.values()):
        return False
    lam = float(np.linalg.eigvalsh(dense_slack(inst, y))[0])
    return lam > 0.0 if tol == 0.0 else lam >= -tol


def dense_barrier(inst: QipInstance, y: DualPoint, sigma: float) -> float:
    sign, logdet = np.linalg.slogdet(dense_slack(inst, y))
    if sign <= 0:
        raise InfeasibleState("dual slack matrix is not positive definite")
    return y.y0 + sum(y.facet_y.values()) + sigma * logdet


def _shift(y: DualPoint, coord: Coord, h: float) -> DualPoint:
    if coord.is_zero:
        return DualPoint(y.y0 + h, dict(y.facet_y))
    fy = dict(y.facet_y)
    fy[coord] = fy.get(coord, 0.0) + h
    return DualPoint(y.y0, fy)


def finite_diff_gradient(inst: QipInstance, y: DualPoint, sigma: float, coord: Coord, h: float = 1e-5) -> float:
    """Central difference of the barrier along one coordinate.

    The sign constraint is ignored: the barrier is smooth on the whole PD
    region. ``h`` is halved up to three times if a probe leaves that region.
    """
    for _ in range(4):
        try:
            fp = dense_barrier(inst, _shift(y, coord, h), sigma)
            fm = dense_barrier(inst, _shift(y, coord, -h), sigma)
        except InfeasibleState:
            h /= 2.0
            continue
        return (fp - fm) / (2.0 * h)
    raise InfeasibleState(f"no feasible central difference along {coord}")


def exhaustive_select(W: np.ndarray, sigma: float, y: DualPoint, domains, tol: float = 1e-7):
    """Reference for the coordinate choice: scan all m+1 gradient entries."""
    dim = W.shape[0]
    best = None
    for c in all_coords(domains):
        g = 1.0 - sigma * float(np.sum(chord_matrix(c, domains, dim) * W))
        eligible = g != 0.0 if c.is_zero else (g < 0.0 or (g > 0.0 and y.value(c) < 0.0))
        if eligible and (best is None or abs(g) > abs(best[1])):
            best = (c, g)
    if best is None or abs(best[1]) <= tol:
        return None
    return best


def random_feasible_point(
    inst: QipInstance, rng: np.random.Generator, density: float = 0.3, scale: float = 1.0, margin: float = 0.1
) -> DualPoint:
    """Random strictly feasible dual point with a mix of zero and negative multipliers.

    Random facets get negative values; upper-facet multipliers are then
    lowered until the variable block is PD with some slack, and ``y0`` is set
    from the Schur complement with slack ``margin``.
    """
    n = inst.n
    facets: dict[Coord, float] = {}
    for c in all_coords(inst.domains)[1:]:
        if rng.random() < density:
            facets[c] = -scale * rng.random()
    y = DualPoint(0.0, facets)
    s = dense_slack(inst, y)
    block = s[1:, 1:]
    lam = np.linalg.eigvalsh(block)[0]
    if lam < margin:
        bump = margin - lam + scale * rng.random()
        for i, (lo, hi) in enumerate(inst.domains, start=1):
            c = Coord(i, hi)
            facets[c] = facets.get(c, 0.0) - bump
        s = dense_slack(inst, DualPoint(0.0, facets))
        block = s[1:, 1:]
    r = s[0, 1:]
    schur = s[0, 0] - r @ np.linalg.solve(block, r)
    y0 = schur - margin - scale * rng.random()
    # Lowering y0 only raises s[0, 0]; push until the whole slack has margin.
    step = margin
    while np.linalg.eigvalsh(dense_slack(inst, DualPoint(y0, facets)))[0] < margin / 2.0:
        y0 -= step
        step *= 2.0
    return DualPoint(float(y0), facets)
