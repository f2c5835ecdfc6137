"""Barrier coordinate ascent on the dual of the SDP relaxation (CD and CD2D).

The dual reads

    max  y0 + sum_ij y_ij
    s.t. Q - y0 A0 - sum_ij y_ij A_ij  >= 0,   y_ij <= 0,

and is attacked through the barrier ``f(y; sigma) = <b, y> + sigma log det(Q - A^T y)``.
The inverse ``W = (Q - A^T y)^{-1}`` is kept up to date by rank-2 updates so
that one iteration costs O(n^2).

All step-size formulas work on the 2x2 block ``K`` of ``W`` on ``{0, i}``:
with ``tau = <A, W>``, ``kappa = det(K) det(A_2)``,

    det(I - s K A_2) = 1 - tau s + kappa s^2,

and adding ``s0`` on y0 gives ``det(I - K M) = d(s) - s0 h(s)`` with
``h(s) = w00 - det(K) a_ii s``.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import time
from typing import Optional

import numpy as np

from . import _kernels
from .errors import InfeasibleState, NumericalBreakdown, UpdateSingular
from .instance import QipInstance, translate
from .linalg import (
    UpdateSpec,
    cholesky_logdet,
    dense_inverse,
    min_eigenvalue,
    quad_window,
    update_factor,
)
from .model import A0, ZERO, ConstraintMatrix, Coord, FacetIndex, build_augmented_q, inner_with, rank_class

log = logging.getLogger(__name__)

__all__ = [
    "DualPoint",
    "SolverConfig",
    "SolverState",
    "TraceRecord",
    "SolveResult",
    "initial_point",
    "barrier_value",
    "gradient_entry",
    "select_coordinate",
    "line_search_1d",
    "plane_search_2d",
    "apply_step",
    "sigma_update",
    "init_state",
    "solve",
    "write_trace",
    "TRACE_HEADER",
]

TRACE_HEADER = ["iter", "elapsed_s", "coordinate", "step_s", "step_s0", "sigma", "grad", "bound", "barrier"]
REASONS = ("max_iters", "target", "stalled", "stationary")


@dataclasses.dataclass
class DualPoint:
    """Dual multipliers: ``y0`` plus a sparse map of nonpositive facet values."""

    y0: float
    facet_y: dict[Coord, float] = dataclasses.field(default_factory=dict)

    @property
    def bound(self) -> float:
        return math.fsum([self.y0, *self.facet_y.values()])

    def value(self, coord: Coord) -> float:
        return self.y0 if coord.is_zero else self.facet_y.get(coord, 0.0)

    def to_flat(self, index: FacetIndex) -> np.ndarray:
        y = np.zeros(index.m)
        for c, v in self.facet_y.items():
            y[index.flat(c)] = v
        return y

    @classmethod
    def from_flat(cls, y0: float, y: np.ndarray, index: FacetIndex) -> "DualPoint":
        return cls(float(y0), {index.coord(int(k)): float(y[k]) for k in np.flatnonzero(y)})


@dataclasses.dataclass
class SolverConfig:
    """Knobs for :func:`solve`. ``max_iters=None`` means ``50 * n * mean(u - l)``."""

    sigma0: float = 1.0
    sigma_shrink: float = 0.25
    grad_threshold: float = 0.01
    sigma_min: float = 1e-5
    max_iters: Optional[int] = None
    bound_target: Optional[float] = None
    algorithm: str = "cd"
    refresh_period: int = 500
    refresh_tol: float = 1e-6
    # Refresh early once rounding in W may have been amplified this much
    # (growth of diag(W) or accumulated 1/det of the updates).
    growth_refresh: float = 8.0
    # Replace an update by a dense refresh when |Z N Z^T| exceeds this
    # multiple of diag(W).
    cancel_refresh: float = 10.0
    stationarity_tol: float = 1e-7
    improvement_window: int = 100
    improvement_rtol: float = 1e-8
    # Solve in variables shifted to the middle of each domain. The dual
    # problem is unchanged but the slack matrix is far better conditioned.
    center_domains: bool = True
    # Dense PD/sign check every this many iterations (None disables).
    debug_check_every: Optional[int] = None
    # Record the post-step gradient residuals of every step.
    record_steps: bool = False

    def __post_init__(self):
        if self.algorithm not in ("cd", "cd2d"):
            raise ValueError(f"algorithm must be 'cd' or 'cd2d', got {self.algorithm!r}")
        for name in ("sigma0", "sigma_shrink", "grad_threshold", "sigma_min", "stationarity_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.sigma_shrink < 1:
            raise ValueError("sigma_shrink must be below 1")
        if self.max_iters is not None and self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if not (self.growth_refresh > 1 and self.cancel_refresh > 0):
            raise ValueError("growth_refresh must exceed 1 and cancel_refresh be positive")
        if self.refresh_period < 1 or self.improvement_window < 1:
            raise ValueError("refresh_period and improvement_window must be positive")


@dataclasses.dataclass(slots=True)
class TraceRecord:
    iter: int
    elapsed_s: float
    coordinate: Coord
    step_s: float
    step_s0: float
    sigma: float
    grad: float
    bound: float
    barrier: float

    def row(self) -> list[str]:
        return [
            str(self.iter),
            f"{self.elapsed_s:.6f}",
            str(self.coordinate),
            repr(self.step_s),
            repr(self.step_s0),
            repr(self.sigma),
            repr(self.grad),
            repr(self.bound),
            repr(self.barrier),
        ]


@dataclasses.dataclass
class StepCheck:
    """Post-step gradient residuals measured on the updated inverse."""

    iter: int
    two_d: bool
    clamped: bool
    sigma: float
    grad_s: float
    grad_s0: float


@dataclasses.dataclass
class SolveResult:
    bound: float
    y: DualPoint
    trace: list[TraceRecord]
    termination_reason: str
    iterations: int
    elapsed_s: float
    final_sigma: float
    refresh_residuals: list[float]
    feasibility_violations: int
    debug_checks: int
    step_checks: list[StepCheck]
    active_set_excess: int
    initial_bound: float = 0.0

    def summary(self) -> str:
        return (
            f"bound={self.bound!r} iters={self.iterations} "
            f"time_s={self.elapsed_s:.6f} reason={self.termination_reason}"
        )


# -- starting point ---------------------------------------------------------


def initial_point(Q: np.ndarray, domains) -> DualPoint:
    """Strictly feasible dual start.

    ``y = 0`` when ``Q`` is already positive definite. Otherwise every upper
    facet gets ``ytilde = min(lambda_min(Qhat) - 1, 0)`` and ``y0`` is chosen so
    that the Schur complement on the homogenizing row stays positive.
    """
    Q = np.asarray(Q, dtype=np.float64)
    n = Q.shape[0] - 1
    if min_eigenvalue(Q) > 1e-8 * (1.0 + np.max(np.abs(Q))):
        return DualPoint(0.0, {})
    lo = np.array([d[0] for d in domains], dtype=np.float64)
    hi = np.array([d[1] for d in domains], dtype=np.float64)
    ytil = min(min_eigenvalue(Q[1:, 1:]) - 1.0, 0.0)
    a = -(lo + hi) / 2.0
    r = Q[0, 1:] - ytil * a
    y0 = Q[0, 0] - ytil * float(np.sum(1.0 + lo * hi)) - 1.0 - float(r @ r)
    facets = {Coord(i + 1, int(hi[i])): ytil for i in range(n)} if ytil != 0.0 else {}
    point = DualPoint(float(y0), facets)
    index = FacetIndex(domains)
    slack = index.slack_matrix(Q, point.y0, point.to_flat(index))
    if cholesky_logdet(slack) is None:
        raise AssertionError("starting point is not strictly dual feasible")
    return point


# -- scalar pieces ----------------------------------------------------------


def gradient_entry(W: np.ndarray, sigma: float, cm: ConstraintMatrix) -> float:
    return 1.0 - sigma * inner_with(cm, W)


def _quadratic_roots(a: float, b: float, c: float) -> list[float]:
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        # Allow a hair of rounding on a double root.
        if disc > -1e-14 * (b * b + abs(4.0 * a * c)):
            disc = 0.0
        else:
            return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return [0.0]
    return [q / a, c / q]


def _block(W, i):
    return float(W[0, 0]), float(W[0, i]), float(W[i, i])


def _grad_1d(s, sigma, tau, kappa):
    d = 1.0 - tau * s + kappa * s * s
    return 1.0 - sigma * (tau - 2.0 * kappa * s) / d


def line_search_1d(W: np.ndarray, sigma: float, cm: ConstraintMatrix, y_coord: float = 0.0):
    """Exact maximizer of ``s -> f(y + s e_coord)``.

    Returns ``(s, clamped)``. Facet steps are capped at ``-y_coord`` so the
    multiplier stays nonpositive; y0 is never capped.

    Raises:
      NumericalBreakdown: if no stationary point lies inside the PD window.
    """
    if cm.i == 0:
        return 1.0 / float(W[0, 0]) - sigma, False
    w00, w0i, wii = _block(W, cm.i)
    tau = cm.a00 * w00 + 2.0 * cm.a0i * w0i + cm.aii * wii
    if rank_class(cm) == 1:
        # A = g g^T, tau = g^T W g.
        s = 1.0 / tau - sigma
    else:
        kappa = (w00 * wii - w0i * w0i) * (cm.a00 * cm.aii - cm.a0i * cm.a0i)
        lo, hi = quad_window(-tau, kappa)
        roots = [r for r in _quadratic_roots(kappa, 2.0 * sigma * kappa - tau, 1.0 - sigma * tau) if lo < r < hi]
        if not roots:
            raise NumericalBreakdown(
                "no stationary step inside the PD window",
                {"coord_i": cm.i, "tau": tau, "kappa": kappa, "sigma": sigma, "window": (lo, hi)},
            )
        s = min(roots, key=lambda r: abs(_grad_1d(r, sigma, tau, kappa)))
    if s > -y_coord:
        return -y_coord, True
    return s, False


def _plane_grads(s0, s, sigma, w00, tau, kappa, c):
    g = 1.0 - tau * s + kappa * s * s - s0 * (w00 - c * s)
    return 1.0 - sigma * (w00 - c * s) / g, 1.0 + sigma * (2.0 * kappa * s - tau + c * s0) / g


def plane_search_2d(W: np.ndarray, sigma: float, cm: ConstraintMatrix, y_coord: float):
    """Exact maximizer of ``(s0, s) -> f(y + s0 e_0 + s e_coord)`` for a facet coordinate.

    For fixed ``s`` the optimal ``s0 = d(s) / h(s) - sigma``; substituting it
    into the ``s`` stationarity condition (times ``h(s)^2``) leaves a quadratic
    in ``s`` whose unique root with ``h(s) > 0`` is the unconstrained optimum.
    If that root would make the multiplier positive, ``s = -y_coord`` and
    ``s0`` is re-optimized.

    Returns ``(s0, s, clamped)``.
    """
    if cm.i == 0:
        raise ValueError("plane search needs a facet coordinate")
    w00, w0i, wii = _block(W, cm.i)
    det_k = w00 * wii - w0i * w0i
    det_a = cm.a00 * cm.aii - cm.a0i * cm.a0i
    tau = cm.a00 * w00 + 2.0 * cm.a0i * w0i + cm.aii * wii
    kappa = det_k * det_a
    c = det_k * cm.aii
    qa = det_k * det_k * cm.aii * (cm.aii - det_a)
    qb = -2.0 * w00 * det_k * (cm.aii - det_a) + sigma * c * c
    qc = w00 * (w00 - tau - sigma * c) + c
    roots = [r for r in _quadratic_roots(qa, qb, qc) if w00 - c * r > 0.0]
    if not roots:
        raise NumericalBreakdown(
            "no stationary pair inside the PD region",
            {"coord_i": cm.i, "w": (w00, w0i, wii), "sigma": sigma, "coef": (qa, qb, qc)},
        )

    def s0_of(s):
        return (1.0 - tau * s + kappa * s * s) / (w00 - c * s) - sigma

    if len(roots) > 1:
        s = min(roots, key=lambda r: abs(_plane_grads(s0_of(r), r, sigma, w00, tau, kappa, c)[1]))
    else:
        s = roots[0]
    clamped = s > -y_coord
    if clamped:
        s = -y_coord
    return float(s0_of(s)), float(s), bool(clamped)


# -- solver state -----------------------------------------------------------


class SolverState:
    """Mutable state of one run: dual point, inverse, barrier parameter and trace."""

    def __init__(self, inst: QipInstance, config: SolverConfig, start: DualPoint | None = None):
        self.inst = inst
        self.config = config
        self.q = build_augmented_q(inst)
        self.index = FacetIndex(inst.domains)
        if start is None:
            start = initial_point(self.q, inst.domains)
        self.y0 = float(start.y0)
        self.y = start.to_flat(self.index)
        self.active = set(int(k) for k in np.flatnonzero(self.y < 0.0))
        self._active_arr = None
        self.sigma = float(config.sigma0)
        self.iter = 0
        self.trace: list[TraceRecord] = []
        self.refresh_residuals: list[float] = []
        self.steps_since_refresh = 0
        self.refresh_period = config.refresh_period
        self.refresh(record=False)

    # bookkeeping
    @property
    def barrier(self) -> float:
        return self.bound + self.sigma * self.logdet

    def dual_point(self) -> DualPoint:
        return DualPoint.from_flat(self.y0, self.y, self.index)

    def slack(self) -> np.ndarray:
        return self.index.slack_matrix(self.q, self.y0, self.y)

    def active_array(self) -> np.ndarray:
        if self._active_arr is None:
            self._active_arr = np.array(sorted(self.active), dtype=np.int64)
        return self._active_arr

    def residual(self) -> float:
        return float(np.max(np.abs(self.slack() @ self.W - np.eye(self.q.shape[0]))))

    def refresh(self, record: bool = True) -> None:
        """Recompute ``W``, ``log det`` and the bound densely from ``y``."""
        s = self.slack()
        if record:
            self.refresh_residuals.append(float(np.max(np.abs(s @ self.W - np.eye(s.shape[0])))))
        res = dense_inverse(s)
        if res is None:
            raise InfeasibleState(f"dual slack matrix lost positive definiteness at iteration {self.iter}")
        self.W, self.logdet = res
        self.bound = math.fsum([self.y0, *self.y[self.y != 0.0]])
        self.steps_since_refresh = 0
        self.w_scale = float(np.max(np.diag(self.W)))
        self.amplification = 0.0

    def matrix(self, k: int) -> ConstraintMatrix:
        return self.index.matrix(k)


def init_state(inst: QipInstance, config: SolverConfig | None = None) -> SolverState:
    return SolverState(inst, config or SolverConfig())


def barrier_value(state: SolverState, dense: bool = False) -> float:
    """``<b, y> + sigma log det(Q - A^T y)``; ``dense=True`` refactors from scratch."""
    if not dense:
        return state.barrier
    ld = cholesky_logdet(state.slack())
    if ld is None:
        raise InfeasibleState("dual slack matrix is not positive definite")
    return math.fsum([state.y0, *state.y]) + state.sigma * ld


def select_coordinate(W: np.ndarray, sigma: float, y: DualPoint, domains, tol: float = 1e-7):
    """Steepest eligible coordinate from at most ``4n + 1`` structural candidates
    plus every currently negative multiplier.

    Returns ``(coord, grad)`` or ``None`` when no eligible gradient exceeds ``tol``.
    """
    index = FacetIndex(domains)
    yf = y.to_flat(index)
    active = np.flatnonzero(yf < 0.0).astype(np.int64)
    k, g = _kernels.select(np.ascontiguousarray(W), float(sigma), index.lo, index.hi, index.offsets, yf, active, tol)
    if k == _kernels.NONE_SELECTED:
        return None
    return index.coord(k), g


def apply_step(state: SolverState, k: int, s: float, s0: float = 0.0, clamped: bool = False) -> SolverState:
    """Move ``y_k += s`` (``y0 += s0``) and update ``W`` by a rank-<=2 formula.

    ``k = -1`` addresses y0 itself. Updates whose correction term dwarfs
    ``W`` (cancellation) or that hit a near-singular pivot are replaced by a
    dense refresh.
    """
    state.iter += 1
    if s == 0.0 and s0 == 0.0:
        return state
    if k < 0:
        spec = UpdateSpec(0, np.array([[s + s0, 0.0], [0.0, 0.0]]))
    else:
        spec = UpdateSpec.coordinate_step(state.matrix(k), s, s0)
    try:
        nmat, det = update_factor(state.W, spec)
        ratio = _update_ratio(state.W, spec.i, nmat)
    except UpdateSingular:
        log.debug("singular pivot at iteration %d, refreshing densely", state.iter)
        nmat, ratio = None, math.inf

    cfg = state.config
    dense = ratio > cfg.cancel_refresh
    if dense and nmat is not None:
        # W is still consistent with the old y: this is a checkpoint.
        state.refresh_residuals.append(state.residual())

    if k < 0:
        state.y0 += s + s0
    else:
        state.y0 += s0
        state.y[k] = 0.0 if clamped else state.y[k] + s
        if state.y[k] < 0.0:
            if k not in state.active:
                state.active.add(k)
                state._active_arr = None
        elif k in state.active:
            state.active.discard(k)
            state._active_arr = None
    state.bound += s + s0

    if dense:
        state.refresh(record=False)
        return state
    _kernels.rank2_update(state.W, spec.i, nmat[0, 0], nmat[0, 1], nmat[1, 1])
    inc = math.log(det)
    state.logdet += inc
    state.steps_since_refresh += 1
    # Errors already in W scale with ||W||; a shrinking det(I - KM) or a
    # growing diagonal means the accumulated error is being amplified.
    state.amplification += max(0.0, -inc)
    limit = cfg.growth_refresh
    grown = max(state.W[0, 0], state.W[spec.i, spec.i]) > limit * state.w_scale
    if grown or state.amplification > math.log(limit):
        state.refresh()
    elif state.steps_since_refresh >= state.refresh_period:
        state.refresh()
        if state.refresh_residuals[-1] > cfg.refresh_tol:
            state.refresh_period = max(10, state.refresh_period // 2)
    return state


def _update_ratio(W: np.ndarray, i: int, nmat: np.ndarray) -> float:
    """Bound on ``max|Z N Z^T|`` relative to ``max diag(W)`` (W is PD, so
    ``|W_ra| <= sqrt(W_rr W_aa)``). Large values mean cancellation."""
    w00 = W[0, 0]
    if i == 0:
        return abs(nmat[0, 0]) * w00
    wii = W[i, i]
    return abs(nmat[0, 0]) * w00 + 2.0 * abs(nmat[0, 1]) * math.sqrt(w00 * wii) + abs(nmat[1, 1]) * wii


def sigma_update(state: SolverState, selected_grad: float) -> SolverState:
    cfg = state.config
    if abs(selected_grad) < cfg.grad_threshold:
        state.sigma = max(state.sigma * cfg.sigma_shrink, cfg.sigma_min)
    return state


# -- main loop --------------------------------------------------------------


def _search(state: SolverState, k: int, two_d: bool):
    if k < 0:
        return line_search_1d(state.W, state.sigma, A0)[0], 0.0, False
    cm = state.matrix(k)
    yk = float(state.y[k])
    if two_d:
        s0, s, clamped = plane_search_2d(state.W, state.sigma, cm, yk)
        return s, s0, clamped
    s, clamped = line_search_1d(state.W, state.sigma, cm, yk)
    return s, 0.0, clamped


def _debug_check(state: SolverState) -> bool:
    ok = bool(np.all(state.y <= 0.0)) and min_eigenvalue(state.slack()) > 0.0
    if not ok:
        log.warning("feasibility violation at iteration %d", state.iter)
    return ok


def active_set_excess(y: np.ndarray, index: FacetIndex, thresh: float = -1e-4) -> int:
    """Number of variables with more than two multipliers below ``thresh``."""
    counts = np.bincount(index.var[y < thresh], minlength=index.n + 1)
    return int(np.sum(counts > 2))


def solve(inst: QipInstance, config: SolverConfig | None = None) -> SolveResult:
    """Run CD or CD2D and return the best lower bound found.

    Stops on the iteration cap, on reaching ``bound_target``, when no
    eligible coordinate remains at the smallest ``sigma`` or when the best
    bound stalls over ``improvement_window`` iterations at the smallest ``sigma``.
    """
    cfg = config or SolverConfig()
    _kernels.warmup()
    t_start = time.perf_counter()
    shift = np.array([(lo + hi) // 2 for lo, hi in inst.domains], dtype=np.int64)
    if not (cfg.center_domains and shift.any()):
        shift[:] = 0
    state = SolverState(translate(inst, shift) if shift.any() else inst, cfg)
    index = state.index

    def coord_of(k: int) -> Coord:
        c = index.coord(k)
        return c if c.is_zero else Coord(c.i, c.j + int(shift[c.i - 1]))
    max_iters = cfg.max_iters
    if max_iters is None:
        max_iters = int(50 * inst.n * float(np.mean(index.hi - index.lo)))
    two_d = cfg.algorithm == "cd2d"
    tol = cfg.stationarity_tol
    lo, hi, offsets = index.lo, index.hi, index.offsets

    best_bound, best_y0, best_y = state.bound, state.y0, state.y.copy()
    initial_bound = state.bound
    floor_hist: list[float] = []
    violations = checks = 0
    step_checks: list[StepCheck] = []
    reason = "max_iters"

    if cfg.bound_target is not None and best_bound >= cfg.bound_target:
        reason = "target"
        max_iters = 0

    for _ in range(max_iters):
        sigma = state.sigma
        k, g = _kernels.select(state.W, sigma, lo, hi, offsets, state.y, state.active_array(), tol)
        k, g = int(k), float(g)
        if k == _kernels.NONE_SELECTED:
            at_floor = sigma <= cfg.sigma_min
            state.iter += 1
            sigma_update(state, 0.0)
            if at_floor:
                reason = "stationary"
                break
            continue

        use_2d = two_d and k >= 0
        try:
            s, s0, clamped = _search(state, k, use_2d)
        except NumericalBreakdown:
            state.refresh(record=False)
            try:
                s, s0, clamped = _search(state, k, use_2d)
            except NumericalBreakdown as exc:
                exc.diagnostic.update(
                    iter=state.iter, sigma=sigma, coordinate=str(coord_of(k)), bound=state.bound, y0=state.y0
                )
                raise

        apply_step(state, k, s, s0, clamped)
        barrier = state.bound + sigma * state.logdet
        state.trace.append(
            TraceRecord(
                state.iter, time.perf_counter() - t_start, coord_of(k), s, s0, sigma, g, state.bound, barrier
            )
        )
        if cfg.record_steps:
            cm = state.matrix(k)
            gs = gradient_entry(state.W, sigma, cm)
            gs0 = gradient_entry(state.W, sigma, A0) if use_2d else 0.0
            step_checks.append(StepCheck(state.iter, use_2d, clamped, sigma, gs, gs0))

        if state.bound > best_bound:
            best_bound, best_y0 = state.bound, state.y0
            best_y[:] = state.y

        if cfg.debug_check_every and state.iter % cfg.debug_check_every == 0:
            checks += 1
            violations += not _debug_check(state)

        sigma_update(state, g)

        if cfg.bound_target is not None and state.bound >= cfg.bound_target:
            reason = "target"
            break
        if state.sigma <= cfg.sigma_min:
            floor_hist.append(best_bound)
            w = cfg.improvement_window
            if len(floor_hist) > w:
                gain = floor_hist[-1] - floor_hist[-1 - w]
                if gain <= cfg.improvement_rtol * max(1.0, abs(best_bound)):
                    reason = "stalled"
                    break

    elapsed = time.perf_counter() - t_start
    excess = active_set_excess(state.y, index)
    if state.sigma <= cfg.sigma_min:
        log.info("active-set diagnostic: %d variables with more than 2 multipliers below -1e-4", excess)
    best = DualPoint(float(best_y0), {coord_of(int(k)): float(best_y[k]) for k in np.flatnonzero(best_y)})
    return SolveResult(
        bound=best_bound,
        y=best,
        trace=state.trace,
        termination_reason=reason,
        iterations=state.iter,
        elapsed_s=elapsed,
        final_sigma=state.sigma,
        refresh_residuals=state.refresh_residuals,
        feasibility_violations=violations,
        debug_checks=checks,
        step_checks=step_checks,
        active_set_excess=excess,
        initial_bound=initial_bound,
    )


def write_trace(trace, path_or_file) -> None:
    """Write trace records as CSV with the fixed ``TRACE_HEADER`` columns."""
    if hasattr(path_or_file, "write"):
        _write_rows(trace, path_or_file)
        return
    with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
        _write_rows(trace, fh)


def _write_rows(trace, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for rec in trace:
        w.writerow(rec.row())


def read_trace(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
