"""Core integration estimators on the unit cube.

The plain equal-weight estimator averages the integrand over a point set.
The accelerated estimator first fits a kernel surrogate on a node set, then
averages the residual integrand minus surrogate over the evaluation set and
adds back the surrogate's exact integral:

    estimate = I[f_M] + mean_v (f(v) - f_M(v))

Every integrand evaluation is counted, which backs the equal-budget
accounting used in the benchmark harness.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .interpolate import Interpolant, evaluate, fit
from .kernels import KernelSpec, kernel_cross, kernel_double_integral, kernel_integral
from .points import PointSet, baker_fold, random_shift

WCE_CLAMP = 1e-14


class Integrand:
    """A counted black-box integrand f : [0,1]^d -> R.

    ``fn`` must map an (n, d) array to an (n,) array and be deterministic.
    The evaluation counter increments by one per point and is safe to bump
    from concurrent replicate threads.
    """

    def __init__(self, dim: int, fn: Callable[[np.ndarray], np.ndarray]):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = dim
        self._fn = fn
        self._count = 0
        self._lock = threading.Lock()

    @classmethod
    def from_scalar(cls, dim: int, fn: Callable[[np.ndarray], float]) -> "Integrand":
        """Wrap a one-point-at-a-time function."""

        def batched(pts: np.ndarray) -> np.ndarray:
            return np.array([fn(p) for p in pts], dtype=np.float64)

        return cls(dim, batched)

    @property
    def eval_count(self) -> int:
        return self._count

    def __call__(self, x) -> float:
        return float(self.eval_batch(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])

    def eval_batch(self, pts) -> np.ndarray:
        arr = np.atleast_2d(np.asarray(getattr(pts, "points", pts), dtype=np.float64))
        if arr.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: integrand dim={self.dim}, points are {arr.shape[1]}-d")
        out = np.asarray(self._fn(arr), dtype=np.float64).reshape(-1)
        if out.shape[0] != arr.shape[0]:
            raise ValueError("integrand returned wrong number of values")
        with self._lock:
            self._count += arr.shape[0]
        return out


@dataclass(frozen=True)
class EstimateReport:
    """One integration run: method tag, budget accounting and the estimate."""

    method: str
    estimate: float
    n_total: int
    m_nodes: int
    seed: Optional[int]
    wall_time: float = 0.0


def qmc_estimate(f: Integrand, ps: PointSet) -> float:
    """Equal-weight average of f over the point set."""
    if len(ps) == 0:
        raise ValueError("cannot average over an empty point set")
    return float(np.mean(f.eval_batch(ps)))


def cf_estimate(
    f: Integrand,
    nodes: PointSet,
    eval_points: PointSet,
    spec: KernelSpec,
    jitter: Optional[float] = None,
) -> tuple[float, Interpolant]:
    """Surrogate-corrected estimate: I[f_M] + mean over eval_points of (f - f_M).

    Consumes len(nodes) + len(eval_points) integrand evaluations. Node and
    evaluation roles may overlap, but overlapping wastes budget.
    """
    if nodes.dim != f.dim or eval_points.dim != f.dim:
        raise ValueError("dimension mismatch between integrand and point sets")
    node_values = f.eval_batch(nodes)
    interp = fit(spec, nodes, node_values, jitter)
    f_vals = f.eval_batch(eval_points)
    surrogate_vals = evaluate(interp, eval_points.points)
    estimate = interp.exact_integral + float(np.mean(f_vals - surrogate_vals))
    return estimate, interp


def cf_estimate_folded(
    f: Integrand,
    nodes: PointSet,
    lattice_points: PointSet,
    shift,
    spec: KernelSpec,
    jitter: Optional[float] = None,
) -> float:
    """Surrogate-corrected estimate on shifted-then-folded evaluation points.

    The deterministic evaluation set is translated by ``shift`` (mod 1) and
    passed through the tent map before the residual average; equivalent to
    ``cf_estimate`` on the pre-transformed set.
    """
    transformed = baker_fold(random_shift(lattice_points, shift))
    estimate, _ = cf_estimate(f, nodes, transformed, spec, jitter)
    return estimate


def worst_case_error(spec: KernelSpec, ps: PointSet) -> float:
    """Closed-form worst-case quadrature error of the equal-weight rule.

    The squared error is the double cube integral of the kernel, minus twice
    the mean single integral at the points, plus the mean of the kernel
    matrix. Cancellation can push the float result a hair below zero; values
    above -1e-14 are clamped silently, larger undershoots clamp with a
    warning.
    """
    if len(ps) == 0:
        raise ValueError("worst-case error of an empty point set is undefined")
    n = len(ps)
    term_double = kernel_double_integral(spec)
    term_single = float(np.mean(np.atleast_1d(kernel_integral(spec, ps.points))))
    term_pair = float(np.sum(kernel_cross(spec, ps.points, ps.points))) / (n * n)
    e2 = term_double - 2.0 * term_single + term_pair
    if e2 < 0.0:
        if e2 < -WCE_CLAMP:
            warnings.warn(
                f"squared worst-case error {e2:.3e} below the -{WCE_CLAMP:g} clamp threshold",
                RuntimeWarning,
            )
        e2 = 0.0
    return math.sqrt(e2)


def optimal_split(alpha: float, alpha_L: float) -> float:
    """Asymptotically optimal node fraction (alpha - alpha_L) / alpha.

    Requires alpha > alpha_L > 0; otherwise the split is undefined and the
    caller should use the plain estimator.
    """
    if alpha_L <= 0.0:
        raise ValueError("alpha_L must be positive")
    if alpha <= alpha_L:
        raise ValueError(
            f"assumed smoothness {alpha} must exceed the rule smoothness {alpha_L}; "
            "with no surplus smoothness use plain QMC"
        )
    return (alpha - alpha_L) / alpha


@dataclass(frozen=True)
class BudgetSplit:
    """Evaluation-budget allocation between fitting nodes and evaluation points."""

    m_per_axis: int
    n_nodes: int
    n_eval: int
    discarded: int

    @property
    def consumed(self) -> int:
        return self.n_nodes + self.n_eval


def _int_root(n: int, d: int) -> int:
    """floor(n ** (1/d)) without float-precision surprises."""
    m = max(1, int(round(n ** (1.0 / d))))
    while m**d > n:
        m -= 1
    while (m + 1) ** d <= n:
        m += 1
    return m


def split_budget(n_total: int, fraction: float, pow2_eval: bool = True, dim: int = 1) -> BudgetSplit:
    """Allocate a total budget between grid nodes and evaluation points.

    With ``pow2_eval`` the evaluation count is the largest power of two at
    most (1 - fraction) * n_total and the nodes get the rest; otherwise the
    node count is the straight rounding of fraction * n_total. The node count
    is then snapped down to the nearest m^dim for the midpoint grid; the
    remainder is reported as discarded rather than silently re-spent.
    """
    if n_total < 4:
        raise ValueError("budget too small: need n_total >= 4 to allocate both parts")
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    if pow2_eval:
        target_eval = (1.0 - fraction) * n_total
        if target_eval < 1.0:
            raise ValueError("budget too small for a power-of-two evaluation set")
        n_eval = 1 << int(math.floor(math.log2(target_eval)))
        raw_nodes = n_total - n_eval
    else:
        raw_nodes = min(n_total - 1, max(1, round(fraction * n_total)))
        n_eval = n_total - raw_nodes
    if raw_nodes < 1 or n_eval < 1:
        raise ValueError("budget too small to allocate both node and evaluation sets")
    m = _int_root(raw_nodes, dim)
    n_nodes = m**dim
    return BudgetSplit(m_per_axis=m, n_nodes=n_nodes, n_eval=n_eval, discarded=raw_nodes - n_nodes)
