"""Gaussian-process predictive means integrated over hyper-parameters.

Workflow: a squared-exponential GP with amplitude/lengthscale parameters
(theta_1, theta_2), independent shape-2 Gamma priors on both, and a
subset-of-regressors (SoR) low-rank approximation of the predictive mean.
The posterior-mean prediction marginalizes the hyper-parameters, i.e.
integrates the predictive mean against the prior; mapping the prior through
its inverse CDF per coordinate turns this into a unit-square integral that
the estimators module handles (plain or surrogate-corrected, equal budgets).

Budget note: the corrected estimators fit a 4x4 midpoint node grid (a 16x16
interpolation system, the documented fit size of this workflow at budget
2^8) and spend the remaining budget on evaluation points, so every method
consumes the full budget exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg as sla

from .estimators import EstimateReport, Integrand, cf_estimate, qmc_estimate
from .kernels import KernelSpec
from .points import halton, midpoint_grid, random_shift, uniform_random
from .seeding import rng_for, seed_for

GP_METHODS = ("QMC", "QMC+CF", "MC", "MC+CF")

# Surrogate node grid for the application: a 4x4 midpoint grid, i.e. a 16x16
# interpolation system, the fit size this workflow is documented with at
# budget 2^8. Every method then consumes the full budget exactly
# (16 nodes + 240 evaluation points for the corrected methods).
GP_NODE_GRID_M = 4

_CDF_CLIP = 1e-15  # keeps inverse-CDF arguments off the unbounded endpoints
_SOR_JITTER = 1e-10
# escalating diagonal boost (relative to trace/n') when a draw makes the
# normal-equation system numerically semidefinite; deterministic ladder
_SOR_LADDER = (0.0, 1e-12, 1e-10, 1e-8)


@dataclass(frozen=True)
class Standardization:
    """Per-column location/scale of the covariates and the response mean."""

    covariate_mean: np.ndarray
    covariate_scale: np.ndarray
    response_mean: float


@dataclass(frozen=True)
class Dataset:
    """Training data, stored standardized (covariates zero-mean/unit-variance,
    responses centered on the training split)."""

    covariates: np.ndarray
    responses: np.ndarray
    standardization: Standardization

    def __post_init__(self):
        x = np.asarray(self.covariates, dtype=np.float64)
        y = np.asarray(self.responses, dtype=np.float64).reshape(-1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValueError("covariates must be (n, p) with one response per row")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "responses", y)

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    def standardize_new(self, raw: np.ndarray) -> np.ndarray:
        """Map raw covariate rows through the training standardization."""
        s = self.standardization
        return (np.asarray(raw, dtype=np.float64) - s.covariate_mean) / s.covariate_scale


def standardize(raw_covariates, raw_responses) -> Dataset:
    """Build a Dataset: rescale columns to mean 0 / variance 1, center responses."""
    x = np.asarray(raw_covariates, dtype=np.float64)
    y = np.asarray(raw_responses, dtype=np.float64).reshape(-1)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    if np.any(scale == 0.0):
        raise ValueError("constant covariate column cannot be standardized")
    y_mean = float(y.mean())
    record = Standardization(covariate_mean=mean, covariate_scale=scale, response_mean=y_mean)
    return Dataset(covariates=(x - mean) / scale, responses=y - y_mean, standardization=record)


@dataclass(frozen=True)
class GPConfig:
    """Model constants: noise scale, Gamma prior (shape, scale) pairs for the
    amplitude and lengthscale, SoR subset size, and the test inputs."""

    test_points: np.ndarray
    sigma: float = 0.1
    amplitude_shape: float = 2.0
    amplitude_scale: float = 2.0
    lengthscale_shape: float = 2.0
    lengthscale_scale: float = 2.0
    n_subset: int = 100

    def __post_init__(self):
        tp = np.atleast_2d(np.asarray(self.test_points, dtype=np.float64))
        tp.setflags(write=False)
        object.__setattr__(self, "test_points", tp)
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        for v in (self.amplitude_shape, self.amplitude_scale,
                  self.lengthscale_shape, self.lengthscale_scale):
            if v <= 0.0:
                raise ValueError("prior parameters must be positive")
        if self.n_subset < 1:
            raise ValueError("n_subset must be >= 1")


def gamma2_inverse_cdf(q, scale: float):
    """Inverse CDF of the shape-2 Gamma with the given scale (scalar or array).

    Shape 2 has the closed-form survival function (1 + t/scale) e^(-t/scale),
    so the quantile solves log1p(x) - x = log(1 - q) for x = t/scale; Newton
    with a bisection safeguard drives |CDF(result) - q| below 1e-12.
    """
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    q_arr = np.asarray(q, dtype=np.float64)
    if np.any(q_arr <= 0.0) or np.any(q_arr >= 1.0):
        raise ValueError("q must lie strictly inside (0, 1)")
    target = np.log1p(-q_arr)  # log survival value to hit

    def g(x):
        return np.log1p(x) - x - target

    lo = np.zeros_like(q_arr, dtype=np.float64)
    hi = np.ones_like(q_arr, dtype=np.float64)
    while np.any(g(hi) > 0.0):
        hi = np.where(g(hi) > 0.0, hi * 2.0, hi)
    x = hi / 2.0
    for _ in range(200):
        val = g(x)
        lo = np.where(val > 0.0, x, lo)
        hi = np.where(val <= 0.0, x, hi)
        deriv = -x / (1.0 + x)
        step = np.where(deriv != 0.0, val / deriv, 0.0)
        x_new = x - step
        outside = (x_new <= lo) | (x_new >= hi)
        x_new = np.where(outside, 0.5 * (lo + hi), x_new)
        if np.all(np.abs(x_new - x) <= 1e-15 * (1.0 + x_new)):
            x = x_new
            break
        x = x_new
    t = scale * x
    sf = (1.0 + x) * np.exp(-x)
    if np.any(np.abs((1.0 - sf) - q_arr) > 1e-12):
        raise RuntimeError("quantile iteration failed to reach 1e-12 accuracy")
    return float(t) if np.isscalar(q) or t.ndim == 0 else t


def _sq_dists(za: np.ndarray, zb: np.ndarray) -> np.ndarray:
    return np.sum((za[:, None, :] - zb[None, :, :]) ** 2, axis=2)


def _sq_exp_cross(za: np.ndarray, zb: np.ndarray, theta1: float, theta2: float) -> np.ndarray:
    return theta1 * np.exp(-0.5 * _sq_dists(za, zb) / theta2**2)


class _SorSolver:
    """Subset-of-regressors predictive means with hyper-parameters swapped per
    call: pairwise squared distances are computed once, each evaluation only
    exponentiates, forms the normal equations and factorizes.

    Large lengthscales drive the system numerically semidefinite; a small
    deterministic diagonal ladder restores factorizability, and a draw that
    exhausts the ladder raises so the caller can skip the replicate.
    """

    def __init__(self, data: Dataset, cfg: GPConfig, z_star: np.ndarray, subset_indices):
        self.idx = np.asarray(subset_indices, dtype=np.int64)
        if self.idx.size != np.unique(self.idx).size:
            raise ValueError("subset indices must be distinct")
        z_sub = data.covariates[self.idx]
        self.sq_sub = _sq_dists(z_sub, z_sub)
        self.sq_sub_n = _sq_dists(z_sub, data.covariates)
        self.sq_star = _sq_dists(np.atleast_2d(z_star), z_sub)
        self.y = data.responses
        self.sigma2 = cfg.sigma**2
        self.eye = np.eye(self.idx.size)

    def predict(self, theta1: float, theta2: float) -> np.ndarray:
        if theta1 <= 0.0 or theta2 <= 0.0:
            raise ValueError("hyper-parameters must be positive")
        inv2 = -0.5 / theta2**2
        c_sub = theta1 * np.exp(inv2 * self.sq_sub)
        c_sub_n = theta1 * np.exp(inv2 * self.sq_sub_n)
        n_sub = self.idx.size
        jitter = _SOR_JITTER * np.trace(c_sub) / n_sub
        system = c_sub_n @ c_sub_n.T + self.sigma2 * (c_sub + jitter * self.eye)
        rhs = c_sub_n @ self.y
        scale = np.trace(system) / n_sub
        weights = None
        for extra in _SOR_LADDER:
            boosted = system + extra * scale * self.eye if extra else system
            try:
                cho = sla.cho_factor(boosted, lower=True, check_finite=False)
            except sla.LinAlgError:
                continue
            weights = sla.cho_solve(cho, rhs, check_finite=False)
            break
        if weights is None:
            raise sla.LinAlgError(
                f"SoR system unfactorizable at theta=({theta1:.4g}, {theta2:.4g})"
            )
        c_star = theta1 * np.exp(inv2 * self.sq_star)
        return c_star @ weights


def gp_predictive_mean_full(data: Dataset, cfg: GPConfig, theta, z_star) -> float:
    """Exact predictive mean: cross-covariance times (C_n + sigma^2 I)^-1 y."""
    theta1, theta2 = float(theta[0]), float(theta[1])
    if theta1 <= 0.0 or theta2 <= 0.0:
        raise ValueError("hyper-parameters must be positive")
    z = np.atleast_2d(np.asarray(z_star, dtype=np.float64))
    c_n = _sq_exp_cross(data.covariates, data.covariates, theta1, theta2)
    c_n[np.diag_indices_from(c_n)] += cfg.sigma**2
    cho = sla.cho_factor(c_n, lower=True, check_finite=False)
    weights = sla.cho_solve(cho, data.responses, check_finite=False)
    c_star = _sq_exp_cross(z, data.covariates, theta1, theta2)
    out = c_star @ weights
    return float(out[0]) if out.shape[0] == 1 else out


def gp_predictive_mean_sor(
    data: Dataset, cfg: GPConfig, theta, z_star, subset_indices
) -> float:
    """Subset-of-regressors predictive mean on an n'-point inducing subset:

        C_{*,n'} (C_{n',n} C_{n,n'} + sigma^2 C_{n'})^-1 C_{n',n} y

    with a small trace-scaled jitter on C_{n'} for factorization stability.
    """
    solver = _SorSolver(data, cfg, np.atleast_2d(np.asarray(z_star, dtype=np.float64)), subset_indices)
    out = solver.predict(float(theta[0]), float(theta[1]))
    return float(out[0]) if out.shape[0] == 1 else out


def default_subset_indices(data: Dataset, n_subset: int, seed: int = 0) -> np.ndarray:
    """Seed-deterministic uniform draw without replacement from the training rows."""
    n_sub = min(n_subset, data.n)
    rng = rng_for(seed, "sor-subset", data.n, n_sub)
    return np.sort(rng.choice(data.n, size=n_sub, replace=False))


def reparametrized_integrand(
    data: Dataset, cfg: GPConfig, z_star, subset_indices
) -> Integrand:
    """The unit-square integrand x -> predictive mean at theta = prior^-1(x).

    Uses the SoR approximation (exact when n' = n is requested with a full
    index set). Shape-2 priors are required by the closed-form quantile.
    Coordinates are clipped a hair inside (0, 1) before inversion because the
    quantile map is unbounded at the endpoints.
    """
    if cfg.amplitude_shape != 2.0 or cfg.lengthscale_shape != 2.0:
        raise ValueError("the quantile reparametrization is specialized to shape-2 priors")
    z = np.asarray(z_star, dtype=np.float64).reshape(1, -1)
    solver = _SorSolver(data, cfg, z, subset_indices)

    def fn(x: np.ndarray) -> np.ndarray:
        q = np.clip(x, _CDF_CLIP, 1.0 - _CDF_CLIP)
        theta1 = gamma2_inverse_cdf(q[:, 0], cfg.amplitude_scale)
        theta2 = gamma2_inverse_cdf(q[:, 1], cfg.lengthscale_scale)
        out = np.empty(x.shape[0])
        for i in range(x.shape[0]):
            out[i] = float(solver.predict(theta1[i], theta2[i])[0])
        return out

    return Integrand(2, fn)


def marginal_prediction(
    data: Dataset,
    cfg: GPConfig,
    z_star,
    method: str,
    budget: int,
    seed: int,
    subset_indices=None,
) -> EstimateReport:
    """Posterior-mean prediction at one test input by 2-d integration.

    Surrogate-corrected methods fit the k = 1 kernel on the 16-node grid
    (``GP_NODE_GRID_M``); every method consumes the full budget exactly, so
    equal-budget accounting holds across methods for a shared seed.
    """
    start = time.monotonic()
    if method not in GP_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {GP_METHODS}")
    m_nodes_cf = GP_NODE_GRID_M**2
    if budget < 2 * m_nodes_cf:
        raise ValueError(f"budget {budget} too small for the {m_nodes_cf}-node surrogate")
    if subset_indices is None:
        subset_indices = default_subset_indices(data, cfg.n_subset)
    integrand = reparametrized_integrand(data, cfg, z_star, subset_indices)
    delta = rng_for(seed, "gp-shift").random(2)
    mc_seed = seed_for(seed, "gp-mc")
    spec = KernelSpec(k=1, dim=2)
    if method == "QMC":
        estimate = qmc_estimate(
            integrand, random_shift(halton(budget, 2, scramble=True), delta)
        )
        m_nodes = 0
    elif method == "MC":
        estimate = qmc_estimate(integrand, uniform_random(budget, 2, mc_seed))
        m_nodes = 0
    else:
        n_eval = budget - m_nodes_cf
        nodes = midpoint_grid(GP_NODE_GRID_M, 2)
        if method == "QMC+CF":
            eval_pts = random_shift(halton(n_eval, 2, scramble=True), delta)
        else:  # MC+CF
            eval_pts = uniform_random(n_eval, 2, mc_seed)
        estimate, _ = cf_estimate(integrand, nodes, eval_pts, spec)
        m_nodes = m_nodes_cf
    if integrand.eval_count != budget:
        raise RuntimeError(
            f"budget accounting violated: consumed {integrand.eval_count}, expected {budget}"
        )
    return EstimateReport(
        method=method,
        estimate=estimate,
        n_total=budget,
        m_nodes=m_nodes,
        seed=seed,
        wall_time=time.monotonic() - start,
    )


def load_dataset(path, n_train_cap: int, seed: int) -> Dataset:
    """Load a covariates+response CSV (p feature columns then one response,
    optional header) and keep a seed-deterministic random subset of at most
    ``n_train_cap`` rows; standardization is computed on that subset."""
    rows: list[list[float]] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            fields = text.split(",")
            try:
                values = [float(f) for f in fields]
            except ValueError:
                if lineno == 1:
                    continue  # header line
                raise ValueError(f"{path}:{lineno}: non-numeric cell in row")
            if rows and len(values) != len(rows[0]):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if len(rows[0]) < 2:
        raise ValueError(f"{path}: need at least one covariate column plus the response")
    data = np.asarray(rows, dtype=np.float64)
    if n_train_cap < data.shape[0]:
        rng = rng_for(seed, "train-subset", data.shape[0], n_train_cap)
        keep = np.sort(rng.choice(data.shape[0], size=n_train_cap, replace=False))
        data = data[keep]
    return standardize(data[:, :-1], data[:, -1])


def synthetic_dataset(
    n: int = 200, p: int = 4, n_test: int = 20, seed: int = 0, noise: float = 0.1
) -> tuple[Dataset, np.ndarray]:
    """Self-contained default data: a smooth bump response plus observation noise.

    Returns the standardized training Dataset and test inputs already mapped
    through the training standardization. Test inputs are drawn from the
    default inducing subset's training rows, the desk-scale analogue of the
    densely sampled trajectories this workflow targets (every test
    configuration has essentially coincident support points, which keeps the
    predictive mean well conditioned over the whole hyper-parameter prior).
    """
    rng = rng_for(seed, "synthetic-data", n, p)
    raw_x = rng.normal(size=(n, p))
    raw_y = 3.0 * np.exp(-0.5 * np.sum(raw_x**2, axis=1)) + noise * rng.normal(size=n)
    data = standardize(raw_x, raw_y)
    subset = default_subset_indices(data, min(100, n))
    rows = rng.choice(subset, size=min(n_test, subset.size), replace=False)
    return data, data.covariates[rows]


@dataclass(frozen=True)
class PredictionStudy:
    """Per-(test point, method, seed) estimates plus per-point spread summary."""

    estimates: list[tuple[int, str, int, int, float]]  # (test_index, method, N, seed, estimate)
    spread: list[tuple[int, str, float]]  # (test_index, method, sd over seeds)


def run_prediction_study(
    data: Dataset,
    cfg: GPConfig,
    methods: Sequence[str],
    budget: int,
    seeds: Sequence[int],
    subset_seed: int = 0,
) -> PredictionStudy:
    """Estimate every test point with every method over the given seeds.

    The SoR subset is drawn once (from ``subset_seed``) and shared, so the
    spread over seeds isolates the estimator's sampling variability; within a
    (test point, seed) the methods share the randomization stream, pairing
    the comparison.
    """
    subset = default_subset_indices(data, cfg.n_subset, subset_seed)
    estimates = []
    spread = []
    for t_idx, z_star in enumerate(cfg.test_points):
        per_method: dict[str, list[float]] = {m: [] for m in methods}
        for seed in seeds:
            run_seed = seed_for(seed, "gp-point", t_idx)
            for method in methods:
                report = marginal_prediction(
                    data, cfg, z_star, method, budget, run_seed, subset_indices=subset
                )
                estimates.append((t_idx, method, report.n_total, seed, report.estimate))
                per_method[method].append(report.estimate)
        for method in methods:
            spread.append((t_idx, method, float(np.std(per_method[method], ddof=1))))
    return PredictionStudy(estimates=estimates, spread=spread)


def write_prediction_csv(study: PredictionStudy, estimates_path, spread_path) -> None:
    with open(estimates_path, "w") as fh:
        fh.write("test_index,method,N,seed,estimate\n")
        for t_idx, method, n, seed, est in study.estimates:
            fh.write(f"{t_idx},{method},{n},{seed},{est:.17g}\n")
    with open(spread_path, "w") as fh:
        fh.write("test_index,method,sd_over_seeds\n")
        for t_idx, method, sd in study.spread:
            fh.write(f"{t_idx},{method},{sd:.17g}\n")
