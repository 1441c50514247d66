"""Convergence-study harness: RMSE-vs-N campaigns over test-integrand cells.

A campaign runs every (family, dim, smoothness, method) cell over a grid of
power-of-two budgets with replicated random instances and randomizations,
aggregates RMSE against the exact integrals, fits log-log slopes, and emits
CSV and SVG.

Budget accounting: for each (N, dim) the node/evaluation split is computed
once, and *every* method in the cell consumes exactly the same canonical
budget m^dim + N_eval (the power-of-two evaluation rule can leave a few
evaluations unallocatable to a square grid for dim >= 2; those are logged as
discarded, never silently re-spent). Plain methods therefore run on the
consumed budget, keeping eval counts identical across methods.

Paired randomness: within one (cell, replicate) all QMC-based methods share
the same shift vector / scramble seed, so method comparisons are paired.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .estimators import cf_estimate, cf_estimate_folded, optimal_split, qmc_estimate, split_budget
from .genz import DEBUG_FAMILIES, FAMILIES, as_integrand, random_genz
from .kernels import SMOOTHNESS_LEVELS, KernelSpec
from .points import (
    PointSet,
    halton,
    korobov_vector,
    lattice,
    midpoint_grid,
    random_shift,
    sobol,
    uniform_random,
)
from .seeding import rng_for, seed_for

METHODS = ("MC", "QMC", "QMC+CF", "MC+CF", "QMC+CF-folded")
CF_METHODS = ("QMC+CF", "MC+CF", "QMC+CF-folded")
SEQUENCES = ("halton-rr-shift", "sobol-dshift", "lattice")

_CONFIG_KEYS = (
    "families",
    "dims",
    "methods",
    "sequence",
    "k_values",
    "support_radius",
    "n_grid",
    "replicates",
    "assumed_alpha",
    "seed_base",
    "difficulty",
)


@dataclass(frozen=True)
class CampaignConfig:
    families: tuple[str, ...] = ("gaussian",)
    dims: tuple[int, ...] = (1,)
    methods: tuple[str, ...] = ("QMC", "QMC+CF")
    sequence: str = "halton-rr-shift"
    k_values: tuple[int, ...] = (1,)
    support_radius: float = 1.0
    n_grid: tuple[int, ...] = (16, 32, 64, 128, 256, 512, 1024, 2048, 4096)
    replicates: int = 10
    assumed_alpha: Optional[float] = None  # None -> fixed M = N/2 split
    seed_base: int = 0
    difficulty: float = 7.0

    def __post_init__(self):
        known = FAMILIES + DEBUG_FAMILIES
        for fam in self.families:
            if fam not in known:
                raise ValueError(f"unknown family {fam!r}")
        for d in self.dims:
            if d < 1:
                raise ValueError("dims must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
        if self.sequence not in SEQUENCES:
            raise ValueError(f"unknown sequence {self.sequence!r}; expected one of {SEQUENCES}")
        for k in self.k_values:
            if k not in SMOOTHNESS_LEVELS:
                raise ValueError(f"k values must be within {SMOOTHNESS_LEVELS}")
        if not 0.0 < self.support_radius <= 1.0:
            raise ValueError("support_radius must lie in (0, 1]")
        for n in self.n_grid:
            if n < 4 or n & (n - 1):
                raise ValueError(f"n_grid entries must be powers of two >= 4, got {n}")
        if self.replicates < 2:
            raise ValueError("replicates must be >= 2 so standard errors are defined")
        if self.assumed_alpha is not None and self.assumed_alpha <= 1.0:
            raise ValueError("assumed_alpha must exceed the rule smoothness 1")
        if self.difficulty <= 0.0:
            raise ValueError("difficulty must be positive")

    @property
    def node_fraction(self) -> float:
        if self.assumed_alpha is None:
            return 0.5
        return optimal_split(self.assumed_alpha, 1.0)


@dataclass(frozen=True)
class Row:
    family: str
    dim: int
    method: str
    k: int
    support_radius: float
    sequence: str
    n_total: int
    m_nodes: int
    replicates: int
    rmse: float
    stderr: float
    mean_error: float
    seed_base: int
    error: str = ""

    def cell_key(self):
        return (self.family, self.dim, self.method, self.k)


@dataclass(frozen=True)
class SlopeFit:
    family: str
    dim: int
    method: str
    k: int
    slope: float
    intercept: float
    residual: float


@dataclass
class ConvergenceTable:
    rows: list[Row]
    slopes: list[SlopeFit]
    config: CampaignConfig
    randomization_log: dict = field(default_factory=dict)

    def slope_for(self, family: str, dim: int, method: str, k: int) -> SlopeFit:
        for s in self.slopes:
            if (s.family, s.dim, s.method, s.k) == (family, dim, method, k):
                return s
        raise KeyError(f"no slope for cell ({family}, {dim}, {method}, {k})")


def _qmc_eval_points(sequence: str, n: int, d: int, delta: np.ndarray, dshift_seed: int) -> PointSet:
    if sequence == "halton-rr-shift":
        return random_shift(halton(n, d, scramble=True), delta)
    if sequence == "sobol-dshift":
        return sobol(n, d, digital_shift=True, seed=dshift_seed)
    return random_shift(lattice(n, d, korobov_vector(n, d)), delta)


def _deterministic_points(sequence: str, n: int, d: int) -> PointSet:
    if sequence == "halton-rr-shift":
        return halton(n, d, scramble=True)
    if sequence == "sobol-dshift":
        return sobol(n, d)
    return lattice(n, d, korobov_vector(n, d))


def _run_method(
    method: str,
    integrand,
    d: int,
    spec: KernelSpec,
    split,
    sequence: str,
    delta: np.ndarray,
    dshift_seed: int,
    mc_seed: int,
) -> float:
    budget = split.consumed
    if method == "MC":
        return qmc_estimate(integrand, uniform_random(budget, d, mc_seed))
    if method == "QMC":
        return qmc_estimate(integrand, _qmc_eval_points(sequence, budget, d, delta, dshift_seed))
    nodes = midpoint_grid(split.m_per_axis, d)
    if method == "QMC+CF":
        eval_pts = _qmc_eval_points(sequence, split.n_eval, d, delta, dshift_seed)
        return cf_estimate(integrand, nodes, eval_pts, spec)[0]
    if method == "MC+CF":
        eval_pts = uniform_random(split.n_eval, d, mc_seed)
        return cf_estimate(integrand, nodes, eval_pts, spec)[0]
    if method == "QMC+CF-folded":
        det = _deterministic_points(sequence, split.n_eval, d)
        return cf_estimate_folded(integrand, nodes, det, delta, spec)
    raise ValueError(f"unknown method {method!r}")


def run_campaign(cfg: CampaignConfig) -> ConvergenceTable:
    """Run every cell of the campaign; replicate failures are tagged per row
    and the campaign continues."""
    rows: list[Row] = []
    rand_log: dict = {}
    fraction = cfg.node_fraction
    for family in cfg.families:
        for d in cfg.dims:
            for k in cfg.k_values:
                spec = KernelSpec(k=k, dim=d, support_radius=cfg.support_radius)
                for n_nominal in cfg.n_grid:
                    split = split_budget(n_nominal, fraction, pow2_eval=True, dim=d)
                    if split.discarded:
                        warnings.warn(
                            f"cell ({family}, d={d}, N={n_nominal}): grid snapping discards "
                            f"{split.discarded} evaluations (consumed budget {split.consumed})",
                            RuntimeWarning,
                        )
                    errors: dict[str, list[float]] = {m: [] for m in cfg.methods}
                    failures: dict[str, list[str]] = {m: [] for m in cfg.methods}
                    for r in range(cfg.replicates):
                        inst = random_genz(
                            family,
                            d,
                            seed_for(cfg.seed_base, "instance", family, d, r),
                            cfg.difficulty,
                        )
                        delta = rng_for(cfg.seed_base, "shift", family, d, k, n_nominal, r).random(d)
                        dshift_seed = seed_for(cfg.seed_base, "dshift", family, d, k, n_nominal, r)
                        mc_seed = seed_for(cfg.seed_base, "mc", family, d, k, n_nominal, r)
                        for method in cfg.methods:
                            integrand = as_integrand(inst)
                            try:
                                est = _run_method(
                                    method, integrand, d, spec, split,
                                    cfg.sequence, delta, dshift_seed, mc_seed,
                                )
                            except Exception as exc:  # campaign must survive one bad replicate
                                failures[method].append(f"r{r}: {exc}")
                                continue
                            consumed = integrand.eval_count
                            if consumed != split.consumed:
                                failures[method].append(
                                    f"r{r}: budget mismatch ({consumed} != {split.consumed})"
                                )
                                continue
                            errors[method].append(est - inst.exact)
                            if cfg.sequence == "sobol-dshift":
                                rand_log[(family, d, k, method, n_nominal, r)] = (dshift_seed,)
                            else:
                                rand_log[(family, d, k, method, n_nominal, r)] = tuple(delta)
                    for method in cfg.methods:
                        errs = np.asarray(errors[method])
                        ok = errs.size
                        if ok:
                            rmse = float(np.sqrt(np.mean(errs**2)))
                            mean_error = float(np.mean(errs))
                            if rmse > 0.0 and ok >= 2:
                                stderr = float(np.std(errs**2, ddof=1) / (2.0 * rmse * math.sqrt(ok)))
                            else:
                                stderr = 0.0
                        else:
                            rmse = math.nan
                            mean_error = math.nan
                            stderr = math.nan
                        rows.append(
                            Row(
                                family=family,
                                dim=d,
                                method=method,
                                k=k,
                                support_radius=cfg.support_radius,
                                sequence=cfg.sequence,
                                n_total=split.consumed,
                                m_nodes=split.n_nodes if method in CF_METHODS else 0,
                                replicates=ok,
                                rmse=rmse,
                                stderr=stderr,
                                mean_error=mean_error,
                                seed_base=cfg.seed_base,
                                error="; ".join(failures[method]),
                            )
                        )
    slopes = _fit_cell_slopes(rows)
    return ConvergenceTable(rows=rows, slopes=slopes, config=cfg, randomization_log=rand_log)


def fit_slope(points) -> tuple[float, float, float]:
    """Ordinary least squares of log2 rmse on log2 N.

    Zero-rmse points are excluded with a warning; at least two positive
    points are required. Returns (slope, intercept, rms residual).
    """
    pts = [(float(n), float(r)) for n, r in points]
    if len(pts) < 2:
        raise ValueError("need at least 2 (N, rmse) points to fit a slope")
    valid = [(n, r) for n, r in pts if r > 0.0 and math.isfinite(r)]
    if len(valid) < len(pts):
        warnings.warn(
            f"excluded {len(pts) - len(valid)} zero/non-finite rmse points from the slope fit",
            RuntimeWarning,
        )
    if len(valid) < 2:
        raise ValueError("fewer than 2 positive-rmse points; slope undefined")
    x = np.log2([n for n, _ in valid])
    y = np.log2([r for _, r in valid])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    residual = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return float(slope), float(intercept), residual


def _fit_cell_slopes(rows: list[Row]) -> list[SlopeFit]:
    cells: dict[tuple, list[Row]] = {}
    for row in rows:
        cells.setdefault(row.cell_key(), []).append(row)
    slopes = []
    for key in sorted(cells):
        cell_rows = sorted(cells[key], key=lambda r: r.n_total)
        pts = [(r.n_total, r.rmse) for r in cell_rows if math.isfinite(r.rmse) and r.rmse > 0.0]
        if len(pts) < 4:  # slope summaries need a real grid behind them
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            slope, intercept, residual = fit_slope(pts)
        family, dim, method, k = key
        slopes.append(
            SlopeFit(
                family=family, dim=dim, method=method, k=k,
                slope=slope, intercept=intercept, residual=residual,
            )
        )
    return slopes


_CSV_HEADER = (
    "family,dim,method,k,support_radius,sequence,N_total,M_nodes,"
    "replicates,rmse,stderr,mean_error,seed_base"
)
_SLOPE_HEADER = "family,dim,method,k,slope,intercept,residual"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_csv(table: ConvergenceTable, path) -> None:
    """Write the row schema plus a '#slope' summary section, deterministically
    ordered (lexicographic cell key, then N)."""
    try:
        with open(path, "w") as fh:
            fh.write(_CSV_HEADER + "\n")
            for row in sorted(table.rows, key=lambda r: (r.cell_key(), r.n_total)):
                fh.write(
                    ",".join(
                        [
                            row.family,
                            str(row.dim),
                            row.method,
                            str(row.k),
                            _fmt(row.support_radius),
                            row.sequence,
                            str(row.n_total),
                            str(row.m_nodes),
                            str(row.replicates),
                            _fmt(row.rmse),
                            _fmt(row.stderr),
                            _fmt(row.mean_error),
                            str(row.seed_base),
                        ]
                    )
                    + "\n"
                )
            fh.write("#slope\n")
            fh.write(_SLOPE_HEADER + "\n")
            for s in table.slopes:
                fh.write(
                    f"{s.family},{s.dim},{s.method},{s.k},"
                    f"{_fmt(s.slope)},{_fmt(s.intercept)},{_fmt(s.residual)}\n"
                )
            for row in sorted(table.rows, key=lambda r: (r.cell_key(), r.n_total)):
                if row.error:
                    fh.write(
                        f"#error family={row.family},dim={row.dim},method={row.method},"
                        f"k={row.k},N={row.n_total}: {row.error}\n"
                    )
    except OSError as exc:
        raise OSError(f"failed writing campaign CSV to {path}: {exc}") from exc


def read_csv(path) -> tuple[list[Row], list[SlopeFit]]:
    """Parse a file written by :func:`emit_csv` back into rows and slopes."""
    rows: list[Row] = []
    slopes: list[SlopeFit] = []
    section = "rows"
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _CSV_HEADER:
        raise ValueError(f"{path}: missing campaign CSV header")
    for ln in lines[1:]:
        if ln == "#slope":
            section = "slopes"
            continue
        if not ln or ln.startswith("#") or ln == _SLOPE_HEADER:
            continue
        fields = ln.split(",")
        if section == "rows":
            rows.append(
                Row(
                    family=fields[0],
                    dim=int(fields[1]),
                    method=fields[2],
                    k=int(fields[3]),
                    support_radius=float(fields[4]),
                    sequence=fields[5],
                    n_total=int(fields[6]),
                    m_nodes=int(fields[7]),
                    replicates=int(fields[8]),
                    rmse=float(fields[9]),
                    stderr=float(fields[10]),
                    mean_error=float(fields[11]),
                    seed_base=int(fields[12]),
                )
            )
        else:
            slopes.append(
                SlopeFit(
                    family=fields[0],
                    dim=int(fields[1]),
                    method=fields[2],
                    k=int(fields[3]),
                    slope=float(fields[4]),
                    intercept=float(fields[5]),
                    residual=float(fields[6]),
                )
            )
    return rows, slopes


def parse_config(text: str) -> CampaignConfig:
    """Parse the flat ``key = value`` campaign format (lists comma-separated,
    '#' comments); unknown keys are rejected by name."""
    data: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown config key {key!r}")
        data[key] = value

    def str_list(v: str) -> tuple[str, ...]:
        return tuple(s.strip() for s in v.split(",") if s.strip())

    def int_list(v: str) -> tuple[int, ...]:
        return tuple(int(s) for s in str_list(v))

    kwargs: dict = {}
    if "families" in data:
        kwargs["families"] = str_list(data["families"])
    if "dims" in data:
        kwargs["dims"] = int_list(data["dims"])
    if "methods" in data:
        kwargs["methods"] = str_list(data["methods"])
    if "sequence" in data:
        kwargs["sequence"] = data["sequence"]
    if "k_values" in data:
        kwargs["k_values"] = int_list(data["k_values"])
    if "support_radius" in data:
        kwargs["support_radius"] = float(data["support_radius"])
    if "n_grid" in data:
        kwargs["n_grid"] = int_list(data["n_grid"])
    if "replicates" in data:
        kwargs["replicates"] = int(data["replicates"])
    if "assumed_alpha" in data:
        v = data["assumed_alpha"].lower()
        kwargs["assumed_alpha"] = None if v in ("", "none") else float(data["assumed_alpha"])
    if "seed_base" in data:
        kwargs["seed_base"] = int(data["seed_base"])
    if "difficulty" in data:
        kwargs["difficulty"] = float(data["difficulty"])
    return CampaignConfig(**kwargs)


def format_config(cfg: CampaignConfig) -> str:
    lines = [
        "families = " + ", ".join(cfg.families),
        "dims = " + ", ".join(str(d) for d in cfg.dims),
        "methods = " + ", ".join(cfg.methods),
        f"sequence = {cfg.sequence}",
        "k_values = " + ", ".join(str(k) for k in cfg.k_values),
        f"support_radius = {cfg.support_radius:.17g}",
        "n_grid = " + ", ".join(str(n) for n in cfg.n_grid),
        f"replicates = {cfg.replicates}",
        "assumed_alpha = " + ("none" if cfg.assumed_alpha is None else f"{cfg.assumed_alpha:.17g}"),
        f"seed_base = {cfg.seed_base}",
        f"difficulty = {cfg.difficulty:.17g}",
    ]
    return "\n".join(lines) + "\n"
