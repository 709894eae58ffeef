"""Monte Carlo size/power studies on synthetic functional data.

Each replicate draws n pairs of curves

    X(t) = sqrt(2) * sum_k xi_k cos(k pi t),   Y(t) = sqrt(2) * sum_k nu_k cos(k pi t)

with xi_k i.i.d. Cauchy and nu_k = f(xi_k) for k <= m, standard normal
otherwise. m = 0 gives independent X and Y.

Randomness for replicate r comes from ``SeedSequence(master_seed,
spawn_key=(r,))``, so records do not depend on execution order or on how
replicates are split between worker processes.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, DomainError, FhsicError, ReplicateError
from .hsic import (
    DEFAULT_GAMMA,
    DEFAULT_SIGNIFICANCE,
    WeightScheme,
    independence_test,
    naive_hsic,
    norm_cdf,
    permutation_test_naive,
)
from .kernels import CurveSet, Grid, KernelSpec, gram_matrix

LINKS = {
    "cube": lambda x: x ** 3,
    "square": lambda x: x ** 2,
    "square_sin": lambda x: x ** 2 * np.sin(x),
}
LINK_LABELS = {"cube": "x^3", "square": "x^2", "square_sin": "x^2 sin(x)"}
TESTS = ("mhsic", "permutation")
PAPER_M_GRID = (0, 1, 3, 5, 10)


def normalize_link(name: str) -> str:
    key = name.replace("-", "_")
    if key not in LINKS:
        raise DomainError(f"unknown link {name!r}; expected one of {sorted(LINKS)}")
    return key


@dataclass(frozen=True)
class ScenarioConfig:
    n: int = 100
    grid_points: int = 51
    series_terms: int = 50
    m: int = 0
    link: str = "cube"
    cauchy_location: float = 0.0
    cauchy_scale: float = 0.5
    replicates: int = 300
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "link", normalize_link(self.link))
        if self.n < 2:
            raise DimensionError(f"n must be at least 2, got {self.n}")
        if self.grid_points < 2:
            raise DimensionError(f"grid_points must be at least 2, got {self.grid_points}")
        if self.series_terms < 1:
            raise DomainError(f"series_terms must be positive, got {self.series_terms}")
        if not 0 <= self.m <= self.series_terms:
            raise DomainError(f"m must lie in [0, {self.series_terms}], got {self.m}")
        if self.replicates < 1:
            raise DomainError(f"replicates must be positive, got {self.replicates}")
        if not self.cauchy_scale > 0:
            raise DomainError(f"cauchy_scale must be positive, got {self.cauchy_scale}")
        if self.master_seed < 0:
            raise DomainError(f"master_seed must be nonnegative, got {self.master_seed}")

    @property
    def scenario_id(self) -> str:
        return f"{self.link}-m{self.m}-n{self.n}"


def replicate_rng(master_seed: int, replicate_index: int, stream: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(replicate_index, stream))
    return np.random.Generator(np.random.PCG64(seq))


def cosine_basis(grid: Grid, terms: int) -> np.ndarray:
    """Rows sqrt(2) cos(k pi t), k = 1..terms, evaluated on the grid."""
    k = np.arange(1, terms + 1, dtype=np.float64)
    return math.sqrt(2.0) * np.cos(np.pi * np.outer(k, grid.points))


def cauchy_from_uniform(u, location=0.0, scale=1.0):
    return location + scale * np.tan(np.pi * (u - 0.5))


def _expand(coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    # explicit reduction instead of BLAS so values do not depend on threading
    return (coeffs[:, :, None] * basis[None, :, :]).sum(axis=1)


def generate_pair(cfg: ScenarioConfig, replicate_index: int) -> tuple[CurveSet, CurveSet]:
    rng = replicate_rng(cfg.master_seed, replicate_index)
    shape = (cfg.n, cfg.series_terms)
    xi = cauchy_from_uniform(rng.random(shape), cfg.cauchy_location, cfg.cauchy_scale)
    nu = rng.standard_normal(shape)
    if cfg.m:
        nu[:, :cfg.m] = LINKS[cfg.link](xi[:, :cfg.m])
    grid = Grid.equispaced(cfg.grid_points)
    basis = cosine_basis(grid, cfg.series_terms)
    return CurveSet(grid, _expand(xi, basis)), CurveSet(grid, _expand(nu, basis))


@dataclass(frozen=True)
class ReplicateRecord:
    replicate: int
    statistic: float
    z: float
    p: float
    reject: bool
    degenerate: bool


@dataclass
class StudyResult:
    scenario: ScenarioConfig
    test: str
    gamma: float
    kernel: KernelSpec
    significance: float
    records: list[ReplicateRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def rejections(self) -> int:
        return sum(r.reject for r in self.records)

    @property
    def degenerate_count(self) -> int:
        return sum(r.degenerate for r in self.records)

    @property
    def rejection_rate(self) -> float:
        return self.rejections / len(self.records)

    def record_dicts(self):
        for r in self.records:
            yield {
                "scenario": self.scenario.scenario_id,
                "test": self.test,
                "link": self.scenario.link,
                "m": self.scenario.m,
                "replicate": r.replicate,
                "statistic": r.statistic,
                "z": None if math.isnan(r.z) else r.z,
                "p": r.p,
                "reject": r.reject,
                "degenerate": r.degenerate,
            }


def _run_replicate(cfg, test, gamma, kernel, significance, permutations, index):
    try:
        x, y = generate_pair(cfg, index)
        K = gram_matrix(x, kernel)
        L = gram_matrix(y, kernel)
        if test == "mhsic":
            out = independence_test(K, L, WeightScheme(gamma), significance)
            return ReplicateRecord(index, out.statistic, out.z_score, out.p_value,
                                   out.reject, out.degenerate)
        seed = int(np.random.SeedSequence(cfg.master_seed,
                                          spawn_key=(index, 1)).generate_state(1)[0])
        p = permutation_test_naive(K, L, permutations, seed)
        return ReplicateRecord(index, naive_hsic(K, L).value, math.nan, p,
                               p <= significance, False)
    except FhsicError as exc:
        raise ReplicateError(index, str(exc)) from exc


def _run_chunk(args):
    *common, indices = args
    return [_run_replicate(*common, i) for i in indices]


def run_study(cfg: ScenarioConfig, test: str = "mhsic", gamma: float = DEFAULT_GAMMA,
              kernel: KernelSpec | None = None, significance: float = DEFAULT_SIGNIFICANCE,
              permutations: int = 50, workers: int = 1) -> StudyResult:
    """Run ``cfg.replicates`` independent replicates of one scenario.

    Degenerate outcomes (zero variance estimate) count as non-rejections.
    """
    if test not in TESTS:
        raise DomainError(f"unknown test {test!r}; expected one of {TESTS}")
    if not 0.0 < significance < 1.0:
        raise DomainError(f"significance must lie in (0, 1), got {significance}")
    WeightScheme(gamma)
    kernel = kernel or KernelSpec()
    common = (cfg, test, gamma, kernel, significance, permutations)
    started = time.perf_counter()
    indices = list(range(cfg.replicates))
    if workers <= 1:
        records = [_run_replicate(*common, i) for i in indices]
    else:
        chunks = [indices[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [r for part in pool.map(_run_chunk, [(*common, c) for c in chunks])
                       for r in part]
        records.sort(key=lambda r: r.replicate)
    return StudyResult(cfg, test, gamma, kernel, significance, records,
                       time.perf_counter() - started)


def ks_distance_normal(samples) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF and N(0, 1)."""
    z = np.sort(np.asarray(samples, dtype=np.float64))
    n = z.size
    if n == 0:
        raise DimensionError("need at least one sample")
    cdf = np.array([norm_cdf(v) for v in z])
    above = np.arange(1, n + 1) / n - cdf
    below = cdf - np.arange(n) / n
    return float(max(above.max(), below.max()))


@dataclass(frozen=True)
class NullDiagnostic:
    mean: float
    variance: float
    ks_distance: float
    used: int
    degenerate: int
    z_scores: tuple = field(repr=False)


def null_z_diagnostic(cfg: ScenarioConfig, gamma: float = DEFAULT_GAMMA,
                      kernel: KernelSpec | None = None, replicates: int | None = None,
                      workers: int = 1) -> NullDiagnostic:
    """Moments and KS distance of null z-scores against the N(0, 1) limit."""
    if cfg.m != 0:
        raise DomainError(f"null diagnostic needs m == 0, got m = {cfg.m}")
    if replicates is not None:
        cfg = replace(cfg, replicates=replicates)
    study = run_study(cfg, "mhsic", gamma, kernel, workers=workers)
    z = np.array([r.z for r in study.records if not r.degenerate])
    degenerate = study.degenerate_count
    if z.size == 0:
        return NullDiagnostic(math.nan, math.nan, math.nan, 0, degenerate, ())
    return NullDiagnostic(
        mean=float(z.mean()),
        variance=float(z.var()),
        ks_distance=ks_distance_normal(z),
        used=int(z.size),
        degenerate=degenerate,
        z_scores=tuple(float(v) for v in z),
    )


def format_table(results: list[StudyResult]) -> str:
    """Rejection rates laid out as link x method rows and m columns."""
    ms = sorted({r.scenario.m for r in results})
    cells = {(r.scenario.link, r.test, r.scenario.m): r.rejection_rate for r in results}
    rows = []
    for res in results:
        key = (res.scenario.link, res.test)
        if key not in rows:
            rows.append(key)
    header = f"{'f(x)':<12} {'method':<12}" + "".join(f"{'m=' + str(m):>8}" for m in ms)
    lines = [header, "-" * len(header)]
    for link, test in rows:
        vals = "".join(
            f"{cells[(link, test, m)]:>8.3f}" if (link, test, m) in cells else f"{'-':>8}"
            for m in ms
        )
        lines.append(f"{LINK_LABELS[link]:<12} {test:<12}" + vals)
    return "\n".join(lines) + "\n"


def write_records(results: list[StudyResult], fh) -> None:
    """One JSON object per replicate and line."""
    for res in results:
        for rec in res.record_dicts():
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
