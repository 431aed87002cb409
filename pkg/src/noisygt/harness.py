"""Seeded Monte Carlo experiments, threshold sweeps and their CSV output.

Every trial draws from its own generator keyed by ``(seed, trial index)``,
so outcomes do not depend on how trials are scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import presto, spog, thresholds
from .channel import NoisyChannel, apply_noise
from .errors import DomainError, InvalidParams, MalformedInput
from .population import sample_ground_truth, true_results

MODES = ("non-adaptive", "adaptive")
SWEEP_COLUMNS = ("alpha", "p01", "p10", "gamma_star", "xi", "c_na", "c_ad")
EXPERIMENT_COLUMNS = (
    "mode", "n", "alpha", "p01", "p10", "eps", "multiplier", "trials",
    "tests_mean", "tests_p95", "success", "wilson_low", "wilson_high", "seed",
)


def fmt(x: float) -> str:
    return format(float(x), ".12g")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    n: int
    alpha: float
    p01: float
    p10: float
    eps: float = 0.5
    trials: int = 100
    seed: int = 0
    multipliers: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "multipliers", tuple(float(x) for x in self.multipliers))
        if self.mode not in MODES:
            raise InvalidParams(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.trials < 1:
            raise InvalidParams(f"trials must be >= 1, got {self.trials}")
        if not self.multipliers or any(not x > 0 for x in self.multipliers):
            raise InvalidParams(f"multipliers must be a nonempty list of positive reals, got {self.multipliers}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParams(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.n < 2:
            raise InvalidParams(f"n must be >= 2, got {self.n}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParams(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.eps > 0:
            raise InvalidParams(f"eps must be positive, got {self.eps!r}")
        NoisyChannel(self.p01, self.p10)

    @property
    def channel(self) -> NoisyChannel:
        return NoisyChannel(self.p01, self.p10)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise MalformedInput(f"unknown config keys: {unknown}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise MalformedInput(f"{path}: expected a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["multipliers"] = list(self.multipliers)
        return d

    def threshold_tests(self) -> float:
        """m_na or m_ad for this configuration, depending on mode."""
        f = thresholds.m_na if self.mode == "non-adaptive" else thresholds.m_ad
        return f(self.n, self.alpha, self.channel)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    success: bool
    tests_used: int
    infected: int
    s1_size: int | None = None
    u1_clean: bool | None = None


@dataclass(frozen=True)
class SummaryRow:
    mode: str
    n: int
    alpha: float
    p01: float
    p10: float
    eps: float
    multiplier: float
    trials: int
    tests_mean: float
    tests_p95: float
    success: float
    wilson_low: float
    wilson_high: float
    seed: int
    within_budget: float = field(default=math.nan, compare=False)


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise DomainError(f"successes={successes} outside [0, {trials}]")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == trials else min(1.0, centre + half)
    return low, high


def trial_streams(seed: int, trial: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent (truth, design, noise) generators for one trial."""
    root = np.random.SeedSequence(seed, spawn_key=(trial,))
    return tuple(np.random.default_rng(s) for s in root.spawn(3))


def run_trial(cfg: ExperimentConfig, multiplier: float, trial: int) -> TrialResult:
    truth_rng, design_rng, noise_rng = trial_streams(cfg.seed, trial)
    ch = cfg.channel
    sigma = sample_ground_truth(cfg.n, cfg.alpha, truth_rng)
    infected = int(sigma.sum())
    if cfg.mode == "non-adaptive":
        params = spog.default_params(cfg.alpha, ch, cfg.eps)
        sd = spog.build_design(cfg.n, params, ch, design_rng, budget_scale=multiplier)
        observed = apply_noise(true_results(sd.design, sigma), ch, noise_rng)
        est = spog.decode(sd, observed, ch)
        return TrialResult(trial, bool(np.array_equal(est, sigma)), sd.m, infected)
    params = presto.choose_params(cfg.eps, ch)
    session = presto.simulate_session(sigma, ch, noise_rng)
    res = presto.run(session, cfg.n, ch, params, design_rng, stage2_scale=multiplier)
    return TrialResult(
        trial,
        bool(np.array_equal(res.estimate, sigma)),
        res.tests_used,
        infected,
        s1_size=int(res.stages.s1.size),
        u1_clean=bool(np.all(sigma[res.stages.u1] == 1)),
    )


def _run_chunk(args) -> list[TrialResult]:
    cfg, multiplier, trials = args
    return [run_trial(cfg, multiplier, t) for t in trials]


def run_trials(cfg: ExperimentConfig, multiplier: float = 1.0, workers: int = 1,
               start: int = 0, stop: int | None = None) -> list[TrialResult]:
    """Trials ``start..stop-1`` (default all), in trial order."""
    stop = cfg.trials if stop is None else stop
    indices = list(range(start, stop))
    if workers <= 1 or len(indices) < 2:
        return _run_chunk((cfg, multiplier, indices))
    chunks = [indices[k::workers] for k in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, [(cfg, multiplier, c) for c in chunks]))
    out = [r for part in parts for r in part]
    out.sort(key=lambda r: r.trial)
    return out


def summarize(cfg: ExperimentConfig, multiplier: float, results: list[TrialResult]) -> SummaryRow:
    tests = np.array([r.tests_used for r in results], dtype=np.float64)
    wins = sum(r.success for r in results)
    low, high = wilson_interval(wins, len(results))
    budget = (1 + cfg.eps) * cfg.threshold_tests()
    return SummaryRow(
        mode=cfg.mode, n=cfg.n, alpha=cfg.alpha, p01=cfg.p01, p10=cfg.p10, eps=cfg.eps,
        multiplier=multiplier, trials=len(results),
        tests_mean=float(tests.mean()), tests_p95=float(np.percentile(tests, 95)),
        success=wins / len(results), wilson_low=low, wilson_high=high, seed=cfg.seed,
        within_budget=float(np.mean(tests <= budget)),
    )


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[SummaryRow]:
    """One summary row per budget multiplier."""
    return [summarize(cfg, m, run_trials(cfg, m, workers)) for m in cfg.multipliers]


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def experiment_csv(rows: list[SummaryRow]) -> str:
    def cell(v):
        return fmt(v) if isinstance(v, float) else str(v)
    return _csv_text(EXPERIMENT_COLUMNS, ([cell(getattr(r, c)) for c in EXPERIMENT_COLUMNS] for r in rows))


def sweep_thresholds(alphas, channels) -> str:
    """Threshold constants for every (alpha, channel) pair as CSV text."""
    alphas = list(alphas)
    if not alphas:
        raise DomainError("empty alpha list")
    reports = thresholds.sweep(alphas, channels)
    return _csv_text(
        SWEEP_COLUMNS,
        ([fmt(r.alpha), fmt(r.p01), fmt(r.p10), str(r.gamma_star), fmt(r.xi_at_gamma_star), fmt(r.c_na), fmt(r.c_ad)]
         for r in reports),
    )


FIGURE1_CHANNELS = ((0.01, 0.01), (0.1, 0.1), (0.01, 0.1), (0.1, 0.01))
