"""Non-adaptive SPOG design and decoder.

The design has three parts: a few individual tests per individual (F1), used
to build a pseudo-genie; uniformly random pools of a fixed size (F2 group);
and individual top-up tests (F2 extra) so everybody sits in enough F2 tests.
The decoder thresholds each individual on the positive fraction of its
distinctive tests whose other members the pseudo-genie calls healthy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import NoisyChannel
from .errors import InvalidParams, LengthMismatch, TooSmallPopulation
from .population import Role, TestDesign
from .thresholds import gamma_star, xi

F2_ROLES = (Role.F2_GROUP, Role.F2_EXTRA)


@dataclass(frozen=True)
class SpogParams:
    alpha_hat: float
    gamma: int
    eta: float
    eps: float

    def __post_init__(self):
        if not 0.0 < self.alpha_hat < 1.0:
            raise InvalidParams(f"alpha_hat must lie in (0, 1), got {self.alpha_hat!r}")
        if self.gamma < 1:
            raise InvalidParams(f"gamma must be positive, got {self.gamma!r}")
        if self.gamma > math.ceil(1.0 / self.alpha_hat):
            raise InvalidParams(
                f"gamma={self.gamma} exceeds ceil(1/alpha_hat)={math.ceil(1.0 / self.alpha_hat)}"
            )
        if not self.eta > 0.0:
            raise InvalidParams(f"eta must be positive, got {self.eta!r}")
        if not self.eps > 0.0:
            raise InvalidParams(f"eps must be positive, got {self.eps!r}")


@dataclass(frozen=True)
class SpogDesign:
    design: TestDesign
    params: SpogParams
    xi: float
    f1_per_individual: int
    n_group: int
    f2_floor: int
    budget_scale: float = 1.0

    @property
    def n(self) -> int:
        return self.design.n

    @property
    def m(self) -> int:
        return self.design.m


def default_params(alpha: float, ch: NoisyChannel, eps: float) -> SpogParams:
    """Constant-prevalence parameters: optimal pool size and eta = (eps/3) * xi / gamma."""
    g = gamma_star(alpha, ch)
    return SpogParams(alpha, g, (eps / 3.0) * xi(alpha, ch, g) / g, eps)


def sublinear_params(n: int, theta_hat: float, eps: float, prior_n: int | None = None) -> SpogParams:
    """Parameters for prevalence at most ``prior_n ** -theta_hat``.

    ``prior_n`` defaults to ``n``; PRESTO passes the global population size
    while sizing pools for a subpopulation of size ``n``.
    """
    if n < 3:
        raise TooSmallPopulation(f"need n >= 3, got {n}")
    if not 0.0 < theta_hat < 1.0:
        raise InvalidParams(f"theta_hat must lie in (0, 1), got {theta_hat!r}")
    alpha_hat = float((prior_n or n) ** -theta_hat)
    gamma = math.ceil(math.log(n))
    if gamma > math.ceil(1.0 / alpha_hat):
        raise TooSmallPopulation(
            f"pool size ceil(ln {n})={gamma} exceeds ceil(1/alpha_hat)={math.ceil(1.0 / alpha_hat)}"
        )
    return SpogParams(alpha_hat, gamma, eps / 2.0, eps)


def build_design(
    n: int,
    params: SpogParams,
    ch: NoisyChannel,
    rng: np.random.Generator,
    budget_scale: float = 1.0,
) -> SpogDesign:
    """Sample a SPOG design over ``n`` individuals.

    ``budget_scale`` multiplies both F2 counts (pools and per-individual
    floor); it exists for budget-sensitivity experiments and is 1 otherwise.
    """
    if n < 2:
        raise InvalidParams(f"need n >= 2, got {n}")
    if params.gamma > n:
        raise InvalidParams(f"gamma={params.gamma} exceeds n={n}")
    if not budget_scale > 0.0:
        raise InvalidParams(f"budget_scale must be positive, got {budget_scale!r}")
    x = xi(params.alpha_hat, ch, params.gamma)
    log_n = math.log(n)
    k1 = math.ceil(params.eta * log_n)
    n_group = math.ceil(budget_scale * (1.0 + params.eps / 3.0) * x * n * log_n / params.gamma)
    floor = math.ceil(budget_scale * (1.0 + params.eps / 6.0) * x * log_n + 1.0)

    everyone = np.arange(n)
    f1 = TestDesign.individual(n, everyone, k1, Role.F1)
    group = TestDesign.uniform_pools(n, n_group, params.gamma, rng)
    top_up = np.maximum(0, floor - np.bincount(group.members, minlength=n))
    extra = TestDesign.individual(n, everyone, top_up, Role.F2_EXTRA)
    return SpogDesign(TestDesign.concat([f1, group, extra]), params, x, k1, n_group, floor, budget_scale)


def _as_design(design: SpogDesign | TestDesign) -> TestDesign:
    return design.design if isinstance(design, SpogDesign) else design


def _check_observed(d: TestDesign, observed) -> np.ndarray:
    observed = np.ascontiguousarray(observed, dtype=np.uint8)
    if observed.shape != (d.m,):
        raise LengthMismatch(f"observed has shape {observed.shape}, design has {d.m} tests")
    return observed


def pseudo_genie(design: SpogDesign | TestDesign, observed, ch: NoisyChannel) -> np.ndarray:
    """1 iff at least a C fraction of the individual's F1 tests show positive."""
    d = _as_design(design)
    observed = _check_observed(d, observed)
    f1 = np.flatnonzero(d.roles == Role.F1)
    who = d.members[d.pool_ptr[f1]]
    total = np.bincount(who, minlength=d.n)
    pos = np.bincount(who, weights=observed[f1], minlength=d.n)
    return (pos >= ch.c_threshold * total).astype(np.uint8)


def _eligible(d: TestDesign) -> np.ndarray:
    return np.isin(d.roles, F2_ROLES).astype(np.uint8)


def distinctive_sets(design: SpogDesign | TestDesign, backend: str | None = None) -> list[np.ndarray]:
    """For each individual, its greedily chosen F2 tests that pairwise meet only in it."""
    d = _as_design(design)
    k = kernels.get(backend) if backend else kernels
    ptr, tests = k.distinctive_sets(d.n, d.pool_ptr, d.members, d.ind_ptr, d.ind_tests, _eligible(d))
    return [tests[ptr[i]:ptr[i + 1]] for i in range(d.n)]


@dataclass(frozen=True)
class SpogDecoding:
    estimate: np.ndarray
    pseudo: np.ndarray
    distinctive_size: np.ndarray
    pseudo_good_size: np.ndarray


def decode_details(design: SpogDesign | TestDesign, observed, ch: NoisyChannel,
                   backend: str | None = None) -> SpogDecoding:
    d = _as_design(design)
    observed = _check_observed(d, observed)
    pseudo = pseudo_genie(d, observed, ch)
    k = kernels.get(backend) if backend else kernels
    est, d_size, p_size = k.spog_classify(
        d.n, d.pool_ptr, d.members, d.ind_ptr, d.ind_tests, _eligible(d), observed, pseudo, ch.c_threshold
    )
    return SpogDecoding(est, pseudo, d_size, p_size)


def decode(design: SpogDesign | TestDesign, observed, ch: NoisyChannel, backend: str | None = None) -> np.ndarray:
    """Run the SPOG decoder; an individual with no pseudo-good test keeps its pseudo-genie bit."""
    return decode_details(design, observed, ch, backend).estimate
