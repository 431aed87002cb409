"""Three-stage adaptive PRESTO protocol.

Stage 1 pre-sorts everyone with a few individual tests. Stage 2 retests the
likely-infected set S1 individually and keeps only those above a high
threshold (U1). Stage 3 runs the sub-constant-prevalence SPOG separately on
the rejects of both stages (S0 and U0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Protocol

import numpy as np

from . import spog
from .channel import NoisyChannel, apply_noise, kl_bernoulli
from .errors import Infeasible, InvalidParams, SessionMismatch, TooSmallPopulation
from .population import Role, TestDesign, true_results
from .thresholds import gamma_star

# Slack on the stage-2 constraint; capped at eps/8 so it stays feasible for small eps.
_BOUND2_SLACK = 0.01
_ETA_SHRINK = 0.9


class AdaptiveSession(Protocol):
    """Oracle for adaptive testing over a hidden infection vector."""

    n: int

    def submit(self, batch: TestDesign) -> np.ndarray: ...

    @property
    def tests_used(self) -> int: ...


class SimulatedSession:
    """Session backed by a known ground truth; noise is drawn from ``rng`` per submitted test."""

    def __init__(self, sigma: np.ndarray, ch: NoisyChannel, rng: np.random.Generator):
        self._sigma = np.asarray(sigma, dtype=np.uint8).copy()
        self._ch = ch
        self._rng = rng
        self._used = 0
        self.n = self._sigma.size

    def submit(self, batch: TestDesign) -> np.ndarray:
        if batch.n != self.n:
            raise SessionMismatch(f"batch is over {batch.n} individuals, session has {self.n}")
        self._used += batch.m
        return apply_noise(true_results(batch, self._sigma), self._ch, self._rng)

    @property
    def tests_used(self) -> int:
        return self._used


def simulate_session(sigma: np.ndarray, ch: NoisyChannel, rng: np.random.Generator) -> SimulatedSession:
    return SimulatedSession(sigma, ch, rng)


@dataclass(frozen=True)
class PrestoParams:
    eps: float
    delta1: float
    eta: float
    theta_s: float
    theta_u: float

    def violations(self, ch: NoisyChannel) -> list[str]:
        """Names of the parameter constraints this tuple breaks for ``ch`` (empty if valid)."""
        kl_ad = kl_bernoulli(ch.p11, ch.p01)
        t = ch.p11 - self.delta1
        bad = []
        if not 0.0 < self.delta1 < ch.p11 - ch.p01:
            bad.append("delta1 range")
            return bad
        if not (1 + self.eps / 4) * kl_bernoulli(t, ch.p01) / kl_ad > 1:
            bad.append("stage-2 false-positive bound")
        ratio = (1 + self.eps / 4) * kl_bernoulli(t, ch.p11) / kl_ad
        if not self.eta * kl_bernoulli(ch.c_threshold, ch.p01) < min(1.0, ratio):
            bad.append("stage-1 size bound")
        if not (self.theta_s > 0 and self.theta_u > 0):
            bad.append("theta positivity")
        return bad


class StageOutcome(NamedTuple):
    s0: np.ndarray
    s1: np.ndarray
    u0: np.ndarray
    u1: np.ndarray


class PrestoResult(NamedTuple):
    estimate: np.ndarray
    tests_used: int
    stages: StageOutcome


def stage2_bound(eps: float, ch: NoisyChannel, delta1: float) -> float:
    return (1 + eps / 4) * kl_bernoulli(ch.p11 - delta1, ch.p01) / kl_bernoulli(ch.p11, ch.p01)


def choose_params(eps: float, ch: NoisyChannel) -> PrestoParams:
    """Largest admissible delta1 (by bisection), then eta at 90% of its ceiling."""
    if not eps > 0.0:
        raise InvalidParams(f"eps must be positive, got {eps!r}")
    c = ch.c_threshold
    target = 1.0 + min(_BOUND2_SLACK, eps / 8)
    cap = min(ch.p11 - ch.p01, ch.p11 - c) / 2
    if stage2_bound(eps, ch, cap) >= target:
        delta1 = cap
    else:
        lo, hi = 0.0, cap
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if stage2_bound(eps, ch, mid) >= target:
                lo = mid
            else:
                hi = mid
        delta1 = lo
    kl_ad = kl_bernoulli(ch.p11, ch.p01)
    ratio = (1 + eps / 4) * kl_bernoulli(ch.p11 - delta1, ch.p11) / kl_ad
    kl_c01 = kl_bernoulli(c, ch.p01)
    eta = _ETA_SHRINK * min(1.0, ratio) / kl_c01
    params = PrestoParams(
        eps=eps,
        delta1=delta1,
        eta=eta,
        theta_s=0.5 * eta * kl_bernoulli(c, ch.p11),
        theta_u=0.5 * (ratio - eta * kl_c01),
    )
    bad = params.violations(ch)
    if bad:
        raise Infeasible(f"parameter selection broke {bad} for {ch}, eps={eps}")
    return params


def _individual_counts(batch: TestDesign, results: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(batch.members, weights=results, minlength=n)


def _individual_fallback(session, idx, ch, tests_each) -> np.ndarray:
    batch = TestDesign.individual(session.n, idx, tests_each, Role.SPOG_SUB)
    pos = _individual_counts(batch, session.submit(batch), session.n)[idx]
    return (pos >= ch.c_threshold * tests_each).astype(np.uint8)


def _spog_params_for(n_sub: int, n: int, theta: float, eps: float, ch: NoisyChannel) -> spog.SpogParams:
    theta = min(theta, 1.0 - 1e-9)
    try:
        return spog.sublinear_params(n_sub, theta, eps, prior_n=n)
    except TooSmallPopulation:
        # ln(n_sub) pools are too large for the prevalence bound at this n;
        # use the optimal pool size for that bound instead
        alpha_hat = float(n ** -theta)
        return spog.SpogParams(alpha_hat, gamma_star(alpha_hat, ch), eps / 2.0, eps)


def _spog_on(session, idx, n, ch, theta, eps, rng, tests_each) -> np.ndarray:
    n_sub = idx.size
    if n_sub == 0:
        return np.zeros(0, dtype=np.uint8)
    if n_sub < 3 or n_sub <= math.ceil(math.log(n_sub)):
        return _individual_fallback(session, idx, ch, tests_each)
    params = _spog_params_for(n_sub, n, theta, eps, ch)
    if params.gamma > n_sub:
        return _individual_fallback(session, idx, ch, tests_each)
    sd = spog.build_design(n_sub, params, ch, rng)
    observed = session.submit(sd.design.relabel(idx, session.n, Role.SPOG_SUB))
    return spog.decode(sd, observed, ch)


def run(
    session: AdaptiveSession,
    n: int,
    ch: NoisyChannel,
    params: PrestoParams,
    rng: np.random.Generator,
    stage2_scale: float = 1.0,
) -> PrestoResult:
    """Run all three stages against ``session``; ``rng`` drives stage-3 pool sampling.

    ``stage2_scale`` multiplies the stage-2 test count (budget sensitivity runs).
    """
    if session.n != n:
        raise SessionMismatch(f"session has {session.n} individuals, expected {n}")
    everyone = np.arange(n)
    c = ch.c_threshold
    log_n = math.log(n)
    kl_ad = kl_bernoulli(ch.p11, ch.p01)

    k1 = math.ceil(params.eta * log_n)
    batch = TestDesign.individual(n, everyone, k1, Role.PRESTO_STAGE1)
    pos1 = _individual_counts(batch, session.submit(batch), n)
    in_s1 = pos1 > c * k1
    s1, s0 = np.flatnonzero(in_s1), np.flatnonzero(~in_s1)

    k2 = math.ceil(stage2_scale * (1 + params.eps / 4) * log_n / kl_ad)
    batch = TestDesign.individual(n, s1, k2, Role.PRESTO_STAGE2)
    pos2 = _individual_counts(batch, session.submit(batch), n)[s1]
    in_u1 = pos2 > (ch.p11 - params.delta1) * k2
    u1, u0 = s1[in_u1], s1[~in_u1]

    tests_each = math.ceil((1 + params.eps / 4) * log_n / kl_ad)
    estimate = np.zeros(n, dtype=np.uint8)
    estimate[u1] = 1
    estimate[s0] |= _spog_on(session, s0, n, ch, params.theta_s, params.eps, rng, tests_each)
    estimate[u0] |= _spog_on(session, u0, n, ch, params.theta_u, params.eps, rng, tests_each)
    return PrestoResult(estimate, session.tests_used, StageOutcome(s0, s1, u0, u1))
