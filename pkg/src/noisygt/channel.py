"""The noisy binary test channel and its information-theoretic constants.

All logarithms are natural; every KL value and derived constant is in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateChannel, DomainError, InternalInconsistency

BETA_TOL = 1e-9


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence of Bernoulli(p) from Bernoulli(q), in nats.

    ``p`` may sit on the boundary {0, 1} (empirical frequencies do), with
    the usual 0 * ln 0 = 0 convention. ``q`` must lie strictly inside (0, 1).
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    head = p * (math.log(p) - math.log(q)) if p > 0.0 else 0.0
    tail = (1.0 - p) * (math.log1p(-p) - math.log1p(-q)) if p < 1.0 else 0.0
    return head + tail


def _threshold_and_beta(p01: float, p10: float) -> tuple[float, float, float]:
    # returns (C, KL(C||p01), KL(C||p11)) for the given orientation
    log_p00_over_p10 = math.log1p(-p01) - math.log(p10)
    log_p11_over_p01 = math.log1p(-p10) - math.log(p01)
    c = log_p00_over_p10 / (log_p00_over_p10 + log_p11_over_p01)
    return c, kl_bernoulli(c, p01), kl_bernoulli(c, 1.0 - p10)


@dataclass(frozen=True)
class NoisyChannel:
    """Binary channel: a 0 shows as 1 with prob ``p01``, a 1 shows as 0 with prob ``p10``."""

    p01: float
    p10: float

    def __post_init__(self) -> None:
        _check_probabilities(self.p01, self.p10)

    @property
    def p00(self) -> float:
        return 1.0 - self.p01

    @property
    def p11(self) -> float:
        return 1.0 - self.p10

    def swapped(self) -> "NoisyChannel":
        return NoisyChannel(self.p10, self.p01)

    @cached_property
    def _constants(self) -> tuple[float, float]:
        # Evaluate in the orientation with p01 <= p10 so that C' = 1 - C and
        # beta' = beta hold bit-for-bit under a swap of the two flip rates.
        flip = self.p01 > self.p10
        c, kl_a, kl_b = _threshold_and_beta(*sorted((self.p01, self.p10)))
        if abs(kl_a - kl_b) > BETA_TOL:
            raise InternalInconsistency(
                f"KL(C||p01)={kl_a!r} and KL(C||p11)={kl_b!r} disagree for {self}"
            )
        return (1.0 - c if flip else c), kl_a

    @property
    def c_threshold(self) -> float:
        return self._constants[0]

    @property
    def beta(self) -> float:
        return self._constants[1]


@dataclass(frozen=True)
class ChannelConstants:
    c_threshold: float
    beta: float


def _check_probabilities(p01: float, p10: float) -> None:
    for name, value in (("p01", p01), ("p10", p10)):
        if not math.isfinite(value):
            raise DegenerateChannel(f"{name} must be finite, got {value!r}")
        if not 0.0 < value < 1.0:
            raise DegenerateChannel(f"{name}={value!r} is out of range: must lie in (0, 1)")
    total = p01 + p10
    if total == 1.0:
        raise DegenerateChannel(
            f"p01 + p10 = 1 (p01={p01!r}, p10={p10!r}): capacity zero, "
            "positive and negative tests are indistinguishable"
        )
    if total > 1.0:
        raise DegenerateChannel(
            f"p01 + p10 = {total!r} > 1: flip all observed results to get a valid channel"
        )


def validate_channel(p01: float, p10: float) -> NoisyChannel:
    return NoisyChannel(float(p01), float(p10))


def threshold_c(ch: NoisyChannel) -> float:
    """The unique maximiser C of c -> min{KL(c||p01), KL(c||p11)}.

    Closed form ln(p00/p10) / ln(p11*p00 / (p01*p10)); lies in (p01, p11).
    """
    return ch.c_threshold


def beta(ch: NoisyChannel) -> float:
    """KL(C||p01), which equals KL(C||p11) at the optimal threshold."""
    return ch.beta


def constants(ch: NoisyChannel) -> ChannelConstants:
    return ChannelConstants(ch.c_threshold, ch.beta)


def kappa(alpha: float, ch: NoisyChannel) -> float:
    """Prior offset of the genie threshold: ln(a/(1-a)) / ln(p01*p10/(p11*p00))."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    num = math.log(alpha) - math.log1p(-alpha)
    den = math.log(ch.p01) + math.log(ch.p10) - math.log1p(-ch.p10) - math.log1p(-ch.p01)
    return num / den


def apply_noise(truth: np.ndarray, ch: NoisyChannel, rng: np.random.Generator) -> np.ndarray:
    """Pass ideal test results through the channel, one independent draw per bit."""
    truth = np.asarray(truth, dtype=bool)
    u = rng.random(truth.shape)
    return np.where(truth, u >= ch.p10, u < ch.p01).astype(np.uint8)
