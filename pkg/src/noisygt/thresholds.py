"""Sharp test-count thresholds for non-adaptive and adaptive recovery.

Both thresholds have the form ``c * n * ln(n)``. The non-adaptive constant
optimises over the pool size; the adaptive one is a single KL ratio.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .channel import NoisyChannel, kl_bernoulli
from .errors import DomainError, InvalidParams


@dataclass(frozen=True)
class ThresholdReport:
    alpha: float
    p01: float
    p10: float
    gamma_star: int
    xi_at_gamma_star: float
    c_na: float
    c_ad: float
    n: int
    m_na: float
    m_ad: float


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def _check_n(n: int) -> None:
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n!r}")


def _good_exponent(alpha: float, ch: NoisyChannel, gamma: int) -> float:
    # -ln(1 - (1-alpha)^(gamma-1) * (1 - e^-beta)): the per-test decay rate of
    # the genie error for a pool of size gamma
    x = (1.0 - alpha) ** (gamma - 1) * -math.expm1(-ch.beta)
    return -math.log1p(-x)


def xi(alpha: float, ch: NoisyChannel, gamma: int) -> float:
    """Tests of size ``gamma`` per individual, in units of ln(n), that push the
    genie misclassification probability down to O(1/n)."""
    _check_alpha(alpha)
    if gamma < 1:
        raise InvalidParams(f"gamma must be a positive integer, got {gamma!r}")
    if gamma == 1:
        return 1.0 / ch.beta
    return 1.0 / _good_exponent(alpha, ch, gamma)


def gamma_search_bound(alpha: float) -> int:
    return math.ceil(1.0 / alpha)


def gamma_star(alpha: float, ch: NoisyChannel) -> int:
    """Pool size minimising xi/gamma; ties go to the smaller pool."""
    _check_alpha(alpha)
    best, best_val = 1, ch.beta
    for g in range(2, gamma_search_bound(alpha) + 1):
        val = g * _good_exponent(alpha, ch, g)
        if val > best_val:
            best, best_val = g, val
    return best


def c_na(alpha: float, ch: NoisyChannel) -> float:
    g = gamma_star(alpha, ch)
    return xi(alpha, ch, g) / g


def c_ad(alpha: float, ch: NoisyChannel) -> float:
    _check_alpha(alpha)
    return alpha / kl_bernoulli(ch.p11, ch.p01)


def m_na(n: int, alpha: float, ch: NoisyChannel) -> float:
    _check_n(n)
    return n * math.log(n) * c_na(alpha, ch)


def m_ad(n: int, alpha: float, ch: NoisyChannel) -> float:
    _check_n(n)
    return n * math.log(n) * c_ad(alpha, ch)


def report(alpha: float, ch: NoisyChannel, n: int = 10_000) -> ThresholdReport:
    _check_n(n)
    g = gamma_star(alpha, ch)
    x = xi(alpha, ch, g)
    cna, cad = x / g, c_ad(alpha, ch)
    nlogn = n * math.log(n)
    return ThresholdReport(
        alpha=alpha, p01=ch.p01, p10=ch.p10, gamma_star=g, xi_at_gamma_star=x,
        c_na=cna, c_ad=cad, n=n, m_na=nlogn * cna, m_ad=nlogn * cad,
    )


def _as_channel(ch: NoisyChannel | Sequence[float]) -> NoisyChannel:
    if isinstance(ch, NoisyChannel):
        return ch
    p01, p10 = ch
    return NoisyChannel(float(p01), float(p10))


def sweep(
    alphas: Iterable[float],
    channels: Iterable[NoisyChannel | Sequence[float]],
    n: int = 10_000,
) -> list[ThresholdReport]:
    """One report per (alpha, channel) pair, alpha-major."""
    alphas = list(alphas)
    chans = [_as_channel(c) for c in channels]
    if not alphas or not chans:
        raise DomainError("sweep needs at least one alpha and one channel")
    return [report(a, ch, n) for a in alphas for ch in chans]


def default_alpha_grid() -> list[float]:
    """0.01, 0.02, ..., 0.45."""
    return [round(0.01 * k, 2) for k in range(1, 46)]
