"""Exact estimators and success probabilities for small instances.

Everything here enumerates infection vectors (and, for success
probabilities, observed result vectors) and works in the log domain.
Infection vector ``s`` is encoded as an integer whose bit ``i`` is the
status of individual ``i``.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .channel import NoisyChannel, kappa
from .errors import DomainError, IndexOutOfRange, LengthMismatch, TooLarge
from .population import Role, TestDesign, good_test_counts

MAP_MAX_N = 20
EXACT_MAX_N = 8
EXACT_MAX_M = 10
TIE_TOL = 1e-12
ESTIMATORS = ("map", "genie", "all_zero")


def _bits(n: int) -> np.ndarray:
    codes = np.arange(1 << n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def _all_true_results(design: TestDesign, bits: np.ndarray) -> np.ndarray:
    if design.m == 0:
        return np.zeros((bits.shape[0], 0), dtype=np.uint8)
    return np.maximum.reduceat(bits[:, design.members], design.pool_ptr[:-1], axis=1)


def _log_prior(bits: np.ndarray, alpha: float) -> np.ndarray:
    k = bits.sum(axis=1)
    return k * math.log(alpha) + (bits.shape[1] - k) * math.log1p(-alpha)


def _log_channel(ch: NoisyChannel) -> np.ndarray:
    # row = ideal result, column = displayed result
    return np.log(np.array([[ch.p00, ch.p01], [ch.p10, ch.p11]]))


def _log_likelihood(truth: np.ndarray, shown: np.ndarray, ch: NoisyChannel) -> np.ndarray:
    """``L[s, t] = ln P(shown_t | truth_s)`` for every pair of rows."""
    lc = _log_channel(ch)
    truth = truth.astype(np.float64)
    shown = shown.astype(np.float64)
    m = truth.shape[1]
    return (
        m * lc[0, 0]
        + shown.sum(axis=1)[None, :] * (lc[0, 1] - lc[0, 0])
        + truth.sum(axis=1)[:, None] * (lc[1, 0] - lc[0, 0])
        + (truth @ shown.T) * (lc[1, 1] - lc[1, 0] - lc[0, 1] + lc[0, 0])
    )


def _preference_rank(bits: np.ndarray) -> np.ndarray:
    """Rank of each vector under 'fewest ones, then lexicographically smallest'."""
    n = bits.shape[1]
    keys = [bits[:, i] for i in range(n - 1, -1, -1)] + [bits.sum(axis=1)]
    order = np.lexsort(keys)
    rank = np.empty(bits.shape[0], dtype=np.int64)
    rank[order] = np.arange(bits.shape[0])
    return rank


def _check_common(design: TestDesign, observed, alpha: float) -> np.ndarray:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    observed = np.asarray(observed, dtype=np.uint8)
    if observed.shape != (design.m,):
        raise LengthMismatch(f"observed has shape {observed.shape}, design has {design.m} tests")
    return observed


def posterior_table(design: TestDesign, observed, alpha: float, ch: NoisyChannel) -> np.ndarray:
    """Log of the unnormalised posterior weight of every infection vector."""
    if design.n > MAP_MAX_N:
        raise TooLarge(f"n={design.n} exceeds the enumeration bound {MAP_MAX_N}")
    observed = _check_common(design, observed, alpha)
    bits = _bits(design.n)
    truth = _all_true_results(design, bits)
    return _log_prior(bits, alpha) + _log_likelihood(truth, observed[None, :], ch)[:, 0]


def map_estimate(design: TestDesign, observed, alpha: float, ch: NoisyChannel) -> np.ndarray:
    """Posterior mode; ties go to the vector with most zeros, then the lexicographically smallest."""
    logw = posterior_table(design, observed, alpha, ch)
    bits = _bits(design.n)
    cand = np.flatnonzero(logw >= logw.max() - TIE_TOL)
    rank = _preference_rank(bits)
    return bits[cand[np.argmin(rank[cand])]].copy()


def _genie_inputs(design, observed, sigma_rest, alpha, i):
    observed = _check_common(design, observed, alpha)
    if not 0 <= i < design.n:
        raise IndexOutOfRange(f"individual {i} outside [0, {design.n})")
    sigma_rest = np.asarray(sigma_rest, dtype=np.uint8)
    if sigma_rest.shape != (design.n,):
        raise LengthMismatch("sigma_rest does not match the design")
    return observed, sigma_rest


def genie_estimate_direct(design: TestDesign, observed, sigma_rest, alpha: float, ch: NoisyChannel, i: int) -> int:
    """Compare the conditional posteriors of sigma(i) = 0 and 1 given everyone else's true status.

    Only the tests containing ``i`` depend on its status. The entry of
    ``sigma_rest`` at ``i`` is ignored. Ties give 0.
    """
    observed, sigma_rest = _genie_inputs(design, observed, sigma_rest, alpha, i)
    lc = _log_channel(ch)
    logw = [math.log1p(-alpha), math.log(alpha)]
    for a in design.tests_of(i):
        pool = design.pool(a)
        others_infected = bool(np.any(sigma_rest[pool[pool != i]]))
        for s in (0, 1):
            logw[s] += lc[int(others_infected or s), observed[a]]
    return int(logw[1] > logw[0] + TIE_TOL)


def genie_estimate_threshold(design: TestDesign, observed, sigma_rest, alpha: float, ch: NoisyChannel, i: int) -> int:
    """Closed-form genie: 0 iff (no good test and alpha <= 1/2) or g+ <= C*g + kappa."""
    observed, sigma_rest = _genie_inputs(design, observed, sigma_rest, alpha, i)
    g, g_plus, _ = good_test_counts(design, sigma_rest, observed, i)
    if g == 0 and alpha <= 0.5:
        return 0
    bound = ch.c_threshold * g + kappa(alpha, ch)
    return int(not g_plus <= bound + TIE_TOL * max(1.0, abs(bound)))


def joint_log_table(design: TestDesign, alpha: float, ch: NoisyChannel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(bits, shown, logJ)`` with ``logJ[s, t] = ln P(sigma = s, observed = t)``."""
    if design.n > EXACT_MAX_N or design.m > EXACT_MAX_M:
        raise TooLarge(
            f"exact enumeration limited to n <= {EXACT_MAX_N} and m <= {EXACT_MAX_M}, got n={design.n}, m={design.m}"
        )
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    bits = _bits(design.n)
    shown = _bits(design.m)
    truth = _all_true_results(design, bits)
    logj = _log_prior(bits, alpha)[:, None] + _log_likelihood(truth, shown, ch)
    return bits, shown, logj


def exact_success_probability(design: TestDesign, alpha: float, ch: NoisyChannel, estimator: str) -> float:
    """P[estimate == sigma] summed over every (sigma, observed) pair.

    For ``"genie"`` each coordinate is decided with the true status of all
    other individuals supplied, and success means all coordinates are right.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}, got {estimator!r}")
    bits, _, logj = joint_log_table(design, alpha, ch)
    joint = np.exp(logj)
    if estimator == "all_zero":
        return float(joint[0].sum())
    if estimator == "map":
        rank = _preference_rank(bits)
        cand = logj >= logj.max(axis=0, keepdims=True) - TIE_TOL
        pick = np.argmin(np.where(cand, rank[:, None], np.iinfo(np.int64).max), axis=0)
        return float(joint[pick, np.arange(joint.shape[1])].sum())
    codes = np.arange(bits.shape[0])
    correct = np.ones_like(logj, dtype=bool)
    for i in range(design.n):
        diff = logj - logj[codes ^ (1 << i)]
        infected = bits[:, i].astype(bool)[:, None]
        correct &= np.where(infected, diff > TIE_TOL, diff >= -TIE_TOL)
    return float(joint[correct].sum())


def enumerate_designs(max_n: int = 3, max_tests: int = 3):
    """Every design with 1..max_n individuals and 0..max_tests pools (pools as an unordered multiset)."""
    for n in range(1, max_n + 1):
        subsets = [
            c for size in range(1, n + 1) for c in itertools.combinations(range(n), size)
        ]
        for m in range(max_tests + 1):
            for pools in itertools.combinations_with_replacement(subsets, m):
                yield TestDesign.from_pools(n, pools, Role.F2_GROUP)


def check_genie_forms(design: TestDesign, alpha: float, ch: NoisyChannel) -> int:
    """Number of (sigma, observed, i) inputs where the two genie forms disagree."""
    mismatches = 0
    for s in _bits(design.n):
        for t in _bits(design.m):
            for i in range(design.n):
                if genie_estimate_direct(design, t, s, alpha, ch, i) != genie_estimate_threshold(design, t, s, alpha, ch, i):
                    mismatches += 1
    return mismatches


ORACLE_SUITE = (
    (0.1, (0.1, 0.1)),
    (0.5, (0.1, 0.1)),
    (0.3, (0.01, 0.1)),
    (0.7, (0.2, 0.05)),
    (0.05, (0.3, 0.3)),
)


def run_oracle_suite(max_n: int = 3, max_tests: int = 3, cases=ORACLE_SUITE) -> dict:
    """Exhaustive genie-vs-MAP ordering and genie form equivalence over the enumerated family."""
    designs = list(enumerate_designs(max_n, max_tests))
    worst_gap = math.inf
    ordering_failures = form_mismatches = 0
    max_norm_err = 0.0
    for alpha, (p01, p10) in cases:
        ch = NoisyChannel(p01, p10)
        for d in designs:
            p_gen = exact_success_probability(d, alpha, ch, "genie")
            p_map = exact_success_probability(d, alpha, ch, "map")
            worst_gap = min(worst_gap, p_gen - p_map)
            if p_gen < p_map - 1e-12:
                ordering_failures += 1
            max_norm_err = max(max_norm_err, abs(np.exp(joint_log_table(d, alpha, ch)[2]).sum() - 1.0))
            form_mismatches += check_genie_forms(d, alpha, ch)
    return {
        "designs": len(designs),
        "cases": len(cases),
        "ordering_failures": ordering_failures,
        "min_genie_minus_map": worst_gap,
        "form_mismatches": form_mismatches,
        "max_normalisation_error": max_norm_err,
    }
