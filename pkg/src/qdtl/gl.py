"""Goldreich-Levin prefix search over strongly biased label oracles.

The oracle answers h(x) except with an input-dependent probability bias[x].
Prefix weights are read through the swap-test overlap W of the shared-suffix
pair estimator: for a prefix p of length s,

    W = E_{x1, z1, x2}[ chi_p(x1) chi_p(z1) y(x1 x2) y(z1 x2) ],

with independent oracle answers y. For a clean oracle W = PW_h(p); in general
W = PW_g(p) for g = h * (1 - 2 bias), which stays within 4 * max(bias) of
PW_h(p).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boolean import BooleanFunction, FourierSpectrum, as_prefix, mask_range, walsh_transform
from .emulation import (
    DEFAULT_RESIDUAL,
    EstimateReport,
    QueryLedger,
    amplification_cost,
    emulate_amplification,
    majority_copies,
    mae_draws,
)

MAX_LEVEL_RESTARTS = 3


@dataclass(frozen=True)
class StronglyBiasedOracle:
    """Label oracle for ``h`` that answers -h(x) with probability ``bias[x]``.

    ``query_cost`` is the number of underlying example-oracle queries one
    invocation consumes (1 for a primitive oracle).
    """

    h: BooleanFunction
    bias: np.ndarray
    query_cost: int = 1
    signal_spectrum: FourierSpectrum = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bias = np.broadcast_to(np.asarray(self.bias, dtype=np.float64), (1 << self.h.n,)).copy()
        if np.any(bias < 0) or np.any(bias > 1):
            raise ValueError("bias entries must lie in [0, 1]")
        if self.query_cost < 1:
            raise ValueError("query cost must be at least 1")
        bias.setflags(write=False)
        object.__setattr__(self, "bias", bias)
        signal = self.h.values * (1.0 - 2.0 * bias)
        object.__setattr__(self, "signal_spectrum", FourierSpectrum(self.h.n, walsh_transform(signal)))

    @property
    def n(self) -> int:
        return self.h.n

    @property
    def gamma(self) -> float:
        return float(self.bias.max())

    def sample(self, xs, rng: np.random.Generator) -> np.ndarray:
        xs = np.asarray(xs)
        flips = rng.random(xs.shape) < self.bias[xs]
        return np.where(flips, -self.h.values[xs], self.h.values[xs]).astype(np.int8)


@dataclass(frozen=True)
class GlOutcome:
    l: int
    S: int
    queries: int
    sound: bool = True

    def __post_init__(self):
        if self.l not in (0, 1):
            raise ValueError("l must be 0 or 1")


@dataclass(frozen=True)
class LevelTrace:
    level: int
    live: int
    marked: int
    queries: int

    def line(self) -> str:
        return f"{self.level},{self.live},{self.marked},{self.queries}"


def biased_overlap(oracle: StronglyBiasedOracle, p) -> float:
    """Exact swap-test overlap W for prefix ``p``."""
    prefix = as_prefix(p)
    start, stop = mask_range(prefix.value, len(prefix), oracle.n)
    return oracle.signal_spectrum.range_weight(start, stop)


def pw_accuracy(eps: float, gamma: float) -> float:
    """Per-copy accuracy on the W scale that leaves room for the 4*gamma bias.

    Equals eps/2 for a clean oracle. The accuracy plus the bias stays within
    eps/2 whenever gamma <= eps/16; beyond that it is floored at eps/4.
    """
    return max(eps / 2 - 4 * gamma, eps / 4)


def estimation_cost(eps: float, delta_prime: float, oracle: StronglyBiasedOracle) -> int:
    """Queries for one majority-cleaned prefix-weight estimate.

    Charged at the 1/eps^2 rate of the prefix-search query bound, times the
    majority copies and the oracle's per-invocation cost.
    """
    accuracy = pw_accuracy(eps, oracle.gamma)
    return majority_copies(delta_prime) * math.ceil(1 / accuracy**2) * oracle.query_cost


def _sigma2_medians(overlaps: np.ndarray, eps: float, delta_prime: float, gamma: float,
                    rng: np.random.Generator, adversarial: bool) -> np.ndarray:
    """Median of the majority copies of each swap-test estimate (sigma^2 scale)."""
    copies = majority_copies(delta_prime)
    sigma2 = 0.5 + 0.5 * overlaps
    draws = mae_draws(sigma2, pw_accuracy(eps, gamma) / 2, rng, adversarial=adversarial,
                      copies=copies)
    return np.median(draws, axis=0)


def estimate_pw(oracle: StronglyBiasedOracle, p, eps: float, delta_prime: float,
                rng: np.random.Generator, ledger: Optional[QueryLedger] = None, *,
                adversarial: bool = False) -> EstimateReport:
    """Estimate sigma^2 = 1/2 + W/2 for prefix ``p``.

    ``2 * value - 1`` estimates PW_h(p) to within pw_accuracy + 4*gamma with
    probability at least 1 - delta_prime; ``error_bound`` is on the sigma^2 scale.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if not 0 < delta_prime < 0.5:
        raise ValueError(f"delta' must be in (0, 1/2), got {delta_prime}")
    overlap = np.array([biased_overlap(oracle, p)])
    value = float(_sigma2_medians(overlap, eps, delta_prime, oracle.gamma, rng, adversarial)[0])
    cost = estimation_cost(eps, delta_prime, oracle)
    if ledger is not None:
        ledger.charge("pw_estimate", cost)
    bound = (pw_accuracy(eps, oracle.gamma) + 4 * oracle.gamma) / 2
    return EstimateReport(value, "additive", bound, 1 - delta_prime, cost)


def first_level(tau: float, n: int) -> int:
    """Shallowest level with at least 1/tau^2 nodes, kept strictly above the leaves."""
    level = max(0, math.ceil(math.log2(1 / tau**2)))
    return min(level, n - 1)


def qgl(oracle: StronglyBiasedOracle, tau: float, eps: float, delta: float,
        rng: np.random.Generator, ledger: Optional[QueryLedger] = None, *,
        trace: Optional[list] = None, adversarial: bool = False,
        residual: Optional[float] = None) -> GlOutcome:
    """Level-by-level prefix search for a parity with prefix weight >= tau.

    Returns (1, S) with PW(S) >= tau - eps, or (0, .) when no parity reaches
    tau; each with probability >= 1 - delta when oracle.gamma <= eps/16.
    """
    if tau <= 0 or tau > 1:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    if not 0 < eps < tau:
        raise ValueError(f"eps must be in (0, tau), got eps={eps}, tau={tau}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    n = oracle.n
    delta_prime = delta * tau**2 / (8 * n)
    if residual is None:
        residual = min(DEFAULT_RESIDUAL, delta / (2 * n))
    level_cost = estimation_cost(eps, delta_prime, oracle)
    threshold = tau - eps / 2
    sound = oracle.gamma <= eps / 16
    start = first_level(tau, n)
    live = np.arange(1 << start, dtype=np.int64)
    spent = 0
    for length in range(start + 1, n + 1):
        weights = oracle.signal_spectrum.level_weights(length)
        for attempt in range(MAX_LEVEL_RESTARTS + 1):
            children = (2 * live[:, None] + np.array([0, 1])).ravel()
            medians = _sigma2_medians(weights[children], eps, delta_prime, oracle.gamma,
                                      rng, adversarial)
            marked = children[2 * medians - 1 >= threshold]
            p_good = len(marked) / len(children)
            floor = 1 / len(children)
            found = emulate_amplification(p_good, floor, rng, residual=residual)
            cost = amplification_cost(max(p_good, floor)) * level_cost
            spent += cost
            if ledger is not None:
                ledger.charge("qgl", cost)
            if trace is not None:
                trace.append(LevelTrace(length, len(live), len(marked), cost))
            if found:
                live = marked
                break
        else:
            return GlOutcome(0, 0, spent, sound)
    return GlOutcome(1, int(rng.choice(live)), spent, sound)


@dataclass(frozen=True)
class IglOutcome:
    S: int
    tau: float
    found: bool
    calls: int


def igl_schedule(eps: float) -> tuple[int, float]:
    """Number of bisection steps k and the prefix-search gap g."""
    k = math.ceil(math.log2(1 / eps)) + 1
    return k, (eps - 2.0**-k) / 8


def igl(oracle: StronglyBiasedOracle, eps: float, delta: float, t_floor: float,
        rng: np.random.Generator, ledger: Optional[QueryLedger] = None, *,
        adversarial: bool = False) -> IglOutcome:
    """Bisect the weight threshold to find a parity of near-maximal weight.

    The threshold starts at 1/2, rises after a successful search and falls
    after a failed one. The floor only ends the search once some candidate
    has been found. Returns the candidate from the last successful search.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must be in (0, 1/2), got {delta}")
    k, gap = igl_schedule(eps)
    tau = 0.5
    best, best_tau, found, calls = 0, 0.0, False, 0
    for i in range(1, k + 1):
        outcome = qgl(oracle, tau, gap, delta / k, rng, ledger, adversarial=adversarial)
        calls += 1
        step = 2.0 ** -(i + 1)
        if outcome.l == 1:
            best, best_tau, found = outcome.S, tau, True
            tau += step
        else:
            tau -= step
        if step < gap / 2 or (found and tau <= t_floor):
            break
    return IglOutcome(best, best_tau, found, calls)
