"""Contract-level emulation of the quantum subroutines plus a query ledger.

Each emulator draws its output from the distribution its guarantee allows
(success band with the stated probability, otherwise a failure draw) and
charges its stated cost, with constant 1, to a ``QueryLedger``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import stats

MAE_SUCCESS = 8 / math.pi**2
DEFAULT_RESIDUAL = 2.0**-7


class QueryLedger:
    """Per-tag counters of charged oracle invocations."""

    def __init__(self):
        self._counts: dict[str, int] = {}

    def charge(self, tag: str, count: int) -> None:
        count = int(count)
        if count < 0:
            raise ValueError("cannot charge a negative number of queries")
        self._counts[tag] = self._counts.get(tag, 0) + count

    @property
    def counters(self) -> dict[str, int]:
        return dict(self._counts)

    @property
    def total(self) -> int:
        return sum(self._counts.values())

    def snapshot(self) -> dict[str, int]:
        return dict(sorted(self._counts.items()))

    def rows(self) -> Iterable[tuple[str, int]]:
        return sorted(self._counts.items())

    def __repr__(self) -> str:
        return f"QueryLedger(total={self.total}, counters={self.snapshot()})"


def _charge(ledger: Optional[QueryLedger], tag: str, count: int) -> None:
    if ledger is not None:
        ledger.charge(tag, count)


@dataclass(frozen=True)
class EstimateReport:
    value: float
    error_kind: str
    error_bound: float
    confidence: float
    queries_charged: int

    def __post_init__(self):
        if self.error_kind not in ("relative", "additive"):
            raise ValueError(f"unknown error kind {self.error_kind!r}")
        if not 0 < self.confidence <= 1:
            raise ValueError("confidence must lie in (0, 1]")
        if self.error_bound < 0:
            raise ValueError("error bound must be non-negative")


def relative_estimate_cost(eps: float, k: int, floor: float) -> int:
    """ceil(k / (eps sqrt(p)) * max(1, 1 + ln ln(1/p)))."""
    loglog = math.log(math.log(1 / floor)) if floor < 1 / math.e else 0.0
    return math.ceil(k / (eps * math.sqrt(floor)) * max(1.0, 1.0 + loglog))


def _worst_value(true_value: np.ndarray) -> np.ndarray:
    return np.where(true_value < 0.5, 1.0, 0.0)


def emulate_relative_estimate(a: float, eps: float, k: int, floor: float,
                              rng: np.random.Generator, ledger: Optional[QueryLedger] = None,
                              *, adversarial: bool = False, tag: str = "relative_estimate"
                              ) -> EstimateReport:
    """Relative-error estimate of a probability ``a``.

    With probability 1 - 2^-k the value is uniform on [a(1-eps), a(1+eps)]
    clipped to [0, 1]; otherwise it is uniform on [0, 1] (or the worst
    endpoint when ``adversarial``). a = 0 always yields 0.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 0 < floor <= 1:
        raise ValueError(f"floor must be in (0, 1], got {floor}")
    if not 0 <= a <= 1:
        raise ValueError(f"a must be in [0, 1], got {a}")
    cost = relative_estimate_cost(eps, k, floor)
    _charge(ledger, tag, cost)
    confidence = 1 - 2.0**-k
    if a == 0:
        value = 0.0
    elif rng.random() < confidence:
        value = float(np.clip(rng.uniform(a * (1 - eps), a * (1 + eps)), 0.0, 1.0))
    elif adversarial:
        value = float(_worst_value(np.asarray(a)))
    else:
        value = float(rng.random())
    return EstimateReport(value, "relative", eps * a, confidence, cost)


def mae_draws(values, eps: float, rng: np.random.Generator, *, adversarial: bool = False,
              copies: int | None = None) -> np.ndarray:
    """Uncharged per-input estimate draws; shape ``values.shape`` or (copies, ...)."""
    values = np.asarray(values, dtype=np.float64)
    shape = values.shape if copies is None else (copies,) + values.shape
    success = rng.random(shape) < MAE_SUCCESS
    in_band = np.clip(values + rng.uniform(-eps, eps, shape), 0.0, 1.0)
    if adversarial:
        failed = np.broadcast_to(_worst_value(values), shape)
    else:
        failed = rng.random(shape)
    return np.where(success, in_band, failed)


def emulate_mae(values, eps: float, rng: np.random.Generator,
                ledger: Optional[QueryLedger] = None, *, adversarial: bool = False,
                tag: str = "mae") -> np.ndarray:
    """Additive-error estimates of every per-input probability in ``values``.

    Each entry independently lands uniformly within +-eps of the truth with
    probability 8/pi^2 and is uniform on [0, 1] otherwise. The whole
    superposed estimation costs ceil(1/eps) queries.
    """
    if not 0 < eps <= 1:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    _charge(ledger, tag, math.ceil(1 / eps))
    return mae_draws(values, eps, rng, adversarial=adversarial)


def majority_copies(delta: float) -> int:
    """Odd number of copies ceil(6 ln(1/delta)) for a majority vote."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    copies = max(1, math.ceil(6 * math.log(1 / delta)))
    return copies if copies % 2 else copies + 1


def majority_failure(per_trial_success, copies: int):
    """Exact Pr[Binomial(copies, p) <= copies/2] for odd ``copies``."""
    return stats.binom.cdf(copies // 2, copies, per_trial_success)


def majority_boost(per_trial_success: float, copies: int, rng: np.random.Generator) -> bool:
    if copies < 1 or copies % 2 == 0:
        raise ValueError(f"number of copies must be odd and positive, got {copies}")
    if not 0.5 < per_trial_success <= 1:
        raise ValueError("per-trial success must exceed 1/2")
    return bool(rng.binomial(copies, per_trial_success) > copies / 2)


def amplification_cost(p_good: float, p_target: float = 1.0) -> int:
    return math.ceil(math.sqrt(p_target / p_good))


def emulate_amplification(p_good: float, floor: float, rng: np.random.Generator,
                          ledger: Optional[QueryLedger] = None, *,
                          residual: float = DEFAULT_RESIDUAL, p_target: float = 1.0,
                          tag: str = "amplify") -> bool:
    """Amplify a good-state probability ``p_good`` towards ``p_target``.

    At or above ``floor`` the good state is obtained except with probability
    ``residual`` at cost ceil(sqrt(p_target/p_good)). Below the floor the
    schedule built for the floor is run and succeeds with the probability
    the corresponding Grover iterate reaches. p_good = 0 never succeeds.
    """
    if floor <= 0:
        raise ValueError(f"floor must be positive, got {floor}")
    if not 0 <= p_good <= 1:
        raise ValueError(f"p_good must be in [0, 1], got {p_good}")
    if p_good >= floor:
        _charge(ledger, tag, amplification_cost(p_good, p_target))
        return bool(rng.random() < max(p_good, 1 - residual))
    rounds = amplification_cost(floor, p_target)
    _charge(ledger, tag, rounds)
    if p_good == 0:
        return False
    iterations = int(math.pi / (4 * math.asin(math.sqrt(floor))))
    angle = (2 * iterations + 1) * math.asin(math.sqrt(p_good))
    return bool(rng.random() < math.sin(angle) ** 2)
