"""Weak parity learners for the agnostic, realizable and RCN settings."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .boolean import BooleanFunction, parity_table, walsh_transform
from .channels import LabelChannel, correlation, make_rcn
from .emulation import MAE_SUCCESS, QueryLedger, mae_draws, majority_copies
from .gl import StronglyBiasedOracle, igl, igl_schedule


@dataclass(frozen=True)
class WeakLearnerResult:
    """Hypothesis sign * chi_S with its exact correlation on the target channel."""

    S: int
    sign: int
    achieved_cor: float
    queries: int
    found: bool = True

    def __post_init__(self):
        if not -1 - 1e-12 <= self.achieved_cor <= 1 + 1e-12:
            raise ValueError("correlation must lie in [-1, 1]")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be -1 or +1")

    def table(self, n: int) -> np.ndarray:
        return self.sign * parity_table(self.S, n).astype(np.int8)


def _ledger(ledger: Optional[QueryLedger]) -> QueryLedger:
    return ledger if ledger is not None else QueryLedger()


def bias_target(n: int, t: int, kappa: float, delta: float) -> float:
    """Wrong-label mass allowed in the cleaned oracle: min(delta/(4 n t^2), kappa^2/8)."""
    return min(delta / (4 * n * t * t), kappa * kappa / 8)


def build_oh(channel: LabelChannel, gamma_target: float, eps: float,
             ledger: Optional[QueryLedger] = None, *, adversarial: bool = False
             ) -> StronglyBiasedOracle:
    """Oracle for the Bayes predictor cleaned by a majority over MAE copies.

    Each copy thresholds an eps-accurate estimate of Pr[y=+1|x] at 1/2; the
    oracle's bias at x is the exact probability that the majority of
    ceil(6 ln(1/gamma_target)) copies disagrees with the Bayes label. This is
    at most gamma_target wherever |Pr[y=+1|x] - 1/2| >= eps.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if not 0 < gamma_target <= eps * eps / 8:
        raise ValueError(f"gamma_target must be in (0, eps^2/8], got {gamma_target}")
    copies = majority_copies(gamma_target)
    p1 = channel.p1
    in_band_plus = np.clip((p1 + eps - 0.5) / (2 * eps), 0.0, 1.0)
    if adversarial:
        failed_plus = np.where(p1 >= 0.5, 0.0, 1.0)
    else:
        failed_plus = np.full_like(p1, 0.5)
    copy_plus = MAE_SUCCESS * in_band_plus + (1 - MAE_SUCCESS) * failed_plus
    majority_plus = stats.binom.sf(copies // 2, copies, copy_plus)
    h = BooleanFunction(channel.n, np.where(p1 >= 0.5, 1, -1))
    bias = np.where(h.values == 1, 1 - majority_plus, majority_plus)
    cost = copies * math.ceil(1 / eps)
    if ledger is not None:
        ledger.charge("oh_mae", cost)
    return StronglyBiasedOracle(h, bias, query_cost=cost)


def sample_oh_labels(channel: LabelChannel, gamma_target: float, eps: float, xs,
                     rng: np.random.Generator) -> np.ndarray:
    """Simulate O_h invocations at inputs ``xs`` copy by copy (Monte Carlo check)."""
    copies = majority_copies(gamma_target)
    xs = np.asarray(xs)
    estimates = mae_draws(channel.p1[xs], eps, rng, copies=copies)
    votes = np.where(estimates > 0.5, 1, -1).sum(axis=0)
    return np.where(votes > 0, 1, -1)


def estimate_sign(oracle: StronglyBiasedOracle, mask: int, accuracy: float, delta: float,
                  rng: np.random.Generator, ledger: Optional[QueryLedger] = None) -> int:
    """Sign of the oracle's coefficient at ``mask`` from a majority of MAE estimates.

    Each copy estimates (1 + coefficient)/2 to within accuracy/2; the sign is
    right with probability >= 1 - delta whenever |coefficient| > accuracy.
    """
    copies = majority_copies(delta)
    coeff = oracle.signal_spectrum.coeffs[mask]
    draws = mae_draws(np.array([(1 + coeff) / 2]), accuracy / 2, rng, copies=copies)
    if ledger is not None:
        ledger.charge("sign", copies * math.ceil(2 / accuracy) * oracle.query_cost)
    return 1 if np.median(draws) >= 0.5 else -1


def _parity_search(oracle: StronglyBiasedOracle, t: int, kappa: float, delta: float,
                   rng: np.random.Generator, ledger: QueryLedger, adversarial: bool
                   ) -> tuple[int, int, bool]:
    outcome = igl(oracle, kappa, delta, 1 / (t * t), rng, ledger, adversarial=adversarial)
    # lower bound on the returned coefficient's magnitude from the threshold it cleared
    _, gap = igl_schedule(kappa)
    lower = math.sqrt(max(outcome.tau - gap, 0.0)) - 2 * oracle.gamma
    sign = estimate_sign(oracle, outcome.S, max(lower, kappa) / 2, delta, rng, ledger)
    return outcome.S, sign, outcome.found


def weak_agnostic_parity(channel: LabelChannel, t: int, kappa: float, delta: float,
                         rng: np.random.Generator, ledger: Optional[QueryLedger] = None, *,
                         adversarial: bool = False) -> WeakLearnerResult:
    """Signed parity with cor >= cor(c, D)/t - kappa for any size-t tree c, w.p. >= 1 - delta."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if not 0 < kappa < 0.5:
        raise ValueError(f"kappa must be in (0, 1/2), got {kappa}")
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must be in (0, 1/2), got {delta}")
    ledger = _ledger(ledger)
    before = ledger.total
    gamma = bias_target(channel.n, t, kappa, delta)
    oracle = build_oh(channel, gamma, kappa, ledger, adversarial=adversarial)
    mask, sign, found = _parity_search(oracle, t, kappa, delta, rng, ledger, adversarial)
    table = sign * parity_table(mask, channel.n)
    return WeakLearnerResult(mask, sign, correlation(table, channel), ledger.total - before, found)


def fourier_samples(f: BooleanFunction, count: int, rng: np.random.Generator,
                    ledger: Optional[QueryLedger] = None) -> np.ndarray:
    """Masks drawn from the squared spectrum of f, one example-oracle query each."""
    weights = walsh_transform(f.values) ** 2
    if ledger is not None:
        ledger.charge("qex", count)
    return rng.choice(len(weights), size=count, p=weights / weights.sum())


def fourier_sample(f: BooleanFunction, rng: np.random.Generator,
                   ledger: Optional[QueryLedger] = None) -> int:
    return int(fourier_samples(f, 1, rng, ledger)[0])


def realizable_weak_parity(f: BooleanFunction, eps: float, rng: np.random.Generator,
                           ledger: Optional[QueryLedger] = None) -> WeakLearnerResult:
    """Mode of ceil(1/eps^2) Fourier samples (ties to the smallest mask).

    The sign comes from the same number of examples measured in the
    computational basis, as the empirical mean of f(x) chi_S(x).
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    ledger = _ledger(ledger)
    before = ledger.total
    count = math.ceil(1 / eps**2)
    masks = fourier_samples(f, count, rng, ledger)
    mask = int(np.argmax(np.bincount(masks, minlength=1 << f.n)))
    xs = rng.integers(0, 1 << f.n, size=count)
    ledger.charge("qex", count)
    chi = parity_table(mask, f.n)
    sign = 1 if np.sum(f.values[xs] * chi[xs]) >= 0 else -1
    table = sign * chi
    return WeakLearnerResult(mask, sign, float(np.mean(table * f.values)), ledger.total - before)


def rcn_votes(p: float, delta: float) -> int:
    """ceil(ln(1/delta) / (2 (1/2 - p)^2)) votes; a single vote when p = 0."""
    if not 0 <= p < 0.5:
        raise ValueError(f"noise rate must be in [0, 1/2), got {p}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if p == 0:
        return 1
    return math.ceil(math.log(1 / delta) / (2 * (0.5 - p) ** 2))


class RcnMajorityOracle:
    """Label oracle that answers by majority over k noisy queries; ties are split at random."""

    def __init__(self, f: BooleanFunction, p: float, delta: float, rng: np.random.Generator,
                 ledger: Optional[QueryLedger] = None):
        self.f = f
        self.p = p
        self.k = rcn_votes(p, delta)
        self._rng = rng
        self._ledger = ledger

    @property
    def residual_error(self) -> float:
        """Exact probability that one dereferenced label is wrong."""
        k, right = self.k, 1 - self.p
        wrong = stats.binom.cdf((k - 1) // 2, k, right)
        if k % 2 == 0:
            wrong += 0.5 * stats.binom.pmf(k // 2, k, right)
        return float(wrong)

    def __call__(self, xs) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs))
        if self._ledger is not None:
            self._ledger.charge("rcn_votes", self.k * xs.size)
        correct_votes = self._rng.binomial(self.k, 1 - self.p, size=xs.shape)
        margin = 2 * correct_votes - self.k
        tie_break = np.where(self._rng.random(xs.shape) < 0.5, 1, -1)
        agree = np.where(margin != 0, np.sign(margin), tie_break)
        return (agree * self.f.values[xs]).astype(np.int8)

    def as_biased_oracle(self) -> StronglyBiasedOracle:
        return StronglyBiasedOracle(self.f, np.full(1 << self.f.n, self.residual_error),
                                    query_cost=self.k)


def rcn_majority_oracle(f: BooleanFunction, p: float, delta: float, rng: np.random.Generator,
                        ledger: Optional[QueryLedger] = None) -> RcnMajorityOracle:
    return RcnMajorityOracle(f, p, delta, rng, ledger)


def rcn_weak_parity(f: BooleanFunction, p: float, t: int, kappa: float, delta: float,
                    rng: np.random.Generator, ledger: Optional[QueryLedger] = None
                    ) -> WeakLearnerResult:
    """Parity search over the majority-cleaned RCN oracle; correlation on the RCN channel."""
    ledger = _ledger(ledger)
    before = ledger.total
    wrapper = rcn_majority_oracle(f, p, bias_target(f.n, t, kappa, delta), rng, ledger)
    oracle = wrapper.as_biased_oracle()
    mask, sign, found = _parity_search(oracle, t, kappa, delta, rng, ledger, False)
    table = sign * parity_table(mask, f.n)
    channel = make_rcn(f, p)
    return WeakLearnerResult(mask, sign, correlation(table, channel), ledger.total - before, found)
