"""Potential-based agnostic boosting over parity weak hypotheses.

Both boosting loops keep a real-valued score H, reweight each labeled input
by w = min(1, exp(-H(x) y)), ask the weak learner for a hypothesis on the
relabeled channel and then step H along whichever of the weak hypothesis and
-sign(H) has the larger margin.

The prior step defaults to adding beta * (-sign H) as a term, which keeps the
potential non-increasing. ``negated_prior="scale"`` instead multiplies H by
(1 - beta); that leaves predictions unchanged, can raise the potential, and
makes no progress from H = 0.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .boolean import parity_table
from .channels import (
    LabelChannel,
    best_signed_parity,
    correlation,
    relabel,
    weighted_correlation,
)
from .emulation import QueryLedger, emulate_relative_estimate
from .weak import WeakLearnerResult, weak_agnostic_parity

NEGATED_PRIOR = "neg"


def sign(scores: np.ndarray) -> np.ndarray:
    """Elementwise sign with sign(0) = +1."""
    return np.where(np.asarray(scores) >= 0, 1, -1).astype(np.int8)


def potential(z):
    """phi(z) = 1 - z for z <= 0 and exp(-z) for z > 0."""
    z = np.asarray(z, dtype=np.float64)
    out = np.where(z <= 0, 1.0 - z, np.exp(-np.maximum(z, 0.0)))
    return float(out) if out.ndim == 0 else out


def potential_slope(z):
    """Right derivative of phi."""
    z = np.asarray(z, dtype=np.float64)
    out = np.where(z < 0, -1.0, -np.exp(-np.maximum(z, 0.0)))
    return float(out) if out.ndim == 0 else out


def conservative_weights(scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(w(x, +1), w(x, -1)) = (min(1, e^{-H(x)}), min(1, e^{H(x)}))."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.exp(-np.maximum(scores, 0.0)), np.exp(np.minimum(scores, 0.0))


def expected_potential(channel: LabelChannel, scores: np.ndarray) -> float:
    """E_D[phi(y H(x))]."""
    p1 = channel.p1
    return float(np.mean(p1 * potential(scores) + (1 - p1) * potential(-scores)))


class CombinedHypothesis:
    """Score H(x) = global_scale * sum_i c_i b_i(x).

    Each base b_i is a parity mask or ``NEGATED_PRIOR``, which stands for
    -sign of the score accumulated by the terms before it.
    """

    def __init__(self, n: int, terms=(), global_scale: float = 1.0):
        self.n = n
        self.terms: list[tuple[float, object]] = [(float(c), b) for c, b in terms]
        self.global_scale = float(global_scale)
        self._sum = self._accumulate()

    def _accumulate(self) -> np.ndarray:
        total = np.zeros(1 << self.n)
        for coeff, base in self.terms:
            total += coeff * self._base_table(base, total)
        return total

    def _base_table(self, base, running: np.ndarray) -> np.ndarray:
        if base == NEGATED_PRIOR:
            return -sign(running).astype(np.float64)
        return parity_table(int(base), self.n).astype(np.float64)

    def scores(self) -> np.ndarray:
        return self.global_scale * self._sum

    def predict(self) -> np.ndarray:
        return sign(self.scores())

    def score(self, x: int) -> float:
        return float(self.scores()[x])

    def add(self, coeff: float, base) -> None:
        """H <- H + coeff * base."""
        if self.global_scale == 0:
            raise ValueError("cannot add to a hypothesis scaled to zero")
        stored = coeff / self.global_scale
        self._sum = self._sum + stored * self._base_table(base, self._sum)
        self.terms.append((stored, base))

    def rescale(self, factor: float) -> None:
        if factor == 0:
            self.terms, self._sum, self.global_scale = [], np.zeros(1 << self.n), 1.0
            return
        self.global_scale *= factor

    def copy(self) -> "CombinedHypothesis":
        clone = CombinedHypothesis.__new__(CombinedHypothesis)
        clone.n = self.n
        clone.terms = list(self.terms)
        clone.global_scale = self.global_scale
        clone._sum = self._sum.copy()
        return clone

    def to_text(self) -> str:
        lines = [f"global_scale,{self.global_scale!r}", "coefficient,mask"]
        lines += [f"{c!r},{b}" for c, b in self.terms]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, n: int, text: str) -> "CombinedHypothesis":
        rows = [line.split(",") for line in text.strip().splitlines()]
        if rows[0][0] != "global_scale" or rows[1] != ["coefficient", "mask"]:
            raise ValueError("malformed hypothesis file")
        terms = [(float(c), b if b == NEGATED_PRIOR else int(b)) for c, b in rows[2:]]
        return cls(n, terms, float(rows[0][1]))


def conservative_weight(H: CombinedHypothesis, x: int, y: int) -> float:
    return float(min(1.0, math.exp(-H.score(x) * y)))


def exact_margins(channel: LabelChannel, H: CombinedHypothesis, h) -> tuple[float, float]:
    """alpha = E_D[w y h] and beta = E_D[w y (-sign H)] with w built from H."""
    scores = H.scores()
    w_plus, w_minus = conservative_weights(scores)
    alpha = weighted_correlation(np.asarray(h, dtype=np.float64), channel, w_plus, w_minus)
    beta = weighted_correlation(-sign(scores).astype(np.float64), channel, w_plus, w_minus)
    return alpha, beta


def potential_drop_check(channel: LabelChannel, scores: np.ndarray, h, gamma: float
                         ) -> tuple[float, float]:
    """(Phi(H) - Phi(H + gamma h), gamma cor(h, D'_w) - gamma^2 / 2)."""
    scores = np.asarray(scores, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    lhs = expected_potential(channel, scores) - expected_potential(channel, scores + gamma * h)
    w_plus, w_minus = conservative_weights(scores)
    rhs = gamma * weighted_correlation(h, channel, w_plus, w_minus) - gamma**2 / 2
    return lhs, rhs


@dataclass(frozen=True)
class IterationRecord:
    t: int
    alpha: float
    beta: float
    branch: str
    potential: float
    cor: float
    queries: int
    exact_alpha: float = math.nan
    exact_beta: float = math.nan
    note: str = ""


TRACE_FIELDS = ("t", "alpha", "beta", "exact_alpha", "exact_beta", "branch", "potential", "cor",
                "queries", "note")


@dataclass
class BoostResult:
    hypothesis: CombinedHypothesis
    trace: list[IterationRecord] = field(default_factory=list)
    best_iteration: int = 0

    def trace_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(TRACE_FIELDS)
        for r in self.trace:
            writer.writerow([r.t, repr(r.alpha), repr(r.beta), repr(r.exact_alpha),
                             repr(r.exact_beta), r.branch, repr(r.potential), repr(r.cor),
                             r.queries, r.note])
        return buffer.getvalue()


WeakLearner = Callable[[LabelChannel, np.random.Generator, Optional[QueryLedger]],
                       WeakLearnerResult]


class WeakLearnerFailure(RuntimeError):
    """Raised by a weak learner that could not produce a hypothesis."""


def exact_parity_learner(channel: LabelChannel, rng: np.random.Generator,
                         ledger: Optional[QueryLedger] = None) -> WeakLearnerResult:
    """Best signed parity by exhaustive enumeration (no queries charged)."""
    mask, sgn, value = best_signed_parity(channel)
    return WeakLearnerResult(mask, sgn, value, 0)


@dataclass(frozen=True)
class QuantumParityLearner:
    """Adapter running the oracle-based weak parity learner inside boosting."""

    t: int
    kappa: float
    delta: float
    adversarial: bool = False

    def __call__(self, channel: LabelChannel, rng: np.random.Generator,
                 ledger: Optional[QueryLedger] = None) -> WeakLearnerResult:
        return weak_agnostic_parity(channel, self.t, self.kappa, self.delta, rng, ledger,
                                    adversarial=self.adversarial)


def default_rounds(eta: float, eps: float) -> int:
    return math.ceil(9 / (eta * eta * eps * eps))


def _update(H: CombinedHypothesis, alpha: float, beta: float, h: WeakLearnerResult,
            negated_prior: str) -> str:
    if alpha > beta:
        H.add(alpha * h.sign, h.S)
        return "weak"
    beta = min(max(beta, 0.0), 1.0)
    if negated_prior == "scale":
        H.rescale(1.0 - beta)
    elif negated_prior == "term":
        H.add(beta, NEGATED_PRIOR)
    else:
        raise ValueError(f"unknown negated-prior mode {negated_prior!r}")
    return "prior"


def _ledger_total(ledger: Optional[QueryLedger]) -> int:
    return ledger.total if ledger is not None else 0


def kk_boost_classical(weak_learner: WeakLearner, channel: LabelChannel, T: int, eta: float,
                       eps: float, rng: np.random.Generator,
                       ledger: Optional[QueryLedger] = None, *,
                       negated_prior: str = "term", early_stop: bool = True) -> BoostResult:
    """Boosting with exact margins on the channel; returns the lowest-error iterate."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    H = CombinedHypothesis(channel.n)
    best = H.copy()
    best_error = (1 - correlation(H.predict(), channel)) / 2
    result = BoostResult(best)
    for t in range(1, T + 1):
        w_plus, w_minus = conservative_weights(H.scores())
        relabeled = relabel(channel, w_plus, w_minus)
        try:
            h = weak_learner(relabeled, rng, ledger)
        except WeakLearnerFailure as failure:
            result.trace.append(IterationRecord(t, math.nan, math.nan, "skip",
                                                expected_potential(channel, H.scores()),
                                                correlation(H.predict(), channel),
                                                _ledger_total(ledger), note=f"skip: {failure}"))
            continue
        alpha, beta = exact_margins(channel, H, h.table(channel.n))
        branch = _update(H, alpha, beta, h, negated_prior)
        cor = correlation(H.predict(), channel)
        result.trace.append(IterationRecord(t, alpha, beta, branch,
                                            expected_potential(channel, H.scores()), cor,
                                            _ledger_total(ledger), alpha, beta))
        current_error = (1 - cor) / 2
        if current_error < best_error:
            best, best_error, result.best_iteration = H.copy(), current_error, t
        if early_stop and current_error == 0:
            break
    result.hypothesis = best
    return result


def margin_samples(delta: float, eta: float, eps: float) -> int:
    """m = ceil(200 ln(1/delta) / (eta^2 eps^2))."""
    return math.ceil(200 * math.log(1 / delta) / (eta * eta * eps * eps))


def _cell_probabilities(channel: LabelChannel) -> np.ndarray:
    size = 1 << channel.n
    return np.concatenate((channel.p1, 1 - channel.p1)) / size


def _sample_margin(counts: np.ndarray, m: int, w_plus, w_minus, h) -> float:
    size = len(w_plus)
    return float(np.sum(counts[:size] * w_plus * h - counts[size:] * w_minus * h) / m)


def _training_error(counts: np.ndarray, m: int, prediction: np.ndarray) -> float:
    size = len(prediction)
    wrong = counts[:size][prediction == -1].sum() + counts[size:][prediction == 1].sum()
    return float(wrong / m)


def estimate_margin(value: float, eps_est: float, k: int, floor: float,
                    rng: np.random.Generator, ledger: Optional[QueryLedger],
                    adversarial: bool = False) -> float:
    """Relative-error estimate of a signed margin from its magnitude."""
    report = emulate_relative_estimate(min(abs(value), 1.0), eps_est, k, floor, rng, ledger,
                                       adversarial=adversarial, tag="margin_estimate")
    return math.copysign(report.value, value)


def estimate_margins(channel: LabelChannel, scores: np.ndarray, h_table: np.ndarray, m: int,
                     eps_est: float, k: int, rng: np.random.Generator,
                     ledger: Optional[QueryLedger] = None, *, adversarial: bool = False,
                     estimation_rng: Optional[np.random.Generator] = None
                     ) -> tuple[float, float]:
    """(alpha, beta) averaged over a fresh m-sample, then relative-error estimated."""
    est_rng = rng if estimation_rng is None else estimation_rng
    w_plus, w_minus = conservative_weights(scores)
    prior = -sign(scores).astype(np.float64)
    counts = rng.multinomial(m, _cell_probabilities(channel))
    estimates = []
    for base in (np.asarray(h_table, dtype=np.float64), prior):
        sampled = _sample_margin(counts, m, w_plus, w_minus, base)
        estimates.append(estimate_margin(sampled, eps_est, k, 1 / m, est_rng, ledger, adversarial))
    return estimates[0], estimates[1]


def quantum_agnostic_boost(weak_learner: WeakLearner, channel: LabelChannel, m: int, T: int,
                           eta: float, eps: float, delta: float, rng: np.random.Generator,
                           ledger: Optional[QueryLedger] = None, *,
                           adversarial: bool = False, negated_prior: str = "term",
                           early_stop: bool = True,
                           estimation_rng: Optional[np.random.Generator] = None) -> BoostResult:
    """Boosting with sampled, relative-error-estimated margins.

    Margins are averaged over a fresh m-sample draw each iteration and then
    passed through the relative-error estimator at accuracy eta*eps/20. The
    loop stops early once the larger estimated margin falls below
    eta*eps/3 - eta*eps/10, where the prior is already near-optimal.
    Returns the iterate with the lowest error on an m-sample training set.

    ``rng`` drives the sample draws; ``estimation_rng`` (default ``rng``)
    drives the weak learner and the margin estimator.
    """
    if T < 1 or m < 1:
        raise ValueError("T and m must be positive")
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    est_rng = rng if estimation_rng is None else estimation_rng
    probs = _cell_probabilities(channel)
    eps_est = eta * eps / 20
    k = max(1, math.ceil(math.log2(1 / delta)))
    stop_below = eta * eps / 3 - eta * eps / 10
    if ledger is not None:
        ledger.charge("qaex", m)
    train = rng.multinomial(m, probs)
    H = CombinedHypothesis(channel.n)
    best = H.copy()
    best_error = _training_error(train, m, H.predict())
    result = BoostResult(best)
    for t in range(1, T + 1):
        scores = H.scores()
        w_plus, w_minus = conservative_weights(scores)
        relabeled = relabel(channel, w_plus, w_minus)
        try:
            h = weak_learner(relabeled, est_rng, ledger)
        except WeakLearnerFailure as failure:
            result.trace.append(IterationRecord(t, math.nan, math.nan, "skip",
                                                expected_potential(channel, scores),
                                                correlation(H.predict(), channel),
                                                _ledger_total(ledger), note=f"skip: {failure}"))
            continue
        h_table = h.table(channel.n).astype(np.float64)
        alpha, beta = estimate_margins(channel, scores, h_table, m, eps_est, k, rng, ledger,
                                       adversarial=adversarial, estimation_rng=est_rng)
        exact_alpha, exact_beta = exact_margins(channel, H, h_table)
        chosen, exact = (alpha, exact_alpha) if alpha > beta else (beta, exact_beta)
        note = "estimate_miss" if abs(chosen - exact) > eta * eps / 10 else ""
        branch = _update(H, alpha, beta, h, negated_prior)
        cor = correlation(H.predict(), channel)
        result.trace.append(IterationRecord(t, alpha, beta, branch,
                                            expected_potential(channel, H.scores()), cor,
                                            _ledger_total(ledger), exact_alpha, exact_beta, note))
        train_error = _training_error(train, m, H.predict())
        if train_error < best_error:
            best, best_error, result.best_iteration = H.copy(), train_error, t
        if early_stop and (train_error == 0 or max(alpha, beta) < stop_below):
            break
    result.hypothesis = best
    return result
