"""Label channels: uniform inputs with a per-input probability of label +1.

Every noise model (realizable, random classification noise, agnostic) and
every relabeled boosting distribution is a ``LabelChannel``. Correlations and
errors are computed exactly by enumerating all 2^n inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .boolean import (
    BooleanFunction,
    FourierSpectrum,
    best_parity,
    parity_table,
    walsh_transform,
)

Predictor = Union[BooleanFunction, np.ndarray]


@dataclass(frozen=True)
class LabelChannel:
    n: int
    p1: np.ndarray

    def __post_init__(self):
        p1 = np.asarray(self.p1, dtype=np.float64)
        if p1.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} probabilities, got shape {p1.shape}")
        if np.any(p1 < 0) or np.any(p1 > 1) or not np.all(np.isfinite(p1)):
            raise ValueError("p1 entries must lie in [0, 1]")
        p1 = p1.copy()
        p1.setflags(write=False)
        object.__setattr__(self, "p1", p1)

    @property
    def signal(self) -> np.ndarray:
        """E[y | x] = 2 p1 - 1."""
        return 2.0 * self.p1 - 1.0


def _table(h: Predictor) -> np.ndarray:
    if isinstance(h, BooleanFunction):
        return h.values.astype(np.float64)
    return np.asarray(h, dtype=np.float64)


def make_realizable(f: BooleanFunction) -> LabelChannel:
    return LabelChannel(f.n, (f.values == 1).astype(np.float64))


def make_rcn(f: BooleanFunction, p: float) -> LabelChannel:
    if not 0 <= p < 0.5:
        raise ValueError(f"flip rate must be in [0, 1/2), got {p}")
    return make_agnostic(f, np.full(1 << f.n, p))


def make_agnostic(f: BooleanFunction, eta) -> LabelChannel:
    """Channel that flips f(x) with probability eta[x]."""
    eta = np.broadcast_to(np.asarray(eta, dtype=np.float64), (1 << f.n,))
    if np.any(eta < 0) or np.any(eta > 1):
        raise ValueError("flip probabilities must lie in [0, 1]")
    positive = f.values == 1
    return LabelChannel(f.n, np.where(positive, 1.0 - eta, eta))


def adversarial_flips(f: BooleanFunction, rate: float, rng: np.random.Generator,
                      profile: str = "adversarial") -> np.ndarray:
    """Flip-probability map corrupting a ``rate`` fraction of inputs.

    ``adversarial`` spends the budget on inputs where f agrees with its
    heaviest parity, which removes the most correlation from the weak
    learner's best candidate. ``random`` picks the corrupted inputs uniformly.
    Ties among candidate inputs are broken by the seeded ``rng``.
    """
    if not 0 <= rate <= 1:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    size = 1 << f.n
    budget = int(round(rate * size))
    order = rng.permutation(size)
    if profile == "adversarial":
        mask, _ = best_parity(FourierSpectrum(f.n, walsh_transform(f.values)))
        chi = parity_table(mask, f.n).astype(np.int64)
        coeff_sign = 1 if np.dot(f.values, chi) >= 0 else -1
        agrees = (f.values * chi * coeff_sign) == 1
        # agreeing inputs first, then the rest, each in seeded random order
        order = np.concatenate((order[agrees[order]], order[~agrees[order]]))
    elif profile != "random":
        raise ValueError(f"unknown corruption profile {profile!r}")
    eta = np.zeros(size)
    eta[order[:budget]] = 1.0
    return eta


def sample_aex(channel: LabelChannel, rng: np.random.Generator, size=None, ledger=None):
    """Draw labeled examples (x, y); charges one query per example to ``ledger``."""
    count = 1 if size is None else int(size)
    xs = rng.integers(0, 1 << channel.n, size=count)
    ys = np.where(rng.random(count) < channel.p1[xs], 1, -1)
    if ledger is not None:
        ledger.charge("aex", count)
    if size is None:
        return int(xs[0]), int(ys[0])
    return xs, ys


def correlation(h: Predictor, channel: LabelChannel) -> float:
    return float(np.mean(_table(h) * channel.signal))


def error(h: Predictor, channel: LabelChannel) -> float:
    return (1.0 - correlation(h, channel)) / 2.0


def parity_correlations(channel: LabelChannel) -> np.ndarray:
    """cor(chi_S, channel) for every mask S."""
    return walsh_transform(channel.signal)


def optcor_parity(channel: LabelChannel) -> tuple[int, float]:
    """Best parity by signed correlation; ties go to the smallest mask."""
    cors = parity_correlations(channel)
    mask = int(np.argmax(cors))
    return mask, float(cors[mask])


def bayes_predictor(channel: LabelChannel) -> BooleanFunction:
    return BooleanFunction(channel.n, np.where(channel.p1 >= 0.5, 1, -1))


def relabel(channel: LabelChannel, w_plus, w_minus) -> LabelChannel:
    """Keep each label with probability (1 + w)/2 and flip it otherwise.

    ``w_plus[x]`` and ``w_minus[x]`` are the weights of (x, +1) and (x, -1).
    """
    size = 1 << channel.n
    w_plus = np.broadcast_to(np.asarray(w_plus, dtype=np.float64), (size,))
    w_minus = np.broadcast_to(np.asarray(w_minus, dtype=np.float64), (size,))
    for w in (w_plus, w_minus):
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("weights must lie in [0, 1]")
    p1 = channel.p1
    return LabelChannel(channel.n, p1 * (1 + w_plus) / 2 + (1 - p1) * (1 - w_minus) / 2)


def weighted_correlation(h: Predictor, channel: LabelChannel, w_plus, w_minus) -> float:
    """E_D[h(x) y w(x, y)] by enumeration."""
    table = _table(h)
    p1 = channel.p1
    return float(np.mean(table * (w_plus * p1 - w_minus * (1 - p1))))


def is_conservative(h: BooleanFunction, w_plus, w_minus) -> bool:
    """w(x, -h(x)) = 1 for every x."""
    against = np.where(h.values == 1, w_minus, w_plus)
    return bool(np.all(against == 1.0))


def best_signed_parity(channel: LabelChannel) -> tuple[int, int, float]:
    """Best hypothesis of the form sign * chi_S: (S, sign, |cor|).

    Ties go to the smallest mask; a zero correlation gets sign +1.
    """
    cors = parity_correlations(channel)
    mask = int(np.argmax(np.abs(cors)))
    sign = 1 if cors[mask] >= 0 else -1
    return mask, sign, float(abs(cors[mask]))
