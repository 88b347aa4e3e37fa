"""Seeded experiment runs: problem generation, learner pipelines and reports.

A run is described by an ``ExperimentConfig``. Every trial draws its
randomness from four named substreams of one master seed (``problem``,
``oracle-noise``, ``estimation-noise``, ``algorithm``) so each source can be
frozen on its own. Records carry exact metrics computed by enumeration.
"""
from __future__ import annotations

import dataclasses
import hashlib
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .boolean import BooleanFunction, Tree, random_tree, tree_to_function
from .boosting import (
    QuantumParityLearner,
    default_rounds,
    exact_parity_learner,
    kk_boost_classical,
    margin_samples,
    quantum_agnostic_boost,
)
from .channels import (
    LabelChannel,
    adversarial_flips,
    correlation,
    make_agnostic,
    make_rcn,
    make_realizable,
)
from .emulation import QueryLedger
from .io import records_from_csv, records_to_csv
from .weak import rcn_weak_parity, realizable_weak_parity, weak_agnostic_parity

SETTINGS = ("realizable", "rcn", "agnostic")
TASKS = ("learn", "boost")
STREAMS = ("problem", "oracle-noise", "estimation-noise", "algorithm")


class ConfigError(ValueError):
    """Raised for a malformed or out-of-range experiment configuration."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _optional(convert):
    def parse(text: str):
        return None if text.strip().lower() in ("", "none", "auto") else convert(text)
    return parse


@dataclass(frozen=True)
class ExperimentConfig:
    setting: str = "realizable"
    task: str = "learn"
    n: int = 8
    t: int = 4
    eps: float = 0.2
    delta: float = 0.1
    kappa: float = 0.1
    eta: Optional[float] = None
    noise: float = 0.1
    profile: str = "adversarial"
    trials: int = 1
    seed: int = 0
    adversarial_estimates: bool = False
    booster: str = "quantum"
    weak: str = "quantum"
    rounds: Optional[int] = None
    samples: Optional[int] = None
    negated_prior: str = "term"

    def __post_init__(self):
        self._check(self.setting in SETTINGS, f"setting must be one of {SETTINGS}")
        self._check(self.task in TASKS, f"task must be one of {TASKS}")
        self._check(1 <= self.n <= 20, "n must be in [1, 20]")
        self._check(1 <= self.t <= 1 << self.n, "t must be in [1, 2^n]")
        self._check(0 < self.eps < 1, "eps must be in (0, 1)")
        self._check(0 < self.delta < 0.5, "delta must be in (0, 1/2)")
        self._check(0 < self.kappa < 0.5, "kappa must be in (0, 1/2)")
        self._check(self.eta is None or 0 < self.eta <= 1, "eta must be in (0, 1]")
        if self.setting == "rcn":
            self._check(0 <= self.noise < 0.5, "rcn noise must be in [0, 1/2)")
        else:
            self._check(0 <= self.noise <= 1, "noise must be in [0, 1]")
        self._check(self.profile in ("adversarial", "random"),
                    "profile must be adversarial or random")
        self._check(self.trials >= 1, "trials must be >= 1")
        self._check(0 <= self.seed < 2**64, "seed must be a 64-bit unsigned integer")
        self._check(self.booster in ("quantum", "classical"), "booster must be quantum or classical")
        self._check(self.weak in ("quantum", "exact"), "weak must be quantum or exact")
        self._check(self.rounds is None or self.rounds >= 1, "rounds must be >= 1")
        self._check(self.samples is None or self.samples >= 1, "samples must be >= 1")
        self._check(self.negated_prior in ("term", "scale"), "negated_prior must be term or scale")

    @staticmethod
    def _check(ok: bool, message: str) -> None:
        if not ok:
            raise ConfigError(message)

    @property
    def effective_eta(self) -> float:
        return self.eta if self.eta is not None else 1 / self.t

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "ExperimentConfig":
        """Build from string values, converting each by its field type."""
        kwargs = {}
        for key, text in values.items():
            key = key.strip().replace("-", "_")
            if key not in _CONVERTERS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                kwargs[key] = _CONVERTERS[key](str(text))
            except ValueError as err:
                raise ConfigError(f"bad value for {key}: {text!r}") from err
        return cls(**kwargs)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {'none' if value is None else _format_value(value)}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:12]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


_CONVERTERS = {
    "setting": str, "task": str, "profile": str, "booster": str, "weak": str,
    "negated_prior": str,
    "n": int, "t": int, "trials": int, "seed": int,
    "eps": float, "delta": float, "kappa": float, "noise": float,
    "eta": _optional(float), "rounds": _optional(int), "samples": _optional(int),
    "adversarial_estimates": _parse_bool,
}


def parse_config_text(text: str) -> dict[str, str]:
    """``key = value`` lines; blank lines and ``#`` comments are ignored."""
    values = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def load_config(text: str, base: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    """Config from file text; keys in the file override ``base``."""
    merged = dict(base or {})
    merged.update(parse_config_text(text))
    return ExperimentConfig.from_mapping(merged)


def substream(seed: int, trial: int, name: str) -> np.random.Generator:
    """Generator for one named randomness source of one trial."""
    if name not in STREAMS:
        raise ValueError(f"unknown stream {name!r}")
    return np.random.default_rng(np.random.SeedSequence([seed, trial, zlib.crc32(name.encode())]))


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Problem:
    tree: Tree
    target: BooleanFunction
    channel: LabelChannel


def make_problem(config: ExperimentConfig, rng: np.random.Generator) -> Problem:
    tree = random_tree(config.n, config.t, rng)
    f = tree_to_function(tree, config.n)
    if config.setting == "realizable":
        channel = make_realizable(f)
    elif config.setting == "rcn":
        channel = make_rcn(f, config.noise)
    else:
        channel = make_agnostic(f, adversarial_flips(f, config.noise, rng, config.profile))
    return Problem(tree, f, channel)


@dataclass(frozen=True)
class RunRecord:
    config_hash: str
    setting: str
    task: str
    n: int
    t: int
    eps: float
    kappa: float
    eta: float
    delta: float
    noise: float
    trial: int
    trial_seed: int
    cor: float
    error: float
    optcor_proxy: float
    bound: float
    violated: bool
    iterations: int
    queries: int
    queries_by_tag: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.error <= 1 + 1e-12:
            raise ValueError("error must lie in [0, 1]")

    def row(self) -> list:
        tags = ";".join(f"{tag}={count}" for tag, count in sorted(self.queries_by_tag.items()))
        return [self.config_hash, self.setting, self.task, self.n, self.t, repr(self.eps),
                repr(self.kappa), repr(self.eta), repr(self.delta), repr(self.noise), self.trial,
                self.trial_seed, repr(self.cor), repr(self.error), repr(self.optcor_proxy),
                repr(self.bound), int(self.violated), self.iterations, self.queries, tags]


# wall time is kept on the record but left out of the CSV so reruns compare byte for byte
RECORD_FIELDS = ("config_hash", "setting", "task", "n", "t", "eps", "kappa", "eta", "delta",
                 "noise", "trial", "trial_seed", "cor", "error", "optcor_proxy", "bound",
                 "violated", "iterations", "queries", "queries_by_tag")


def _learn(config: ExperimentConfig, problem: Problem, streams: dict, ledger: QueryLedger
           ) -> tuple[float, float, int]:
    """Single weak-learner call: (achieved cor, bound, iterations)."""
    proxy = correlation(problem.target, problem.channel)
    est = streams["estimation-noise"]
    if config.setting == "realizable":
        result = realizable_weak_parity(problem.target, config.eps, streams["oracle-noise"],
                                        ledger)
        return result.achieved_cor, proxy / config.t - config.eps, 1
    if config.setting == "rcn":
        result = rcn_weak_parity(problem.target, config.noise, config.t, config.kappa,
                                 config.delta, streams["oracle-noise"], ledger)
    else:
        result = weak_agnostic_parity(problem.channel, config.t, config.kappa, config.delta,
                                      est, ledger, adversarial=config.adversarial_estimates)
    return result.achieved_cor, proxy / config.t - config.kappa, 1


def _boost(config: ExperimentConfig, problem: Problem, streams: dict, ledger: QueryLedger
           ) -> tuple[float, float, int]:
    eta = config.effective_eta
    proxy = correlation(problem.target, problem.channel)
    if config.weak == "exact":
        learner = exact_parity_learner
    else:
        learner = QuantumParityLearner(config.t, config.kappa, config.delta,
                                       config.adversarial_estimates)
    rounds = config.rounds or default_rounds(eta, config.eps)
    if config.booster == "classical":
        result = kk_boost_classical(learner, problem.channel, rounds, eta, config.eps,
                                    streams["estimation-noise"], ledger,
                                    negated_prior=config.negated_prior)
    else:
        m = config.samples or margin_samples(config.delta, eta, config.eps)
        result = quantum_agnostic_boost(learner, problem.channel, m, rounds, eta, config.eps,
                                        config.delta, streams["algorithm"], ledger,
                                        adversarial=config.adversarial_estimates,
                                        negated_prior=config.negated_prior,
                                        estimation_rng=streams["estimation-noise"])
    cor = correlation(result.hypothesis.predict(), problem.channel)
    return cor, proxy - config.kappa / eta - config.eps, len(result.trace)


def run_trial(config: ExperimentConfig, trial: int) -> RunRecord:
    streams = {name: substream(config.seed, trial, name) for name in STREAMS}
    problem = make_problem(config, streams["problem"])
    ledger = QueryLedger()
    start = time.perf_counter()
    pipeline = _learn if config.task == "learn" else _boost
    cor, bound, iterations = pipeline(config, problem, streams, ledger)
    elapsed = time.perf_counter() - start
    return RunRecord(config.digest(), config.setting, config.task, config.n, config.t,
                     config.eps, config.kappa, config.effective_eta, config.delta, config.noise,
                     trial, trial_seed(config.seed, trial), cor, (1 - cor) / 2,
                     correlation(problem.target, problem.channel), bound, cor < bound - 1e-12,
                     iterations, ledger.total, ledger.snapshot(), elapsed)


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    return [run_trial(config, trial) for trial in range(config.trials)]


def records_csv(records: Iterable[RunRecord]) -> str:
    return records_to_csv(RECORD_FIELDS, (r.row() for r in records))


def read_records(text: str) -> list[dict[str, str]]:
    return records_from_csv(text)


def violation_limit(delta: float, trials: int) -> float:
    """delta plus three binomial standard deviations."""
    return delta + 3 * math.sqrt(delta * (1 - delta) / trials)


def contract_violated(records: Sequence[RunRecord], delta: float) -> bool:
    if not records:
        return False
    rate = sum(r.violated for r in records) / len(records)
    return rate > violation_limit(delta, len(records))


REPORT_METRICS = ("cor", "error", "queries", "iterations")
REPORT_FIELDS = ("config_hash", "setting", "task", "n", "t", "eps", "kappa", "trials",
                 "violations") + tuple(f"{metric}_{stat}" for metric in REPORT_METRICS
                                       for stat in ("mean", "median", "p95"))


def _summary_rows(records: Sequence[Mapping[str, str]]) -> list[list]:
    groups: dict[str, list] = {}
    for record in records:
        groups.setdefault(record["config_hash"], []).append(record)
    rows = []
    for digest, group in groups.items():
        first = group[0]
        row = [digest, first["setting"], first["task"], first["n"], first["t"], first["eps"],
               first["kappa"], len(group), sum(int(r["violated"]) for r in group)]
        for metric in REPORT_METRICS:
            values = np.array([float(r[metric]) for r in group])
            row += [f"{values.mean():.6g}", f"{np.median(values):.6g}",
                    f"{np.percentile(values, 95):.6g}"]
        rows.append(row)
    return rows


def _as_mappings(records) -> list[Mapping[str, str]]:
    out = []
    for record in records:
        if isinstance(record, RunRecord):
            out.append(dict(zip(RECORD_FIELDS, map(str, record.row()))))
        else:
            out.append(record)
    return out


def report(records) -> tuple[str, str]:
    """(aligned text table, CSV) with mean/median/p95 per configuration."""
    rows = _summary_rows(_as_mappings(records))
    csv_text = records_to_csv(REPORT_FIELDS, rows)
    table = [list(REPORT_FIELDS)] + [[str(v) for v in row] for row in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(REPORT_FIELDS))]
    text = "\n".join("  ".join(cell.rjust(w) for cell, w in zip(line, widths))
                     for line in table) + "\n"
    return text, csv_text


def log_log_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


def sweep(config: ExperimentConfig, eps_values: Sequence[float], *,
          tie_kappa: bool = True) -> list[RunRecord]:
    """Run ``config`` once per eps value; kappa follows eps unless ``tie_kappa`` is off."""
    records = []
    for eps in eps_values:
        changes = {"eps": eps, "kappa": eps} if tie_kappa and eps < 0.5 else {"eps": eps}
        records += run_experiment(config.replace(**changes))
    return records


def query_slope(records: Sequence[RunRecord]) -> float:
    """Slope of mean total queries against 1/eps on a log-log scale."""
    by_eps: dict[float, list[int]] = {}
    for r in records:
        by_eps.setdefault(r.eps, []).append(r.queries)
    eps = sorted(by_eps)
    return log_log_slope([1 / e for e in eps], [np.mean(by_eps[e]) for e in eps])
