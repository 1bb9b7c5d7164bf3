"""Seeded experiment runner emitting one CSV row per trial.

Config files are UTF-8 `key = value` lines under section headers:

    [experiment]
    algorithm = f0_query
    trials = 100
    seed = 7
    workers = 1            ; optional
    output = runs/f0.csv   ; optional

    [stream]
    generator = exact_f0   ; or: file = path/to/stream.txt
    n = 10000
    f0 = 100

    [params]
    epsilon = 0.5
    k = 2

    [cost]                 ; optional CostModel overrides
    failure_injection = true

Per-trial seeds are splitmix64(master ^ splitmix64(trial)), so any single
trial can be replayed without running the ones before it.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from ..core import MomentEstimate, Stream, exact_f_infty, exact_moment, read_stream
from ..qsim.emulators import CostModel
from ..qsim.ledger import LEDGER_COLUMNS, ResourceLedger
from ..query_algos import FkQueryConfig, approx_f0_query, approx_f_infty_query, approx_fk_query
from ..stream_algos import (
    ams_f2_classical,
    approx_f0_stream,
    approx_f2_stream,
    approx_fk_stream,
    f_infty_stream,
)
from .generators import GeneratorError, generate_instance

CSV_COLUMNS = LEDGER_COLUMNS + ("success", "generator")
MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    pass


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def trial_seed(master: int, trial: int) -> int:
    return splitmix64((master & MASK64) ^ splitmix64(trial))


# -- algorithm registry ---------------------------------------------------------------


@dataclass(frozen=True)
class Algorithm:
    run: Callable[[Stream, "ExperimentConfig", np.random.Generator, ResourceLedger], MomentEstimate]
    truth: Callable[[Stream, "ExperimentConfig"], float]
    exact: bool = False  # success means estimate == truth


def _eps(cfg: "ExperimentConfig") -> float:
    if cfg.epsilon is None:
        raise ConfigError("this algorithm needs params.epsilon")
    return cfg.epsilon


def _k(cfg: "ExperimentConfig") -> int:
    if cfg.k is None:
        raise ConfigError("this algorithm needs params.k")
    return cfg.k


def _fk_query(stream, cfg, rng, ledger):
    extra = cfg.params
    config = FkQueryConfig(
        _k(cfg),
        _eps(cfg),
        K=float(extra["K"]) if "K" in extra else None,
        cost=cfg.cost,
        forced_ell=int(extra["forced_ell"]) if "forced_ell" in extra else None,
        max_rounds=int(extra.get("max_rounds", 10**6)),
    )
    return approx_fk_query(stream, config, rng, ledger=ledger)


ALGORITHMS: dict[str, Algorithm] = {
    "f0_query": Algorithm(
        lambda s, c, r, l: approx_f0_query(s, _eps(c), r, ledger=l, cost=c.cost),
        lambda s, c: exact_moment(s, 0),
    ),
    "fk_query": Algorithm(_fk_query, lambda s, c: exact_moment(s, _k(c))),
    "finf_query": Algorithm(
        lambda s, c, r, l: approx_f_infty_query(s, _eps(c), r, ledger=l, cost=c.cost),
        lambda s, c: exact_f_infty(s),
    ),
    "f0_stream": Algorithm(
        lambda s, c, r, l: approx_f0_stream(s, _eps(c), r, ledger=l),
        lambda s, c: exact_moment(s, 0),
    ),
    "f2_stream": Algorithm(
        lambda s, c, r, l: approx_f2_stream(s, _eps(c), r, ledger=l),
        lambda s, c: exact_moment(s, 2),
    ),
    "fk_stream": Algorithm(
        lambda s, c, r, l: approx_fk_stream(s, _k(c), _eps(c), r, ledger=l),
        lambda s, c: exact_moment(s, _k(c)),
    ),
    "finf_stream": Algorithm(
        lambda s, c, r, l: f_infty_stream(s, r, ledger=l, cost=c.cost),
        lambda s, c: exact_f_infty(s),
        exact=True,
    ),
    "ams_f2_classical": Algorithm(
        lambda s, c, r, l: ams_f2_classical(s, _eps(c), r, ledger=l),
        lambda s, c: exact_moment(s, 2),
    ),
}


# -- configuration --------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    algorithm: str
    trials: int
    seed: int
    generator: str | None = None
    generator_params: dict[str, str] = field(default_factory=dict)
    stream_file: Path | None = None
    epsilon: float | None = None
    k: int | None = None
    params: dict[str, str] = field(default_factory=dict)
    cost: CostModel = field(default_factory=CostModel)
    output: Path | None = None
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"unknown algorithm {self.algorithm!r}; choose from {', '.join(sorted(ALGORITHMS))}"
            )
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if (self.generator is None) == (self.stream_file is None):
            raise ConfigError("stream needs exactly one of `generator` or `file`")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @property
    def source(self) -> str:
        return self.generator if self.generator is not None else f"file:{self.stream_file}"


def _cost_from(section: dict[str, str]) -> CostModel:
    known = {f.name: f.type for f in fields(CostModel)}
    kwargs = {}
    for key, raw in section.items():
        if key not in known:
            raise ConfigError(f"[cost] unknown key {key!r}")
        if key == "failure_injection":
            kwargs[key] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif key == "c_ae_passes_per_iteration":
            kwargs[key] = int(raw)
        else:
            kwargs[key] = float(raw)
    try:
        return CostModel(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[cost] {exc}") from None


def parse_config(text: str, *, base_dir: Path | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep K distinct from k
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    if not parser.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    exp = dict(parser["experiment"])
    stream = dict(parser["stream"]) if parser.has_section("stream") else {}
    params = dict(parser["params"]) if parser.has_section("params") else {}
    cost = dict(parser["cost"]) if parser.has_section("cost") else {}
    try:
        algorithm = exp["algorithm"]
        trials = int(exp["trials"])
        seed = int(exp["seed"])
    except KeyError as exc:
        raise ConfigError(f"[experiment] missing {exc.args[0]!r} (seed is mandatory)") from None
    except ValueError as exc:
        raise ConfigError(f"[experiment] {exc}") from None
    base = base_dir or Path.cwd()
    stream_file = stream.pop("file", None)
    generator = stream.pop("generator", None)
    output = exp.get("output")
    try:
        return ExperimentConfig(
            algorithm=algorithm,
            trials=trials,
            seed=seed,
            generator=generator,
            generator_params=stream,
            stream_file=(base / stream_file) if stream_file else None,
            epsilon=float(params.pop("epsilon")) if "epsilon" in params else None,
            k=int(params.pop("k")) if "k" in params else None,
            params=params,
            cost=_cost_from(cost),
            output=(base / output) if output else None,
            workers=int(exp.get("workers", 1)),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, base_dir=path.parent)


def build_stream(cfg: ExperimentConfig) -> Stream:
    if cfg.stream_file is not None:
        return read_stream(cfg.stream_file)
    seed = int(cfg.generator_params.get("seed", cfg.seed))
    params = {k: v for k, v in cfg.generator_params.items() if k != "seed"}
    try:
        return generate_instance(cfg.generator, params, seed)
    except GeneratorError as exc:
        raise ConfigError(f"[stream] {exc}") from None


# -- running --------------------------------------------------------------------------


def fmt_float(x: float) -> str:
    if math.isinf(x):
        return "inf"
    if float(x).is_integer() and abs(x) < 2**53:
        return str(int(x))
    return format(x, ".10g")


def run_trial(cfg: ExperimentConfig, stream: Stream, truth: float, trial: int) -> dict[str, str]:
    algo = ALGORITHMS[cfg.algorithm]
    seed = trial_seed(cfg.seed, trial)
    ledger = ResourceLedger()
    est = algo.run(stream, cfg, np.random.default_rng(seed), ledger)
    if algo.exact:
        success = est.value == truth
    else:
        success = abs(est.value - truth) <= _eps(cfg) * truth
    return {
        "trial": str(trial),
        "seed": str(seed),
        "algorithm": cfg.algorithm,
        "n": str(stream.n),
        "m": str(stream.m),
        "k": "" if cfg.k is None else str(cfg.k),
        "epsilon": "" if cfg.epsilon is None else fmt_float(cfg.epsilon),
        "oracle_queries": str(ledger.oracle_queries),
        "stream_passes": str(ledger.stream_passes),
        "space_qubits": str(ledger.modeled_space_qubits),
        "classical_samples": str(ledger.classical_samples),
        "estimate": fmt_float(est.value),
        "true_value": fmt_float(truth),
        "success": str(int(success)),
        "generator": cfg.source,
    }


def _run_trial_args(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig) -> list[dict[str, str]]:
    stream = build_stream(cfg)
    truth = float(ALGORITHMS[cfg.algorithm].truth(stream, cfg))
    jobs = [(cfg, stream, truth, t) for t in range(cfg.trials)]
    if cfg.workers == 1:
        rows = [run_trial(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            # map preserves submission order, so rows come back sorted by trial
            rows = list(pool.map(_run_trial_args, jobs))
    return rows


def rows_to_csv(rows: list[dict[str, str]]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()


def write_csv(rows: list[dict[str, str]], path: str | Path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(rows_to_csv(rows).encode("utf-8"))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror}") from exc


def success_rate(rows: list[dict[str, str]]) -> float:
    return sum(int(r["success"]) for r in rows) / len(rows)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])
