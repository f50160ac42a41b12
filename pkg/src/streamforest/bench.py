"""Benchmark orchestration: stream batches into the incremental models while
refitting batch baselines on cumulative data, record accuracy / cumulative
training time / model size, and post-process effect sizes."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from statistics import fmean

import numpy as np

from . import __version__
from .data import make_batches, make_folds
from .forest import BatchForest, StreamForest
from .stream import StreamTree
from .tree import BYTES_PER_NODE, Dataset, DecisionTree, SplitCriteria

__all__ = [
    "ALGORITHMS",
    "ExperimentConfig",
    "BenchRecord",
    "run_stream_experiment",
    "run_cv_experiment",
    "effect_size",
    "effect_series",
    "has_substantial_shift",
    "emit_results",
    "load_results",
]

# Canonical processing order; records always appear in this order per batch.
ALGORITHMS = ("sdt", "sdf", "dt", "df")

RESULTS_FORMAT = "streamforest-results-v1"


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark run: which models, how the stream is cut, and seeds."""

    dataset: str
    algorithms: tuple[str, ...] = ALGORITHMS
    batch_size: int = 100
    n_trees: int = 100
    replace_count: int = 1
    repetitions: int = 5
    seed: int = 0
    threads: int = 1
    out: str | None = None

    def __post_init__(self):
        if not self.algorithms:
            raise ValueError("need at least one algorithm")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")
        if self.n_trees < 1:
            raise ValueError("n_trees must be positive")
        if not 0 <= self.replace_count <= self.n_trees:
            raise ValueError("replace_count must lie in [0, n_trees]")


@dataclass
class BenchRecord:
    """One (algorithm, dataset, repetition, sample size) measurement."""

    algorithm: str
    dataset: str
    rep: int
    n_samples: int
    accuracy: float
    train_seconds: float
    nodes: int


def _single_tree_criteria() -> SplitCriteria:
    return SplitCriteria(max_features="all")


def _forest_criteria() -> SplitCriteria:
    return SplitCriteria(max_features="sqrt")


def _accuracy(model, test: Dataset) -> float:
    return float(np.mean(model.predict(test.features) == test.labels))


def _rep_seeds(root_rng: np.random.Generator) -> dict[str, int]:
    """Per-repetition seeds, drawn in a fixed order regardless of which
    algorithms run so record values do not depend on the algorithm subset.

    The single-tree models share one seed, so at the first batch the
    streamed tree and the batch tree are the same tree and their records
    coincide; the forests share the other.
    """
    draws = root_rng.integers(0, 2**63, size=3)
    return dict(zip(("plan", "tree", "forest"), map(int, draws)))


def _stream_one_rep(config: ExperimentConfig, train: Dataset, test: Dataset,
                    rep: int, seeds: dict[str, int]) -> list[BenchRecord]:
    plan = make_batches(train.n_samples, config.batch_size, seeds["plan"])
    algorithms = tuple(a for a in ALGORITHMS if a in config.algorithms)
    models: dict[str, object] = {}
    cum_time = {a: 0.0 for a in algorithms}
    records = []
    for bi in range(plan.n_batches):
        batch = train.subset(plan.batch(bi))
        seen = plan.boundaries[bi][1]
        for algo in algorithms:
            start = time.perf_counter()
            if algo == "sdt":
                if bi == 0:
                    models[algo] = StreamTree(batch, train.n_classes,
                                              _single_tree_criteria(), seeds["tree"])
                else:
                    models[algo].update(batch)
            elif algo == "sdf":
                if bi == 0:
                    models[algo] = StreamForest(
                        batch, train.n_classes, config.n_trees,
                        config.replace_count, _forest_criteria(),
                        seeds["forest"], threads=config.threads)
                else:
                    models[algo].update(batch)
            elif algo == "dt":
                cumulative = train.subset(plan.ordering[:seen])
                models[algo] = DecisionTree(_single_tree_criteria(),
                                            seeds["tree"]).fit(cumulative)
            else:
                cumulative = train.subset(plan.ordering[:seen])
                models[algo] = BatchForest(config.n_trees, _forest_criteria(),
                                           seeds["forest"],
                                           threads=config.threads).fit(cumulative)
            cum_time[algo] += time.perf_counter() - start
            records.append(BenchRecord(
                algorithm=algo,
                dataset=config.dataset,
                rep=rep,
                n_samples=seen,
                accuracy=_accuracy(models[algo], test),
                train_seconds=cum_time[algo],
                nodes=models[algo].node_count(),
            ))
    return records


def run_stream_experiment(config: ExperimentConfig, train: Dataset,
                          test: Dataset) -> list[BenchRecord]:
    """Stream the training set into the configured models over several
    repetitions, each with a fresh batch ordering, against a fixed test set.

    Streaming models accumulate their update durations; batch models
    accumulate the duration of every refit. Only the fit/update calls are
    timed, never data handling or evaluation. Excluding the time column,
    the records are a pure function of (config, datasets).
    """
    if test.n_features != train.n_features:
        raise ValueError("train and test disagree on feature count")
    if test.n_classes != train.n_classes:
        raise ValueError("train and test disagree on class count")
    root_rng = np.random.default_rng(config.seed)
    records = []
    for rep in range(config.repetitions):
        records.extend(_stream_one_rep(config, train, test, rep, _rep_seeds(root_rng)))
    return records


def run_cv_experiment(config: ExperimentConfig, data: Dataset) -> list[BenchRecord]:
    """k-fold protocol: per fold, stream the training portion and test on the
    held-out fold; config.repetitions is the fold count k."""
    if config.repetitions < 2:
        raise ValueError("cross-validation needs at least two folds")
    root_rng = np.random.default_rng(config.seed)
    folds = make_folds(data.n_samples, config.repetitions,
                       int(root_rng.integers(0, 2**63)))
    records = []
    for fold in range(folds.k):
        train = data.subset(folds.train_indices(fold))
        test = data.subset(folds.test_indices(fold))
        records.extend(_stream_one_rep(config, train, test, fold, _rep_seeds(root_rng)))
    return records


def effect_size(accs_a, accs_b) -> float:
    """Signed difference ratio (mean(a) - mean(b)) / mean(b).

    Positive favors the first series. Evaluated as mean(a)/mean(b) - 1,
    which is the same ratio with one fewer rounding step.
    """
    a = list(map(float, accs_a))
    b = list(map(float, accs_b))
    if not a or len(a) != len(b):
        raise ValueError("need two nonempty accuracy vectors of equal length")
    mean_b = fmean(b)
    if mean_b == 0.0:
        raise ValueError("effect size undefined when the baseline mean is zero")
    return fmean(a) / mean_b - 1.0


def effect_series(records: list[BenchRecord], algo_a: str = "sdf",
                  algo_b: str = "df") -> dict[str, list[tuple[int, float]]]:
    """Per dataset, the effect size of algo_a over algo_b at each sample
    size, with accuracies averaged across repetitions/folds first."""
    acc: dict[tuple[str, str, int], list[float]] = {}
    for r in records:
        if r.algorithm in (algo_a, algo_b):
            acc.setdefault((r.dataset, r.algorithm, r.n_samples), []).append(r.accuracy)
    series: dict[str, list[tuple[int, float]]] = {}
    datasets = sorted({d for d, _, _ in acc})
    for dataset in datasets:
        sizes = sorted({n for d, a, n in acc
                        if d == dataset and (dataset, algo_a, n) in acc
                        and (dataset, algo_b, n) in acc})
        series[dataset] = [
            (n, effect_size(acc[(dataset, algo_a, n)], acc[(dataset, algo_b, n)]))
            for n in sizes
        ]
    return series


def has_substantial_shift(effects, low: float = -0.01, high: float = 0.01) -> bool:
    """Whether an effect-size series swings through both thresholds:
    minimum <= low and maximum >= high."""
    values = [e for _, e in effects] if effects and isinstance(effects[0], tuple) \
        else list(effects)
    if not values:
        return False
    return min(values) <= low and max(values) >= high


def emit_results(records: list[BenchRecord], path,
                 config: ExperimentConfig | None = None) -> None:
    """Write results as JSON lines: one metadata header object, then one
    record per line. Numeric fields round-trip bit-exactly through load."""
    meta = {
        "format": RESULTS_FORMAT,
        "version": __version__,
        "bytes_per_node": BYTES_PER_NODE,
        "seed": config.seed if config is not None else None,
        "config": asdict(config) if config is not None else None,
        "columns": ["algorithm", "dataset", "rep", "n_samples",
                    "accuracy", "train_seconds", "nodes"],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        for r in records:
            fh.write(json.dumps(asdict(r), sort_keys=True) + "\n")


def load_results(path) -> tuple[dict, list[BenchRecord]]:
    """Inverse of emit_results."""
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty results file")
    meta = json.loads(lines[0])
    if meta.get("format") != RESULTS_FORMAT:
        raise ValueError(f"not a {RESULTS_FORMAT} file")
    records = [BenchRecord(**json.loads(line)) for line in lines[1:]]
    return meta, records
