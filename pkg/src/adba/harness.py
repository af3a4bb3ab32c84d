"""Experiment orchestration: datasets, per-image attacks, aggregation, reports.

Dataset container (binary): a header line ``ADBDATA 1 <count> <N> <K>\\n``
followed, per record, by ``IMG <label>\\n`` and 4N bytes of little-endian
float32 pixel values in [0, 1]. The float32 payload is the canonical image
encoding; images round-trip bit for bit.

Outputs of a run: ``results.jsonl`` (one record per image, input order),
``summary.json`` (aggregates), and ``curve.txt`` (success fraction per query
threshold). Two runs with identical config and seed produce byte-identical
files.
"""

import dataclasses
import json
import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baseline, search
from .distribution import DEFAULT_RHO, RhoParams
from .exceptions import DatasetFormatError, DimensionMismatchError, EmptyDatasetError
from .oracle import (
    ToyLinearOracle,
    ToyMeanThresholdOracle,
    decode_image_payload,
    encode_image_payload,
    make_remote_oracle,
)

DATASET_MAGIC = "ADBDATA"
DATASET_VERSION = 1

METHODS = ("adba", "adba-md", "adba-ccm", "exact-baseline")

CURVE_STEP = 100


@dataclass
class ExperimentConfig:
    method: str
    images_path: str
    oracle_spec: str = "builtin:mean-threshold"
    epsilon: float = 0.05
    budget: int = 10000
    tau: float = 0.002
    rho: RhoParams | None = DEFAULT_RHO
    seed: int = 0
    parallelism: int = 1
    out_dir: str | None = None
    aggregate_over: str = "successes"
    count_verification_query: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.aggregate_over not in ("successes", "all"):
            raise ValueError("aggregate_over must be 'successes' or 'all'")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        # rho=None means the flat rule: adba-md then degenerates to midpoint
        # probes, which is the documented uniform-density behavior.


@dataclass
class AggregateReport:
    n_images: int
    success_rate: float
    mean_queries: float | None
    median_queries: float | None
    mean_iterations: float | None
    mean_queries_per_iteration: float | None
    per_image: list = field(default_factory=list)
    curve: list = field(default_factory=list)
    status: str = "ok"


def write_images(path, records, k):
    """Write (image, label) pairs into the dataset container."""
    records = list(records)
    if not records:
        raise ValueError("refusing to write a dataset with no records")
    n = np.asarray(records[0][0]).size
    with open(path, "wb") as fh:
        fh.write(f"{DATASET_MAGIC} {DATASET_VERSION} {len(records)} {n} {k}\n".encode("ascii"))
        for image, label in records:
            image = np.asarray(image, dtype=float)
            if image.size != n:
                raise ValueError("all images in a dataset must share one dimension")
            if not 0 <= int(label) < k:
                raise ValueError(f"label {label} outside [0, {k})")
            fh.write(f"IMG {int(label)}\n".encode("ascii"))
            fh.write(encode_image_payload(image))


def dataset_info(path):
    """(count, n, k) from the container header."""
    with open(path, "rb") as fh:
        header = fh.readline()
    return _parse_header(header)


def _parse_header(header):
    parts = header.decode("ascii", errors="replace").split()
    if len(parts) != 5 or parts[0] != DATASET_MAGIC:
        raise DatasetFormatError(f"bad dataset header: {header!r}")
    try:
        version, count, n, k = (int(p) for p in parts[1:])
    except ValueError as exc:
        raise DatasetFormatError(f"bad dataset header: {header!r}") from exc
    if version != DATASET_VERSION:
        raise DatasetFormatError(f"unsupported dataset version {version}")
    if count < 0 or n < 1 or k < 2:
        raise DatasetFormatError("header fields out of range")
    return count, n, k


def load_images(path, n=None):
    """Parse the dataset container into a list of (image, label) pairs.

    An empty file yields an empty list; any structural violation, a pixel
    outside [0, 1], or a label outside [0, K) raises DatasetFormatError.
    Passing n asserts the container dimension.
    """
    if os.path.getsize(path) == 0:
        return []
    with open(path, "rb") as fh:
        count, file_n, k = _parse_header(fh.readline())
        if n is not None and file_n != n:
            raise DimensionMismatchError(f"dataset has N={file_n}, expected N={n}")
        records = []
        for i in range(count):
            line = fh.readline().decode("ascii", errors="replace").split()
            if len(line) != 2 or line[0] != "IMG":
                raise DatasetFormatError(f"record {i}: bad record line")
            label = int(line[1])
            if not 0 <= label < k:
                raise DatasetFormatError(f"record {i}: label {label} outside [0, {k})")
            payload = fh.read(4 * file_n)
            if len(payload) != 4 * file_n:
                raise DatasetFormatError(f"record {i}: truncated pixel payload")
            image = decode_image_payload(payload, file_n)
            if np.any(image < 0.0) or np.any(image > 1.0) or not np.all(np.isfinite(image)):
                raise DatasetFormatError(f"record {i}: pixel outside [0, 1]")
            records.append((image, label))
        if fh.read(1):
            raise DatasetFormatError("trailing bytes after the declared records")
    return records


def _parse_oracle_spec(spec, n, k, budget, seed):
    """Build a fresh oracle factory from an oracle spec string.

    builtin:mean-threshold[:t]  toy threshold model (K must be 2)
    builtin:linear              toy linear model, weights drawn from `seed`
    remote:host:port            wire-protocol client, one connection per handle
    """
    parts = spec.split(":")
    if parts[0] == "builtin" and len(parts) >= 2 and parts[1] == "mean-threshold":
        if k != 2:
            raise ValueError("mean-threshold oracle is binary; dataset must have K=2")
        threshold = float(parts[2]) if len(parts) > 2 else 0.5
        return lambda: ToyMeanThresholdOracle(n=n, threshold=threshold, budget=budget)
    if parts[0] == "builtin" and len(parts) >= 2 and parts[1] == "linear":
        # Seeded random linear model centered on mid-gray, so images near the
        # center of the box sit close to the class frontier and are attackable.
        rng = np.random.default_rng(seed)
        weights = rng.normal(0.0, 1.0, size=(k, n))
        bias = -weights @ np.full(n, 0.5)
        return lambda: ToyLinearOracle(weights=weights, bias=bias, budget=budget)
    if parts[0] == "remote" and len(parts) == 3:
        host, port = parts[1], int(parts[2])
        return lambda: make_remote_oracle((host, port), class_count=k, budget=budget,
                                          expected_n=n)
    raise ValueError(f"unrecognized oracle spec {spec!r}")


def _attack_config(config):
    if config.method == "adba":
        return search.AttackConfig(epsilon=config.epsilon, budget=config.budget,
                                   tau=config.tau, probe_rule="midpoint")
    if config.method == "adba-md":
        return search.AttackConfig(epsilon=config.epsilon, budget=config.budget,
                                   tau=config.tau, probe_rule="median", rho=config.rho)
    if config.method == "adba-ccm":
        return search.AttackConfig(epsilon=config.epsilon, budget=config.budget,
                                   tau=config.tau, probe_rule="midpoint", ccm=True)
    return search.AttackConfig(epsilon=config.epsilon, budget=config.budget,
                               tau=config.tau, probe_rule="midpoint")


def _run_one(index, image, label, make_oracle, attack_config, config):
    oracle = make_oracle()
    seed = config.seed + index
    try:
        if config.method == "exact-baseline":
            rep = baseline.attack_exact(
                oracle, image, label, attack_config, seed=seed,
                count_verification_query=config.count_verification_query)
        else:
            rep = search.attack(
                oracle, image, label, attack_config, seed=seed,
                count_verification_query=config.count_verification_query)
    finally:
        close = getattr(oracle, "close", None)
        if close is not None:
            close()
    return {
        "index": index,
        "status": rep.status,
        "success": rep.success,
        "queries": rep.queries,
        "iterations": rep.iterations,
        "r_final": rep.r_final if math.isfinite(rep.r_final) else None,
        "seed": seed,
    }


def curve_thresholds(budget):
    thresholds = list(range(CURVE_STEP, budget + 1, CURVE_STEP))
    if not thresholds or thresholds[-1] != budget:
        thresholds.append(budget)
    return thresholds


def run_experiment(config):
    """Attack every correctly classified image in the dataset and aggregate.

    Images the oracle already mislabels are logged and excluded from the
    success-rate denominator. Each image gets an isolated ledger; per-image
    seeds are config.seed + index, so results are independent of completion
    order under parallelism.
    """
    if os.path.getsize(config.images_path) == 0:
        raise EmptyDatasetError("dataset contains no records")
    count, n, k = dataset_info(config.images_path)
    records = load_images(config.images_path, n=n)
    if not records:
        raise EmptyDatasetError("dataset contains no records")
    make_oracle = _parse_oracle_spec(config.oracle_spec, n, k, config.budget, config.seed)
    attack_config = _attack_config(config)

    tasks = [(i, image, label) for i, (image, label) in enumerate(records)]
    if config.parallelism == 1:
        rows = [_run_one(i, im, lb, make_oracle, attack_config, config)
                for i, im, lb in tasks]
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            futures = [pool.submit(_run_one, i, im, lb, make_oracle, attack_config, config)
                       for i, im, lb in tasks]
            rows = [f.result() for f in futures]  # input order regardless of completion

    attacked = [r for r in rows if r["status"] != search.STATUS_MISCLASSIFIED]
    successes = [r for r in attacked if r["success"]]
    if not attacked:
        return AggregateReport(n_images=0, success_rate=0.0, mean_queries=None,
                               median_queries=None, mean_iterations=None,
                               mean_queries_per_iteration=None, per_image=rows,
                               curve=[], status="no-eligible-images")

    pool_rows = successes if config.aggregate_over == "successes" else attacked
    mean_q = statistics.fmean(r["queries"] for r in pool_rows) if pool_rows else None
    median_q = float(statistics.median(r["queries"] for r in pool_rows)) if pool_rows else None
    mean_it = statistics.fmean(r["iterations"] for r in pool_rows) if pool_rows else None
    total_iters = sum(r["iterations"] for r in pool_rows)
    # Same convention as mean_queries / mean_iterations: a ratio of totals.
    mean_qpi = (sum(r["queries"] for r in pool_rows) / total_iters
                if total_iters else None)

    curve = [(t, sum(1 for r in successes if r["queries"] <= t) / len(attacked))
             for t in curve_thresholds(config.budget)]
    return AggregateReport(
        n_images=len(attacked),
        success_rate=len(successes) / len(attacked),
        mean_queries=mean_q,
        median_queries=median_q,
        mean_iterations=mean_it,
        mean_queries_per_iteration=mean_qpi,
        per_image=rows,
        curve=curve,
        status="ok",
    )


def emit_reports(report, out_dir, config=None):
    """Write results.jsonl, summary.json, and curve.txt under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.jsonl")
    with open(results_path, "w", encoding="ascii", newline="\n") as fh:
        for row in report.per_image:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n")

    summary = {
        "n_images": report.n_images,
        "success_rate": report.success_rate,
        "mean_queries": report.mean_queries,
        "median_queries": report.median_queries,
        "mean_iterations": report.mean_iterations,
        "mean_queries_per_iteration": report.mean_queries_per_iteration,
        "status": report.status,
    }
    if config is not None:
        cfg = dataclasses.asdict(config)
        if isinstance(config.rho, RhoParams):
            cfg["rho"] = dataclasses.asdict(config.rho)
        summary["config"] = cfg
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="ascii",
              newline="\n") as fh:
        fh.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")

    with open(os.path.join(out_dir, "curve.txt"), "w", encoding="ascii",
              newline="\n") as fh:
        for threshold, fraction in report.curve:
            fh.write(f"{threshold} {fraction:.6f}\n")

    return results_path
