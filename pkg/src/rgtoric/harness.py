"""Monte Carlo driver: trials, sweeps, Wilson intervals and threshold crossings."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .lattice import TorusLattice, class_bits, syndrome_bits
from .noise import depolarizing_prior, sample_codes, trial_rng
from .rg import DecoderConfig, decode_batch

CSV_COLUMNS = ["ell", "p", "trials", "failures", "rate", "ci_low", "ci_high", "seconds"]


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    ells: tuple
    ps: tuple
    trials: int
    seed: int = 0
    config: DecoderConfig = DecoderConfig()
    output: str | None = None
    workers: int = 1
    batch: int = 64
    record_time: bool = True

    def __post_init__(self):
        for ell in self.ells:
            if ell < 4 or ell & (ell - 1):
                raise SpecError(f"ell={ell} must be a power of two >= 4")
        for p in self.ps:
            depolarizing_prior(p)
        if self.trials < 1:
            raise SpecError("trials must be at least 1")
        if self.workers < 1 or self.batch < 1:
            raise SpecError("workers and batch must be positive")


@dataclass(frozen=True)
class PointSummary:
    ell: int
    p: float
    trials: int
    failures: int
    rate: float
    ci_low: float
    ci_high: float
    seconds: float


def point_seed(seed: int, ell: int, p: float) -> int:
    """64-bit stream key for one (ell, p) point of a sweep."""
    ss = np.random.SeedSequence([int(seed), int(ell), int(round(p * 1e6))])
    return int(ss.generate_state(1, np.uint64)[0])


def wilson_interval(failures: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    phat = failures / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return lo, hi


def sample_batch(lat: TorusLattice, p: float, key: int, first: int, count: int) -> np.ndarray:
    return np.array([sample_codes(lat.n, p, trial_rng(key, i)) for i in range(first, first + count)], dtype=np.uint8)


def decode_codes(lat: TorusLattice, codes: np.ndarray, p: float, config: DecoderConfig) -> np.ndarray:
    """Success flags for a batch of error letter-code arrays."""
    plaq, site = syndrome_bits(lat, codes & 1, codes >> 1)
    res = decode_batch(lat, plaq, site, p, config)
    residual = codes ^ res.corrections
    rp, rs = syndrome_bits(lat, residual & 1, residual >> 1)
    if rp.any() or rs.any():
        raise RuntimeError("correction does not reproduce the syndrome")
    return class_bits(lat, residual & 1, residual >> 1) == 0


def run_trial(ell: int, p: float, seed: int, trial: int = 0, config: DecoderConfig = DecoderConfig()) -> bool:
    """Sample, decode and check one error; trial ``trial`` of stream ``seed``."""
    lat = TorusLattice(ell)
    codes = sample_batch(lat, p, seed, trial, 1)
    return bool(decode_codes(lat, codes, p, config)[0])


def _run_chunk(args) -> tuple[int, int]:
    ell, p, key, first, count, config = args
    lat = TorusLattice(ell)
    ok = decode_codes(lat, sample_batch(lat, p, key, first, count), p, config)
    return first, int((~ok).sum())


def _chunks(spec: ExperimentSpec, ell: int, p: float):
    key = point_seed(spec.seed, ell, p)
    for first in range(0, spec.trials, spec.batch):
        yield ell, p, key, first, min(spec.batch, spec.trials - first), spec.config


def run_point(spec: ExperimentSpec, ell: int, p: float, pool=None) -> PointSummary:
    t0 = time.perf_counter()
    jobs = list(_chunks(spec, ell, p))
    results = pool.map(_run_chunk, jobs) if pool else map(_run_chunk, jobs)
    failures = sum(f for _, f in sorted(results))
    lo, hi = wilson_interval(failures, spec.trials)
    seconds = time.perf_counter() - t0 if spec.record_time else 0.0
    return PointSummary(ell, p, spec.trials, failures, failures / spec.trials, lo, hi, round(seconds, 3))


def run_experiment(spec: ExperimentSpec) -> list[PointSummary]:
    """Run every (ell, p) point; write ``<output>.csv`` and ``<output>.json`` when an output is set."""
    pool = ProcessPoolExecutor(spec.workers) if spec.workers > 1 else None
    try:
        rows = [run_point(spec, ell, p, pool) for ell in spec.ells for p in spec.ps]
    finally:
        if pool:
            pool.shutdown()
    if spec.output:
        write_outputs(spec, rows)
    return rows


def summaries_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.ell, repr(r.p), r.trials, r.failures, repr(r.rate), repr(r.ci_low), repr(r.ci_high), r.seconds])
    return buf.getvalue()


def write_outputs(spec: ExperimentSpec, rows) -> tuple[str, str]:
    base = os.fspath(spec.output)
    csv_path, json_path = base + ".csv", base + ".json"
    with open(csv_path, "w") as fh:
        fh.write(summaries_csv(rows))
    doc = {
        "spec": {
            "ells": list(spec.ells),
            "ps": list(spec.ps),
            "trials": spec.trials,
            "seed": spec.seed,
            "config": asdict(spec.config),
        },
        "points": [asdict(r) for r in rows],
        "threshold": asdict(estimate_threshold(rows)),
    }
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=2)
    return csv_path, json_path


@dataclass(frozen=True)
class ThresholdEstimate:
    found: bool
    mean: float | None = None
    spread: float | None = None
    crossings: list = field(default_factory=list)  # (ell_a, ell_b, p)


def _crossing(ps, ra, rb):
    d = np.asarray(rb) - np.asarray(ra)
    for i in range(len(ps) - 1):
        if d[i] == 0:
            return ps[i]
        if d[i] * d[i + 1] < 0:
            return ps[i] + (ps[i + 1] - ps[i]) * d[i] / (d[i] - d[i + 1])
    if d[-1] == 0 and len(ps) > 1:
        return ps[-1]
    return None


def estimate_threshold(rows) -> ThresholdEstimate:
    """Linear-interpolated crossings of rate-vs-p curves between consecutive sizes."""
    by_ell: dict = {}
    for r in rows:
        by_ell.setdefault(r.ell, {})[r.p] = r.rate
    ells = sorted(by_ell)
    crossings = []
    for a, b in zip(ells, ells[1:]):
        ps = sorted(set(by_ell[a]) & set(by_ell[b]))
        if len(ps) < 2:
            continue
        x = _crossing(ps, [by_ell[a][p] for p in ps], [by_ell[b][p] for p in ps])
        if x is not None:
            crossings.append((a, b, float(x)))
    if not crossings:
        return ThresholdEstimate(False)
    xs = np.array([c[2] for c in crossings])
    return ThresholdEstimate(True, float(xs.mean()), float(xs.max() - xs.min()), crossings)
