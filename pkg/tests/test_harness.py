import json

import numpy as np
import pytest

from rgtoric.harness import (
    CSV_COLUMNS,
    ExperimentSpec,
    PointSummary,
    SpecError,
    decode_codes,
    estimate_threshold,
    point_seed,
    run_experiment,
    run_trial,
    summaries_csv,
    wilson_interval,
)
from rgtoric.lattice import TorusLattice, stabilizer_generators
from rgtoric.pauli import product
from rgtoric.rg import DecoderConfig


def test_wilson_interval():
    lo, hi = wilson_interval(10, 100)
    assert lo < 0.1 < hi
    assert wilson_interval(0, 50)[0] == 0.0
    assert wilson_interval(50, 50)[1] == 1.0
    w1 = np.subtract(*wilson_interval(1000, 10_000)[::-1])
    w4 = np.subtract(*wilson_interval(4000, 40_000)[::-1])
    assert w1 / w4 == pytest.approx(2.0, rel=0.01)


def rows(curves):
    ps = [0.12, 0.14, 0.16, 0.18]
    return [PointSummary(ell, p, 100, 0, r, 0, 1, 0) for ell, rates in curves.items() for p, r in zip(ps, rates)]


def test_threshold_synthetic_crossing():
    est = estimate_threshold(rows({8: [0.2, 0.3, 0.4, 0.5], 16: [0.1, 0.25, 0.45, 0.6]}))
    assert est.found
    assert est.mean == pytest.approx(0.15)
    assert est.crossings == [(8, 16, pytest.approx(0.15))]


def test_threshold_no_crossing():
    est = estimate_threshold(rows({8: [0.2, 0.3, 0.4, 0.5], 16: [0.1, 0.2, 0.3, 0.4]}))
    assert not est.found and est.mean is None


def test_spec_validation():
    with pytest.raises(SpecError):
        ExperimentSpec((6,), (0.1,), 10)
    with pytest.raises(SpecError):
        ExperimentSpec((8,), (0.1,), 0)
    with pytest.raises(ValueError):
        ExperimentSpec((8,), (1.2,), 10)


def test_run_trial_examples():
    assert run_trial(8, 0.0, 1)
    assert run_trial(8, 0.1, 5, 3) == run_trial(8, 0.1, 5, 3)


def test_stabilizer_injection_succeeds():
    lat = TorusLattice(8)
    sites, plaqs = stabilizer_generators(lat)
    s = product(sites[::2] + plaqs[1::3], lat.n)
    assert decode_codes(lat, s.codes().astype(np.uint8)[None], 0.1, DecoderConfig())[0]


def test_p0_rate_is_zero():
    (row,) = run_experiment(ExperimentSpec((8,), (0.0,), 100))
    assert row.failures == 0 and row.rate == 0.0


def test_csv_reproducible_and_partition_free(tmp_path):
    base = dict(ells=(4, 8), ps=(0.12,), trials=60, seed=3, record_time=False)
    a = summaries_csv(run_experiment(ExperimentSpec(**base, batch=7)))
    b = summaries_csv(run_experiment(ExperimentSpec(**base, batch=60, output=str(tmp_path / "run"))))
    assert a == b
    assert a.splitlines()[0].split(",") == CSV_COLUMNS
    assert (tmp_path / "run.csv").read_text() == b
    doc = json.loads((tmp_path / "run.json").read_text())
    assert [p["ell"] for p in doc["points"]] == [4, 8]


def test_parallel_matches_serial():
    base = dict(ells=(4,), ps=(0.15,), trials=40, seed=8, record_time=False, batch=10)
    serial = run_experiment(ExperimentSpec(**base))
    parallel = run_experiment(ExperimentSpec(**base, workers=2))
    assert serial == parallel


def test_point_seed_distinct():
    assert point_seed(1, 8, 0.1) != point_seed(1, 16, 0.1) != point_seed(1, 8, 0.11)


@pytest.mark.slow
@pytest.mark.parametrize("p,below", [(0.10, True), (0.18, False)])
def test_size_ordering(p, below):
    r8, r16 = run_experiment(ExperimentSpec((8, 16), (p,), 10_000, seed=99, batch=500))
    assert (r16.rate < r8.rate) if below else (r16.rate > r8.rate)
