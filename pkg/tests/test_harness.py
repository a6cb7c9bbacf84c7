import json

import numpy as np
import pytest

from gwsnake.experiment_harness import (
    EnsembleResult,
    ExperimentSpec,
    ReplicaFailure,
    load_spec,
    replica_rng,
    run_ensemble,
)
from gwsnake.offspring_laws import binary
from gwsnake.tree_codec import PlaneTree
from gwsnake.tree_sampler import sample_tree

from conftest import WORKED_DEGREES as WORKED


def _spec(**kw):
    base = dict(offspring="geometric:0.5", n_grid=[20, 50], replicas=6, seed=11,
                stats=["path_length", "holder@0.4", "peaks"], displacement="regime:p=2")
    base.update(kw)
    return ExperimentSpec(**base)


def test_injected_worked_tree():
    spec = ExperimentSpec(offspring="geometric:0.5", n_grid=[16], replicas=1, seed=0, stats=["path_length"])
    res = run_ensemble(spec, tree_source=lambda n, rng: PlaneTree(WORKED))
    assert res.values(16, "path_length").tolist() == [40.0]


def test_spec_validation():
    with pytest.raises(ValueError):
        _spec(stats=["nonsense"])
    with pytest.raises(ValueError):
        _spec(n_grid=[50, 20])
    with pytest.raises(ValueError):
        _spec(replicas=0)


def test_replica_streams_independent_of_order():
    a = replica_rng(3, 1, 4).random(5)
    replica_rng(3, 0, 0).random(100)
    assert np.array_equal(a, replica_rng(3, 1, 4).random(5))
    assert not np.array_equal(a, replica_rng(3, 4, 1).random(5))


def test_byte_identical_reruns(tmp_path):
    names = ("results.json", "replicas_n20.csv", "replicas_n50.csv")
    run_ensemble(_spec(out_dir=str(tmp_path)))
    first = [(tmp_path / f).read_bytes() for f in names]
    run_ensemble(_spec(out_dir=str(tmp_path)), resume=False)
    assert [(tmp_path / f).read_bytes() for f in names] == first


def test_resume_from_checkpoints(tmp_path):
    out = tmp_path / "run"
    full = run_ensemble(_spec(out_dir=str(out)))
    ref = (out / "results.json").read_bytes()
    cps = sorted((out / "checkpoints").rglob("*.json"))
    assert len(cps) == 12
    for cp in cps[::2]:
        cp.unlink()
    (out / "results.json").unlink()
    again = run_ensemble(_spec(out_dir=str(out)))
    assert (out / "results.json").read_bytes() == ref
    assert again.records == full.records


def test_parallel_matches_serial():
    a = run_ensemble(_spec(), workers=1)
    b = run_ensemble(_spec(), workers=2)
    assert a.records == b.records
    assert json.dumps(a.to_dict(), sort_keys=True, default=float) == json.dumps(b.to_dict(), sort_keys=True, default=float)


def test_merge():
    full = run_ensemble(_spec())
    parts = []
    for lo in (0, 2, 4):
        r = EnsembleResult(full.spec, {k: v for k, v in full.records.items() if lo <= k[1] < lo + 2})
        parts.append(r)
    left = parts[0].merge(parts[1]).merge(parts[2])
    right = parts[0].merge(parts[1].merge(parts[2]))
    assert left.records == right.records == full.records
    assert left.complete
    with pytest.raises(ValueError):
        parts[0].merge(EnsembleResult(_spec(seed=12)))


def test_aggregates_and_pooled():
    res = run_ensemble(_spec())
    agg = res.aggregates()
    v = res.values(50, "path_length")
    assert agg["50"]["path_length"]["mean"] == pytest.approx(v.mean())
    assert agg["50"]["path_length"]["n_samples"] == 6
    assert res.pooled(50, "peak_x").size == int(res.values(50, "peaks").sum())


def test_replica_failure_keeps_partial_results():
    law = binary()

    def source(n, rng):
        return sample_tree(law, n, rng, max_attempts=200)

    spec = ExperimentSpec(offspring="binary", n_grid=[2, 3], replicas=3, seed=1, stats=["path_length"])
    with pytest.raises(ReplicaFailure) as info:
        run_ensemble(spec, tree_source=source)
    err = info.value
    assert (err.n, err.replica) == (3, 0)
    assert err.cause.diagnostics["reachable"] is False
    assert err.partial.values(2, "path_length").tolist() == [2.0, 2.0, 2.0]


@pytest.mark.parametrize("ext", ["yaml", "json"])
def test_load_spec(tmp_path, ext):
    d = {"offspring": "poisson:1", "n_grid": [10, 100], "replicas": 3, "seed": 5, "stats": ["height"]}
    p = tmp_path / f"spec.{ext}"
    if ext == "json":
        p.write_text(json.dumps(d))
    else:
        p.write_text("offspring: poisson:1\nn_grid: [10, 100]\nreplicas: 3\nseed: 5\nstats: [height]\n")
    spec = load_spec(p)
    assert spec.to_dict() == {**d, "displacement": None, "out_dir": None, "params": {}, "name": "custom"}
    p.write_text(json.dumps({**d, "bogus": 1}))
    with pytest.raises(ValueError):
        load_spec(p)
