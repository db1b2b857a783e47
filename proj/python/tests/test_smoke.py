import math
from itertools import permutations

import numpy as np
import pytest

import aura


def small_spec(seed=1):
    spec = aura.default_workload_spec(seed)
    spec.update(n_clips=800, dim=8, k_true=4, n_models=6, clean_fraction=0.5)
    for key in ("component_means", "model_quality", "cluster_difficulty",
                "noisy_component_weights", "clean_component_weights"):
        spec[key] = []
    return spec


@pytest.fixture(scope="module")
def workload():
    coll, components, clean = aura.generate_workload(small_spec())
    return coll, components, clean


def test_generate_workload(workload):
    coll, components, clean = workload
    assert len(coll) == 800
    assert coll.dim == 8
    assert len(coll.model_ids) == 6
    assert coll.points().shape == (800, 8)
    assert coll.dmos_matrix("sig").shape == (800, 6)
    assert set(components) == {0, 1, 2, 3}
    assert 0.4 < sum(clean) / len(clean) < 0.6


def test_unknown_spec_key_raises():
    with pytest.raises(ValueError):
        aura.generate_workload({"n_clip": 10})


def test_select_k_recovers_planted_clusters(workload):
    coll, components, _ = workload
    model = aura.select_k(coll.points(), [2, 3, 4, 5, 6], seed=3)
    assert model.k == 4
    # Same partition up to relabeling.
    pairs = set(zip(model.assignments, components))
    assert len(pairs) == 4
    assert math.isclose(aura.davies_bouldin(coll.points(), model), model.db_index, rel_tol=1e-12)


def test_srcc_matches_closed_form():
    rng = np.random.default_rng(0)
    a, b = rng.permutation(7).astype(float), rng.permutation(7).astype(float)
    d2 = float(np.sum((a - b) ** 2))
    assert math.isclose(aura.srcc(a, b), 1 - 6 * d2 / (7 * 48), abs_tol=1e-12)
    assert aura.average_ranks(np.array([3.0, 1.0, 3.0])) == [2.5, 1.0, 2.5]


def test_chi_square_uniformity():
    chi2, p = aura.chi_square_uniformity([10, 10, 10, 10])
    assert chi2 == 0.0 and p == 1.0
    chi2, _ = aura.chi_square_uniformity([75, 25])
    assert math.isclose(chi2, 25.0)


def test_weighted_sample_inclusion():
    weights = np.array([1.0, 2.0, 3.0])
    exact = {i: 0.0 for i in range(3)}
    for order in permutations(range(3)):
        p, rest = 1.0, weights.sum()
        for i in order[:2]:
            p *= weights[i] / rest
            rest -= weights[i]
        for i in order[:2]:
            exact[i] += p
    hits = np.zeros(3)
    draws = 20000
    for s in range(draws):
        for i in aura.weighted_sample(weights, 2, seed=s):
            hits[i] += 1
    for i in range(3):
        assert abs(hits[i] / draws - exact[i]) < 0.02


def test_quotas():
    assert aura.allocate_quotas([3, 100], 10) == [3, 7]
    with pytest.raises(ValueError):
        aura.allocate_quotas([3, 4], 8)


def test_sampling_and_metrics(workload):
    coll, _, _ = workload
    model = aura.select_k(coll.points(), [4], seed=1)
    sample = aura.draw_sample(coll, model, 40, mode="hardness", seed=2)
    assert len(sample) == 40
    assert len(set(sample.clip_ids)) == 40
    counts = np.bincount(sample.clusters, minlength=4)
    assert list(counts) == [10, 10, 10, 10]
    assert aura.chi_square_uniformity(list(counts))[1] == 1.0

    rnd = aura.draw_sample(coll, None, 40, mode="random", seed=2)
    assert len(rnd) == 40
    with pytest.raises(ValueError):
        aura.draw_sample(coll, None, 40, mode="hardness")

    full = aura.rank_models(coll, "ovrl")
    assert sorted(full["ranks"]) == [1, 2, 3, 4, 5, 6]
    fid = aura.bootstrap_srcc(coll, model, len(coll), mode="random", rounds=3)
    assert fid["srcc_mean"] == 1.0

    md = aura.mean_dmos(sample, coll)
    assert md["count"] == 40 * 6
    ood = aura.ood_fraction(sample, coll, {"component-0"})
    assert ood["labeled"] == 40


def test_round_trip(tmp_path, workload):
    coll, _, _ = workload
    aura.write_collection(coll, tmp_path / "m.jsonl", tmp_path / "e.bin")
    back = aura.load_collection(tmp_path / "m.jsonl", tmp_path / "e.bin", expected_dim=8)
    assert back.clip_ids == coll.clip_ids
    np.testing.assert_array_equal(back.points(), coll.points())
    with pytest.raises(ValueError):
        aura.load_collection(tmp_path / "m.jsonl", tmp_path / "e.bin", expected_dim=9)


def test_run_experiment(workload):
    coll, _, _ = workload
    model = aura.select_k(coll.points(), [4], seed=1)
    report = aura.run_experiment(coll, model, [40], strategies=["random", "aura"], rounds=5)
    assert len(report["rows"]) == 2
