import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from streamlabel.clustering import ClusteringConfig, impurity_kmeans
from streamlabel.core import HeuristicFunction, Instance, Prototype
from streamlabel.ensemble import (
    EnsembleConfig,
    aggregate,
    generate_heuristics,
    hf_label,
    hf_seeds,
    normalize_confidences,
    vote_scores,
)
from streamlabel.errors import ConfigError
from streamlabel.synthetic import GaussianScenario, generate

A, B = 0, 1


def hf(i, c, r, freqs):
    return HeuristicFunction(i, [Prototype(np.asarray(c, float), r, r / 2, max(1, sum(freqs.values())), freqs)])


def test_hf_label_examples():
    h = hf(0, (0, 0), 2.0, {A: 3, B: 1})
    assert hf_label(h, Instance(0, [1, 0])) == (A, pytest.approx(0.75))
    assert hf_label(hf(0, (0, 0), 2.0, {A: 4}), Instance(0, [0, 0])) == (A, 2.0)
    assert hf_label(h, Instance(0, [3, 0])) == (A, pytest.approx(-0.75))


def test_hf_label_abstains_without_labels():
    h = HeuristicFunction(0, [Prototype(np.zeros(2), 1.0, 0.5, 3, {})])
    assert hf_label(h, Instance(0, [0, 0])) == (None, 0.0)


@pytest.mark.parametrize("raw,want", [
    ([0.75, -0.2, 0.25], [1.0, 0.0, 1 / 3]),
    ([0, 0, 0], [0, 0, 0]),
    ([5], [1.0]),
])
def test_normalize_examples(raw, want):
    assert normalize_confidences(raw) == pytest.approx(want)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=12))
def test_normalize_range(raw):
    out = normalize_confidences(raw)
    assert all(0.0 <= v <= 1.0 for v in out)
    if max(raw) > 0:
        assert max(out) == 1.0


def test_vote_score_examples():
    assert vote_scores([A, B, A], [1.0, 0.0, 1 / 3]) == (A, pytest.approx(1.0))
    assert vote_scores([A, B, B], [0.6, 0.5, 0.4]) == (B, pytest.approx(0.6))


def test_aggregate_assigns_and_defers():
    x = Instance(7, [0, 0])
    cfg = EnsembleConfig(tau=0.7)
    # raw confidences 0.75, <=0 and 0.25 normalize to 1, 0, 1/3
    hfs = [hf(0, (1, 0), 1.75, {A: 1}), hf(1, (5, 0), 1.0, {B: 1}), hf(2, (0, 0), 0.25, {A: 1})]
    d = aggregate(x, hfs, cfg)
    assert d.assigned and d.label == A and d.score == pytest.approx(1.0)
    # raw 0.6, 0.5, 0.4 -> score(B) = 0.9 / 1.5 = 0.6 < 0.7
    hfs = [hf(0, (0, 0), 0.6, {A: 2}), hf(1, (0, 0), 0.5, {B: 2}), hf(2, (0, 0), 0.4, {B: 2})]
    d = aggregate(x, hfs, cfg)
    assert not d.assigned and d.label is None and d.score == pytest.approx(0.6)


def test_aggregate_outside_coverage_defers():
    hfs = [hf(0, (0, 0), 1.0, {A: 5}), hf(1, (0, 0), 1.0, {A: 5})]
    d = aggregate(Instance(0, [50, 0]), hfs, EnsembleConfig(tau=0.0))
    assert not d.assigned


def test_single_hf_without_bootstrap_is_the_clustering_output():
    data = generate(GaussianScenario(seed=2, n_labeled=90))
    cfg = EnsembleConfig(num_hf=1, k_per_hf=6, bootstrap=False, seed=4)
    (h,) = generate_heuristics(data.labeled, cfg)
    ref = impurity_kmeans([(x.features, x.true_label) for x in data.labeled],
                          ClusteringConfig(k=6, lam=cfg.lam, seed=hf_seeds(4, 1)[0]))
    assert len(h) == len(ref)
    for p, q in zip(h.prototypes, ref):
        assert np.array_equal(p.centroid, q.centroid) and p.frequencies == q.frequencies


def test_default_ensemble_shape_and_determinism():
    data = generate(GaussianScenario(seed=0, n_labeled=476))
    cfg = EnsembleConfig()
    a = generate_heuristics(data.labeled, cfg)
    assert len(a) == 6 and sum(len(h) for h in a) == 240
    b = generate_heuristics(data.labeled, cfg)
    assert all(np.array_equal(h.centroids, g.centroids) for h, g in zip(a, b))
    assert len({h.rng_seed for h in a}) == 6


def test_too_few_labeled_rows():
    data = generate(GaussianScenario(n_labeled=10))
    with pytest.raises(ConfigError):
        generate_heuristics(data.labeled, EnsembleConfig(k_per_hf=40))


def test_config_validation():
    with pytest.raises(ConfigError):
        EnsembleConfig(tau=1.5)
    with pytest.raises(ConfigError):
        EnsembleConfig(num_hf=0)
