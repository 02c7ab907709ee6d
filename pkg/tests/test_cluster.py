import numpy as np
import pytest
import sklearn.metrics
from hypothesis import given, settings, strategies as st

from vmfkit import (
    MixtureParams,
    SamplerConfig,
    VmfParams,
    adjusted_rand_index,
    assign,
    e_step,
    fit_em,
    EmConfig,
    kmeans,
    normalize,
    normalized_mutual_information,
    sample_mixture,
    sample_vmf,
)
from tests.conftest import basis_vector

labels_pairs = st.integers(min_value=2, max_value=60).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(min_value=0, max_value=4), min_size=n, max_size=n),
        st.lists(st.integers(min_value=0, max_value=4), min_size=n, max_size=n),
    )
)


class TestAssign:
    def test_single_component_all_zero(self):
        mix = MixtureParams(
            alphas=np.array([1.0]),
            components=(VmfParams(mu=basis_vector(3), kappa=4.0),),
        )
        x = sample_vmf(mix.components[0], 50, SamplerConfig(seed=1))
        assert np.all(assign(mix, x) == 0)

    def test_point_at_component_mean(self):
        mix = MixtureParams(
            alphas=np.array([0.5, 0.5]),
            components=(
                VmfParams(mu=basis_vector(4, 0), kappa=80.0),
                VmfParams(mu=basis_vector(4, 1), kappa=80.0),
            ),
        )
        labels = assign(mix, np.stack([basis_vector(4, 1), basis_vector(4, 0)]))
        assert labels.tolist() == [1, 0]

    def test_agrees_with_argmax_of_responsibilities(self):
        rng = np.random.default_rng(2)
        mix = MixtureParams(
            alphas=np.array([0.2, 0.5, 0.3]),
            components=tuple(
                VmfParams(mu=normalize(rng.standard_normal(5)), kappa=float(k))
                for k in (5.0, 25.0, 60.0)
            ),
        )
        x = rng.standard_normal((20, 5))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        assert np.array_equal(assign(mix, x), np.argmax(e_step(mix, x), axis=1))


class TestKmeans:
    def test_single_cluster(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((30, 4))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        assert np.all(kmeans(x, 1, seed=0) == 0)

    def test_separates_antipodal_clusters(self):
        mu = basis_vector(5)
        a = sample_vmf(VmfParams(mu=mu, kappa=200.0), 120, SamplerConfig(seed=4))
        b = sample_vmf(VmfParams(mu=-mu, kappa=200.0), 80, SamplerConfig(seed=5))
        x = np.vstack([a, b])
        truth = np.array([0] * 120 + [1] * 80)
        labels = kmeans(x, 2, seed=0)
        assert adjusted_rand_index(truth, labels) == 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((100, 6))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        assert np.array_equal(kmeans(x, 4, seed=9), kmeans(x, 4, seed=9))

    def test_validation(self):
        x = np.eye(3)
        with pytest.raises(ValueError):
            kmeans(x, 0, seed=0)
        with pytest.raises(ValueError):
            kmeans(x, 4, seed=0)


class TestAdjustedRandIndex:
    def test_identical_labelings(self):
        a = np.array([0, 0, 1, 1, 2])
        assert adjusted_rand_index(a, a) == 1.0

    def test_relabeling_invariance(self):
        a = np.array([0, 0, 1, 1, 2, 2])
        b = np.array([5, 5, 3, 3, 9, 9])
        assert adjusted_rand_index(a, b) == 1.0

    def test_product_partition_value(self):
        # 2x2 all-ones contingency table: ARI = -0.5 from the closed formula
        a = np.array([0, 0, 1, 1])
        b = np.array([0, 1, 0, 1])
        assert adjusted_rand_index(a, b) == pytest.approx(-0.5, abs=1e-12)

    def test_matches_sklearn(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(5, 100))
            a = rng.integers(0, 5, size=n)
            b = rng.integers(0, 4, size=n)
            assert adjusted_rand_index(a, b) == pytest.approx(
                sklearn.metrics.adjusted_rand_score(a, b), abs=1e-12
            )

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            adjusted_rand_index(np.array([0, 1]), np.array([0, 1, 2]))


class TestNormalizedMutualInformation:
    def test_identical_labelings(self):
        a = np.array([0, 0, 1, 1, 2])
        assert normalized_mutual_information(a, a) == 1.0

    def test_independent_product_partition(self):
        a = np.array([0, 0, 1, 1])
        b = np.array([0, 1, 0, 1])
        assert normalized_mutual_information(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_relabeling_invariance(self):
        a = np.array([0, 1, 1, 2, 2, 2])
        b = np.array([7, 0, 0, 1, 1, 1])
        assert normalized_mutual_information(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_single_cluster_convention(self):
        a = np.zeros(5, dtype=int)
        assert normalized_mutual_information(a, a) == 1.0
        b = np.array([0, 0, 1, 1, 2])
        assert normalized_mutual_information(a, b) == 0.0

    def test_matches_sklearn_arithmetic(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            n = int(rng.integers(5, 100))
            a = rng.integers(0, 5, size=n)
            b = rng.integers(0, 4, size=n)
            assert normalized_mutual_information(a, b) == pytest.approx(
                sklearn.metrics.normalized_mutual_info_score(a, b, average_method="arithmetic"),
                abs=1e-10,
            )

    def test_geometric_normalization_option(self):
        rng = np.random.default_rng(9)
        a = rng.integers(0, 3, size=60)
        b = rng.integers(0, 3, size=60)
        assert normalized_mutual_information(a, b, normalization="geometric") == pytest.approx(
            sklearn.metrics.normalized_mutual_info_score(a, b, average_method="geometric"),
            abs=1e-10,
        )
        with pytest.raises(ValueError):
            normalized_mutual_information(a, b, normalization="max")


@given(labels_pairs)
@settings(max_examples=60, deadline=None)
def test_metrics_invariant_to_relabeling(pair):
    a, b = np.asarray(pair[0]), np.asarray(pair[1])
    # random relabeling permutations on both sides
    pa = np.random.default_rng(0).permutation(5)
    pb = np.random.default_rng(1).permutation(5)
    assert adjusted_rand_index(pa[a], pb[b]) == pytest.approx(
        adjusted_rand_index(a, b), abs=1e-12
    )
    assert normalized_mutual_information(pa[a], pb[b]) == pytest.approx(
        normalized_mutual_information(a, b), abs=1e-12
    )


def test_mixture_assignment_beats_kmeans_on_separated_mixtures():
    # well-separated components (cosine separation >= 0.5, kappa >= 100):
    # hard mixture assignment should match or beat kmeans almost always
    wins = 0
    for seed in range(10):
        rng = np.random.default_rng(200 + seed)
        mus = []
        while len(mus) < 4:
            cand = normalize(rng.standard_normal(16))
            if all(float(cand @ m) < 0.5 for m in mus):
                mus.append(cand)
        mix = MixtureParams(
            alphas=rng.dirichlet(np.full(4, 10.0)),
            components=tuple(
                VmfParams(mu=m, kappa=float(rng.uniform(100.0, 200.0))) for m in mus
            ),
        )
        x, z = sample_mixture(mix, 800, SamplerConfig(seed=seed))
        params, _ = fit_em(x, 4, EmConfig(seed=seed))
        ari_mix = adjusted_rand_index(z, assign(params, x))
        ari_km = adjusted_rand_index(z, kmeans(x, 4, seed=seed))
        wins += ari_mix >= ari_km
    assert wins >= 8
