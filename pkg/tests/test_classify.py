import numpy as np
import pytest

from mpskit.classify import (
    FeatureMatrix,
    center_data,
    csr,
    knn1_classify,
    lda_classify,
    lda_fit,
    pca_fit_transform,
    vectorize_cores,
)


class TestVectorizeCores:
    def test_scalar_cores(self):
        cores = [np.array([[2.0]]), np.array([[-3.0]])]
        f = vectorize_cores(cores, [0, 1])
        assert f.n_features == 1
        assert np.array_equal(f.rows, [[2.0], [-3.0]])

    def test_two_by_three_content_and_order(self):
        core = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        f = vectorize_cores([core], [0])
        assert sorted(f.rows[0]) == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        # row index varies fastest
        assert np.array_equal(f.rows[0], [1.0, 4.0, 2.0, 5.0, 3.0, 6.0])

    def test_feature_count_is_core_size(self):
        rng = np.random.default_rng(0)
        cores = [rng.standard_normal((3, 5)) for _ in range(4)]
        f = vectorize_cores(cores, [0, 1, 0, 1])
        assert f.n_features == 15

    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            vectorize_cores([np.ones((2, 2)), np.ones((2, 3))], [0, 1])

    def test_label_alignment(self):
        with pytest.raises(ValueError):
            vectorize_cores([np.ones((2, 2))], [0, 1])


class TestCenterData:
    def test_opposite_pair(self):
        t = np.random.default_rng(1).standard_normal((3, 4))
        centered, mean = center_data([t, -t])
        assert np.allclose(mean, 0.0, atol=1e-15)
        assert np.allclose(centered[0], t)
        assert np.allclose(centered[1], -t)

    def test_identical_samples_center_to_zero(self):
        t = np.random.default_rng(2).standard_normal((2, 3, 4))
        centered, mean = center_data([t] * 5)
        assert np.allclose(mean, t)
        for c in centered:
            assert np.allclose(c, 0.0, atol=1e-14)

    def test_centered_sum_vanishes(self):
        rng = np.random.default_rng(3)
        tensors = [rng.standard_normal((4, 5)) for _ in range(9)]
        centered, _ = center_data(tensors)
        total = sum(np.linalg.norm(t.ravel()) for t in tensors)
        assert np.linalg.norm(sum(centered).ravel()) <= 1e-10 * total

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            center_data([])


class TestPca:
    def test_full_rank_preserves_distances(self):
        rng = np.random.default_rng(4)
        rows = rng.standard_normal((12, 5))
        f = FeatureMatrix(rows, np.zeros(12, dtype=int))
        projected, _ = pca_fit_transform(f, 5)
        for i in range(12):
            for j in range(i):
                before = np.linalg.norm(rows[i] - rows[j])
                after = np.linalg.norm(projected.rows[i] - projected.rows[j])
                assert after == pytest.approx(before, rel=1e-8)

    def test_line_captured_by_one_component(self):
        rng = np.random.default_rng(5)
        direction = rng.standard_normal(5)
        offsets = rng.standard_normal(20)
        rows = np.outer(offsets, direction) + rng.standard_normal(5)
        f = FeatureMatrix(rows, np.zeros(20, dtype=int))
        projected, transform = pca_fit_transform(f, 1)
        rebuilt = projected.rows @ transform.components + transform.mean
        assert np.linalg.norm(rebuilt - rows) <= 1e-10 * np.linalg.norm(rows)

    def test_variance_monotone_in_components(self):
        rng = np.random.default_rng(6)
        rows = rng.standard_normal((15, 6))
        f = FeatureMatrix(rows, np.zeros(15, dtype=int))
        variances = []
        for p in range(1, 7):
            projected, _ = pca_fit_transform(f, p)
            variances.append(float(np.var(projected.rows, axis=0).sum()))
        assert all(a <= b + 1e-12 for a, b in zip(variances, variances[1:]))

    def test_transform_reusable_on_new_rows(self):
        rng = np.random.default_rng(7)
        rows = rng.standard_normal((10, 4))
        f = FeatureMatrix(rows, np.zeros(10, dtype=int))
        projected, transform = pca_fit_transform(f, 2)
        again = transform.transform(f)
        assert np.allclose(again.rows, projected.rows, atol=1e-12)

    def test_p_out_of_range(self):
        f = FeatureMatrix(np.ones((3, 5)), np.zeros(3, dtype=int))
        for p in (0, 4, 6):
            with pytest.raises(ValueError):
                pca_fit_transform(f, p)


class TestKnn1:
    def test_exact_match_wins(self):
        train = FeatureMatrix(np.array([[0.0, 0.0], [5.0, 5.0]]), np.array([3, 7]))
        test = FeatureMatrix(np.array([[5.0, 5.0]]), np.array([0]))
        assert knn1_classify(train, test)[0] == 7

    def test_one_dimensional_example(self):
        train = FeatureMatrix(np.array([[0.0], [10.0]]), np.array([0, 1]))
        test = FeatureMatrix(np.array([[3.0]]), np.array([0]))
        assert knn1_classify(train, test)[0] == 0

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(8)
        train_rows = rng.standard_normal((100, 4))
        labels = rng.integers(0, 5, size=100)
        test_rows = rng.standard_normal((40, 4))
        train = FeatureMatrix(train_rows, labels)
        test = FeatureMatrix(test_rows, np.zeros(40, dtype=int))
        predicted = knn1_classify(train, test)
        for row, got in zip(test_rows, predicted):
            dists = [float(np.linalg.norm(row - t)) for t in train_rows]
            assert got == labels[int(np.argmin(dists))]

    def test_tie_breaks_to_lowest_index(self):
        train = FeatureMatrix(
            np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([4, 9])
        )
        test = FeatureMatrix(np.array([[0.0, 0.0]]), np.array([0]))
        assert knn1_classify(train, test)[0] == 4

    def test_orthogonal_transform_invariance(self):
        rng = np.random.default_rng(9)
        train_rows = rng.standard_normal((30, 6))
        test_rows = rng.standard_normal((10, 6))
        labels = rng.integers(0, 3, size=30)
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        before = knn1_classify(
            FeatureMatrix(train_rows, labels),
            FeatureMatrix(test_rows, np.zeros(10, dtype=int)),
        )
        after = knn1_classify(
            FeatureMatrix(train_rows @ q, labels),
            FeatureMatrix(test_rows @ q, np.zeros(10, dtype=int)),
        )
        assert np.array_equal(before, after)

    def test_feature_mismatch(self):
        train = FeatureMatrix(np.ones((2, 3)), np.array([0, 1]))
        test = FeatureMatrix(np.ones((2, 4)), np.array([0, 1]))
        with pytest.raises(ValueError):
            knn1_classify(train, test)


def gaussian_clusters(rng, centers, count, sigma=1.0):
    rows, labels = [], []
    for label, center in enumerate(centers):
        rows.append(center + sigma * rng.standard_normal((count, len(center))))
        labels.extend([label] * count)
    return FeatureMatrix(np.vstack(rows), np.array(labels))


class TestLda:
    def test_separated_clusters_fully_recovered(self):
        rng = np.random.default_rng(10)
        centers = [np.zeros(4), np.full(4, 10.0 / 2.0)]  # 10 sigma apart
        train = gaussian_clusters(rng, centers, 50)
        test = gaussian_clusters(rng, centers, 25)
        model = lda_fit(train)
        predicted = lda_classify(model, test)
        assert csr(predicted, test.labels) == 1.0

    def test_memorizes_separable_training_set(self):
        rng = np.random.default_rng(11)
        centers = [np.zeros(3), np.full(3, 8.0)]
        train = gaussian_clusters(rng, centers, 20)
        predicted = lda_classify(lda_fit(train), train)
        assert csr(predicted, train.labels) == 1.0

    def test_projection_rank_bound(self):
        rng = np.random.default_rng(12)
        centers = [rng.standard_normal(6) * 5 for _ in range(4)]
        train = gaussian_clusters(rng, centers, 10)
        model = lda_fit(train)
        assert model.projection.shape[1] <= 3
        assert np.linalg.matrix_rank(model.projection) == model.projection.shape[1]

    def test_more_features_than_samples_never_crashes(self):
        rng = np.random.default_rng(13)
        rows = rng.standard_normal((10, 60))
        rows[5:] += 4.0
        labels = np.array([0] * 5 + [1] * 5)
        model = lda_fit(FeatureMatrix(rows, labels))
        predicted = lda_classify(model, FeatureMatrix(rows, labels))
        assert csr(predicted, labels) == 1.0

    def test_scale_invariant_predictions(self):
        rng = np.random.default_rng(14)
        centers = [np.zeros(4), np.full(4, 3.0)]
        train = gaussian_clusters(rng, centers, 15)
        test = gaussian_clusters(rng, centers, 10)
        base = lda_classify(lda_fit(train), test)
        scaled_train = FeatureMatrix(train.rows * 3.7, train.labels)
        scaled_test = FeatureMatrix(test.rows * 3.7, test.labels)
        scaled = lda_classify(lda_fit(scaled_train), scaled_test)
        assert np.array_equal(base, scaled)

    def test_single_class_rejected(self):
        f = FeatureMatrix(np.random.default_rng(15).standard_normal((6, 3)),
                          np.zeros(6, dtype=int))
        with pytest.raises(ValueError):
            lda_fit(f)

    def test_tiny_class_rejected(self):
        f = FeatureMatrix(np.random.default_rng(16).standard_normal((4, 3)),
                          np.array([0, 0, 0, 1]))
        with pytest.raises(ValueError):
            lda_fit(f)

    def test_degenerate_identical_rows_never_crash(self):
        rows = np.vstack([np.ones((3, 4)), np.zeros((3, 4))])
        labels = np.array([0, 0, 0, 1, 1, 1])
        model = lda_fit(FeatureMatrix(rows, labels))
        predicted = lda_classify(model, FeatureMatrix(rows, labels))
        assert csr(predicted, labels) == 1.0


class TestCsr:
    def test_all_correct(self):
        assert csr([1, 2, 3], [1, 2, 3]) == 1.0

    def test_none_correct(self):
        assert csr([1, 1, 1], [2, 2, 2]) == 0.0

    def test_three_of_four(self):
        assert csr([1, 2, 3, 4], [1, 2, 3, 0]) == 0.75

    def test_self_agreement(self):
        labels = np.random.default_rng(17).integers(0, 4, size=20)
        assert csr(labels, labels) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            csr([1, 2], [1, 2, 3])
