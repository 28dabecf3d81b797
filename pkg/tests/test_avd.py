import numpy as np
import pytest

from emocrf import (
    MASKED,
    DegenerateRowError,
    TransitionModel,
    attention_viterbi_decode,
    best_path,
    brute_best_labeling,
    enhance_and_predict,
    nearest_neighbor_predict,
    sequence_score,
    transfer_probabilities,
    viterbi_scores,
)


def _zero_model(n):
    size = n + 2
    matrix = np.zeros((size, size), dtype=np.float64)
    matrix[TransitionModel.masked_entries(n)] = MASKED
    return TransitionModel(n, matrix)


def _fixture():
    """Same two-label chain as the loss fixture; worked by hand.

    c[0] = [0.6, 0.4]; zero transitions give c[1] = max(c[0]) + S[1] =
    [0.9, 1.3]; the best path is [0, 1]; the transfer rows are
    [0.6, 0.4] / 1.0 and ([0.9, 1.3] - 0.6) / 1.0 = [0.3, 0.7].
    """
    s = np.array([[0.6, 0.4], [0.3, 0.7]])
    return s, _zero_model(2)


def test_fixture_score_table_and_path():
    s, tm = _fixture()
    c, back = viterbi_scores(s, tm)
    np.testing.assert_allclose(c, [[0.6, 0.4], [0.9, 1.3]], rtol=0.0, atol=1.0e-12)
    assert back[0].tolist() == [-1, -1]
    assert back[1].tolist() == [0, 0]
    path = best_path(c, back, tm)
    assert path.tolist() == [0, 1]


def test_fixture_transfer_rows():
    s, tm = _fixture()
    c, back = viterbi_scores(s, tm)
    path = best_path(c, back, tm)
    p = transfer_probabilities(c, path)
    np.testing.assert_allclose(p, [[0.6, 0.4], [0.3, 0.7]], rtol=0.0, atol=1.0e-12)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=0.0, atol=1.0e-12)


def test_path_matches_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(40):
        n = int(rng.integers(1, 5))
        length = int(rng.integers(1, 6))
        tm = TransitionModel.initialize(n, rng)
        tm.trans[...] = rng.normal(0.0, 1.5, size=(n, n))
        tm.start_scores[...] = rng.normal(size=n)
        tm.end_scores[...] = rng.normal(size=n)
        s = rng.normal(0.0, 1.5, size=(length, n))
        c, back = viterbi_scores(s, tm)
        path = best_path(c, back, tm)
        _, brute_best = brute_best_labeling(s, tm)
        # Compare by score: equal-scoring paths are equally correct.
        assert abs(sequence_score(s, tm, path) - brute_best) < 1.0e-9


def test_end_scores_affect_selection_not_table():
    tm = _zero_model(2)
    tm.end_scores[...] = [0.0, 10.0]
    s = np.array([[1.0, 0.0]])
    c, back = viterbi_scores(s, tm)
    np.testing.assert_allclose(c, [[1.0, 0.0]], rtol=0.0, atol=0.0)
    assert best_path(c, back, tm).tolist() == [1]  # end bonus flips the pick


def test_transfer_rows_sum_to_one_even_with_negatives():
    c = np.array([[2.0, -1.0], [3.0, 1.5]])
    path = np.array([0, 0])
    p = transfer_probabilities(c, path)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=0.0, atol=1.0e-12)
    assert p[0, 1] < 0.0  # negative entries are kept by default


def test_transfer_clamp_negative():
    c = np.array([[2.0, -1.0]])
    path = np.array([0])
    p = transfer_probabilities(c, path, clamp_negative=True)
    np.testing.assert_allclose(p, [[1.0, 0.0]], rtol=0.0, atol=0.0)


def test_transfer_zero_row_raises():
    c = np.array([[1.0, -1.0]])
    with pytest.raises(DegenerateRowError) as err:
        transfer_probabilities(c, np.array([0]))
    assert err.value.row == 0


def test_transfer_shift_uses_previous_best():
    c = np.array([[4.0, 1.0], [6.0, 8.0]])
    path = np.array([0, 1])
    p = transfer_probabilities(c, path)
    np.testing.assert_allclose(p[0], [0.8, 0.2], rtol=0.0, atol=1.0e-12)
    np.testing.assert_allclose(p[1], [2.0 / 6.0, 4.0 / 6.0], rtol=0.0, atol=1.0e-12)


def test_enhance_and_predict_mixture():
    h = np.array([[1.0, 0.0, 0.0]])
    seen = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    unseen = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
    p = np.array([[0.75, 0.25]])
    h_prime, pred = enhance_and_predict(h, p, seen, unseen)
    np.testing.assert_allclose(h_prime, [[1.0, 0.75, 0.25]], rtol=0.0, atol=0.0)
    # Without the mixture the nearest unseen prototype would be index 1.
    base_pred, _ = nearest_neighbor_predict(h, unseen)
    assert base_pred.tolist() == [1]
    assert pred.tolist() == [1]  # 1.0 beats 0.75 here, mixture not enough
    stronger = enhance_and_predict(h, np.array([[2.0, -1.0]]), seen, unseen)[1]
    assert stronger.tolist() == [0]  # a heavier mixture flips the choice


def test_cosine_tie_goes_to_lowest_index():
    h = np.array([[1.0, 1.0]])
    unseen = np.array([[1.0, 0.0], [0.0, 1.0]])
    pred, cos = nearest_neighbor_predict(h, unseen)
    assert cos[0, 0] == cos[0, 1]
    assert pred.tolist() == [0]


def test_full_decode_shapes():
    rng = np.random.default_rng(1)
    n, m, d, length = 3, 2, 5, 4
    tm = TransitionModel.initialize(n, rng)
    s = rng.normal(size=(length, n))
    h = rng.normal(size=(length, d))
    seen = rng.normal(size=(n, d))
    unseen = rng.normal(size=(m, d))
    res = attention_viterbi_decode(h, s, tm, seen, unseen)
    assert res.seen_path.shape == (length,)
    assert res.score_table.shape == (length, n)
    assert res.transfer.shape == (length, n)
    assert res.h_prime.shape == (length, d)
    assert res.unseen_pred.shape == (length,)
    assert res.unseen_cosines.shape == (length, m)
    np.testing.assert_allclose(
        res.transfer.sum(axis=1), 1.0, rtol=0.0, atol=1.0e-9
    )
    np.testing.assert_allclose(
        res.h_prime, h + res.transfer @ seen, rtol=0.0, atol=1.0e-12
    )


def test_single_utterance_decode():
    tm = _zero_model(2)
    s = np.array([[0.2, 0.8]])
    c, back = viterbi_scores(s, tm)
    path = best_path(c, back, tm)
    assert path.tolist() == [1]
    p = transfer_probabilities(c, path)
    np.testing.assert_allclose(p, [[0.2, 0.8]], rtol=0.0, atol=1.0e-12)


def test_shape_validation():
    tm = _zero_model(2)
    with pytest.raises(ValueError):
        viterbi_scores(np.zeros((2, 3)), tm)
    with pytest.raises(ValueError):
        transfer_probabilities(np.zeros((2, 2)), np.array([0]))
    with pytest.raises(ValueError):
        enhance_and_predict(
            np.zeros((1, 3)), np.zeros((1, 3)), np.zeros((2, 3)), np.zeros((2, 3))
        )
