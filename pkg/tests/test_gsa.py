import math

import numpy as np
import pytest
from sklearn.base import clone

from emocrf import (
    GaussianSelfAttention,
    GsaConfig,
    gaussian_kernel,
    gsa_backward,
    gsa_update,
)
from numdiff import finite_difference, relative_error


def _hand_fixture():
    """Two orthogonal unit utterances in 2-dim, sigma 0.5, worked by hand.

    Attention logits are h h^T / d = [[0.5, 0], [0, 0.5]]. Softmax of row one
    is [e^0.5, 1] / (e^0.5 + 1). The distance kernel entry for |k - i| = 1 is
    exp(-1 / (2 * 0.25)) = exp(-2), and the diagonal entry is 1. The output
    adds A h back onto h.
    """
    h = np.array([[1.0, 0.0], [0.0, 1.0]])
    near = math.exp(0.5) / (math.exp(0.5) + 1.0)
    far = 1.0 / (math.exp(0.5) + 1.0)
    a_same = near * 1.0
    a_other = far * math.exp(-2.0)
    expected = np.array(
        [[1.0 + a_same, a_other], [a_other, 1.0 + a_same]]
    )
    return h, expected, a_same, a_other


def test_two_utterance_fixture_exact():
    h, expected, a_same, a_other = _hand_fixture()
    out = gsa_update(h, GsaConfig(sigma=0.5))
    np.testing.assert_allclose(out, expected, rtol=0.0, atol=1.0e-12)
    # Softmax weights and the damped cross term, spelled out.
    assert math.isclose(a_same, 0.6224593312018546, rel_tol=0.0, abs_tol=1.0e-15)
    assert math.isclose(a_other, 0.051094573345137194, rel_tol=0.0, abs_tol=1.0e-15)


def test_fixture_to_printed_precision():
    h, _, _, _ = _hand_fixture()
    out = gsa_update(h, GsaConfig(sigma=0.5))
    np.testing.assert_allclose(
        out[0], [1.62246, 0.05109], rtol=0.0, atol=5.0e-6
    )


def test_kernel_values():
    k = gaussian_kernel(1, 3, 0.5)
    np.testing.assert_allclose(
        k, [math.exp(-2.0), 1.0, math.exp(-2.0)], rtol=0.0, atol=1.0e-15
    )
    assert k[1] == 1.0  # never normalized: the center stays at exactly one
    wide = gaussian_kernel(0, 4, 100.0)
    assert np.all(wide > 0.999)


def test_large_sigma_matches_plain_attention():
    rng = np.random.default_rng(7)
    h = rng.normal(size=(6, 5))
    wide = gsa_update(h, GsaConfig(sigma=1.0e8))
    plain = gsa_update(h, GsaConfig(sigma=0.5, mode="plain"))
    np.testing.assert_allclose(wide, plain, rtol=0.0, atol=1.0e-6)


def test_small_sigma_approaches_self_only():
    rng = np.random.default_rng(8)
    h = rng.normal(size=(5, 4))
    out = gsa_update(h, GsaConfig(sigma=1.0e-3))
    logits = h @ h.T / h.shape[1]
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    weights /= weights.sum(axis=1, keepdims=True)
    expected = h + np.diag(weights)[:, None] * h
    np.testing.assert_allclose(out, expected, rtol=0.0, atol=1.0e-12)


def test_mode_off_returns_copy():
    rng = np.random.default_rng(9)
    h = rng.normal(size=(4, 3))
    out = gsa_update(h, GsaConfig(mode="off"))
    np.testing.assert_array_equal(out, h)
    out[0, 0] = 123.0
    assert h[0, 0] != 123.0


def test_single_utterance():
    h = np.array([[2.0, -1.0]])
    out = gsa_update(h, GsaConfig(sigma=0.5))
    # Softmax over one element is 1 and the kernel center is 1, so out = 2h.
    np.testing.assert_allclose(out, 2.0 * h, rtol=0.0, atol=1.0e-15)


def test_output_is_float64_and_input_untouched():
    h = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=np.float32)
    before = h.copy()
    out = gsa_update(h, GsaConfig())
    assert out.dtype == np.float64
    np.testing.assert_array_equal(h, before)


@pytest.mark.parametrize("mode", ["gaussian", "plain"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_backward_matches_finite_differences(mode, seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(1, 6)), int(rng.integers(2, 6))
    h = rng.normal(size=(n, d))
    weights = rng.normal(size=(n, d))
    cfg = GsaConfig(sigma=float(rng.uniform(0.4, 2.0)), mode=mode)

    def loss(x):
        return float(np.sum(gsa_update(x, cfg) * weights))

    numeric = finite_difference(loss, h.copy())
    analytic = gsa_backward(h, weights, cfg)
    assert relative_error(analytic, numeric) < 1.0e-6


def test_backward_mode_off_is_identity():
    rng = np.random.default_rng(3)
    h = rng.normal(size=(3, 4))
    weights = rng.normal(size=(3, 4))
    np.testing.assert_array_equal(
        gsa_backward(h, weights, GsaConfig(mode="off")), weights
    )


def test_config_validation():
    with pytest.raises(ValueError):
        GsaConfig(sigma=0.0)
    with pytest.raises(ValueError):
        GsaConfig(sigma=-1.0)
    with pytest.raises(ValueError):
        GsaConfig(mode="bogus")


def test_estimator_interface():
    est = GaussianSelfAttention(sigma=0.7, mode="gaussian")
    params = est.get_params()
    assert params == {"sigma": 0.7, "mode": "gaussian"}
    cloned = clone(est)
    assert cloned.get_params() == params

    rng = np.random.default_rng(11)
    h = rng.normal(size=(4, 3))
    out = est.fit(h).transform(h)
    np.testing.assert_allclose(
        out, gsa_update(h, GsaConfig(sigma=0.7)), rtol=0.0, atol=0.0
    )
    with pytest.raises(ValueError):
        GaussianSelfAttention(sigma=-2.0).fit(h)
