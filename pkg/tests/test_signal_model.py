import numpy as np
import pytest

from klic.errors import InvalidConfigError, InvalidInputError
from klic.linalg import SeededRng, hermitian_eigvals
from klic.signal_model import (
    ALL_ENTRIES,
    ClutterModel,
    CjScenario,
    NljScenario,
    RstScenario,
    clutter_covariance,
    nlj_covariance,
    sample_under_hypothesis,
    steering_vector,
)

from oracles import h


def test_steering_boresight():
    np.testing.assert_allclose(steering_vector(16, 0.0), np.full(16, 0.25))


def test_steering_phases_and_norm():
    v = steering_vector(4, np.pi / 6)
    np.testing.assert_allclose(v, 0.5 * np.array([1, 1j, -1, -1j]), atol=1e-15)
    for theta in (-1.2, -0.3, 0.0, 0.7, 1.5):
        assert np.linalg.norm(steering_vector(16, theta)) == pytest.approx(1.0, abs=1e-14)


def test_steering_rejects_endfire():
    with pytest.raises(InvalidInputError):
        steering_vector(8, np.pi / 2)


def test_clutter_covariance_special_cases():
    np.testing.assert_array_equal(clutter_covariance(ClutterModel(2.0, 0.0, 0.9), 5), 2.0 * np.eye(5))
    np.testing.assert_array_equal(clutter_covariance(ClutterModel(1.0, 3.0, 0.0), 5), 4.0 * np.eye(5))


def test_clutter_covariance_paper_values():
    m = clutter_covariance(ClutterModel(1.0, 100.0, 0.95), 16)
    assert m[0, 1] == pytest.approx(95.0)
    assert m[0, 0] == pytest.approx(101.0)
    assert np.min(np.linalg.eigvalsh(m)) > 0


def test_clutter_covariance_all_entries():
    m = clutter_covariance(ClutterModel(1.0, 100.0, 0.95, ALL_ENTRIES), 8)
    assert m[0, 1] == pytest.approx(96.0)
    assert m[2, 7] == pytest.approx(1 + 100 * 0.95**5)
    assert np.min(np.linalg.eigvalsh(m)) > 0


def test_clutter_model_validation():
    with pytest.raises(InvalidConfigError):
        ClutterModel(0.0, 1.0, 0.5)
    with pytest.raises(InvalidConfigError):
        ClutterModel(1.0, 1.0, 1.0)


def test_nlj_covariance():
    np.testing.assert_array_equal(nlj_covariance(8, [0.1], 0.0), np.eye(8))
    w = hermitian_eigvals(nlj_covariance(16, [0.0], 1.0))
    np.testing.assert_allclose(w, [2.0] + [1.0] * 15, atol=1e-12)
    w = hermitian_eigvals(nlj_covariance(16, np.deg2rad([10, 20, -15]), 10.0))
    assert np.count_nonzero(w > 1.1) == 3


def test_nlj_jnr_is_relative_to_noise():
    a = nlj_covariance(8, [0.2, -0.4], 5.0, sigma_n2=3.0)
    b = nlj_covariance(8, [0.2, -0.4], 5.0, sigma_n2=1.0)
    np.testing.assert_allclose(a, 3.0 * b)


def test_nlj_null_sample_covariance():
    sc = NljScenario(sigma_n2=2.0)
    data = sc.sample_batch(0, 1, range(3200))
    s = np.einsum("tik,tjk->ij", data, data.conj()) / (data.shape[0] * data.shape[2])
    assert np.linalg.norm(s - 2.0 * np.eye(16)) / np.linalg.norm(2.0 * np.eye(16)) < 0.05


def test_nlj_hypothesis_covariance_rank():
    sc = NljScenario(jnr=100.0)
    data = sc.sample_batch(2, 4, range(2000))
    s = np.einsum("tik,tjk->ij", data, data.conj()) / (data.shape[0] * data.shape[2])
    w = hermitian_eigvals(s)
    assert w[1] > 50 and w[2] < 2


def test_nlj_validation():
    with pytest.raises(InvalidConfigError):
        NljScenario(n_j=2)
    with pytest.raises(InvalidConfigError):
        NljScenario(jnr=-1.0)
    with pytest.raises(InvalidInputError):
        NljScenario().sample(4, SeededRng(0))


def test_cj_power_ratios():
    sc = CjScenario(snr=37.0, jcnr=12.0)
    m_inv = np.linalg.inv(sc.covariance)
    q = sc.jammer_signature
    assert np.real(q.conj() @ m_inv @ q) == pytest.approx(12.0, rel=1e-9)
    assert sc.target_amplitude**2 * np.real(sc.v.conj() @ m_inv @ sc.v) == pytest.approx(37.0, rel=1e-9)


def test_cj_target_dominance():
    sc = CjScenario(snr=1e12, jcnr=0.0)
    z = sc.sample(2, SeededRng(3))[:, 0]
    cos = abs(np.vdot(sc.v, z)) / np.linalg.norm(z)
    assert cos == pytest.approx(1.0, abs=1e-5)


def test_cj_hypotheses_share_noise():
    sc = CjScenario()
    z0 = sc.sample(0, SeededRng(8, 2))
    z3 = sc.sample(3, SeededRng(8, 2))
    np.testing.assert_array_equal(z0[:, 1:], z3[:, 1:])
    d = z3[:, 0] - z0[:, 0]
    basis = np.column_stack([sc.v, sc.jammer_signature])
    coef, *_ = np.linalg.lstsq(basis, d, rcond=None)
    np.testing.assert_allclose(basis @ coef, d, atol=1e-9)


def test_cj_validation():
    with pytest.raises(InvalidConfigError):
        CjScenario(k=8)
    with pytest.raises(InvalidConfigError):
        CjScenario(subspace_angles=(0.0, 0.3))


def test_rst_sinr_round_trip():
    sc = RstScenario(sinr=250.0)
    assert sc.true_hypothesis == 14
    a = sc.amplitude(2)
    power = np.real(sc.v.conj() @ np.linalg.inv(sc.covariance) @ sc.v)
    assert 2 * a * a * power == pytest.approx(250.0, rel=1e-12)


def test_rst_target_on_occupied_bins_only():
    sc = RstScenario()
    z0 = sc.sample(0, SeededRng(5, 1))
    z = sc.sample(14, SeededRng(5, 1))
    diff = z - z0
    moved = np.flatnonzero(np.linalg.norm(diff, axis=0) > 1e-9)
    np.testing.assert_array_equal(moved, [3, 4])
    for col in moved:
        ratio = diff[:, col] / sc.v
        np.testing.assert_allclose(np.abs(ratio), sc.amplitude(2), rtol=1e-12)


def test_rst_validation():
    with pytest.raises(InvalidConfigError):
        RstScenario(occupied_bins=(3, 5))
    with pytest.raises(InvalidConfigError):
        RstScenario(occupied_bins=(10, 11))


def test_determinism_and_batch_rows():
    for sc, hyp in ((NljScenario(), 2), (CjScenario(), 1), (RstScenario(), 14)):
        a = sample_under_hypothesis(sc, hyp, SeededRng(21, 7))
        b = sample_under_hypothesis(sc, hyp, SeededRng(21, 7))
        np.testing.assert_array_equal(a, b)
        batch = sc.sample_batch(hyp, 21, [5, 7, 9])
        np.testing.assert_allclose(batch[1], a, rtol=1e-13, atol=1e-13)


def test_generated_covariances_are_hermitian_psd():
    for cov in (
        CjScenario().covariance,
        RstScenario(noise_placement=ALL_ENTRIES).covariance,
        nlj_covariance(16, np.deg2rad([10, 20, -15]), 1e3),
    ):
        assert np.max(np.abs(cov - h(cov))) <= 1e-12
        w = np.linalg.eigvalsh(cov)
        assert w.min() >= -1e-10 * w.max()
