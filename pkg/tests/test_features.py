import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qorc.errors import ConfigError, InvalidDimensionError, ShapeError
from qorc.features import (
    PHASE_CEILING,
    TWO_PI,
    PhaseCalibration,
    apply_standardizer,
    assemble_inputs,
    encode_phases,
    fit_pca,
    fit_standardizer,
    project,
)


def test_pca_rank_one_line():
    t = np.linspace(-3, 3, 50)
    model = fit_pca(np.stack([t, 2 * t], axis=1), 2)
    np.testing.assert_allclose(model.components[0], np.array([1, 2]) / np.sqrt(5), atol=1e-12)
    assert model.explained_variance[1] == pytest.approx(0.0, abs=1e-12)


def test_pca_isotropic_cloud():
    x = np.random.default_rng(0).standard_normal((20000, 4))
    ev = fit_pca(x, 4).explained_variance
    assert ev.max() / ev.min() < 1.1


def test_pca_against_svd_oracle():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((300, 30)) @ rng.standard_normal((30, 30))
    model = fit_pca(x, 8)
    centered = x - x.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    np.testing.assert_allclose(model.explained_variance, s[:8] ** 2 / (len(x) - 1), rtol=1e-6)
    for comp, ref in zip(model.components, vt[:8]):
        assert abs(abs(comp @ ref) - 1.0) < 1e-8
    np.testing.assert_allclose(model.components @ model.components.T, np.eye(8), atol=1e-8)
    assert np.all(np.diff(model.explained_variance) <= 0)
    proj = project(model, x)
    np.testing.assert_allclose(proj.var(axis=0, ddof=1), model.explained_variance, rtol=1e-6)
    # sign convention: largest-magnitude entry positive
    for comp in model.components:
        assert comp[np.argmax(np.abs(comp))] > 0


def test_project_examples():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((100, 6))
    model = fit_pca(x, 3)
    np.testing.assert_allclose(project(model, model.mean[None, :]), 0.0, atol=1e-12)
    np.testing.assert_allclose(project(model, (model.mean + model.components[0])[None, :]), [[1, 0, 0]], atol=1e-12)
    row = rng.standard_normal((1, 6))
    assert np.linalg.norm(project(model, row)) <= np.linalg.norm(row - model.mean) + 1e-12
    with pytest.raises(ShapeError):
        project(model, np.zeros((2, 5)))


def test_pca_too_many_components():
    with pytest.raises(InvalidDimensionError):
        fit_pca(np.zeros((5, 3)), 4)


def test_phase_encoding_examples():
    cal = PhaseCalibration.fit(np.array([[0.0, -1.0], [10.0, 1.0]]))
    out = encode_phases(np.array([[0.0, -1.0], [10.0, 1.0], [5.0, 0.0], [20.0, -5.0]]), cal)
    np.testing.assert_allclose(out[0], [0.0, 0.0])
    assert out[1, 0] == PHASE_CEILING and out[1, 0] < TWO_PI
    np.testing.assert_allclose(out[2], [np.pi, np.pi])
    assert out[3, 0] == PHASE_CEILING and out[3, 1] == 0.0


def test_phase_span_option():
    cal = PhaseCalibration.fit(np.array([[0.0], [1.0]]))
    out = encode_phases(np.array([[0.5], [1.0]]), cal, span=np.pi / 2)
    assert out[0, 0] == pytest.approx(np.pi / 4)
    assert out[1, 0] < np.pi / 2
    with pytest.raises(ValueError):
        encode_phases(np.zeros((1, 1)), cal, span=7.0)


def test_degenerate_calibration_warns():
    with pytest.warns(UserWarning):
        cal = PhaseCalibration.fit(np.array([[1.0, 0.0], [1.0, 2.0]]))
    np.testing.assert_array_equal(encode_phases(np.array([[5.0, 1.0]]), cal)[:, 0], [0.0])


@pytest.mark.filterwarnings("ignore::UserWarning")
@given(arrays(np.float64, (12, 3), elements=st.floats(-1e3, 1e3)))
def test_phase_encoding_is_monotone_and_half_open(x):
    cal = PhaseCalibration.fit(x)
    out = encode_phases(x, cal)
    assert np.all(out >= 0) and np.all(out < TWO_PI)
    for j in range(3):
        order = np.argsort(x[:, j], kind="stable")
        assert np.all(np.diff(out[order, j]) >= 0)


def test_standardizer():
    rng = np.random.default_rng(5)
    train = np.column_stack([rng.normal(3, 2, 500), np.full(500, 7.0), rng.uniform(0, 1, 500)])
    s = fit_standardizer(train)
    z = apply_standardizer(s, train)
    np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-9)
    np.testing.assert_allclose(z[:, [0, 2]].var(axis=0), 1.0, atol=1e-6)
    assert np.all(z[:, 1] == 0.0)
    assert s.zero_variance.tolist() == [False, True, False]
    assert np.all(s.stds >= 0)


def test_standardizer_never_sees_test_rows():
    rng = np.random.default_rng(6)
    train, test = rng.standard_normal((50, 4)), rng.standard_normal((20, 4))
    s = fit_standardizer(train)
    before = (s.means.copy(), s.stds.copy())
    test[:] = 1e9
    apply_standardizer(s, test)
    np.testing.assert_array_equal(s.means, before[0])
    np.testing.assert_array_equal(s.stds, before[1])


@pytest.mark.parametrize(
    "variant,cols",
    [("original", 784), ("qorc", 784 + 1140), ("reservoir_only", 1140), ("original_plus_pca", 784 + 20)],
)
def test_assembly_column_counts(variant, cols):
    pixels, pca, fp = np.zeros((3, 784)), np.zeros((3, 20)), np.zeros((3, 1140))
    assert assemble_inputs(variant, pixels=pixels, pca=pca, fingerprints=fp).shape == (3, cols)


def test_assembly_block_order_and_errors():
    pixels, fp = np.ones((2, 2)), np.full((2, 3), 2.0)
    np.testing.assert_array_equal(assemble_inputs("qorc", pixels=pixels, fingerprints=fp)[0], [1, 1, 2, 2, 2])
    assert assemble_inputs("reservoir_only", fingerprints=np.zeros((1, 42504))).shape == (1, 42504)
    with pytest.raises(ConfigError):
        assemble_inputs("qorc", pixels=pixels)
    with pytest.raises(ConfigError):
        assemble_inputs("bogus", pixels=pixels)
    with pytest.raises(ShapeError):
        assemble_inputs("qorc", pixels=pixels, fingerprints=np.zeros((3, 3)))
