"""Spectral simulation: mode enumeration, sampling, reproducibility."""

import numpy as np
import pytest

from stdpp import kernels, simulate
from stdpp.errors import (
    InvalidModelError,
    InvalidParameterError,
    TruncationError,
)


def sep(rho=0.6, a_s=0.5, a_t=1.0):
    return kernels.SeparableGaussExpParams(rho=rho, alpha_s=a_s, alpha_t=a_t)


def small_approx(rho=0.6, window=None, cutoff=(4, 4, 64), padding=0.0):
    window = window or simulate.Box(1.0, 1.0, 10.0)
    return simulate.build_spectral_approx(
        sep(rho=rho), window, cutoff=cutoff, tolerance=0.05, padding=padding)


def test_box_validation():
    with pytest.raises(InvalidParameterError):
        simulate.Box(1.0, 0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        simulate.Box(1.0, 1.0, -2.0)
    b = simulate.Box(2.0, 3.0, 4.0)
    assert b.volume == 24.0
    assert np.array_equal(b.extents, [2.0, 3.0, 4.0])
    assert simulate.Box.from_dict(b.to_dict()) == b


def test_point_pattern_validation():
    w = simulate.Box(1.0, 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        simulate.PointPattern(points=[(0.5, 0.5, 1.5)], window=w)
    with pytest.raises(InvalidParameterError):
        simulate.PointPattern(points=[(0.5, float("nan"), 0.5)], window=w)
    with pytest.raises(InvalidParameterError):
        simulate.PointPattern(points=[(0.5, 0.5, 0.5), (0.5, 0.5, 0.5)],
                              window=w)
    with pytest.raises(InvalidParameterError):
        simulate.PointPattern(points=[(0.5, 0.5)], window=w)
    empty = simulate.PointPattern(points=[], window=w)
    assert len(empty) == 0
    assert empty.points.shape == (0, 3)
    p = simulate.PointPattern(points=[(0.1, 0.2, 0.3)], window=w)
    assert p.point_list() == [simulate.SpaceTimePoint(0.1, 0.2, 0.3)]


def test_replicate_seeds():
    seeds = simulate.replicate_seeds(7, 16)
    assert seeds == simulate.replicate_seeds(7, 16)
    assert len(set(seeds)) == 16
    assert all(isinstance(s, int) and s >= 0 for s in seeds)
    assert simulate.replicate_seeds(8, 16) != seeds


def test_build_approx_mass_accounting():
    window = simulate.Box(1.0, 1.0, 10.0)
    approx = small_approx(window=window)
    c = approx.cutoff
    assert approx.modes.shape == ((2 * c[0] + 1) * (2 * c[1] + 1)
                                  * (2 * c[2] + 1), 3)
    probs = approx.probabilities
    assert probs.min() >= 0.0 and probs.max() < 1.0
    total = kernels.intensity(approx.model) * approx.box.volume
    assert approx.truncation_mass >= 0.0
    assert approx.truncation_mass / total <= 0.05
    # lattice mass = continuum mass - truncation + periodization wraparound;
    # on this small box the wraparound is a few percent and positive
    assert approx.expected_modes >= total - approx.truncation_mass - 1e-12
    assert approx.expected_modes == pytest.approx(total, rel=0.10)
    # padding = 0 means box == window and no crop loss
    assert approx.box == window
    assert approx.expected_count == pytest.approx(approx.expected_modes)
    padded = small_approx(window=window, padding=0.25, cutoff=(5, 5, 80))
    assert np.allclose(padded.box.extents, window.extents * 1.25)
    assert padded.expected_count == pytest.approx(
        padded.expected_modes / 1.25 ** 3)


def test_build_approx_rejects_invalid_model():
    window = simulate.Box(1.0, 1.0, 10.0)
    with pytest.raises(InvalidModelError):
        simulate.build_spectral_approx(sep(rho=5.0), window)


def test_build_approx_truncation_error():
    window = simulate.Box(1.0, 1.0, 8.0)
    with pytest.raises(TruncationError, match="increase the cutoff"):
        simulate.build_spectral_approx(sep(), window, cutoff=(4, 4, 4),
                                       tolerance=1e-3, padding=0.0)


def test_sample_deterministic_in_seed():
    approx = small_approx()
    a = simulate.sample_stdpp(approx, approx.window, seed=42)
    b = simulate.sample_stdpp(approx, approx.window, seed=42)
    assert np.array_equal(a.points, b.points)
    assert a.seed_provenance == "philox:42"
    c = simulate.sample_stdpp(approx, approx.window, seed=43)
    assert a.points.shape != c.points.shape or not np.array_equal(
        a.points, c.points)


def test_sample_points_inside_window():
    approx = small_approx(padding=0.2, cutoff=(5, 5, 80))
    for seed in simulate.replicate_seeds(3, 5):
        pat = simulate.sample_stdpp(approx, approx.window, seed)
        if len(pat):
            assert pat.points.min() >= 0.0
            assert np.all(pat.points <= approx.window.extents + 1e-12)


def test_sample_count_mean_tracks_spectrum():
    # padding 0: the count is exactly the number of Bernoulli-selected modes
    approx = small_approx()
    seeds = simulate.replicate_seeds(11, 60)
    counts = [len(simulate.sample_stdpp(approx, approx.window, s))
              for s in seeds]
    mean_expected = approx.expected_modes
    var_expected = float(
        (approx.probabilities * (1.0 - approx.probabilities)).sum())
    se = (var_expected / len(seeds)) ** 0.5
    assert abs(np.mean(counts) - mean_expected) < 4.0 * se
    # sub-Poisson dispersion should already be visible at this size
    assert np.var(counts, ddof=1) < np.mean(counts)


def test_sample_window_mismatch():
    approx = small_approx()
    with pytest.raises(InvalidParameterError):
        simulate.sample_stdpp(approx, simulate.Box(2.0, 1.0, 10.0), seed=1)


def test_sample_empty_pattern():
    window = simulate.Box(1.0, 1.0, 1.0)
    approx = simulate.build_spectral_approx(
        sep(rho=1e-7), window, cutoff=(4, 4, 4), tolerance=0.5, padding=0.0)
    pat = simulate.sample_stdpp(approx, window, seed=0)
    assert len(pat) == 0
    assert pat.points.shape == (0, 3)


def test_seed_validation():
    approx = small_approx()
    with pytest.raises(InvalidParameterError):
        simulate.sample_stdpp(approx, approx.window, seed=-1)
    with pytest.raises(InvalidParameterError):
        simulate.sample_stdpp(approx, approx.window, seed="abc")


def test_poisson_baseline():
    window = simulate.Box(2.0, 2.0, 5.0)
    a = simulate.sample_poisson(2.0, window, seed=9)
    b = simulate.sample_poisson(2.0, window, seed=9)
    assert np.array_equal(a.points, b.points)
    assert np.all(a.points >= 0.0) and np.all(a.points <= window.extents)
    counts = [len(simulate.sample_poisson(2.0, window, s))
              for s in simulate.replicate_seeds(5, 60)]
    lam = 2.0 * window.volume
    se = (lam / len(counts)) ** 0.5
    assert abs(np.mean(counts) - lam) < 4.0 * se
    with pytest.raises(InvalidParameterError):
        simulate.sample_poisson(-1.0, window, seed=1)
