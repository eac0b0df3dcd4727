"""Acceptance gate: one test per release criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s`.  The Monte-Carlo criteria
(6, 7, 8) use pinned root seeds and take a couple of minutes combined; the
analytic criteria run in seconds.
"""

import math

import numpy as np
import pytest

from stdpp import estimate, kernels, moments, simulate


def _line(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    tail = ("  " + detail) if detail else ""
    print("criterion %d (%s): %s%s" % (num, name, status, tail))
    return ok


def test_criterion_1_existence_bounds():
    ok = True
    worst = 0.0
    # separable family: the admissible intensity scale in closed form
    for a_s, a_t, s2s, s2t in ((0.5, 1.0, 1.0, 1.0), (1.3, 0.4, 2.0, 0.5),
                               (2.0, 3.0, 1.0, 1.0), (0.7, 1.3, 1.0, 1.0)):
        bound = 1.0 / (2.0 * math.pi * a_s ** 2 * a_t * s2s * s2t)
        m = kernels.SeparableGaussExpParams(
            rho=bound, sigma2_s=s2s, sigma2_t=s2t, alpha_s=a_s, alpha_t=a_t)
        rep = kernels.validate_existence(m)
        worst = max(worst, abs(rep.rho_max - bound) / bound)
        ok &= rep.rho_max == pytest.approx(bound, rel=1e-13)
        below = kernels.validate_existence(
            kernels.SeparableGaussExpParams(
                rho=bound * (1 - 1e-12), sigma2_s=s2s, sigma2_t=s2t,
                alpha_s=a_s, alpha_t=a_t))
        above = kernels.validate_existence(
            kernels.SeparableGaussExpParams(
                rho=bound * (1 + 1e-12), sigma2_s=s2s, sigma2_t=s2t,
                alpha_s=a_s, alpha_t=a_t))
        ok &= below.valid and not above.valid
    # Matern-type variants: valid exactly when gamma < (alpha_s alpha_t)^4
    for cls in (kernels.MaternSeparableParams,
                kernels.MaternNonSeparableParams):
        for a_s, a_t in ((1.0, 1.0), (1.4, 0.6), (0.5, 2.0)):
            crit = a_s ** 4 * a_t ** 4
            below = kernels.validate_existence(
                cls(gamma=crit * (1 - 1e-12), alpha_s=a_s, alpha_t=a_t))
            above = kernels.validate_existence(
                cls(gamma=crit * (1 + 1e-12), alpha_s=a_s, alpha_t=a_t))
            ok &= below.valid and not above.valid
            worst = max(worst, abs(below.phi_max - 1.0))
    assert _line(1, "existence bounds", ok,
                 "boundary classification exact at 1e-12, "
                 "max deviation %.2e" % worst)


def test_criterion_2_closed_form_consistency():
    grid = moments.LagGrid.regular(2.0, 2.0, n_u=20, n_t=20)
    models = [
        kernels.SeparableGaussExpParams(rho=0.1, alpha_s=0.5, alpha_t=1.0),
        kernels.MaternSeparableParams(gamma=0.5, alpha_s=1.0, alpha_t=1.0),
        kernels.MaternNonSeparableParams(gamma=0.5, alpha_s=1.0,
                                         alpha_t=1.0),
        kernels.FuentesSpectralParams(gamma=0.5, alpha_s=1.0, alpha_t=1.0,
                                      nu=2.0, epsilon=1.0),
        kernels.FuentesSpectralParams(gamma=0.5, alpha_s=1.0, alpha_t=1.0,
                                      nu=2.0, epsilon=0.0),
    ]
    worst = 0.0
    for m in models:
        rho = kernels.intensity(m)
        curve = moments.pcf_theoretical(m, grid)
        for a, u in enumerate(grid.spatial_lags):
            for b, t in enumerate(grid.temporal_lags):
                c = kernels.kernel_value(m, u, t)
                ref = 1.0 - (c / rho) ** 2
                worst = max(worst, abs(curve.values[a, b] - ref))
    ok = worst <= 1e-12
    # epsilon = 1 spectral density separates into space and time factors
    m1 = kernels.FuentesSpectralParams(gamma=0.5, alpha_s=1.1, alpha_t=0.7,
                                       nu=2.0, epsilon=1.0)
    phi00 = kernels.spectral_density(m1, 0.0, 0.0)
    worst_phi = 0.0
    rng = np.random.default_rng(2)
    for _ in range(100):
        w, tau = rng.uniform(0.0, 4.0, 2)
        lhs = kernels.spectral_density(m1, w, tau) * phi00
        rhs = (kernels.spectral_density(m1, w, 0.0)
               * kernels.spectral_density(m1, 0.0, tau))
        worst_phi = max(worst_phi, abs(lhs - rhs) / rhs)
    ok &= worst_phi <= 1e-12
    assert _line(2, "closed-form consistency", ok,
                 "max |g - (1-(C/rho)^2)| = %.2e, "
                 "max factorization error %.2e" % (worst, worst_phi))


def test_criterion_3_kfun_oracle_equivalence():
    m = kernels.SeparableGaussExpParams(rho=0.1, alpha_s=0.9, alpha_t=1.4)
    grid = moments.LagGrid(np.linspace(0.2, 1.0, 5), np.linspace(0.2, 1.0, 5))
    closed = moments.kfun_theoretical(m, grid, method="closed_form")
    quad = moments.kfun_theoretical(m, grid, method="quadrature")
    gap = float(np.max(np.abs(closed.values - quad.values)))
    ok = gap <= 1e-8
    # the inconsistency of a published closed form must be documented
    ok &= "dimensionally inconsistent" in moments.__doc__
    # fully non-separable K stays between 0 and the Poisson benchmark
    mn = kernels.MaternNonSeparableParams(gamma=0.5, alpha_s=1.0, alpha_t=1.0)
    kq = moments.kfun_theoretical(mn, grid, method="quadrature").values
    poisson = (math.pi * grid.spatial_lags[:, None] ** 2
               * grid.temporal_lags[None, :])
    ok &= bool(np.all(kq >= 0.0) and np.all(kq <= poisson))
    assert _line(3, "K-function oracle equivalence", ok,
                 "max |closed - quadrature| = %.2e on 5x5 grid" % gap)


def test_criterion_4_pcf_property_reproduction():
    grid = moments.LagGrid(np.linspace(0.05, 1.0, 20),
                           np.linspace(0.05, 1.0, 20))

    def g_sep(a_s, a_t):
        m = kernels.SeparableGaussExpParams(rho=0.01, alpha_s=a_s,
                                            alpha_t=a_t)
        return moments.pcf_theoretical(m, grid).values

    ok = True
    # wider separable kernel ranges lower g pointwise
    prev = g_sep(0.3, 1.0)
    for a in (0.5, 0.8, 1.2):
        cur = g_sep(a, 1.0)
        ok &= bool(np.all(cur <= prev + 1e-15))
        prev = cur
    prev = g_sep(1.0, 0.3)
    for a in (0.5, 0.8, 1.2):
        cur = g_sep(1.0, a)
        ok &= bool(np.all(cur <= prev + 1e-15))
        prev = cur

    # Matern-type families: g decreases pointwise in 1/alpha (so it rises
    # with alpha itself)
    for cls in (kernels.MaternSeparableParams,
                kernels.MaternNonSeparableParams):
        for which in ("alpha_s", "alpha_t"):
            prev = None
            for a in (0.5, 0.8, 1.2, 2.0):
                kw = {"alpha_s": 1.0, "alpha_t": 1.0, which: a}
                cur = moments.pcf_theoretical(
                    cls(gamma=1e-3, **kw), grid).values
                if prev is not None:
                    ok &= bool(np.all(cur >= prev - 1e-15))
                prev = cur

    # the separable Matern variant is the more repulsive at matched ranges
    rep = moments.pcf_ordering_check(
        kernels.MaternSeparableParams(gamma=0.05, alpha_s=0.5, alpha_t=0.5),
        kernels.MaternNonSeparableParams(gamma=0.05, alpha_s=0.5,
                                         alpha_t=0.5),
        grid)
    ok &= rep.all_ordered
    assert _line(4, "pair-correlation properties", ok,
                 "monotone in ranges; ordering max violation %.1e"
                 % rep.max_violation)


def test_criterion_5_determinant_validity():
    rng = np.random.default_rng(77)
    models = [
        kernels.SeparableGaussExpParams(rho=0.1, alpha_s=0.5, alpha_t=1.0),
        kernels.MaternSeparableParams(gamma=0.5, alpha_s=1.0, alpha_t=1.0),
        kernels.MaternNonSeparableParams(gamma=0.5, alpha_s=1.0,
                                         alpha_t=1.0),
    ]
    ok = True
    worst_det = 0.0
    worst_eig = 0.0
    for m in models:
        rho = kernels.intensity(m)
        for _ in range(500):
            n = int(rng.integers(1, 7))
            pts = rng.uniform(0.0, 2.0, (n, 3))
            val = moments.product_density(m, pts)
            floor = -1e-9 * rho ** n
            worst_det = min(worst_det, val / abs(floor))
            ok &= val >= floor
            mat = np.empty((n, n))
            for i in range(n):
                for j in range(n):
                    mat[i, j] = kernels.kernel_value(
                        m, pts[i, :2] - pts[j, :2], pts[i, 2] - pts[j, 2])
            eig = float(np.linalg.eigvalsh(mat).min())
            tr = float(np.trace(mat))
            worst_eig = min(worst_eig, eig / tr)
            ok &= eig >= -1e-9 * tr
    assert _line(5, "determinant validity", ok,
                 "500 configs/model, min det/(1e-9 rho^n) = %.3g, "
                 "min eig/trace = %.3g" % (worst_det, worst_eig))


def test_criterion_6_simulation_repulsion():
    model = kernels.SeparableGaussExpParams(rho=0.6, alpha_s=0.5,
                                            alpha_t=1.0)
    window = simulate.Box(1.0, 1.0, 84.0)
    approx = simulate.build_spectral_approx(
        model, window, cutoff=(4, 4, 512), tolerance=0.05, padding=0.0)
    n_rep = 200
    counts = np.array([
        len(simulate.sample_stdpp(approx, window, s))
        for s in simulate.replicate_seeds(21, n_rep)], dtype=float)
    mean = counts.mean()
    ratio = counts.var(ddof=1) / mean

    lam = approx.probabilities
    mean_theory = float(lam.sum())
    se_mean = math.sqrt(float((lam * (1.0 - lam)).sum()) / n_rep)
    z_mean = (mean - mean_theory) / se_mean
    # one-sided dispersion test: SE of a variance ratio ~ ratio sqrt(2/(n-1))
    se_ratio = ratio * math.sqrt(2.0 / (n_rep - 1))
    z_disp = (1.0 - ratio) / se_ratio

    pois = np.array([
        len(simulate.sample_poisson(0.6, window, s))
        for s in simulate.replicate_seeds(1021, n_rep)], dtype=float)
    pois_ratio = pois.var(ddof=1) / pois.mean()

    ok = ratio < 1.0 and z_disp > 3.0
    ok &= 0.8 <= pois_ratio <= 1.2
    ok &= abs(z_mean) <= 3.0
    assert _line(6, "simulation repulsion", ok,
                 "var/mean=%.3f (z=%.1f one-sided), poisson ratio=%.3f, "
                 "mean=%.1f vs %.1f (z=%.2f)"
                 % (ratio, z_disp, pois_ratio, mean, mean_theory, z_mean))


def _pooled_and_se(patterns, grid):
    pooled = estimate.estimate_kfun(patterns, grid).values
    per = np.array([estimate.estimate_kfun([p], grid).values
                    for p in patterns])
    se = per.std(axis=0, ddof=1) / math.sqrt(len(patterns))
    return pooled, se


def test_criterion_7_estimator_calibration():
    window = simulate.Box(10.0, 10.0, 10.0)
    rho = 0.14
    n_rep = 200
    grid = moments.LagGrid([0.25, 0.5, 1.0], [0.25, 0.5, 1.0])

    pois = [simulate.sample_poisson(rho, window, s)
            for s in simulate.replicate_seeds(2032, n_rep)]
    k_pois, se_pois = _pooled_and_se(pois, grid)
    z_pois = (k_pois[2, 2] - math.pi) / se_pois[2, 2]

    model = kernels.SeparableGaussExpParams(rho=rho, alpha_s=1.0,
                                            alpha_t=1.0)
    approx = simulate.build_spectral_approx(
        model, window, cutoff=(24, 24, 1024), tolerance=5e-3, padding=0.2)
    pats = [simulate.sample_stdpp(approx, window, s)
            for s in simulate.replicate_seeds(32, n_rep)]
    k_dpp, se_dpp = _pooled_and_se(pats, grid)

    z_sep = (k_pois - k_dpp) / np.hypot(se_pois, se_dpp)
    theory = moments.kfun_theoretical(model, grid,
                                      method="quadrature").values
    z_theory = (k_dpp - theory) / se_dpp

    ok = abs(z_pois) <= 3.0
    ok &= bool(np.all(z_sep > 2.0))
    ok &= bool(np.all(np.abs(z_theory) <= 3.0))
    assert _line(7, "estimator calibration", ok,
                 "poisson K(1,1) z=%.2f; repulsion z in [%.1f, %.1f]; "
                 "theory |z| max %.2f"
                 % (z_pois, z_sep.min(), z_sep.max(),
                    np.abs(z_theory).max()))


def test_criterion_8_parameter_recovery():
    true_as, true_at = 0.5, 1.0
    model = kernels.SeparableGaussExpParams(rho=0.62, alpha_s=true_as,
                                            alpha_t=true_at)
    window = simulate.Box(6.0, 6.0, 10.0)
    approx = simulate.build_spectral_approx(
        model, window, cutoff=(24, 24, 640), tolerance=5e-3, padding=0.2)
    pats = [simulate.sample_stdpp(approx, window, s)
            for s in simulate.replicate_seeds(101, 20)]
    grid = moments.LagGrid(np.linspace(0.2, 1.0, 6), np.linspace(0.2, 1.4, 6))
    bounds = {"alpha_s": (0.1, 2.0), "alpha_t": (0.2, 3.0)}
    res = estimate.fit_min_contrast(pats, "sep_gauss_exp", bounds=bounds,
                                    statistic="K", grid=grid)
    err_s = res.model.alpha_s / true_as - 1.0
    err_t = res.model.alpha_t / true_at - 1.0
    ok = res.converged and abs(err_s) <= 0.30 and abs(err_t) <= 0.30
    # deterministic: the same patterns and settings reproduce the fit exactly
    res2 = estimate.fit_min_contrast(pats, "sep_gauss_exp", bounds=bounds,
                                     statistic="K", grid=grid)
    ok &= res2.model == res.model and res2.contrast == res.contrast
    assert _line(8, "parameter recovery", ok,
                 "alpha_s=%.3f (%+.1f%%), alpha_t=%.3f (%+.1f%%), "
                 "deterministic=%s"
                 % (res.model.alpha_s, 100 * err_s,
                    res.model.alpha_t, 100 * err_t,
                    res2.model == res.model))


def test_criterion_9_numeric_inversion():
    probes = [(0.0, 0.0), (0.2, 0.0), (0.0, 0.3), (0.3, 0.2), (0.5, 0.5),
              (0.8, 0.3), (0.2, 0.9), (1.0, 1.0), (1.2, 0.4), (0.6, 1.3)]
    grid = kernels.InversionGrid(tolerance=1e-6)
    worst = 0.0
    ok = True
    for eps, cls in ((1.0, kernels.MaternSeparableParams),
                     (0.0, kernels.MaternNonSeparableParams)):
        mf = kernels.FuentesSpectralParams(gamma=0.5, alpha_s=1.0,
                                           alpha_t=1.0, nu=2.0, epsilon=eps)
        mc = cls(gamma=0.5, alpha_s=1.0, alpha_t=1.0)
        for u, t in probes:
            num = kernels.kernel_value_numeric(mf, u, t, grid).value
            ref = kernels.kernel_value(mc, u, t)
            rel = abs(num - ref) / abs(ref)
            worst = max(worst, rel)
            ok &= rel <= 1e-4
    assert _line(9, "numeric spectral inversion", ok,
                 "max relative error %.2e at 10 probe lags per endpoint"
                 % worst)
