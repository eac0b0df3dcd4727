"""Stationary spatio-temporal kernels and their spectral densities.

A determinantal point process on R^2 x R with a stationary kernel C0 exists
iff the spectral density phi = F[C0] satisfies phi <= 1; this module enforces
the strict inequality (the spectral sampler needs Bernoulli probabilities
below 1).  Four families are provided.

sep_gauss_exp
    C0(u, t) = rho sigma2_s sigma2_t exp(-|u|^2/alpha_s^2 - |t|/alpha_t)
    phi(w, tau) = 2 pi rho alpha_s^2 alpha_t sigma2_s sigma2_t
                  exp(-pi^2 alpha_s^2 |w|^2) / (1 + 4 pi^2 alpha_t^2 tau^2)
    alpha_s is a spatial range (a length) and alpha_t a time scale; larger
    alpha means longer range.  The alpha_s^2 scaling in the exponent is
    forced by the spectral density: exp(-|u|^2/alpha_s^2) and
    pi alpha_s^2 exp(-pi^2 alpha_s^2 |w|^2) are the Fourier pair that
    reproduces rho_max = 1/(2 pi alpha_s^2 alpha_t sigma2_s sigma2_t).

matern_sep  (separable Matern type, smoothness fixed at nu = 2)
    C0(u, t) = rho (2 pi alpha_t |t| + 1) exp(-2 pi alpha_t |t|)
               (2 pi alpha_s |u|) K_1(2 pi alpha_s |u|)
    with rho = gamma pi^2 / (4 alpha_s^2 alpha_t^3).

matern_nonsep  (fully non-separable companion, nu = 2)
    C0(u, t) = rho exp(-2 pi sqrt(alpha_t^2 t^2 + alpha_s^2 |u|^2))
    with rho = gamma pi^2 / (2 alpha_s^2 alpha_t^3).

fuentes  (interaction parameter epsilon in [0, 1], smoothness nu > 3/2)
    phi(w, tau) = gamma (alpha_s^2 alpha_t^2 + alpha_t^2 |w|^2
                  + alpha_s^2 tau^2 + epsilon |w|^2 tau^2)^(-nu)
    epsilon = 1 factorizes into spatial and temporal Matern spectra and
    epsilon = 0 gives matern_nonsep; between the endpoints the kernel has no
    closed form and is computed by numeric inversion (kernel_value_numeric).
    In these three families alpha_s, alpha_t act as inverse ranges: larger
    alpha means shorter range, the opposite of the separable family above.
    Each family keeps its native parameterization.

Spectral conventions.  The closed-form Matern-type kernels pair with phi
through a half-line temporal-frequency convention:

    C0(u, t) = (1/2) * Integral_{R^3} phi(w, tau) e^{2 pi i (w.u + tau t)},

so the full-plane spectral density matching those kernels is phi/2, and
integral(phi/2) = C0(0, 0).  Existence bookkeeping uses phi itself (its
maximum is what must stay below 1), while numeric inversion and spectral
simulation use phi/2.  The separable family's phi is already a full-plane
density and is used unchanged everywhere.
"""

import json
import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import integrate
from scipy.special import gamma as _gamma_fn

from . import specialfn
from .errors import (
    GridTooCoarseError,
    InvalidParameterError,
    UnsupportedFamilyError,
)

__all__ = [
    "SeparableGaussExpParams",
    "MaternSeparableParams",
    "MaternNonSeparableParams",
    "FuentesSpectralParams",
    "InversionGrid",
    "InversionResult",
    "ValidationReport",
    "kernel_value",
    "kernel_value_numeric",
    "spectral_density",
    "validate_existence",
    "intensity",
    "rho_max",
    "model_from_dict",
    "model_to_dict",
    "FAMILIES",
]


def _require_positive(obj, names):
    for name in names:
        v = getattr(obj, name)
        if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
            raise InvalidParameterError(
                "%s.%s must be a finite positive number, got %r"
                % (type(obj).__name__, name, v))
        object.__setattr__(obj, name, float(v))


@dataclass(frozen=True)
class SeparableGaussExpParams:
    """Gaussian-in-space, exponential-in-time separable kernel parameters."""

    rho: float
    sigma2_s: float = 1.0
    sigma2_t: float = 1.0
    alpha_s: float = 1.0
    alpha_t: float = 1.0

    family = "sep_gauss_exp"

    def __post_init__(self):
        _require_positive(
            self, ("rho", "sigma2_s", "sigma2_t", "alpha_s", "alpha_t"))


@dataclass(frozen=True)
class MaternSeparableParams:
    """Separable Matern-type parameters (epsilon = 1, nu = 2)."""

    gamma: float
    alpha_s: float = 1.0
    alpha_t: float = 1.0

    family = "matern_sep"
    nu = 2.0
    epsilon = 1.0

    def __post_init__(self):
        _require_positive(self, ("gamma", "alpha_s", "alpha_t"))


@dataclass(frozen=True)
class MaternNonSeparableParams:
    """Fully non-separable Matern-type parameters (epsilon = 0, nu = 2)."""

    gamma: float
    alpha_s: float = 1.0
    alpha_t: float = 1.0

    family = "matern_nonsep"
    nu = 2.0
    epsilon = 0.0

    def __post_init__(self):
        _require_positive(self, ("gamma", "alpha_s", "alpha_t"))


@dataclass(frozen=True)
class FuentesSpectralParams:
    """General interaction family, numeric-only kernel for epsilon in (0, 1).

    nu must exceed 3/2 (integrability of the spectral density on R^3) and
    epsilon lies in [0, 1].
    """

    gamma: float
    alpha_s: float = 1.0
    alpha_t: float = 1.0
    nu: float = 2.0
    epsilon: float = 0.0

    family = "fuentes"

    def __post_init__(self):
        _require_positive(self, ("gamma", "alpha_s", "alpha_t"))
        if not isinstance(self.nu, (int, float)) or not math.isfinite(self.nu) \
                or self.nu <= 1.5:
            raise InvalidParameterError(
                "fuentes smoothness nu must be finite and > 3/2, got %r"
                % (self.nu,))
        if not isinstance(self.epsilon, (int, float)) \
                or not math.isfinite(self.epsilon) \
                or not 0.0 <= self.epsilon <= 1.0:
            raise InvalidParameterError(
                "fuentes interaction epsilon must lie in [0, 1], got %r"
                % (self.epsilon,))
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "epsilon", float(self.epsilon))


FAMILIES = {
    "sep_gauss_exp": SeparableGaussExpParams,
    "matern_sep": MaternSeparableParams,
    "matern_nonsep": MaternNonSeparableParams,
    "fuentes": FuentesSpectralParams,
}

_MATERN_LIKE = (MaternSeparableParams, MaternNonSeparableParams,
                FuentesSpectralParams)


def _check_model(model):
    if not isinstance(model, tuple(FAMILIES.values())):
        raise InvalidParameterError(
            "expected a kernel model instance, got %r" % (model,))


def _interaction_integral(epsilon, nu):
    """I(eps, nu) = Integral_R (1+s^2)^(1-nu) (1+eps s^2)^(-1) ds.

    Closed forms at the endpoints, adaptive quadrature in between.
    """
    if epsilon == 0.0:
        return math.sqrt(math.pi) * _gamma_fn(nu - 1.5) / _gamma_fn(nu - 1.0)
    if epsilon == 1.0:
        return math.sqrt(math.pi) * _gamma_fn(nu - 0.5) / _gamma_fn(nu)
    val, _ = integrate.quad(
        lambda s: (1.0 + s * s) ** (1.0 - nu) / (1.0 + epsilon * s * s),
        0.0, np.inf, epsabs=1e-13, epsrel=1e-12)
    return 2.0 * val


def intensity(model):
    """C0(0, 0), the expected number of points per unit space-time volume."""
    _check_model(model)
    if isinstance(model, SeparableGaussExpParams):
        return model.rho * model.sigma2_s * model.sigma2_t
    if isinstance(model, MaternSeparableParams):
        return model.gamma * math.pi ** 2 / (
            4.0 * model.alpha_s ** 2 * model.alpha_t ** 3)
    if isinstance(model, MaternNonSeparableParams):
        return model.gamma * math.pi ** 2 / (
            2.0 * model.alpha_s ** 2 * model.alpha_t ** 3)
    a2 = model.alpha_s ** 2 * model.alpha_t ** 2
    pref = model.gamma * a2 ** (-model.nu) * model.alpha_s ** 2 * model.alpha_t
    return pref * math.pi * _interaction_integral(model.epsilon, model.nu) / (
        2.0 * (model.nu - 1.0))


def rho_max(model):
    """Largest intensity for which the family remains a valid DPP kernel.

    For the separable family this bounds the rho parameter (the scale at
    which phi(0,0) reaches 1); for the Matern-type families it bounds the
    intensity itself.
    """
    _check_model(model)
    if isinstance(model, SeparableGaussExpParams):
        return 1.0 / (2.0 * math.pi * model.alpha_s ** 2 * model.alpha_t
                      * model.sigma2_s * model.sigma2_t)
    if isinstance(model, MaternSeparableParams):
        return math.pi ** 2 * model.alpha_s ** 2 * model.alpha_t / 4.0
    if isinstance(model, MaternNonSeparableParams):
        return math.pi ** 2 * model.alpha_s ** 2 * model.alpha_t / 2.0
    # linear in gamma: scale the intensity up to the critical gamma
    gamma_max = (model.alpha_s ** 2 * model.alpha_t ** 2) ** model.nu
    return intensity(model) * gamma_max / model.gamma


def _norm_u(u):
    if np.isscalar(u):
        r = float(u)
        if not math.isfinite(r):
            raise InvalidParameterError("spatial lag must be finite")
        return abs(r)
    arr = np.asarray(u, dtype=float)
    if arr.shape != (2,):
        raise InvalidParameterError(
            "spatial lag must be a scalar distance or a 2-vector, got shape %s"
            % (arr.shape,))
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("spatial lag must be finite")
    return float(np.hypot(arr[0], arr[1]))


def kernel_value(model, u, t):
    """C0(u, t) for the closed-form families.

    u is a 2-vector spatial lag or a scalar distance; t a temporal lag.
    Fuentes models are accepted only at epsilon in {0, 1} with nu = 2 (the
    closed forms); anything else raises UnsupportedFamilyError and points to
    kernel_value_numeric.
    """
    _check_model(model)
    r = _norm_u(u)
    tt = abs(float(t))
    if not math.isfinite(tt):
        raise InvalidParameterError("temporal lag must be finite")
    if isinstance(model, SeparableGaussExpParams):
        return (model.rho * model.sigma2_s * model.sigma2_t
                * math.exp(-r * r / model.alpha_s ** 2 - tt / model.alpha_t))
    if isinstance(model, FuentesSpectralParams):
        if model.epsilon not in (0.0, 1.0) or model.nu != 2.0:
            raise UnsupportedFamilyError(
                "no closed-form kernel for fuentes with epsilon=%g, nu=%g; "
                "use kernel_value_numeric" % (model.epsilon, model.nu))
        cls = MaternSeparableParams if model.epsilon == 1.0 \
            else MaternNonSeparableParams
        model = cls(gamma=model.gamma, alpha_s=model.alpha_s,
                    alpha_t=model.alpha_t)
    rho = intensity(model)
    if isinstance(model, MaternSeparableParams):
        zt = 2.0 * math.pi * model.alpha_t * tt
        zs = 2.0 * math.pi * model.alpha_s * r
        return rho * (zt + 1.0) * math.exp(-zt) * specialfn.x_times_k1(zs)
    zt = model.alpha_t * tt
    zs = model.alpha_s * r
    return rho * math.exp(-2.0 * math.pi * math.hypot(zt, zs))


def _phi_fuentes(gamma, alpha_s, alpha_t, nu, epsilon, w2, tau):
    base = (alpha_s ** 2 * alpha_t ** 2 + alpha_t ** 2 * w2
            + alpha_s ** 2 * tau ** 2 + epsilon * w2 * tau ** 2)
    return gamma * base ** (-nu)


def spectral_density(model, omega, tau):
    """phi(omega, tau); omega is a 2-vector frequency or a scalar norm."""
    _check_model(model)
    w = _norm_u(omega)
    tauf = float(tau)
    if not math.isfinite(tauf):
        raise InvalidParameterError("temporal frequency must be finite")
    if isinstance(model, SeparableGaussExpParams):
        return (2.0 * math.pi * model.rho * model.alpha_s ** 2 * model.alpha_t
                * model.sigma2_s * model.sigma2_t
                * math.exp(-math.pi ** 2 * model.alpha_s ** 2 * w * w)
                / (1.0 + 4.0 * math.pi ** 2 * model.alpha_t ** 2 * tauf ** 2))
    return _phi_fuentes(model.gamma, model.alpha_s, model.alpha_t,
                        model.nu, model.epsilon, w * w, tauf)


def sampling_spectral_density(model, w1, w2, tau):
    """Full-plane spectral density used for inversion and mode probabilities.

    Vectorized over frequency arrays.  Equals phi for the separable family
    and phi/2 for the Matern-type families (see the module notes on the
    half-line convention).
    """
    _check_model(model)
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    tau = np.asarray(tau, dtype=float)
    wsq = w1 * w1 + w2 * w2
    if isinstance(model, SeparableGaussExpParams):
        return (2.0 * math.pi * model.rho * model.alpha_s ** 2 * model.alpha_t
                * model.sigma2_s * model.sigma2_t
                * np.exp(-math.pi ** 2 * model.alpha_s ** 2 * wsq)
                / (1.0 + 4.0 * math.pi ** 2 * model.alpha_t ** 2 * tau ** 2))
    return 0.5 * _phi_fuentes(model.gamma, model.alpha_s, model.alpha_t,
                              model.nu, model.epsilon, wsq, tau)


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    phi_max: float
    rho: float
    rho_max: float
    family: str


def validate_existence(model):
    """Existence check: valid iff phi(0, 0) < 1 (strict).

    The report carries the model intensity rho = C0(0,0), the family's
    maximal admissible intensity scale rho_max and phi_max = phi(0,0).
    Invalid models produce valid=False, never an exception.
    """
    _check_model(model)
    phi0 = spectral_density(model, 0.0, 0.0)
    return ValidationReport(
        valid=bool(phi0 < 1.0),
        phi_max=float(phi0),
        rho=float(intensity(model)),
        rho_max=float(rho_max(model)),
        family=model.family,
    )


@dataclass(frozen=True)
class InversionGrid:
    """Controls for the numeric spectral inversion.

    cutoff_s, cutoff_t: frequency cutoffs per axis (defaults 8*alpha_s,
    8*alpha_t, eight spectral widths).  resolution_s, resolution_t: per-axis
    subdivision budgets.  The spatial axes are integrated in closed form
    (exactly), so only the temporal members steer the quadrature: the finite
    oscillatory segment runs to cutoff_t with at most resolution_t adaptive
    subdivisions, and the remainder is handled by an infinite-range rule.
    tolerance bounds the acceptable relative error estimate.
    """

    cutoff_s: float = None
    cutoff_t: float = None
    resolution_s: int = 256
    resolution_t: int = 256
    tolerance: float = 1e-4

    def __post_init__(self):
        for name in ("cutoff_s", "cutoff_t"):
            v = getattr(self, name)
            if v is not None and (not math.isfinite(v) or v <= 0):
                raise InvalidParameterError("%s must be positive" % name)
        for name in ("resolution_s", "resolution_t"):
            v = getattr(self, name)
            if int(v) < 1:
                raise InvalidParameterError("%s must be >= 1" % name)
            object.__setattr__(self, name, int(v))
        if not (math.isfinite(self.tolerance) and self.tolerance > 0):
            raise InvalidParameterError("tolerance must be positive")


@dataclass(frozen=True)
class InversionResult:
    value: float
    error_estimate: float

    def __float__(self):
        return self.value


def _as_fuentes(model):
    if isinstance(model, FuentesSpectralParams):
        return model
    if isinstance(model, MaternSeparableParams):
        return FuentesSpectralParams(gamma=model.gamma, alpha_s=model.alpha_s,
                                     alpha_t=model.alpha_t, nu=2.0,
                                     epsilon=1.0)
    if isinstance(model, MaternNonSeparableParams):
        return FuentesSpectralParams(gamma=model.gamma, alpha_s=model.alpha_s,
                                     alpha_t=model.alpha_t, nu=2.0,
                                     epsilon=0.0)
    raise UnsupportedFamilyError(
        "numeric inversion applies to the Matern-type spectral families, "
        "not %r" % (model.family,))


def _quad_part(func, a, b, **kw):
    out = integrate.quad(func, a, b, full_output=1, **kw)
    val, err = out[0], out[1]
    ok = len(out) < 4  # a 4th element is QUADPACK's trouble explanation
    return val, err, ok


def kernel_value_numeric(params, u, t, grid=None):
    """Kernel value by numeric inversion of the full-plane spectral density.

    After exact angular and radial integration over the spatial frequencies
    the inversion reduces to a one-dimensional cosine integral over the
    scaled temporal frequency s = tau/alpha_t:

        C0(u, t) = Q Integral_0^inf cos(2 pi at |t| s) G(s) ds,
        G(s) = (1 + eps s^2)^(-1) (1 + s^2)^(1-nu) H_nu(2 pi as |u| m(s)),
        m(s) = sqrt((1 + s^2)/(1 + eps s^2)),
        H_nu(z) = (2 pi / Gamma(nu)) (z/2)^(nu-1) K_{nu-1}(z),
        Q = gamma (alpha_s^2 alpha_t^2)^(-nu) alpha_s^2 alpha_t,

    with H_nu(0) = pi/(nu - 1).  The finite segment [0, cutoff] uses an
    oscillatory-weighted adaptive rule, the tail an infinite-range rule.
    Returns an InversionResult(value, error_estimate); raises
    GridTooCoarseError when the error estimate exceeds grid.tolerance
    relative to the kernel scale.
    """
    params = _as_fuentes(params)
    if grid is None:
        grid = InversionGrid()
    r = _norm_u(u)
    tt = abs(float(t))
    if not math.isfinite(tt):
        raise InvalidParameterError("temporal lag must be finite")
    nu = params.nu
    eps = params.epsilon
    rt = params.alpha_s * r
    ts = params.alpha_t * tt
    a2 = params.alpha_s ** 2 * params.alpha_t ** 2
    q_pref = params.gamma * a2 ** (-nu) * params.alpha_s ** 2 * params.alpha_t
    h0 = math.pi / (nu - 1.0)
    gam_nu = _gamma_fn(nu)

    def integrand(s):
        s2 = s * s
        a = 1.0 + s2
        b = 1.0 + eps * s2
        if rt == 0.0:
            h = h0
        else:
            z = 2.0 * math.pi * rt * math.sqrt(a / b)
            kval = specialfn.bessel_k(nu - 1.0, z)
            h = 0.0 if kval == 0.0 else (
                2.0 * math.pi / gam_nu) * (0.5 * z) ** (nu - 1.0) * kval
        return a ** (1.0 - nu) / b * h

    # dimensionless segment end: cutoff_t is a temporal frequency, s = tau/alpha_t
    cutoff_t = grid.cutoff_t if grid.cutoff_t is not None \
        else 8.0 * params.alpha_t
    s_max = cutoff_t / params.alpha_t
    limit = grid.resolution_t
    scale = max(intensity(params), 1e-300)
    # Request 0.4x of the acceptance floor per segment so that the two
    # segment errors together stay inside the final tolerance gate.
    eps_abs = 0.4 * grid.tolerance * (1e-3 * scale) / max(q_pref, 1e-300)

    if ts == 0.0:
        v1, e1, ok1 = _quad_part(integrand, 0.0, s_max,
                                 epsabs=eps_abs, epsrel=1e-11, limit=limit)
        v2, e2, ok2 = _quad_part(integrand, s_max, np.inf,
                                 epsabs=eps_abs, epsrel=1e-11, limit=limit)
    else:
        wvar = 2.0 * math.pi * ts
        v1, e1, ok1 = _quad_part(integrand, 0.0, s_max, weight="cos",
                                 wvar=wvar, epsabs=eps_abs, epsrel=1e-11,
                                 limit=limit)
        v2, e2, ok2 = _quad_part(integrand, s_max, np.inf, weight="cos",
                                 wvar=wvar, epsabs=eps_abs,
                                 limlst=max(limit, 10), limit=limit)
    value = q_pref * (v1 + v2)
    err = q_pref * (e1 + e2)
    if not (ok1 and ok2) or not math.isfinite(value) \
            or err > grid.tolerance * max(abs(value), 1e-3 * scale):
        raise GridTooCoarseError(
            "inversion error estimate %.3e exceeds tolerance %.1e at "
            "(|u|=%g, t=%g); increase the grid resolution or cutoff"
            % (err, grid.tolerance, r, tt))
    return InversionResult(value=float(value), error_estimate=float(err))


def model_to_dict(model):
    """Flat JSON-ready dict with a 'family' discriminator."""
    _check_model(model)
    out = {"family": model.family}
    for f in fields(model):
        out[f.name] = getattr(model, f.name)
    if isinstance(model, _MATERN_LIKE) and not isinstance(
            model, FuentesSpectralParams):
        out["nu"] = model.nu
        out["epsilon"] = model.epsilon
    return out


def model_from_dict(data):
    """Inverse of model_to_dict; ignores redundant fixed fields."""
    if not isinstance(data, dict):
        raise InvalidParameterError("model must be a JSON object")
    try:
        family = data["family"]
    except KeyError:
        raise InvalidParameterError("model is missing the 'family' field")
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise InvalidParameterError(
            "unknown family %r; expected one of %s"
            % (family, sorted(FAMILIES)))
    names = {f.name for f in fields(cls)}
    kwargs = {}
    for key, val in data.items():
        if key == "family":
            continue
        if key in names:
            kwargs[key] = val
        elif key in ("nu", "epsilon") and cls is not FuentesSpectralParams:
            fixed = getattr(cls, key)
            if float(val) != fixed:
                raise InvalidParameterError(
                    "%s fixes %s = %g; got %r (use the fuentes family for "
                    "other values)" % (family, key, fixed, val))
        else:
            raise InvalidParameterError(
                "unknown field %r for family %r" % (key, family))
    return cls(**kwargs)


def model_json(model):
    return json.dumps(model_to_dict(model), sort_keys=True)
