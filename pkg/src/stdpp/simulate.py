"""Spectral simulation of stationary space-time determinantal processes.

The kernel is periodized on a rectangular box B = [0,L1]x[0,L2]x[0,T]; the
Fourier basis e_k(x) = exp(2 pi i k.x/L)/sqrt(|B|) diagonalizes the
periodized kernel with eigenvalues lambda_k = phi(k1/L1, k2/L2, k3/T), where
phi is the full-plane spectral density (see stdpp.kernels for the factor-2
convention of the Matern-type families).  A realization is drawn by the
standard two-stage scheme: select each mode independently with probability
lambda_k, then sample the projection process onto the selected modes one
point at a time, rejecting uniform proposals against the conditional
density.  The point count is the number of selected modes, so

    E[N] = sum lambda_k,   Var[N] = sum lambda_k (1 - lambda_k),

always sub-Poisson.  To reduce wrap-around bias the box is enlarged by a
configurable padding fraction (default 20% per axis) and the realization is
cropped back to the requested window, centered in the padded box; with
padding = 0 the expected count in the window equals sum lambda_k exactly,
otherwise it is sum lambda_k * |W|/|B|.

Randomness comes from numpy's counter-based Philox generator with explicit
integer seeds, so replicates are reproducible for any worker layout.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import (
    InvalidModelError,
    InvalidParameterError,
    RejectionBudgetError,
    TruncationError,
)

__all__ = [
    "SpaceTimePoint",
    "Box",
    "PointPattern",
    "SpectralApproximation",
    "build_spectral_approx",
    "sample_stdpp",
    "sample_poisson",
    "replicate_seeds",
]

DEFAULT_CUTOFF = (48, 48, 48)
DEFAULT_TOLERANCE = 1e-3
DEFAULT_PADDING = 0.2
PROPOSAL_CAP_FACTOR = 500


class SpaceTimePoint(NamedTuple):
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class Box:
    """Observation window [0, x_extent] x [0, y_extent] x [0, t_extent]."""

    x_extent: float
    y_extent: float
    t_extent: float

    def __post_init__(self):
        for name in ("x_extent", "y_extent", "t_extent"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise InvalidParameterError(
                    "Box.%s must be finite and positive, got %r" % (name, v))
            object.__setattr__(self, name, float(v))

    @property
    def extents(self):
        return np.array([self.x_extent, self.y_extent, self.t_extent])

    @property
    def volume(self):
        return self.x_extent * self.y_extent * self.t_extent

    def to_dict(self):
        return {"x": self.x_extent, "y": self.y_extent, "t": self.t_extent}

    @classmethod
    def from_dict(cls, data):
        return cls(data["x"], data["y"], data["t"])


@dataclass(frozen=True)
class PointPattern:
    """A finite point set with its observation window.

    points is an (n, 3) float array of (x, y, t) rows, all inside the
    window, with no two rows identical.
    """

    points: np.ndarray
    window: Box
    seed_provenance: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InvalidParameterError(
                "points must be an (n, 3) array, got shape %s"
                % (pts.shape,))
        if pts.size and not np.all(np.isfinite(pts)):
            raise InvalidParameterError("points must be finite")
        ext = self.window.extents
        if pts.size and (np.any(pts < -1e-12) or np.any(pts > ext + 1e-12)):
            raise InvalidParameterError("points must lie inside the window")
        if pts.shape[0] > 1:
            if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
                raise InvalidParameterError("points must be distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    def point_list(self):
        return [SpaceTimePoint(*row) for row in self.points]


@dataclass(frozen=True)
class SpectralApproximation:
    """Truncated lattice spectrum of the periodized kernel."""

    modes: np.ndarray            # (m, 3) integer lattice indices
    probabilities: np.ndarray    # (m,) Bernoulli inclusion probabilities
    truncation_mass: float       # spectral mass beyond the cutoff
    box: Box                     # padded simulation box
    window: Box                  # requested observation window
    model: object = None
    cutoff: tuple = None
    tolerance: float = None
    padding: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=float)
        if probs.size and (probs.min() < 0.0 or probs.max() >= 1.0):
            raise InvalidModelError(
                "mode probabilities must lie in [0, 1); the model is at or "
                "beyond the existence boundary")
        object.__setattr__(self, "probabilities", probs)

    @property
    def expected_modes(self):
        return float(self.probabilities.sum())

    @property
    def expected_count(self):
        """Expected number of points after cropping to the window."""
        return self.expected_modes * self.window.volume / self.box.volume


def _as_cutoff(cutoff):
    if np.isscalar(cutoff):
        cutoff = (cutoff, cutoff, cutoff)
    c = tuple(int(v) for v in cutoff)
    if len(c) != 3 or any(v < 1 for v in c):
        raise InvalidParameterError(
            "cutoff must be a positive integer per axis, got %r" % (cutoff,))
    return c


def build_spectral_approx(model, window, cutoff=DEFAULT_CUTOFF,
                          tolerance=DEFAULT_TOLERANCE,
                          padding=DEFAULT_PADDING):
    """Enumerate lattice modes |k_i| <= cutoff_i and their probabilities.

    The simulation box is the window enlarged by `padding` per axis.  The
    spectral mass discarded by the cutoff is estimated against the exact
    total mass integral(phi) * |B| = C0(0,0) * |B|; if its share exceeds
    `tolerance` a TruncationError suggests a larger cutoff.
    """
    report = kernels.validate_existence(model)
    if not report.valid:
        raise InvalidModelError(
            "cannot simulate an invalid model (phi_max = %.6g >= 1)"
            % report.phi_max)
    if not isinstance(window, Box):
        raise InvalidParameterError("window must be a Box")
    cutoff = _as_cutoff(cutoff)
    if not (isinstance(padding, (int, float)) and math.isfinite(padding)
            and padding >= 0.0):
        raise InvalidParameterError("padding must be >= 0")
    box = Box(*(window.extents * (1.0 + padding)))

    k1 = np.arange(-cutoff[0], cutoff[0] + 1)
    k2 = np.arange(-cutoff[1], cutoff[1] + 1)
    k3 = np.arange(-cutoff[2], cutoff[2] + 1)
    lam = kernels.sampling_spectral_density(
        model,
        (k1 / box.x_extent)[:, None, None],
        (k2 / box.y_extent)[None, :, None],
        (k3 / box.t_extent)[None, None, :],
    )
    modes = np.stack(np.meshgrid(k1, k2, k3, indexing="ij"),
                     axis=-1).reshape(-1, 3)
    probs = np.asarray(lam, dtype=float).reshape(-1)

    total_mass = kernels.intensity(model) * box.volume
    trunc = max(0.0, total_mass - float(probs.sum()))
    if total_mass > 0 and trunc / total_mass > tolerance:
        raise TruncationError(
            "truncated spectral mass fraction %.3g exceeds tolerance %.1g; "
            "increase the cutoff (currently %d,%d,%d)"
            % (trunc / total_mass, tolerance, cutoff[0], cutoff[1],
               cutoff[2]))
    return SpectralApproximation(
        modes=modes, probabilities=probs, truncation_mass=trunc,
        box=box, window=window, model=model, cutoff=cutoff,
        tolerance=tolerance, padding=float(padding))


def _rng(seed):
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        raise InvalidParameterError("seed must be an integer, got %r"
                                    % (seed,))
    if seed < 0:
        raise InvalidParameterError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def replicate_seeds(seed, n):
    """Derive n per-replicate child seeds from one root seed."""
    state = np.random.SeedSequence(int(seed)).generate_state(n, np.uint64)
    return [int(s) for s in state]


def sample_stdpp(approx, window, seed):
    """One realization of the determinantal process; deterministic in seed.

    Modes are Bernoulli-selected with the approximation's probabilities;
    the projection process onto the selected modes is then sampled
    sequentially by rejection from uniform proposals, with a proposal cap
    of 500 * (number of selected modes) per accepted point.
    """
    if not isinstance(approx, SpectralApproximation):
        raise InvalidParameterError("approx must be a SpectralApproximation")
    if not isinstance(window, Box) or not np.allclose(
            window.extents, approx.window.extents, rtol=1e-12, atol=0.0):
        raise InvalidParameterError(
            "the spectral approximation was built for a different window")
    rng = _rng(seed)
    provenance = "philox:%d" % int(seed)

    sel = rng.random(approx.probabilities.size) < approx.probabilities
    m = int(np.count_nonzero(sel))
    if m == 0:
        return PointPattern(points=np.empty((0, 3)), window=window,
                            seed_provenance=provenance)

    ext = approx.box.extents
    vol = approx.box.volume
    # phase matrix: exp(i x.Wrow) with Wrow = 2 pi k / L
    W = 2.0 * math.pi * approx.modes[sel].astype(float) / ext[None, :]
    norm = 1.0 / math.sqrt(vol)
    cap = PROPOSAL_CAP_FACTOR * m
    batch = 128

    accepted = np.empty((m, 3))
    basis = np.zeros((m, m), dtype=np.complex128)  # orthonormal columns

    x0 = rng.random(3) * ext
    accepted[0] = x0
    v = np.exp(1j * (W @ x0)) * norm
    basis[:, 0] = v / math.sqrt(m / vol)

    for i in range(1, m):
        cols = basis[:, :i]
        found = False
        proposals = 0
        while proposals < cap:
            nb = min(batch, cap - proposals)
            X = rng.random((nb, 3)) * ext
            P = np.exp(1j * (X @ W.T)) * norm
            C = P @ np.conj(cols)
            q = m / vol - np.einsum("ij,ij->i", C, np.conj(C)).real
            np.clip(q, 0.0, None, out=q)
            accept = rng.random(nb) < q * (vol / m)
            proposals += nb
            hits = np.nonzero(accept)[0]
            if hits.size:
                idx = int(hits[0])
                xnew = X[idx]
                v = P[idx]
                coeff = C[idx]
                found = True
                break
        if not found:
            raise RejectionBudgetError(
                "no acceptance within %d proposals while placing point %d "
                "of %d; the projection is numerically degenerate" %
                (cap, i + 1, m))
        r = v - cols @ coeff
        r = r - cols @ (np.conj(cols.T) @ r)  # second pass for stability
        rnorm = math.sqrt(np.vdot(r, r).real)
        if rnorm < 1e-9 * math.sqrt(m / vol):
            raise RejectionBudgetError(
                "degenerate projection residual while orthonormalizing "
                "point %d of %d" % (i + 1, m))
        basis[:, i] = r / rnorm
        accepted[i] = xnew

    # crop to the window centered inside the padded box
    off = (ext - window.extents) / 2.0
    inside = np.all((accepted >= off) & (accepted <= off + window.extents),
                    axis=1)
    pts = accepted[inside] - off
    return PointPattern(points=pts, window=window,
                        seed_provenance=provenance)


def sample_poisson(rho, window, seed):
    """Homogeneous Poisson baseline on the window; deterministic in seed."""
    if not (isinstance(rho, (int, float)) and math.isfinite(rho) and rho > 0):
        raise InvalidParameterError("rho must be finite and positive")
    if not isinstance(window, Box):
        raise InvalidParameterError("window must be a Box")
    rng = _rng(seed)
    n = int(rng.poisson(rho * window.volume))
    pts = rng.random((n, 3)) * window.extents
    return PointPattern(points=pts, window=window,
                        seed_provenance="philox:%d" % int(seed))
