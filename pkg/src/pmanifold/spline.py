"""d-dimensional cubic smoothing splines.

A spline is fitted to an ordered point sequence by minimizing, per
dimension,

    p * sum_i |y_i - S(l_i)|^2  +  (1 - p) * integral of S''(l)^2,

over natural cubic splines with knots at the normalized cumulative
chord lengths l_i of the input ordering.  The minimizer is obtained
from the classic banded linear system for penalized natural splines
(solved once for all dimensions).  p is clamped to [1e-6, 1]: at the
lower end the fit degenerates to the least-squares line through the
data, at p = 1 it interpolates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

from .errors import AlgorithmFailure, DataFormatError

P_MIN = 1e-6

_GL_NODES = np.polynomial.legendre.leggauss(5)[0]
_GL_WEIGHTS = np.polynomial.legendre.leggauss(5)[1]


@dataclass
class SmoothingSpline:
    """Piecewise-cubic curve on [0, 1] in d dimensions.

    ``coefficients[i, c, j]`` is the coefficient of ``(l - knots[i])**c``
    for dimension j on knot interval i.  Value, first, and second
    derivatives are continuous at interior knots and the second
    derivative vanishes at both ends (natural boundary).
    """

    knots: np.ndarray                 # (m,), increasing in [0, 1]
    coefficients: np.ndarray          # (m-1, 4, d)
    p: float
    d: int = field(default=0)

    def __post_init__(self):
        self.knots = np.asarray(self.knots, dtype=float)
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.ndim != 3 or self.coefficients.shape[1] != 4:
            raise DataFormatError("coefficients must have shape (m-1, 4, d)")
        if self.knots.size != self.coefficients.shape[0] + 1:
            raise DataFormatError("knot count must be one more than interval count")
        if np.any(np.diff(self.knots) <= 0):
            raise DataFormatError("knots must be strictly increasing")
        self.d = self.coefficients.shape[2]

    # -- evaluation ----------------------------------------------------

    def _interval(self, lam: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.knots, lam, side="right") - 1
        return np.clip(idx, 0, len(self.knots) - 2)

    def value(self, lam) -> np.ndarray:
        """Point(s) on the curve; outside [0, 1] the boundary piece is
        extended linearly."""
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        lo, hi = self.knots[0], self.knots[-1]
        clipped = np.clip(lam_arr, lo, hi)
        idx = self._interval(clipped)
        dt = clipped - self.knots[idx]
        c = self.coefficients[idx]  # (k, 4, d)
        out = ((c[:, 3] * dt[:, None] + c[:, 2]) * dt[:, None] + c[:, 1]) * dt[:, None] + c[:, 0]
        below = lam_arr < lo
        above = lam_arr > hi
        if np.any(below):
            out[below] += np.outer(lam_arr[below] - lo, self._derivative_at(lo))
        if np.any(above):
            out[above] += np.outer(lam_arr[above] - hi, self._derivative_at(hi))
        if np.isscalar(lam) or np.ndim(lam) == 0:
            return out[0]
        return out

    def __call__(self, lam) -> np.ndarray:
        return self.value(lam)

    def _derivative_at(self, lam) -> np.ndarray:
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        clipped = np.clip(lam_arr, self.knots[0], self.knots[-1])
        idx = self._interval(clipped)
        dt = clipped - self.knots[idx]
        c = self.coefficients[idx]
        out = (3.0 * c[:, 3] * dt[:, None] + 2.0 * c[:, 2]) * dt[:, None] + c[:, 1]
        if np.isscalar(lam) or np.ndim(lam) == 0:
            return out[0]
        return out

    def derivative(self, lam) -> np.ndarray:
        """dS/dl; constant beyond the ends (linear extension)."""
        return self._derivative_at(lam)

    def second_derivative(self, lam) -> np.ndarray:
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        clipped = np.clip(lam_arr, self.knots[0], self.knots[-1])
        idx = self._interval(clipped)
        dt = clipped - self.knots[idx]
        c = self.coefficients[idx]
        out = 6.0 * c[:, 3] * dt[:, None] + 2.0 * c[:, 2]
        if np.isscalar(lam) or np.ndim(lam) == 0:
            return out[0]
        return out

    def tangent(self, lam) -> np.ndarray:
        """Unit tangent(s).

        A vanishing derivative falls back to the chord of the owning
        interval, then to the overall chord of the curve.
        """
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        der = np.atleast_2d(self._derivative_at(lam_arr))
        norms = np.linalg.norm(der, axis=1)
        bad = norms < 1e-12
        if np.any(bad):
            idx = self._interval(np.clip(lam_arr[bad], self.knots[0], self.knots[-1]))
            knot_vals = self.value(self.knots)
            chords = knot_vals[idx + 1] - knot_vals[idx]
            cnorm = np.linalg.norm(chords, axis=1)
            flat = cnorm < 1e-12
            if np.any(flat):
                overall = knot_vals[-1] - knot_vals[0]
                onorm = np.linalg.norm(overall)
                overall = overall / onorm if onorm > 1e-12 else np.eye(self.d)[0]
                chords[flat] = overall
                cnorm[flat] = 1.0
            der[bad] = chords / np.where(cnorm < 1e-12, 1.0, cnorm)[:, None]
            norms = np.linalg.norm(der, axis=1)
        out = der / norms[:, None]
        if np.isscalar(lam) or np.ndim(lam) == 0:
            return out[0]
        return out

    def eval(self, lam) -> tuple[np.ndarray, np.ndarray]:
        """Point and unit tangent at ``lam``."""
        return self.value(lam), self.tangent(lam)

    # -- arc length ----------------------------------------------------

    def _piece_quadrature(self, a: float, b: float, min_subintervals: int = 256) -> float:
        """Composite Gauss-Legendre arc integral over [a, b], which must
        lie within a single knot interval (speed smooth there)."""
        if b <= a:
            return 0.0
        n = max(2, int(np.ceil((b - a) * min_subintervals)))
        edges = np.linspace(a, b, n + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        pts = (mid[:, None] + np.outer(half, _GL_NODES)).ravel()
        wts = np.outer(half, _GL_WEIGHTS).ravel()
        speed = np.linalg.norm(self._derivative_at(pts), axis=1)
        return float(speed @ wts)

    def _knot_cumulative(self) -> np.ndarray:
        cached = getattr(self, "_knot_arc", None)
        if cached is None:
            pieces = [self._piece_quadrature(a, b) for a, b in zip(self.knots[:-1], self.knots[1:])]
            cached = np.concatenate([[0.0], np.cumsum(pieces)])
            object.__setattr__(self, "_knot_arc", cached)
        return cached

    def _cumulative_length(self, t: float) -> float:
        """Arc length from parameter 0 to t.

        Quadrature subintervals align with knot boundaries and number at
        least 256 per unit of parameter; the cumulative values at knots
        are cached so repeated arc measurements stay cheap.
        """
        t = float(t)
        if t <= 0.0:
            return t * float(np.linalg.norm(self._derivative_at(self.knots[0])))
        cum = self._knot_cumulative()
        if t > self.knots[-1]:
            tail = (t - self.knots[-1]) * float(np.linalg.norm(self._derivative_at(self.knots[-1])))
            return float(cum[-1]) + tail
        idx = int(np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, len(self.knots) - 2))
        return float(cum[idx]) + self._piece_quadrature(float(self.knots[idx]), t)

    def arc_length(self, lam_a: float, lam_b: float) -> float:
        """Signed arc length from lam_a to lam_b.

        Defined as L(lam_b) - L(lam_a) for the cumulative length L, so
        arc(a, b) + arc(b, c) = arc(a, c) holds to rounding error.
        """
        return self._cumulative_length(float(lam_b)) - self._cumulative_length(float(lam_a))

    # -- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "knots": self.knots.tolist(),
            # one (intervals x 4) coefficient table per dimension
            "coefficients": [self.coefficients[:, :, j].tolist() for j in range(self.d)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SmoothingSpline":
        coef = np.stack([np.asarray(cj, dtype=float) for cj in data["coefficients"]], axis=2)
        return cls(knots=np.asarray(data["knots"], dtype=float), coefficients=coef, p=float(data["p"]))


def chord_parameters(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalized cumulative chord lengths of an ordered point sequence.

    Runs of coincident consecutive points are merged by averaging, so
    the returned parameters are strictly increasing.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    group = np.concatenate([[0], np.cumsum(steps > 0)])
    n_groups = int(group[-1]) + 1
    if n_groups < 2:
        raise AlgorithmFailure("degenerate geodesic")
    merged = np.zeros((n_groups, pts.shape[1]))
    counts = np.bincount(group, minlength=n_groups).astype(float)
    for j in range(pts.shape[1]):
        merged[:, j] = np.bincount(group, weights=pts[:, j], minlength=n_groups)
    merged /= counts[:, None]
    chord = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(merged, axis=0), axis=1))])
    return chord / chord[-1], merged


def fit_smoothing_spline(ordered_points, p: float, site_scale: str = "unit_step") -> SmoothingSpline:
    """Fit a d-dimensional cubic smoothing spline to ordered points.

    Parameters
    ----------
    ordered_points : (m, d) array-like
        Points along a path; at least 2 must remain after merging
        coincident consecutive duplicates.
    p : float
        Fidelity weight in [0, 1]; clamped to [1e-6, 1].
    site_scale : str
        Units of the fitting sites, which set what a given p means:
        ``"unit_step"`` rescales the cumulative chord lengths to a mean
        spacing of 1 (point-count-independent semantics), ``"chord"``
        uses raw chord lengths, ``"normalized"`` uses the [0, 1] chord
        parameter directly.

    Returns
    -------
    SmoothingSpline
        Natural cubic spline minimizing the penalized least-squares
        objective independently in every dimension, reparameterized onto
        knots in [0, 1].
    """
    if not np.isfinite(p):
        raise DataFormatError("smoothing weight must be finite")
    p = float(min(max(p, P_MIN), 1.0))
    lam, y = chord_parameters(ordered_points)
    m, d = y.shape
    if m == 2:
        coef = np.zeros((1, 4, d))
        coef[0, 0] = y[0]
        coef[0, 1] = (y[1] - y[0]) / (lam[1] - lam[0])
        return SmoothingSpline(knots=lam, coefficients=coef, p=p)

    if site_scale == "unit_step":
        scale = float(m - 1)
    elif site_scale == "chord":
        scale = float(np.sum(np.linalg.norm(np.diff(y, axis=0), axis=1)))
    elif site_scale == "normalized":
        scale = 1.0
    else:
        raise DataFormatError(f"unknown site_scale {site_scale!r}")
    h = np.diff(lam) * scale
    # Banded system for the scaled interior second derivatives u:
    #   [6(1-p) Q^T Q + p R] u = Q^T y,   a = y - 6(1-p) Q u,
    # where R and Q are the standard natural-spline matrices; the fitted
    # second derivatives are gamma = 6 p u with zero end values.
    inv_h = 1.0 / h
    n_int = m - 2
    diag0 = inv_h[:-1] ** 2 + (inv_h[:-1] + inv_h[1:]) ** 2 + inv_h[1:] ** 2
    diag1 = -(inv_h[:-2] + inv_h[1:-1]) * inv_h[1:-1] - inv_h[1:-1] * (inv_h[1:-1] + inv_h[2:])
    diag2 = inv_h[1:-1][:-1] * inv_h[1:-1][1:] if n_int > 2 else np.empty(0)

    r0 = 2.0 * (h[:-1] + h[1:])
    r1 = h[1:-1]

    ab = np.zeros((3, n_int))
    ab[2, :] = 6.0 * (1.0 - p) * diag0 + p * r0
    if n_int > 1:
        ab[1, 1:] = 6.0 * (1.0 - p) * diag1 + p * r1
    if n_int > 2:
        ab[0, 2:] = 6.0 * (1.0 - p) * diag2

    rhs = y[:-2] * inv_h[:-1, None] - y[1:-1] * (inv_h[:-1] + inv_h[1:])[:, None] + y[2:] * inv_h[1:, None]
    u = solveh_banded(ab, rhs, lower=False)

    qu = np.zeros_like(y)
    qu[:-2] += u * inv_h[:-1, None]
    qu[1:-1] -= u * (inv_h[:-1] + inv_h[1:])[:, None]
    qu[2:] += u * inv_h[1:, None]
    a = y - 6.0 * (1.0 - p) * qu

    gamma = np.zeros_like(y)
    gamma[1:-1] = 6.0 * p * u

    coef = np.empty((m - 1, 4, d))
    coef[:, 0] = a[:-1]
    coef[:, 2] = gamma[:-1] / 2.0
    coef[:, 3] = np.diff(gamma, axis=0) / (6.0 * h[:, None])
    coef[:, 1] = np.diff(a, axis=0) / h[:, None] - h[:, None] * (2.0 * gamma[:-1] + gamma[1:]) / 6.0
    # rescale from unit-mean-spacing sites onto the [0, 1] knot domain
    for power in range(1, 4):
        coef[:, power] *= scale ** power
    return SmoothingSpline(knots=lam, coefficients=coef, p=p)


def closest_parameter(spline: SmoothingSpline, point: np.ndarray, samples: int = 200) -> float:
    """Parameter of closest approach of the curve to a point.

    Coarse minimum over a uniform sample grid, refined by one ternary
    search over the bracketing cells.
    """
    grid = np.linspace(0.0, 1.0, max(2, samples))
    pts = spline.value(grid)
    dist = np.linalg.norm(pts - np.asarray(point, dtype=float)[None, :], axis=1)
    best = int(np.argmin(dist))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]

    def f(t):
        return float(np.linalg.norm(spline.value(t) - point))

    return _ternary(f, lo, hi)


def _ternary(f, lo: float, hi: float, iters: int = 60) -> float:
    for _ in range(iters):
        third = (hi - lo) / 3.0
        m1 = lo + third
        m2 = hi - third
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return 0.5 * (lo + hi)
