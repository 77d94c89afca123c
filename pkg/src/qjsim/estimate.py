"""Recovery of density-matrix elements from detector profiles.

Populations come from a three-Gaussian fit to the image-plane profile
(relative peak areas); coherence moduli come from the visibility of a
damped-cosine fit to each pair's fringe profile, via |sigma_ij| = V_ij / 2.
Both fits run damped iterative least squares (scipy's trust-region
reflective solver) with data-driven initial guesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .errors import (
    FitConvergenceError,
    PartialResultError,
    PeakDegeneracyError,
)
from .optics import ModeGeometry, Profile

MAX_ITERATIONS = 200
PARAM_TOL = 1e-10

# Spectral amplitude below this fraction of the profile mass counts as
# "no resolvable fringe" when no geometry hint pins the expected period.
_FRINGE_DETECTION_FLOOR = 1e-6

QUANTITIES = (
    "rho11",
    "rho22",
    "rho33",
    "abs_sigma12",
    "abs_sigma13",
    "abs_sigma23",
)


@dataclass(frozen=True)
class PeakFitResult:
    """Three-Gaussian image-plane fit, one (center, width, area) per mode."""

    centers: tuple[float, float, float]
    widths: tuple[float, float, float]
    areas: tuple[float, float, float]
    offset: float
    residual_rms: float
    populations: tuple[float, float, float]


@dataclass(frozen=True)
class FringeFitResult:
    """Damped-cosine fringe fit.

    ``clamped`` marks a raw visibility above 1 that was clipped back to the
    physical range; ``no_fringe`` marks profiles without a resolvable
    modulation (visibility reported as 0).
    """

    amplitude: float
    envelope_width: float
    fringe_period: float
    visibility: float
    phase: float
    offset: float
    residual_rms: float
    clamped: bool = False
    no_fringe: bool = False


@dataclass(frozen=True)
class ElementEstimates:
    """The six recovered quantities of one measurement set."""

    rho11: float
    rho22: float
    rho33: float
    abs_sigma12: float
    abs_sigma13: float
    abs_sigma23: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, q) for q in QUANTITIES])


def _run_fit(residual_fn, x0, bounds, max_nfev):
    # xtol is the contractual parameter tolerance; ftol/gtol terminate
    # noisy fits whose degenerate directions would otherwise wander
    res = least_squares(
        residual_fn,
        x0,
        bounds=bounds,
        method="trf",
        xtol=PARAM_TOL,
        ftol=1e-8,
        gtol=1e-8,
        max_nfev=max_nfev,
    )
    rms = math.sqrt(np.mean(res.fun**2)) if res.fun.size else 0.0
    if res.status == 0:
        raise FitConvergenceError(rms, res.nfev)
    return res.x, rms


def _triple_gaussian(params, y):
    a = params[0:3]
    c = params[3:6]
    w = params[6:9]
    b = params[9]
    out = np.full_like(y, b)
    for m in range(3):
        out = out + a[m] * np.exp(-((y - c[m]) ** 2) / w[m] ** 2)
    return out


def _detect_peaks(y, v):
    """Centers/heights of up to three dominant local maxima."""
    n = v.size
    win = max(3, int(round(n / 50)) | 1)
    kernel = np.ones(win) / win
    smooth = np.convolve(v, kernel, mode="same")
    span = smooth.max() - smooth.min()
    if span <= 0:
        return []
    idx, _ = find_peaks(smooth, prominence=0.05 * span)
    order = np.argsort(smooth[idx])[::-1][:3]
    picked = sorted(idx[order])
    return [(y[i], v[i]) for i in picked]


def fit_populations(
    profile: Profile,
    geom_hint: ModeGeometry | None = None,
    max_nfev: int | None = None,
) -> PeakFitResult:
    """Fit three Gaussians plus a constant background to an image profile.

    With a geometry hint the peaks are seeded at the known mode centers
    (so depleted modes fit cleanly to zero area); without one the three
    largest local maxima seed the fit, and fewer than three detected peaks
    raises PeakDegeneracyError.  Populations are the peak areas normalized
    to unit sum, ordered by center position (mode 1 lowest).
    """
    y = profile.positions
    v = profile.values
    if profile.is_empty or v.sum() <= 0:
        raise PeakDegeneracyError(0)
    spacing = float(np.min(np.diff(y))) if y.size > 1 else 1.0
    span = float(y[-1] - y[0]) if y.size > 1 else 1.0
    b0 = float(v.min())

    if geom_hint is not None:
        centers0 = [geom_hint.d, 2 * geom_hint.d, 3 * geom_hint.d]
        widths0 = [geom_hint.sigma_g] * 3
        c_lo = [c - geom_hint.d / 2 for c in centers0]
        c_hi = [c + geom_hint.d / 2 for c in centers0]
        w_hi = min(span, 8 * geom_hint.sigma_g)
    else:
        peaks = _detect_peaks(y, v)
        if len(peaks) < 3:
            raise PeakDegeneracyError(len(peaks))
        centers0 = [p[0] for p in peaks]
        min_gap = min(np.diff(centers0))
        widths0 = [min_gap / 4] * 3
        c_lo = [float(y[0])] * 3
        c_hi = [float(y[-1])] * 3
        w_hi = span

    amps0 = [
        max(float(v[np.argmin(np.abs(y - c))]) - b0, 1e-12 * max(v.max(), 1.0))
        for c in centers0
    ]
    x0 = np.array(amps0 + centers0 + widths0 + [b0])
    lo = np.array([0.0] * 3 + c_lo + [spacing] * 3 + [-np.inf])
    hi = np.array([np.inf] * 3 + c_hi + [w_hi] * 3 + [np.inf])
    x0 = np.clip(x0, lo + 1e-15, hi)

    def residual(params):
        return _triple_gaussian(params, y) - v

    budget = max_nfev if max_nfev is not None else MAX_ITERATIONS * (x0.size + 1)
    params, rms = _run_fit(residual, x0, (lo, hi), budget)
    a, c, w, b = params[0:3], params[3:6], params[6:9], params[9]
    order = np.argsort(c)
    a, c, w = a[order], c[order], w[order]
    areas = a * w * math.sqrt(math.pi)
    total = areas.sum()
    if total <= 0:
        raise PeakDegeneracyError(0)
    return PeakFitResult(
        centers=tuple(map(float, c)),
        widths=tuple(map(float, w)),
        areas=tuple(map(float, areas)),
        offset=float(b),
        residual_rms=rms,
        populations=tuple(float(x) for x in areas / total),
    )


def _fringe_model(params, y):
    a, w, period, vis, phase, b = params
    return a * np.exp(-(y**2) / w**2) * (
        1.0 + vis * np.cos(2.0 * math.pi * y / period + phase)
    ) + b


def _no_fringe_result(b0, span, amplitude=0.0, width=None, rms=0.0):
    return FringeFitResult(
        amplitude=amplitude,
        envelope_width=width if width is not None else span / 2,
        fringe_period=span,
        visibility=0.0,
        phase=0.0,
        offset=b0,
        residual_rms=rms,
        no_fringe=True,
    )


def _spectral_guess(y, u, period):
    """Visibility and phase of the modulation component at a known period."""
    z = np.sum(u * np.exp(-2j * math.pi * y / period))
    mass = u.sum()
    if mass <= 0:
        return 0.0, 0.0
    return min(2.0 * abs(z) / mass, 1.2), float(np.angle(z))


def fit_fringe(
    profile: Profile,
    geom_hint: ModeGeometry | None = None,
    max_nfev: int | None = None,
) -> FringeFitResult:
    """Fit A exp(-y^2/w^2) [1 + V cos(2 pi y / period + phase)] + B.

    The fringe period is seeded from the geometry hint when available and
    otherwise from the dominant nonzero-frequency peak of the profile's
    discrete Fourier spectrum; the envelope width comes from the profile's
    second moment.  A raw visibility above 1 is clamped back with a flag;
    a profile without a resolvable modulation comes back flagged
    ``no_fringe`` with visibility 0 instead of failing.
    """
    y = profile.positions
    v = profile.values
    span = float(y[-1] - y[0]) if y.size > 1 else 1.0
    spacing = float(np.mean(np.diff(y))) if y.size > 1 else 1.0
    b0 = float(v.min())
    if profile.is_empty or v.sum() <= 0:
        return _no_fringe_result(0.0, span)
    u = v - b0
    mass = float(u.sum())
    if mass <= 0:
        return _no_fringe_result(b0, span)

    m2 = float(np.sum(u * y**2) / mass)
    w0 = max(math.sqrt(2.0 * m2), 2 * spacing)

    if geom_hint is not None:
        period0 = geom_hint.fringe_period
        w0 = geom_hint.envelope_width
        period_lo, period_hi = period0 / 3, 3 * period0
    else:
        period0 = _dominant_period(u, spacing, w0)
        if period0 is None:
            # no dominant spatial-frequency peak: report a flagged V = 0
            return _fit_envelope_only(y, v, b0, w0, span, spacing, max_nfev)
        period_lo, period_hi = 2 * spacing, 10 * span

    vis0, phase0 = _spectral_guess(y, u, period0)
    a0 = mass / max(float(np.sum(np.exp(-(y**2) / w0**2))), 1e-12)
    x0 = np.array([a0, w0, period0, vis0, phase0, b0])
    lo = np.array([0.0, spacing, period_lo, 0.0, -2 * math.pi, -np.inf])
    hi = np.array([np.inf, 10 * span, period_hi, 1.5, 2 * math.pi, np.inf])
    x0 = np.clip(x0, lo + 1e-15, hi - 1e-15)

    def residual(params):
        return _fringe_model(params, y) - v

    budget = max_nfev if max_nfev is not None else MAX_ITERATIONS * (x0.size + 1)
    params, rms = _run_fit(residual, x0, (lo, hi), budget)
    a, w, period, vis_raw, phase, b = params
    clamped = vis_raw > 1.0
    return FringeFitResult(
        amplitude=float(a),
        envelope_width=float(w),
        fringe_period=float(period),
        visibility=float(min(vis_raw, 1.0)),
        phase=float(phase),
        offset=float(b),
        residual_rms=rms,
        clamped=bool(clamped),
    )


def _dominant_period(u, spacing, w0):
    """Fringe period from the dominant non-envelope spectral peak, or None."""
    n = u.size
    spectrum = np.abs(np.fft.rfft(u))
    freqs = np.fft.rfftfreq(n, d=spacing)
    # exclude the envelope's own low-frequency lobe
    f_cut = 2.0 / (math.pi * w0) if w0 > 0 else (freqs[1] if n > 1 else 0.0)
    band = freqs > f_cut
    candidates, _ = find_peaks(spectrum)
    candidates = [i for i in candidates if freqs[i] > f_cut]
    if not candidates:
        return None
    best = max(candidates, key=lambda i: spectrum[i])
    mass = float(u.sum())
    floor = _FRINGE_DETECTION_FLOOR * mass
    if band.sum() >= 5:
        floor = max(floor, 6.0 * float(np.median(spectrum[band])))
    if spectrum[best] < floor:
        return None
    return 1.0 / freqs[best]


def _fit_envelope_only(y, v, b0, w0, span, spacing, max_nfev):
    mass = float(np.sum(v - b0))
    a0 = mass / max(float(np.sum(np.exp(-(y**2) / w0**2))), 1e-12)

    def residual(params):
        a, w, b = params
        return a * np.exp(-(y**2) / w**2) + b - v

    x0 = np.array([max(a0, 0.0), w0, b0])
    lo = np.array([0.0, spacing, -np.inf])
    hi = np.array([np.inf, 10 * span, np.inf])
    budget = max_nfev if max_nfev is not None else MAX_ITERATIONS * 4
    params, rms = _run_fit(residual, np.clip(x0, lo + 1e-15, hi), (lo, hi), budget)
    return _no_fringe_result(params[2], span, amplitude=params[0], width=params[1], rms=rms)


def reconstruct_elements(
    populations: PeakFitResult | None,
    fringe_12: FringeFitResult | None,
    fringe_13: FringeFitResult | None,
    fringe_23: FringeFitResult | None,
) -> ElementEstimates:
    """Combine one population fit and three fringe fits into the six
    density-matrix quantities (diagonals and subspace coherence moduli)."""
    missing = []
    if populations is None:
        missing.append("populations")
    for name, fit in (("(1,2)", fringe_12), ("(1,3)", fringe_13), ("(2,3)", fringe_23)):
        if fit is None:
            missing.append(name)
    if missing:
        raise PartialResultError(tuple(missing))
    return ElementEstimates(
        rho11=populations.populations[0],
        rho22=populations.populations[1],
        rho33=populations.populations[2],
        abs_sigma12=fringe_12.visibility / 2.0,
        abs_sigma13=fringe_13.visibility / 2.0,
        abs_sigma23=fringe_23.visibility / 2.0,
    )


def aggregate_estimates(items: list[ElementEstimates]) -> tuple[np.ndarray, np.ndarray]:
    """Per-quantity mean and sample standard deviation over repetitions.

    A single repetition reports zero spread.
    """
    if not items:
        raise ValueError("need at least one estimate")
    stack = np.stack([e.as_array() for e in items])
    mean = stack.mean(axis=0)
    std = stack.std(axis=0, ddof=1) if len(items) > 1 else np.zeros(len(QUANTITIES))
    return mean, std
