"""Deterministic curve fitting and statistics for the experiment records.

All fitters use MINPACK Levenberg-Marquardt through scipy.curve_fit with a
fixed relative step tolerance (1e-10) and the standard bounded evaluation cap
(200 per free parameter), plus documented deterministic seeding rules, so
identical inputs always give identical results.  Uncertainties are the
square roots of the diagonal of the linearized covariance at the optimum.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .errors import FitError, ParameterError

XTOL = 1e-10
MAXFEV_PER_PARAM = 200


@dataclass
class FitResult:
    params: dict
    uncertainties: dict
    residual_norm: float
    converged: bool
    model: str = ""

    def __getitem__(self, key):
        return self.params[key]


def _run_fit(fn, xs, ys, p0, names, model):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", optimize.OptimizeWarning)
        try:
            popt, pcov = optimize.curve_fit(
                fn, xs, ys, p0=p0, method="lm", xtol=XTOL,
                maxfev=MAXFEV_PER_PARAM * (len(p0) + 1))
        except RuntimeError as exc:
            raise FitError(f"{model} fit did not converge: {exc}") from exc
    resid = ys - fn(xs, *popt)
    sigma = np.sqrt(np.abs(np.diag(pcov)))
    return FitResult(
        params=dict(zip(names, popt)),
        uncertainties=dict(zip(names, sigma)),
        residual_norm=float(np.sqrt(np.mean(resid**2))),
        converged=bool(np.all(np.isfinite(popt))),
        model=model,
    )


def _check_series(xs, ys, n_min, model):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise ParameterError(f"{model}: xs and ys must be 1-d and equal length")
    if xs.size < n_min:
        raise ParameterError(f"{model}: need >= {n_min} points, got {xs.size}")
    if np.any(np.diff(xs) <= 0):
        raise ParameterError(f"{model}: xs must be strictly increasing")
    return xs, ys


def fit_exponential(xs, ys):
    """Least-squares fit of A*exp(-x/T) + offset.

    Seeding: offset from the final point, amplitude from the first, and T
    from a log-linear regression over the early decade of the decay.
    Constant input returns converged=False with T = inf.
    """
    xs, ys = _check_series(xs, ys, 5, "exponential")
    if np.ptp(ys) < 1e-300:
        return FitResult({"A": 0.0, "T": math.inf, "offset": float(ys[0])},
                         {"A": math.inf, "T": math.inf, "offset": math.inf},
                         0.0, False, "exponential")
    offset0 = float(ys[-1])
    a0 = float(ys[0] - offset0)
    if a0 == 0.0:
        a0 = float(np.ptp(ys))
    span = xs[-1] - xs[0]
    rel = (ys - offset0) / a0
    mask = rel > 0.05
    if np.count_nonzero(mask) >= 2:
        slope = np.polyfit(xs[mask], np.log(rel[mask]), 1)[0]
        t0 = -1.0 / slope if slope < 0 else span
    else:
        t0 = span / 3.0

    def fn(x, a, t, off):
        return a * np.exp(-x / t) + off

    return _run_fit(fn, xs, ys, [a0, t0, offset0], ["A", "T", "offset"],
                    "exponential")


def fit_decaying_cosine(xs, ys):
    """Least-squares fit of A*exp(-x/T2)*cos(2 pi f x + phi) + offset.

    The frequency seed is the discrete spectral peak of the detrended data
    (including the DC bin, so zero-frequency input degrades gracefully to an
    exponential); the phase seed is the phase of that spectral component.
    Assumes an (approximately) uniform sample grid for the seeding step.
    """
    xs, ys = _check_series(xs, ys, 8, "decaying-cosine")
    if np.ptp(ys) < 1e-300:
        raise FitError("decaying-cosine fit: zero-amplitude input")
    offset0 = float(np.mean(ys))
    a0 = 0.5 * float(np.ptp(ys))
    dx = float(np.mean(np.diff(xs)))
    spec = np.fft.rfft(ys - offset0)
    freqs = np.fft.rfftfreq(xs.size, dx)
    k = int(np.argmax(np.abs(spec)))
    f0 = float(freqs[k])
    phi0 = float(np.angle(spec[k])) if k > 0 else 0.0
    t0 = (xs[-1] - xs[0]) / 2.0

    def fn(x, a, t2, f, phi, off):
        return a * np.exp(-x / t2) * np.cos(2.0 * np.pi * f * x + phi) + off

    result = _run_fit(fn, xs, ys, [a0, t0, f0, phi0, offset0],
                      ["A", "T2", "f", "phase", "offset"], "decaying-cosine")
    # canonical sign conventions: positive amplitude and frequency
    if result.params["A"] < 0:
        result.params["A"] *= -1.0
        result.params["phase"] += math.pi
    if result.params["f"] < 0:
        result.params["f"] *= -1.0
        result.params["phase"] *= -1.0
    return result


def fit_lorentzian(freqs, powers):
    """Least-squares fit of peak / (1 + 4 (f - f0)^2 / fwhm^2) + floor.

    Seeds: floor from the minimum, center from the maximum, width from the
    half-maximum crossing span.  Raises when the scanned span is smaller
    than the estimated linewidth.
    """
    xs, ys = _check_series(freqs, powers, 7, "lorentzian")
    floor0 = float(np.min(ys))
    peak0 = float(np.max(ys) - floor0)
    if peak0 <= 0:
        raise FitError("lorentzian fit: flat input")
    f00 = float(xs[np.argmax(ys)])
    above = xs[ys > floor0 + 0.5 * peak0]
    fwhm0 = float(above[-1] - above[0]) if above.size >= 2 else (xs[-1] - xs[0]) / 4.0
    if fwhm0 <= 0:
        fwhm0 = (xs[-1] - xs[0]) / 4.0
    if (xs[-1] - xs[0]) < fwhm0:
        raise FitError(
            f"lorentzian fit: span {xs[-1] - xs[0]:.3g} smaller than the "
            f"linewidth estimate {fwhm0:.3g}"
        )

    def fn(f, peak, f0, fwhm, floor):
        return peak / (1.0 + 4.0 * (f - f0) ** 2 / fwhm**2) + floor

    result = _run_fit(fn, xs, ys, [peak0, f00, fwhm0, floor0],
                      ["peak", "f0", "fwhm", "floor"], "lorentzian")
    result.params["fwhm"] = abs(result.params["fwhm"])
    return result


def leakage_population(t_p, a, gamma_sp):
    """Steady-state leakage population accumulated over a protocol of length t_p.

    P_L = a / (2a + gamma_sp t_p) * (1 - exp(-2a - gamma_sp t_p)), where a is
    the (protocol-length-independent) excitation ability of the drive pulse
    and gamma_sp the spontaneous emission rate from the higher levels.
    Vectorized over t_p.
    """
    t = np.asarray(t_p, dtype=float)
    if np.any(t <= 0):
        raise ParameterError("t_p must be > 0")
    if a < 0 or gamma_sp < 0:
        raise ParameterError("a and gamma_sp must be >= 0")
    if a == 0.0:
        out = np.zeros_like(t)
        return float(out) if out.ndim == 0 else out
    gt = 2.0 * a + gamma_sp * t
    out = a / gt * (1.0 - np.exp(-gt))
    return float(out) if out.ndim == 0 else out


def leakage_fidelity_floor(a):
    """Short-pulse fidelity limit 1 - (1 - exp(-2a))/2 of the leakage model."""
    return 1.0 - 0.5 * (1.0 - math.exp(-2.0 * a))


def fit_leakage(t_ps, f_corrs):
    """Fit corrected Z fidelities with F = 1 - P_L(t_p, a, gamma_sp).

    Seeds a from the smallest-t_p point (where the closed form approaches
    its floor) and gamma_sp from the largest-t_p point.  The reported params
    include the implied short-pulse fidelity floor.
    """
    xs, ys = _check_series(t_ps, f_corrs, 4, "leakage")
    pl_small = min(0.49, max(1e-6, 1.0 - float(ys[0])))
    a0 = -0.5 * math.log(1.0 - 2.0 * pl_small)
    pl_large = max(1e-9, 1.0 - float(ys[-1]))
    g0 = max(1e-6, a0 / (pl_large * xs[-1]) - 2.0 * a0 / xs[-1])

    def fn(t, a, g):
        gt = 2.0 * a + g * t
        return 1.0 - a / gt * (1.0 - np.exp(-np.clip(gt, -700.0, 700.0)))

    result = _run_fit(fn, xs, ys, [a0, g0], ["a", "gamma_sp"], "leakage")
    result.params["floor"] = leakage_fidelity_floor(result.params["a"])
    return result


@dataclass
class SampleStats:
    mean: float
    std: float
    normality_p: float
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    n: int


def sample_statistics(samples):
    """Mean, sample std, D'Agostino-Pearson normality p-value and a
    Freedman-Diaconis histogram."""
    x = np.asarray(samples, dtype=float)
    if x.size < 8:
        raise ParameterError(f"need >= 8 samples, got {x.size}")
    std = float(np.std(x, ddof=1))
    if std == 0.0:
        p = float("nan")
        counts, edges = np.histogram(x, bins=1)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = float(stats.normaltest(x).pvalue)
        counts, edges = np.histogram(x, bins="fd")
    return SampleStats(mean=float(np.mean(x)), std=std, normality_p=p,
                       hist_counts=counts, hist_edges=edges, n=x.size)
