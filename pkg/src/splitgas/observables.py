"""Measurable quantities derived from variance fields.

The correlation function is the Gaussian exponential C = exp(-variance/2).
The correlation front is located per time sample as the peak of the
smoothed mixed derivative d2<dphi^2>/dt dz (the variance rate switches
between its inside- and outside-cone plateaus there); an independent
half-plateau crossing detector guards against ringing artefacts of the
truncated mode sums.  The mean squared contrast double-integrates C over
an observation window, and recurrences are ranked local maxima of that
trace.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.constants import hbar
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from .errors import ConfigError, DetectionError
from .fields import (
    ContrastTrace,
    CorrelationField,
    FrontTrace,
    PairCorrelationField,
    PairVarianceField,
    VarianceField,
    VelocityFit,
)
from .homogeneous import PlaneWaveModeSet, phase_variance, recurrence_time, _grid_values
from .trapped import LegendreModeSet, legendre_f_table

__all__ = [
    "pcf",
    "extract_front",
    "fit_velocity",
    "mean_squared_contrast",
    "contrast_trace",
    "recurrence_scan",
    "mode_amplitude_trace",
    "prethermal_pcf",
]

DEFAULT_FIT_WINDOW = (0.0, 10e-3)
DEFAULT_PROMINENCE_REL = 0.25
EDGE_SEARCH_FRACTION = 0.9   # trapped fronts are searched for within 0.9 R


def pcf(variance):
    """Correlation field C = exp(-variance/2), element-wise.

    Accepts either a plain or a pair variance field and returns the
    matching correlation container.
    """
    if np.any(variance.values < 0):
        raise ConfigError("variance must be non-negative")
    vals = np.exp(-variance.values / 2.0)
    if isinstance(variance, PairVarianceField):
        return PairCorrelationField(
            z=variance.z, zprime=variance.zprime, times=variance.times,
            values=vals, regime=variance.regime, truncation=variance.truncation,
            meta=dict(variance.meta),
        )
    return CorrelationField(
        positions=variance.positions, times=variance.times, values=vals,
        regime=variance.regime, truncation=variance.truncation,
        zprime=variance.zprime, meta=dict(variance.meta),
    )


def _front_search_limit(field: VarianceField) -> float:
    if field.regime != "homogeneous" and "R_eff" in field.meta:
        return EDGE_SEARCH_FRACTION * field.meta["R_eff"]
    return float(field.positions[-1])


def _refine_peak(row: np.ndarray, idx: int, dz: float) -> float:
    if 1 <= idx < len(row) - 1:
        y0, y1, y2 = row[idx - 1], row[idx], row[idx + 1]
        den = y0 - 2.0 * y1 + y2
        if den != 0.0:
            return float(np.clip(0.5 * (y0 - y2) / den, -1.0, 1.0)) * dz
    return 0.0


def extract_front(
    field: VarianceField,
    smoothing_sigma: float | None = None,
    prominence_rel: float = DEFAULT_PROMINENCE_REL,
    method: str = "mixed_derivative",
    search_max: float | None = None,
) -> FrontTrace:
    """Locate the correlation front z_c(t) on a regular (position x time) grid.

    ``mixed_derivative`` (default): per time sample, the front is the most
    prominent peak of |d2 V/dt dz| after Gaussian smoothing of width
    sigma_z (defaults to the healing length) along the position axis.
    ``half_plateau``: the position where |dV/dt| crosses midway between its
    inner and outer plateau levels.  Both ignore the outer edge of trapped
    clouds (beyond 0.9 R) where the vanishing density dominates the
    derivative.  Undetectable rows are dropped; an entirely empty trace is
    returned with diagnostics rather than raised.
    """
    z = field.positions
    ts = field.times
    if z.size < 8 or ts.size < 3:
        raise ConfigError("front extraction needs a dense (position x time) grid")
    dz = float(z[1] - z[0])
    if smoothing_sigma is None:
        smoothing_sigma = field.meta.get("xi_h", 4.0 * dz)
    if search_max is None:
        search_max = _front_search_limit(field)
    imax = int(np.searchsorted(z, search_max, side="right"))
    guard = max(3, int(round(3.0 * smoothing_sigma / dz)))

    dVdt = np.gradient(field.values, ts, axis=0)
    diagnostics = {"dropped": 0, "search_max": search_max, "guard": guard}
    positions, times = [], []
    # absolute floor: rounding dust of a featureless field must not register
    dt_grid = float(ts[1] - ts[0])
    deriv_floor = 1e-9 * float(np.abs(field.values).max() or 1.0) / (dt_grid * dz)

    if method == "mixed_derivative":
        M = np.gradient(dVdt, z, axis=1)
        M = gaussian_filter1d(M, smoothing_sigma / dz, axis=1, mode="nearest")
        for i in range(ts.size):
            row = np.abs(M[i, :imax])
            seg = row[guard:-guard]
            if seg.size < 4:
                break
            rng = float(seg.max() - seg.min())
            if rng <= deriv_floor:
                diagnostics["dropped"] += 1
                continue
            peaks, props = find_peaks(seg, prominence=prominence_rel * rng)
            if peaks.size == 0:
                diagnostics["dropped"] += 1
                continue
            best = int(peaks[np.argmax(props["prominences"])]) + guard
            positions.append(z[best] + _refine_peak(row, best, dz))
            times.append(ts[i])
    elif method == "half_plateau":
        n_dec = max(2, (imax - 2 * guard) // 10)
        for i in range(ts.size):
            row = np.abs(dVdt[i, guard:imax - guard])
            if row.size < 4 * n_dec:
                break
            inner = float(row[:n_dec].mean())
            outer = float(row[-n_dec:].mean())
            if (abs(outer - inner) <= prominence_rel * max(outer, inner, 1e-300)
                    or abs(outer - inner) <= deriv_floor * dz):
                diagnostics["dropped"] += 1
                continue
            thr = 0.5 * (inner + outer)
            side = row > thr if outer > inner else row < thr
            cross = np.nonzero(side)[0]
            if cross.size == 0 or cross[0] == 0:
                diagnostics["dropped"] += 1
                continue
            j = cross[0]
            frac = (thr - row[j - 1]) / (row[j] - row[j - 1])
            positions.append(z[guard + j - 1] + float(np.clip(frac, 0.0, 1.0)) * dz)
            times.append(ts[i])
    else:
        raise ConfigError(f"unknown front detection method: {method!r}")

    return FrontTrace(
        times=np.asarray(times), positions=np.asarray(positions),
        method=method, smoothing_sigma=float(smoothing_sigma),
        prominence_rel=prominence_rel, diagnostics=diagnostics,
    )


def fit_velocity(trace: FrontTrace, window: tuple = DEFAULT_FIT_WINDOW) -> VelocityFit:
    """Least-squares front velocity over detections with t in (t0, t1]."""
    t0, t1 = window
    sel = (trace.times > t0) & (trace.times <= t1)
    if int(sel.sum()) < 3:
        raise DetectionError(
            f"need at least 3 front detections in ({t0*1e3:g}, {t1*1e3:g}] ms, "
            f"got {int(sel.sum())}"
        )
    tt, zz = trace.times[sel], trace.positions[sel]
    slope, intercept = np.polyfit(tt, zz, 1)
    resid = zz - (slope * tt + intercept)
    return VelocityFit(
        speed=float(slope), intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        window=(t0, t1), n_points=int(sel.sum()),
    )


def _window_indices(grid: np.ndarray, length: float) -> np.ndarray:
    half = length / 2.0
    tol = 1e-9 * max(length, 1e-12)
    sel = np.nonzero((grid >= -half - tol) & (grid <= half + tol))[0]
    if sel.size < 2:
        raise ConfigError("integration window contains fewer than 2 grid points")
    return sel


def mean_squared_contrast(corr: PairCorrelationField, length: float, t: float) -> float:
    """Window-averaged squared contrast (1/L^2) * double integral of C.

    Trapezoidal quadrature over the grid points inside [-L/2, L/2]^2 at the
    time sample closest to ``t``; the normalisation uses the realised
    window span so slightly misaligned grids stay unbiased.
    """
    if length <= 0:
        raise ConfigError("integration length must be strictly positive")
    R = corr.meta.get("R_eff")
    if R is not None and length / 2.0 > R:
        raise ConfigError("integration region exceeds the cloud radius")
    it = int(np.argmin(np.abs(corr.times - t)))
    iz = _window_indices(corr.z, length)
    jz = _window_indices(corr.zprime, length)
    z, zp = corr.z[iz], corr.zprime[jz]
    block = corr.values[it][np.ix_(iz, jz)]
    inner = np.trapezoid(block, zp, axis=1)
    total = np.trapezoid(inner, z)
    return float(total / ((z[-1] - z[0]) * (zp[-1] - zp[0])))


def _homog_pair_weights(n: int, dz: float) -> np.ndarray:
    """Collapse the 2D trapezoid over equal uniform grids to separation lags."""
    w = np.full(n, dz)
    w[0] = w[-1] = dz / 2.0
    c = np.correlate(w, w, mode="full")[n - 1:]
    c[1:] *= 2.0
    return c


def _homog_contrast_values(modes: PlaneWaveModeSet, length: float, times: np.ndarray,
                           dz: float) -> np.ndarray:
    n = int(round(length / dz)) + 1
    seps = dz * np.arange(n)
    lag_w = _homog_pair_weights(n, dz)
    var = _grid_values(modes, seps, times)             # (nt, n)
    C = np.exp(-var / 2.0)
    span = dz * (n - 1)
    return (C @ lag_w) / span**2


def contrast_trace(modes, length: float, times, dz: float | None = None,
                   time_chunk: int = 64) -> ContrastTrace:
    """Mean squared contrast C^2(t) for an observation window of size L.

    The position grid step defaults to half the healing length, below
    which the integral is converged at the 0.2% level.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if length <= 0:
        raise ConfigError("integration length must be strictly positive")
    if isinstance(modes, PlaneWaveModeSet):
        if dz is None:
            dz = modes.params.xi_h / 2.0
        values = _homog_contrast_values(modes, length, times, dz)
        regime = "homogeneous"
        meta = {"dz": dz, "truncation": modes.p_max}
    elif isinstance(modes, LegendreModeSet):
        R = modes.radius
        if length / 2.0 > R:
            raise ConfigError("integration region exceeds the cloud radius")
        if dz is None:
            # half the healing length at the cloud centre
            dz = hbar / (modes.profile.mass * modes.profile.sound_speed_peak) / 2.0
        n = int(round(length / dz)) + 1
        zg = np.linspace(-length / 2.0, length / 2.0, n)
        f = legendre_f_table(modes.j_max, zg / R)      # (J, n)
        w = np.full(n, zg[1] - zg[0])
        w[0] = w[-1] = (zg[1] - zg[0]) / 2.0
        span = zg[-1] - zg[0]
        values = np.empty(times.size)
        for start in range(0, times.size, time_chunk):
            tt = times[start:start + time_chunk]
            amp = modes.coefficient * np.sin(modes.omega_j[None, :] * tt[:, None]) ** 2 / modes.omega_j**2
            D = amp @ (f**2)                           # (nt, n)
            G = np.einsum("tj,ja,jb->tab", amp, f, f, optimize=True)
            V = D[:, :, None] + D[:, None, :] - 2.0 * G
            C = np.exp(-V / 2.0)
            values[start:start + time_chunk] = np.einsum("a,tab,b->t", w, C, w) / span**2
        regime = modes.profile.kind
        meta = {"dz": zg[1] - zg[0], "truncation": modes.j_max, "R_eff": R}
    else:
        raise ConfigError(f"unsupported mode set type: {type(modes).__name__}")
    return ContrastTrace(length=length, times=times, values=values,
                         regime=regime, meta=meta)


def _golden_max(f, lo: float, hi: float, iters: int = 80) -> tuple[float, float]:
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = f(x1)
        if b - a <= 1e-12 * max(abs(a), abs(b), 1.0):
            break
    xm = 0.5 * (a + b)
    return xm, f(xm)


def recurrence_scan(
    trace: ContrastTrace,
    min_prominence: float = 1e-3,
    refine_fn=None,
) -> list[tuple[float, float]]:
    """Ranked partial recurrences of coherence after the initial dephasing.

    Local maxima of C^2(t) past the first local minimum, sorted by
    strength (the C^2 value at the maximum), strongest first.  When a
    continuous evaluator ``refine_fn(t) -> C^2`` is supplied, each sampled
    peak is polished by golden-section search so exact rephasings report
    strength 1 rather than the nearest sample value.
    """
    vals = np.asarray(trace.values)
    ts = np.asarray(trace.times)
    if vals.size < 5:
        raise ConfigError("contrast trace too short to scan")
    turn = np.nonzero(np.diff(vals) > 0)[0]
    if turn.size == 0:
        return []
    imin = int(turn[0])
    peaks, _ = find_peaks(vals[imin:], prominence=min_prominence)
    peaks = peaks + imin
    results = []
    dt = ts[1] - ts[0]
    for idx in peaks:
        t_pk, s_pk = float(ts[idx]), float(vals[idx])
        if refine_fn is not None:
            lo = ts[idx - 1] if idx > 0 else ts[idx]
            hi = ts[idx + 1] if idx + 1 < ts.size else ts[idx]
            t_ref, s_ref = _golden_max(refine_fn, float(lo), float(hi))
            if s_ref >= s_pk:
                t_pk, s_pk = t_ref, s_ref
        results.append((t_pk, s_pk))
    results.sort(key=lambda r: (-r[1], r[0]))
    return results


def mode_amplitude_trace(modes, t_grid) -> np.ndarray:
    """Per-mode amplitude factors (sin(omega_j t)/omega_j)^2, shape (modes, nt)."""
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    omega = modes.omega if isinstance(modes, PlaneWaveModeSet) else modes.omega_j
    return (np.sin(omega[:, None] * t[None, :]) / omega[:, None]) ** 2


def prethermal_pcf(modes: PlaneWaveModeSet, zbar, window: tuple = (0.30, 0.45),
                   samples: int = 64) -> np.ndarray:
    """Long-time-averaged correlation function of the dephased state.

    Averages C(zbar, t) over a time window (given in units of the
    recurrence period) inside the prethermal plateau: after the cone has
    passed the largest requested separation and before rephasing sets in.
    Converges to exp(-|zbar| xi_n^2/l0) for separations above the phonon
    cutoff.
    """
    zbar = np.atleast_1d(np.asarray(zbar, dtype=float))
    t_rev = recurrence_time(modes.L, modes.params.c)
    lo, hi = window
    if not (0.0 < lo < hi < 1.0):
        raise ConfigError("window must satisfy 0 < lo < hi < 1 (units of t_rev)")
    zmax = float(np.abs(zbar).max())
    if zmax / (2.0 * modes.params.c) >= lo * t_rev:
        raise ConfigError("window opens before the cone reaches the largest separation")
    ts = np.linspace(lo * t_rev, hi * t_rev, samples)
    var = _grid_values(modes, zbar, ts)
    return np.exp(-var / 2.0).mean(axis=0)
