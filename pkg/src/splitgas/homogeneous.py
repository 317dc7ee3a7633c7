"""Plane-wave phonon modes and phase statistics of the homogeneous gas.

The relative phase and density of the split pair are expanded in periodic
plane waves k = 2*pi*p/L (p = +-1..+-p_max, k = 0 excluded).  Splitting
loads each density quadrature with shot noise <|n_k|^2> = xi_n^2*n/2 while
the phase quadrature starts empty; each mode then oscillates harmonically
at omega_k = c|k|, converting density noise into phase noise.  The
two-point phase variance is the mode sum

    <dphi(zbar, t)^2> = pref * sum_p sin^2(omega_p t) (1 - cos(k_p zbar)) / k_p^2

with pref = 2*pi^2*n*xi_n^2/(L*K^2); +k and -k are folded into one term.
All mode frequencies are commensurate (omega_p = p * 2*pi*c/L), so the
variance is exactly periodic with period L/(2c) and vanishes identically
at multiples of it.

Initial phase fluctuations are dropped throughout (the same approximation
the analytic treatment makes for t > h/mu); the Monte-Carlo oracle can
re-enable them to quantify the error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar, k as k_B, pi

from .errors import ConfigError, ConvergenceError
from .fields import PairVarianceField, VarianceField
from .params import PhysicalParams

__all__ = [
    "PlaneWaveModeSet",
    "build_modes",
    "phase_variance",
    "phase_covariance",
    "prethermal_variance",
    "stationary_variance",
    "thermal_variance",
    "initial_phase_variance",
    "variance_rate",
    "covariance_rate",
    "recurrence_time",
    "variance_field",
    "pair_variance_field",
    "convergence_check",
]

#: relative tolerance of the truncation doubling test
CONVERGENCE_RTOL = 5e-3


@dataclass(frozen=True)
class PlaneWaveModeSet:
    """Discrete plane-wave excitation basis of a box of size L.

    Arrays hold the positive-k half of the spectrum; the mirror modes are
    folded into the prefactor of every mode sum.
    """

    params: PhysicalParams
    L: float                # box size, m
    p_max: int
    k: np.ndarray           # (p_max,), 1/m
    omega: np.ndarray       # (p_max,), rad/s, c*k
    S_k: np.ndarray         # (p_max,), structure factor hbar*k/(2*m*c)
    occupation: np.ndarray  # (p_max,), k_B*T_eff/(hbar*omega_k)
    prefactor: float        # 2*pi^2*n*xi_n^2 / (L*K^2)

    @property
    def omega_max(self) -> float:
        return float(self.omega[-1])

    @property
    def xi_n2(self) -> float:
        return self.params.squeezing

    def phi_amplitude(self) -> np.ndarray:
        """|phase amplitude| per unit initial density amplitude, pi/(k*K)."""
        return pi / (self.k * self.params.K)

    def split_density_variance(self) -> np.ndarray:
        """<|n_k|^2> right after splitting (local shot noise)."""
        return np.full_like(self.k, self.xi_n2 * self.params.n_peak / 2.0)

    def split_phase_variance(self) -> np.ndarray:
        """<|phi_k|^2> right after splitting (minimum-uncertainty partner)."""
        return np.full_like(self.k, 1.0 / (2.0 * self.xi_n2 * self.params.n_peak))

    def thermal_density_variance(self, temperature: float) -> np.ndarray:
        return np.full_like(self.k, k_B * temperature / (2.0 * self.params.g))

    def thermal_phase_variance(self, temperature: float) -> np.ndarray:
        lam = self.params.lambda_T(temperature)
        return 2.0 / (lam * self.k**2)


def default_p_max(params: PhysicalParams, L: float) -> int:
    """Phononic truncation: modes up to k ~ 1/xi_h."""
    return int(math.ceil(L / (2.0 * pi * params.xi_h)))


def build_modes(params: PhysicalParams, L: float, p_max: int | None = None) -> PlaneWaveModeSet:
    """Build the plane-wave basis for a box of size L.

    ``p_max`` defaults to ceil(L/(2*pi*xi_h)), i.e. the phononic cutoff at
    the healing length.
    """
    if L <= 0:
        raise ConfigError("box size must be strictly positive")
    if p_max is None:
        p_max = default_p_max(params, L)
    if p_max < 1:
        raise ConfigError("p_max must be at least 1")
    p = np.arange(1, p_max + 1, dtype=float)
    k = 2.0 * pi * p / L
    omega = params.c * k
    S_k = hbar * k / (2.0 * params.mass * params.c)
    occupation = k_B * params.T_eff / (hbar * omega)
    prefactor = 2.0 * pi**2 * params.n_peak * params.squeezing / (L * params.K**2)
    return PlaneWaveModeSet(
        params=params, L=L, p_max=int(p_max), k=k, omega=omega,
        S_k=S_k, occupation=occupation, prefactor=prefactor,
    )


def _mode_sum(weights_t: np.ndarray, weights_z: np.ndarray) -> np.ndarray:
    # weights_t: (..., P), weights_z: (..., P) broadcastable; sum over modes
    return np.sum(weights_t * weights_z, axis=-1)


def phase_variance(zbar, t, modes: PlaneWaveModeSet):
    """Two-point relative-phase variance <(phi(z) - phi(z'))^2> at zbar = z - z'.

    Broadcasts over ``zbar`` and ``t``.  Even in zbar (evaluated on |zbar|
    so the symmetry is exact to the bit), non-negative term by term, and
    exactly zero at zbar = 0 and at multiples of the recurrence time.
    """
    zbar = np.abs(np.asarray(zbar, dtype=float))
    t = np.asarray(t, dtype=float)
    s2 = np.sin(modes.omega * t[..., None]) ** 2
    w = (1.0 - np.cos(modes.k * zbar[..., None])) / modes.k**2
    out = modes.prefactor * _mode_sum(s2, w)
    return out if out.ndim else float(out)


def phase_covariance(zbar, t, modes: PlaneWaveModeSet):
    """Two-point phase covariance <phi(z) phi(z')> at separation zbar.

    Complements :func:`phase_variance`:  variance(zbar) =
    2*[covariance(0) - covariance(zbar)].  Its time derivative is the
    light-cone observable: correlations build at rate 2c/l0 * xi_n^2 inside
    the cone zbar < 2ct and stay put outside (up to O(ct/L) finite-size
    corrections).
    """
    zbar = np.abs(np.asarray(zbar, dtype=float))
    t = np.asarray(t, dtype=float)
    s2 = np.sin(modes.omega * t[..., None]) ** 2
    w = np.cos(modes.k * zbar[..., None]) / modes.k**2
    out = 0.5 * modes.prefactor * _mode_sum(s2, w)
    return out if out.ndim else float(out)


def prethermal_variance(zbar, params: PhysicalParams):
    """Variance in the dephased state: 2*|zbar| / (l0/xi_n^2).

    The continuum long-time limit of the mode sum; the corresponding
    correlation function is exp(-|zbar| * xi_n^2 / l0).
    """
    zbar = np.abs(np.asarray(zbar, dtype=float))
    out = 2.0 * zbar / params.l0_effective
    return out if out.ndim else float(out)


def stationary_variance(zbar, modes: PlaneWaveModeSet):
    """Exact discrete time average of the variance (sin^2 -> 1/2).

    In a finite box this is 2*zbar*(L - zbar)/(l0_eff*L) as the truncation
    is lifted, i.e. the infinite-system ramp 2*zbar/l0_eff times a
    finite-size factor (1 - zbar/L).
    """
    zbar = np.abs(np.asarray(zbar, dtype=float))
    w = (1.0 - np.cos(modes.k * zbar[..., None])) / modes.k**2
    out = 0.5 * modes.prefactor * np.sum(w, axis=-1)
    return out if out.ndim else float(out)


def thermal_variance(zbar, temperature: float, modes: PlaneWaveModeSet):
    """Two-point phase variance of the thermal reference state.

    Thermal occupations equipartition the two quadratures, so the state is
    stationary and the variance time independent: sum of 2*(1 - cos k zbar)
    * <|phi_k|^2>_th * 2/L over positive modes, with <|phi_k|^2>_th =
    2/(lambda_T k^2).  Grows linearly with T and monotonically with |zbar|
    on [0, L/2].
    """
    zbar = np.abs(np.asarray(zbar, dtype=float))
    var_phi = modes.thermal_phase_variance(temperature)
    w = (1.0 - np.cos(modes.k * zbar[..., None]))
    out = (4.0 / modes.L) * np.sum(var_phi * w, axis=-1)
    return out if out.ndim else float(out)


def initial_phase_variance(zbar, modes: PlaneWaveModeSet):
    """Variance of the relative phase at t = 0 from splitting shot noise.

    This is the contribution the analytic fields drop; the oracle adds it
    back when ``include_initial_phase_noise`` is set.
    """
    zbar = np.abs(np.asarray(zbar, dtype=float))
    var_phi0 = modes.split_phase_variance()
    w = 1.0 - np.cos(modes.k * zbar[..., None])
    out = (4.0 / modes.L) * np.sum(var_phi0 * w, axis=-1)
    return out if out.ndim else float(out)


def default_rate_step(modes: PlaneWaveModeSet) -> float:
    """Finite-difference step: one twentieth of the fastest half period."""
    return (pi / modes.omega_max) / 20.0


def variance_rate(zbar, t, modes: PlaneWaveModeSet, dt: float | None = None):
    """Central finite difference d<dphi^2>/dt.

    The exact rate is a step: zero inside the light cone (zbar < 2ct,
    where the variance has saturated at its prethermal value) and
    4c/l0 * xi_n^2 outside (two not-yet-connected points diffusing
    independently).
    """
    if dt is None:
        dt = default_rate_step(modes)
    t = np.asarray(t, dtype=float)
    if np.any(t - dt < 0):
        raise ConfigError("t must exceed the finite-difference step")
    return (phase_variance(zbar, t + dt, modes) - phase_variance(zbar, t - dt, modes)) / (2.0 * dt)


def covariance_rate(zbar, t, modes: PlaneWaveModeSet, dt: float | None = None):
    """Central finite difference d<phi(z) phi(z')>/dt: the light-cone step.

    Equals 2c/l0 * xi_n^2 inside the cone (zbar < 2ct) and vanishes
    outside, up to truncation ripple and a finite-size droop of relative
    size 4ct/L.
    """
    if dt is None:
        dt = default_rate_step(modes)
    t = np.asarray(t, dtype=float)
    if np.any(t - dt < 0):
        raise ConfigError("t must exceed the finite-difference step")
    return (phase_covariance(zbar, t + dt, modes) - phase_covariance(zbar, t - dt, modes)) / (2.0 * dt)


def recurrence_time(L: float, c: float) -> float:
    """Full rephasing period L/(2c) of the commensurate spectrum."""
    if L <= 0 or c <= 0:
        raise ConfigError("L and c must be strictly positive")
    return L / (2.0 * c)


def _grid_values(modes: PlaneWaveModeSet, zbar: np.ndarray, times: np.ndarray) -> np.ndarray:
    s2 = np.sin(modes.omega[None, :] * times[:, None]) ** 2          # (nt, P)
    w = (1.0 - np.cos(modes.k[None, :] * np.abs(zbar)[:, None])) / modes.k**2  # (nz, P)
    return modes.prefactor * (s2 @ w.T)                              # (nt, nz)


def convergence_check(
    modes: PlaneWaveModeSet, zbar, times, rtol: float = CONVERGENCE_RTOL
) -> tuple[bool, float]:
    """Doubling test: recompute the grid at 2*p_max and compare.

    The deviation is max|fine - coarse| over the grid relative to the
    field maximum, restricted to separations above 2*xi_h.  Below the
    healing length the mode sum is genuinely cutoff-dominated (each extra
    mode contributes ~zbar^2), so pointwise ratios there measure the
    physical cutoff, not numerical convergence.  At the default phononic
    truncation the deviation is at the percent level and falls off as
    1/p_max.
    """
    zbar = np.atleast_1d(np.asarray(zbar, dtype=float))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    coarse = _grid_values(modes, zbar, times)
    fine = _grid_values(build_modes(modes.params, modes.L, 2 * modes.p_max), zbar, times)
    mask = np.abs(zbar) >= 2.0 * modes.params.xi_h
    if not mask.any():
        mask = np.ones_like(zbar, dtype=bool)
    scale = max(float(np.abs(fine).max()), 1e-300)
    dev = float(np.max(np.abs(fine - coarse)[:, mask]) / scale)
    return dev < rtol, dev


def variance_field(
    modes: PlaneWaveModeSet,
    zbar,
    times,
    check_convergence: bool = False,
    strict: bool = False,
) -> VarianceField:
    """Evaluate the variance on a (times x zbar) grid.

    With ``check_convergence`` the truncation doubling test runs and its
    verdict lands in ``field.converged``; ``strict`` escalates a failed
    test to :class:`ConvergenceError`.
    """
    zbar = np.atleast_1d(np.asarray(zbar, dtype=float))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    values = _grid_values(modes, zbar, times)
    converged = None
    dev = None
    if check_convergence:
        converged, dev = convergence_check(modes, zbar, times)
        if strict and not converged:
            raise ConvergenceError(
                f"variance not converged at p_max={modes.p_max}: "
                f"doubling deviation {dev:.2e} exceeds {CONVERGENCE_RTOL:.1e}"
            )
    p = modes.params
    return VarianceField(
        positions=zbar, times=times, values=values,
        regime="homogeneous", truncation=modes.p_max, converged=converged,
        meta={"c": p.c, "l0": p.l0, "xi_h": p.xi_h, "L": modes.L,
              "xi_n2": p.squeezing, "doubling_dev": dev},
    )


def pair_variance_field(modes: PlaneWaveModeSet, z, zprime, times) -> PairVarianceField:
    """Variance on a full (times x z x z') grid via unique separations."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    zprime = np.atleast_1d(np.asarray(zprime, dtype=float))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    seps = np.abs(z[:, None] - zprime[None, :])
    uniq, inverse = np.unique(seps, return_inverse=True)
    vals = _grid_values(modes, uniq, times)                 # (nt, nu)
    values = vals[:, inverse].reshape(len(times), len(z), len(zprime))
    p = modes.params
    return PairVarianceField(
        z=z, zprime=zprime, times=times, values=values,
        regime="homogeneous", truncation=modes.p_max,
        meta={"c": p.c, "l0": p.l0, "xi_h": p.xi_h, "L": modes.L},
    )
