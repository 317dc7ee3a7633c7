"""Monte-Carlo validation of the analytic phase statistics.

Each realization draws Gaussian mode amplitudes from the stated initial
conditions (splitting shot noise or a thermal state), evolves every mode
harmonically, synthesises the relative-phase field on the requested grid
and estimates the correlation function as <cos(phi(z) - phi(z'))>.  For
Gaussian phases this expectation equals exp(-variance/2), so the estimator
checks the analytic mode sums end to end; the ensemble mean of
sin(phi - phi') must vanish and is recorded as a sanity channel.

Randomness is counter-based and splittable: realization ``i`` of an
ensemble with master seed ``s`` uses a Philox stream keyed by (s, i), and
draws its mode amplitudes from that stream in a fixed documented order
(density quadrature first, then the phase quadrature when present, both
ordered by mode index).  Results are therefore bit-identical for a fixed
(seed, spec) regardless of how realizations are scheduled; accumulation
sums fixed-size realization blocks in index order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import pi

from .errors import ConfigError
from .homogeneous import PlaneWaveModeSet
from .trapped import LegendreModeSet, legendre_f_table

__all__ = ["EnsembleSpec", "EnsembleStats", "sample_realization", "estimate_pcf"]

_BLOCK = 256


@dataclass(frozen=True)
class EnsembleSpec:
    """What to sample: ensemble size, seed and initial conditions."""

    realizations: int
    master_seed: int
    kind: str = "split"                    # "split" or "thermal"
    temperature: float | None = None       # K, thermal kind only
    include_initial_phase_noise: bool = False

    def __post_init__(self):
        if self.realizations < 2:
            raise ConfigError("need at least 2 realizations for a standard error")
        if self.kind not in ("split", "thermal"):
            raise ConfigError(f"unknown initial-condition kind: {self.kind!r}")
        if self.kind == "thermal" and (self.temperature is None or self.temperature <= 0):
            raise ConfigError("thermal ensembles need a positive temperature")

    def with_realizations(self, n: int) -> "EnsembleSpec":
        return EnsembleSpec(n, self.master_seed, self.kind, self.temperature,
                            self.include_initial_phase_noise)


@dataclass
class EnsembleStats:
    """Monte-Carlo correlation estimate with per-point standard errors."""

    positions: np.ndarray    # m; z grid (second point fixed at zprime)
    zprime: float
    times: np.ndarray        # s
    mean: np.ndarray         # (nt, nz), <cos dphi>
    stderr: np.ndarray       # (nt, nz)
    imag_mean: np.ndarray    # (nt, nz), <sin dphi>, should vanish
    imag_stderr: np.ndarray
    realizations: int


def _rng_for(spec: EnsembleSpec, index: int) -> np.random.Generator:
    key = np.array([spec.master_seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _quadrature_sigmas(spec: EnsembleSpec, modes) -> tuple[np.ndarray, np.ndarray | None]:
    """Per-mode standard deviations of the initial (density, phase) amplitudes."""
    if spec.kind == "split":
        var_n = modes.split_density_variance()
        var_phi = modes.split_phase_variance() if spec.include_initial_phase_noise else None
    else:
        var_n = modes.thermal_density_variance(spec.temperature)
        var_phi = modes.thermal_phase_variance(spec.temperature)
    return np.sqrt(var_n), None if var_phi is None else np.sqrt(var_phi)


def sample_realization(index: int, spec: EnsembleSpec, modes, z, times) -> np.ndarray:
    """Relative-phase field phi(z, t) of one realization, shape (nt, nz)."""
    if index >= spec.realizations:
        raise ConfigError("realization index out of range")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    rng = _rng_for(spec, index)
    if isinstance(modes, PlaneWaveModeSet):
        return _sample_plane_wave(rng, spec, modes, z, times)
    if isinstance(modes, LegendreModeSet):
        return _sample_legendre(rng, spec, modes, z, times)
    raise ConfigError(f"unsupported mode set type: {type(modes).__name__}")


def _sample_plane_wave(rng, spec, modes: PlaneWaveModeSet, z, times) -> np.ndarray:
    P = modes.p_max
    sig_n, sig_phi = _quadrature_sigmas(spec, modes)
    # complex amplitudes: indepenent re/im parts each carrying half the variance
    xn = rng.standard_normal((P, 2)) * (sig_n[:, None] / np.sqrt(2.0))
    xphi = None
    if sig_phi is not None:
        xphi = rng.standard_normal((P, 2)) * (sig_phi[:, None] / np.sqrt(2.0))
    wt = modes.omega[:, None] * times[None, :]
    sin_t, cos_t = np.sin(wt), np.cos(wt)
    amp = modes.phi_amplitude()[:, None]             # pi/(k K)
    re = -amp * xn[:, :1] * sin_t                     # (P, nt)
    im = -amp * xn[:, 1:] * sin_t
    if xphi is not None:
        re = re + xphi[:, :1] * cos_t
        im = im + xphi[:, 1:] * cos_t
    kz = modes.k[None, :] * z[:, None]                # (nz, P)
    cos_z, sin_z = np.cos(kz), np.sin(kz)
    field = (2.0 / np.sqrt(modes.L)) * (cos_z @ re - sin_z @ im)  # (nz, nt)
    return field.T


def _sample_legendre(rng, spec, modes: LegendreModeSet, z, times) -> np.ndarray:
    J = modes.j_max
    if np.any(np.abs(z) > modes.radius):
        raise ConfigError("points must lie inside the cloud (|z| <= R)")
    sig_n, sig_phi = _quadrature_sigmas(spec, modes)
    xn = rng.standard_normal(J) * sig_n
    xphi = rng.standard_normal(J) * sig_phi if sig_phi is not None else None
    wt = modes.omega_j[:, None] * times[None, :]
    coef = pi * modes.v_N / modes.omega_j[:, None]
    phi_t = -coef * xn[:, None] * np.sin(wt)          # (J, nt)
    if xphi is not None:
        phi_t = phi_t + xphi[:, None] * np.cos(wt)
    f = legendre_f_table(J, z / modes.radius)         # (J, nz)
    return (phi_t.T @ f)                              # (nt, nz)


def estimate_pcf(spec: EnsembleSpec, modes, z, times, zprime: float = 0.0) -> EnsembleStats:
    """Ensemble estimate of C(z, zprime, t) = <cos(phi(z) - phi(zprime))>.

    Realizations are generated independently from their per-index streams
    and accumulated in fixed blocks, so the result depends only on
    (master_seed, spec, grid).
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    pts = np.concatenate([z, [zprime]])
    n = spec.realizations
    shape = (times.size, z.size)
    s_cos = np.zeros(shape)
    s_cos2 = np.zeros(shape)
    s_sin = np.zeros(shape)
    s_sin2 = np.zeros(shape)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        blk_cos = np.empty((stop - start,) + shape)
        blk_sin = np.empty((stop - start,) + shape)
        for i in range(start, stop):
            fld = sample_realization(i, spec, modes, pts, times)
            dphi = fld[:, :-1] - fld[:, -1:]
            blk_cos[i - start] = np.cos(dphi)
            blk_sin[i - start] = np.sin(dphi)
        s_cos += blk_cos.sum(axis=0)
        s_cos2 += (blk_cos**2).sum(axis=0)
        s_sin += blk_sin.sum(axis=0)
        s_sin2 += (blk_sin**2).sum(axis=0)
    mean = s_cos / n
    var = np.maximum(s_cos2 - n * mean**2, 0.0) / (n - 1)
    imag_mean = s_sin / n
    imag_var = np.maximum(s_sin2 - n * imag_mean**2, 0.0) / (n - 1)
    return EnsembleStats(
        positions=z, zprime=zprime, times=times,
        mean=mean, stderr=np.sqrt(var / n),
        imag_mean=imag_mean, imag_stderr=np.sqrt(imag_var / n),
        realizations=n,
    )
