"""Two-port mathematics: S/Y conversion, the inductively degenerated LNA
gain chain, Rollett stability and in-band metrics.

dB convention, project-wide: power ratios use ``10*log10``, wave
magnitudes (S-parameters) ``20*log10``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BandOutsideGrid, DegenerateConversion

UNILATERAL_EPS = 1e-15


@dataclass(frozen=True)
class TwoPortParams:
    """S-matrices ``s[k]`` (2x2 complex) at ``freqs[k]`` Hz, referenced to ``z0`` ohms."""

    freqs: np.ndarray
    s: np.ndarray
    z0: float = 50.0

    def __post_init__(self):
        f = np.atleast_1d(np.asarray(self.freqs, dtype=float))
        s = np.asarray(self.s, dtype=np.complex128).reshape(-1, 2, 2)
        if f.ndim != 1 or s.shape[0] != f.size:
            raise ValueError("freqs and s must have matching lengths")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if not (math.isfinite(self.z0) and self.z0 > 0):
            raise ValueError("z0 must be positive")
        if not np.all(np.isfinite(s)):
            raise ValueError("S-parameters must be finite")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "s", s)

    def __len__(self):
        return self.freqs.size

    def param(self, name):
        """Complex trace by name, e.g. ``p.param("S21")``."""
        i, j = int(name[1]) - 1, int(name[2]) - 1
        return self.s[:, i, j]

    def db(self, name):
        return mag_db(self.param(name))


def mag_db(x):
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(x))


def _rdiv(num, den, what):
    """``num @ inv(den)`` over stacked 2x2 matrices."""
    if np.any(np.abs(np.linalg.det(den)) < 1e-300):
        raise DegenerateConversion(what)
    return np.swapaxes(np.linalg.solve(np.swapaxes(den, -1, -2), np.swapaxes(num, -1, -2)), -1, -2)


def y_to_s(y, z0=50.0):
    """Admittance matrix (2x2, or a stack of them) to S at real ``z0``."""
    yn = np.asarray(y, dtype=np.complex128) * z0
    eye = np.eye(2)
    return _rdiv(eye - yn, eye + yn, "I + z0*Y is singular")


def s_to_y(s, z0=50.0):
    """Inverse of :func:`y_to_s`."""
    s = np.asarray(s, dtype=np.complex128)
    eye = np.eye(2)
    return _rdiv(eye - s, eye + s, "I + S is singular (short-circuit Y undefined)") / z0


def z_to_s(z, z0=50.0):
    z = np.asarray(z, dtype=np.complex128)
    eye = np.eye(2)
    return _rdiv(z - z0 * eye, z + z0 * eye, "Z + z0*I is singular")


def s_to_z(s, z0=50.0):
    s = np.asarray(s, dtype=np.complex128)
    eye = np.eye(2)
    return z0 * _rdiv(eye + s, eye - s, "I - S is singular (open-circuit Z undefined)")


# -- gain chain ----------------------------------------------------------------


def effective_transconductance(l_s, omega0):
    """Input-stage transconductance under input match, ``1/(2*omega0*l_s)``."""
    return 1.0 / (2.0 * omega0 * l_s)


def output_conductance(l_d, q_d, y_od_real, omega0):
    """Cascode output conductance plus the parallel loss of the drain inductor."""
    return y_od_real + 1.0 / (omega0 * l_d * q_d)


@dataclass(frozen=True)
class GainBreakdown:
    gm_eff: float
    go_prime: float
    y_od_real: float
    l_d: float
    q_d: float
    l_s: float
    r_s: float
    omega0: float
    gain_linear: float
    gain_db: float


def available_gain(l_s, l_d, q_d, y_od_real, r_s, omega0):
    gm = effective_transconductance(l_s, omega0)
    go = output_conductance(l_d, q_d, y_od_real, omega0)
    g = gm * gm * r_s / go
    return GainBreakdown(gm, go, y_od_real, l_d, q_d, l_s, r_s, omega0, g, 10.0 * math.log10(g))


# -- stability -------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    freqs: np.ndarray
    k: np.ndarray
    delta_mag: np.ndarray
    unilateral: np.ndarray

    @property
    def stable(self):
        """Per-frequency verdict: K > 1 and |Delta| < 1 (both strict)."""
        return (self.k > 1.0) & (self.delta_mag < 1.0)

    @property
    def all_stable(self):
        return bool(np.all(self.stable))


def stability(p: TwoPortParams) -> StabilityReport:
    """Rollett K and |Delta| per frequency.

    Where ``|S12*S21| < 1e-15`` the point is flagged unilateral and K is
    reported as +/-inf following the sign of its numerator.
    """
    s11, s12, s21, s22 = p.s[:, 0, 0], p.s[:, 0, 1], p.s[:, 1, 0], p.s[:, 1, 1]
    delta = s11 * s22 - s12 * s21
    num = 1.0 - np.abs(s11) ** 2 - np.abs(s22) ** 2 + np.abs(delta) ** 2
    den = 2.0 * np.abs(s12 * s21)
    uni = den < UNILATERAL_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(uni, np.copysign(np.inf, num), num / np.where(uni, 1.0, den))
    return StabilityReport(p.freqs.copy(), k, np.abs(delta), uni)


# -- band metrics ----------------------------------------------------------------


@dataclass(frozen=True)
class BandMetrics:
    worst_s11_db: float
    worst_s22_db: float
    min_s21_db: float
    max_s21_db: float
    s12_center_db: float


def band_metrics(p: TwoPortParams, band) -> BandMetrics:
    f_lo, f_hi = float(band[0]), float(band[1])
    if not f_lo <= f_hi:
        raise ValueError("band edges must satisfy f_lo <= f_hi")
    f = p.freqs
    tol = 1e-9 * max(abs(f_hi), 1.0)
    if f_lo < f[0] - tol or f_hi > f[-1] + tol:
        raise BandOutsideGrid(
            f"band [{f_lo:.6g}, {f_hi:.6g}] Hz not covered by grid [{f[0]:.6g}, {f[-1]:.6g}] Hz"
        )
    inband = (f >= f_lo - tol) & (f <= f_hi + tol)
    if not inband.any():
        raise BandOutsideGrid("no grid point inside the band")
    s21 = p.db("S21")[inband]
    center = 0.5 * (f_lo + f_hi)
    s12c = float(np.interp(center, f, p.db("S12"))) if f.size > 1 else float(p.db("S12")[0])
    return BandMetrics(
        float(p.db("S11")[inband].max()),
        float(p.db("S22")[inband].max()),
        float(s21.min()),
        float(s21.max()),
        s12c,
    )


def transducer_gain_db(p: TwoPortParams):
    """|S21|^2 in dB: transducer gain between reference terminations."""
    return mag_db(p.param("S21"))


def available_gain_db(p: TwoPortParams):
    """Available gain from a reference-impedance source, ``|S21|^2 / (1 - |S22|^2)``."""
    s22 = np.abs(p.param("S22")) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return 10.0 * np.log10(np.abs(p.param("S21")) ** 2 / (1.0 - s22))
