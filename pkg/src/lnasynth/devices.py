"""Analytic technology and MOS operating-point model.

The drain current is a smooth weak-to-strong inversion interpolation
(EKV-style softplus squared) divided by a mobility-reduction term::

    s    = ln(1 + exp(vov / (2 n U_T)))
    p    = ln(1 + exp(vov / (n U_T)))
    I_D  = 2 n beta U_T^2 s^2 / (1 + theta * n U_T * p)

``n U_T p`` tends to ``vov`` in strong inversion and to 0 in weak
inversion, so the denominator is a C-infinity version of ``1 + theta*max(vov, 0)``.
The third derivative of this law changes sign once, in moderate inversion,
which is what produces the IIP3 sweet spot along a bias sweep.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from importlib import resources

import numpy as np
from scipy.optimize import bisect

from .errors import OutOfTechnologyRange, Unattainable

K_BOLTZMANN = 1.380649e-23
Q_ELECTRON = 1.602176634e-19
VOV_CEILING = 0.7
VOV_FLOOR = -1.5
IIP3_GM3_FLOOR = 1e-12
# softplus width of the mobility-reduction term, in units of n*U_T
DENOM_WIDTH = 1.0


@dataclass(frozen=True)
class Technology:
    """Process constants.

    Units: ``cox`` F/um^2, ``cov`` F/um, ``vt0`` V, ``beta_sq`` A/V^2 (per
    square), ``theta`` 1/V, ``temp`` K, ``l_min`` um, ``inductor_range`` H,
    ``cap_range`` F, ``vdd`` V.  ``a_early`` is the gm/gds ratio used for the
    output conductance.
    """

    cox: float
    cov: float
    vt0: float
    n_slope: float
    beta_sq: float
    theta: float
    gamma_noise: float
    temp: float
    l_min: float
    inductor_range: tuple
    inductor_q: float
    cap_range: tuple
    vdd: float
    a_early: float = 30.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name.endswith("_range"):
                lo, hi = (float(x) for x in v)
                if not (0 < lo < hi and math.isfinite(hi)):
                    raise ValueError(f"{f.name} must satisfy 0 < min < max, got {v!r}")
                object.__setattr__(self, f.name, (lo, hi))
            else:
                v = float(v)
                if not (math.isfinite(v) and v > 0):
                    raise ValueError(f"{f.name} must be finite and > 0, got {v!r}")
                object.__setattr__(self, f.name, v)

    @property
    def ut(self):
        """Thermal voltage kT/q."""
        return K_BOLTZMANN * self.temp / Q_ELECTRON

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return Technology(**d)

    def to_dict(self):
        d = asdict(self)
        d["inductor_range"] = list(d["inductor_range"])
        d["cap_range"] = list(d["cap_range"])
        return d

    @classmethod
    def from_dict(cls, doc):
        names = [f.name for f in fields(cls)]
        missing = [n for n in names if n not in doc]
        if missing:
            raise ValueError(f"technology file lacks fields: {', '.join(missing)}")
        unknown = sorted(set(doc) - set(names) - {"comment", "units"})
        if unknown:
            raise ValueError(f"technology file has unknown fields: {', '.join(unknown)}")
        return cls(**{n: doc[n] for n in names})

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def default_technology() -> Technology:
    """Generic 130 nm-class constants shipped with the package (not a foundry PDK)."""
    text = resources.files("lnasynth").joinpath("data/default_technology.json").read_text()
    return Technology.from_dict(json.loads(text))


@dataclass(frozen=True)
class MosGeometry:
    w: float
    l: float

    def validate(self, tech: Technology):
        if not self.w > 0:
            raise ValueError(f"width must be > 0, got {self.w}")
        if self.l < tech.l_min * (1 - 1e-12):
            raise ValueError(f"length {self.l} um below technology minimum {tech.l_min} um")
        return self


@dataclass(frozen=True)
class MosOpPoint:
    id: float
    vgs: float
    gm: float
    gm2: float
    gm3: float
    gds: float
    cgs: float
    cgd: float
    omega_t: float


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _current_and_derivs(vov, geom, tech):
    """I_D and its first three derivatives with respect to vov (arrays)."""
    vov = np.asarray(vov, dtype=float)
    two_n_ut = 2.0 * tech.n_slope * tech.ut
    width = DENOM_WIDTH * tech.n_slope * tech.ut
    beta = tech.beta_sq * geom.w / geom.l
    k = 2.0 * tech.n_slope * beta * tech.ut**2

    # numerator u = s^2, s = softplus(vov / 2nU_T)
    x = vov / two_n_ut
    s = _softplus(x)
    sg = _sigmoid(x)
    s1 = sg / two_n_ut
    s2 = sg * (1.0 - sg) / two_n_ut**2
    s3 = sg * (1.0 - sg) * (1.0 - 2.0 * sg) / two_n_ut**3
    u0 = s * s
    u1 = 2.0 * s * s1
    u2 = 2.0 * (s1 * s1 + s * s2)
    u3 = 2.0 * (3.0 * s1 * s2 + s * s3)

    # denominator w = 1 + theta * width * softplus(vov / width)
    y = vov / width
    pg = _sigmoid(y)
    w0 = 1.0 + tech.theta * width * _softplus(y)
    w1 = tech.theta * pg
    w2 = tech.theta * pg * (1.0 - pg) / width
    w3 = tech.theta * pg * (1.0 - pg) * (1.0 - 2.0 * pg) / width**2

    q0 = u0 / w0
    q1 = (u1 - q0 * w1) / w0
    q2 = (u2 - 2.0 * q1 * w1 - q0 * w2) / w0
    q3 = (u3 - 3.0 * q2 * w1 - 3.0 * q1 * w2 - q0 * w3) / w0
    return k * q0, k * q1, k * q2, k * q3


def mos_current(vov, geom: MosGeometry, tech: Technology):
    """Drain current (A) at overdrive ``vov`` = V_GS - V_T (scalar or array)."""
    i = _current_and_derivs(vov, geom, tech)[0]
    return float(i) if np.ndim(i) == 0 else i


def mos_derivatives(vov, geom: MosGeometry, tech: Technology):
    """``(I_D, gm, gm2, gm3)`` with gm2, gm3 the plain 2nd/3rd derivatives dI/dV."""
    return _current_and_derivs(vov, geom, tech)


def bias_for_current(id_target, geom: MosGeometry, tech: Technology, vov_ceiling=VOV_CEILING):
    """Gate-source voltage giving ``id_target`` (bracketed bisection on vov)."""
    geom.validate(tech)
    if not (id_target > 0 and math.isfinite(id_target)):
        raise Unattainable(f"target current must be > 0, got {id_target!r}")
    i_max = mos_current(vov_ceiling, geom, tech)
    if id_target > i_max:
        raise Unattainable(
            f"{id_target:.4g} A exceeds {i_max:.4g} A available from W/L = {geom.w}/{geom.l} "
            f"at overdrive ceiling {vov_ceiling} V"
        )
    lo = VOV_FLOOR
    while mos_current(lo, geom, tech) > id_target:
        lo -= 1.0
        if lo < -50.0:
            raise Unattainable(f"{id_target:.4g} A below model resolution")
    vov = bisect(
        lambda v: mos_current(v, geom, tech) - id_target,
        lo,
        vov_ceiling,
        xtol=1e-15,
        rtol=4 * np.finfo(float).eps,
        maxiter=400,
    )
    return tech.vt0 + vov


def small_signal(id, geom: MosGeometry, tech: Technology, vov_ceiling=VOV_CEILING) -> MosOpPoint:
    vgs = bias_for_current(id, geom, tech, vov_ceiling)
    _, gm, gm2, gm3 = (float(v) for v in _current_and_derivs(vgs - tech.vt0, geom, tech))
    cgd = tech.cov * geom.w
    cgs = (2.0 / 3.0) * tech.cox * geom.w * geom.l + cgd
    return MosOpPoint(
        id=float(id),
        vgs=float(vgs),
        gm=gm,
        gm2=gm2,
        gm3=gm3,
        gds=gm / tech.a_early,
        cgs=cgs,
        cgd=cgd,
        omega_t=gm / (cgs + cgd),
    )


def iip3_power_series(op: MosOpPoint, source_z: float) -> float:
    """Input IP3 (dBm of available power) of a memoryless gm/gm3 nonlinearity.

    Returns ``math.inf`` at the sweet spot (|gm3| below 1e-12 A/V^3).
    """
    if abs(op.gm3) < IIP3_GM3_FLOOR:
        return math.inf
    a2 = (4.0 / 3.0) * abs(op.gm / op.gm3)
    return 10.0 * math.log10(a2 / (8.0 * source_z) / 1e-3)


def inductor_loss(l, freq, tech: Technology) -> float:
    """Series loss resistance ``omega*L/Q`` of an on-chip inductor."""
    lo, hi = tech.inductor_range
    if not lo <= l <= hi:
        raise OutOfTechnologyRange(
            f"inductance {l * 1e9:.4g} nH outside technology range [{lo * 1e9:.4g}, {hi * 1e9:.4g}] nH"
        )
    if not freq > 0:
        raise ValueError("frequency must be > 0")
    return 2.0 * math.pi * freq * l / tech.inductor_q
