"""Passive-network synthesis for the cascode common-source LNA with
inductive degeneration.

The pipeline fixes the drain inductor first, then derives the input stage
from the gain target (L_S), the real-part match (C_T, C_X) and the series
resonance (L_g), and finally sizes the capacitive output divider.  The
closed-form values are only estimates, so ``synthesize`` by default closes
the loop with the AC engine: it adjusts L_S, C_X, L_g, C_1 and C_P until
the simulated gain hits the target and both ports are matched at the band
centre.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.optimize import root

from . import mna
from .devices import MosGeometry, Technology, small_signal
from .errors import (
    LnaSynthError,
    NegativeCeq,
    NegativeCx,
    NonPositiveLg,
    OutOfTechnologyRange,
    SynthesisError,
    TransformImpossible,
)
from .netlist import NetlistBuilder
from .twoport import available_gain

C_B_RATIO = 100.0
R_G_DEFAULT = 10e3
C_EQ_FLOOR = 50e-15
MATCH_LIMIT_DB = -15.0


@dataclass(frozen=True)
class DesignSpec:
    """Target specification; defaults describe a 2.4 GHz ISM-band receiver front end."""

    band: tuple = (2.4e9, 2.5e9)
    gain_db: float = 10.5
    gain_tol_db: float = 0.5
    nf_max_db: float = 3.0
    iip3_min_dbm: float = -4.0
    s11_max_db: float = -10.0
    s22_max_db: float = -10.0
    rs: float = 50.0
    rl: float = 50.0

    def __post_init__(self):
        lo, hi = (float(x) for x in self.band)
        if not 0 < lo < hi:
            raise ValueError(f"band must satisfy 0 < f_lo < f_hi, got {self.band!r}")
        object.__setattr__(self, "band", (lo, hi))
        if not self.gain_tol_db > 0:
            raise ValueError("gain tolerance must be > 0")
        if not (self.rs > 0 and self.rl > 0):
            raise ValueError("rs and rl must be > 0")

    @property
    def center(self):
        """Geometric band centre in Hz."""
        return math.sqrt(self.band[0] * self.band[1])

    @property
    def omega0(self):
        return 2.0 * math.pi * self.center

    def to_dict(self):
        d = asdict(self)
        d["band"] = list(self.band)
        return d

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValueError(f"unknown design-spec fields: {', '.join(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class LnaNetwork:
    """Synthesized passives (SI units) plus the device point they were built for."""

    l_s: float
    l_g: float
    l_d: float
    c_x: float
    c_1: float
    c_p: float
    c_b: float
    r_g: float
    q_d: float
    id: float = 0.0
    w1: float = 0.0
    w2: float = 0.0
    l: float = 0.0

    def validate(self, tech: Technology):
        for name in ("l_s", "l_g", "l_d", "c_1", "c_p", "c_b", "r_g", "q_d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.c_x < 0:
            raise ValueError("c_x must be >= 0")
        for name in ("l_s", "l_g", "l_d"):
            _check_inductor(name, getattr(self, name), tech)
        for name in ("c_1", "c_p", "c_b"):
            _check_capacitor(name, getattr(self, name), tech)
        if self.c_x > tech.cap_range[1]:
            raise OutOfTechnologyRange(f"c_x = {self.c_x:.4g} F above technology maximum")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        return cls(**{f.name: doc[f.name] for f in fields(cls) if f.name in doc})


def _check_inductor(name, value, tech):
    lo, hi = tech.inductor_range
    if not lo <= value <= hi:
        raise OutOfTechnologyRange(
            f"{name} = {value * 1e9:.4g} nH outside inductor range [{lo * 1e9:.4g}, {hi * 1e9:.4g}] nH"
        )


def _check_capacitor(name, value, tech):
    lo, hi = tech.cap_range
    if not lo <= value <= hi:
        raise OutOfTechnologyRange(
            f"{name} = {value * 1e15:.4g} fF outside capacitor range [{lo * 1e15:.4g}, {hi * 1e15:.4g}] fF"
        )


# -- closed-form stages ---------------------------------------------------------


def ls_for_gain(gain_target_linear, l_d, q_d, y_od_real, r_s, omega0, tech: Technology | None = None):
    """Degeneration inductance that yields ``gain_target_linear`` available gain."""
    if not gain_target_linear > 0:
        raise ValueError("gain target must be > 0")
    go = y_od_real + 1.0 / (omega0 * l_d * q_d)
    gm_req = math.sqrt(gain_target_linear * go / r_s)
    l_s = 1.0 / (2.0 * omega0 * gm_req)
    if tech is not None:
        _check_inductor("l_s", l_s, tech)
    return l_s


def ct_for_match(gm, l_s, r_s):
    """Gate-source capacitance giving a real input part ``gm*l_s/C_T = r_s``."""
    return gm * l_s / r_s


def split_ct(c_t, c_gs):
    c_x = c_t - c_gs
    if c_x < 0:
        raise NegativeCx(
            f"device C_gs = {c_gs * 1e15:.4g} fF exceeds required C_T = {c_t * 1e15:.4g} fF"
        )
    return c_x


def lg_for_resonance(c_t, l_s, omega0, tech: Technology | None = None):
    l_g = 1.0 / (omega0 * omega0 * c_t) - l_s
    if not l_g > 1e-9 * l_s:
        raise NonPositiveLg(
            f"input loop already resonates below f0 (L_S = {l_s * 1e9:.4g} nH, C_T = {c_t * 1e15:.4g} fF)"
        )
    if tech is not None:
        _check_inductor("l_g", l_g, tech)
    return l_g


def output_divider(l_d, q_d, y_od_real, c_out, rl, omega0):
    """Capacitive tap ``(C_1, C_P)`` from the high-Q transformer approximation.

    C_1 runs from the drain to the output, C_P from the output to ground.
    """
    r_p = 1.0 / (y_od_real + 1.0 / (omega0 * l_d * q_d))
    if not r_p > rl:
        raise TransformImpossible(f"tank resistance {r_p:.4g} ohm not above load {rl:.4g} ohm")
    m = math.sqrt(r_p / rl)
    c_eq = 1.0 / (omega0 * omega0 * l_d) - c_out
    if not c_eq > 0:
        raise NegativeCeq(f"output capacitance {c_out * 1e15:.4g} fF alone exceeds the tank capacitance")
    c_1 = c_eq * m / (m - 1.0)
    return c_1, (m - 1.0) * c_1


def output_divider_exact(l_d, r_ld, y_od, rl, omega0):
    """Exact two-capacitor match of the drain node to ``rl`` at ``omega0``.

    ``y_od`` is the complex cascode output admittance, ``r_ld`` the series
    loss of L_D.  The load branch (C_1 in series with C_P || rl) must present
    the conjugate of the drain-node admittance.
    """
    y_node = complex(y_od) + 1.0 / (r_ld + 1j * omega0 * l_d)
    z_t = 1.0 / y_node.conjugate()
    g_l = 1.0 / rl
    if not 0 < z_t.real < rl:
        raise TransformImpossible(
            f"drain node cannot be matched to {rl:.4g} ohm with a series/shunt capacitor pair"
        )
    c_p = math.sqrt(g_l / z_t.real - g_l * g_l) / omega0
    x_branch = -omega0 * c_p / (g_l * g_l + (omega0 * c_p) ** 2)
    x_c1 = x_branch - z_t.imag
    if not x_c1 > 0:
        raise NegativeCeq("drain node is not inductive enough for a series output capacitor")
    return 1.0 / (omega0 * x_c1), c_p


# -- netlist and verification ---------------------------------------------------


def cascode_output_admittance(op1, op2, omega0):
    """Complex admittance looking into the cascode drain, input device gate and source grounded."""
    nl = (
        NetlistBuilder()
        .mos_op(op1, "0", "0", "m")
        .mos_op(op2, "0", "m", "d")
        .port("d", 50.0)
        .build()
    )
    z = mna.input_impedance(nl, 0, omega0 / (2.0 * math.pi))
    return 1.0 / z


def build_lna_netlist(net: LnaNetwork, op1, op2, rs=50.0, rl=50.0, gamma=0.0):
    """Small-signal netlist of the complete amplifier; port 0 = RF in, port 1 = RF out.

    Every inductor carries its Q loss; gate bias resistor, inductor losses and
    the two channel-noise sources (``gamma``) are noisy.
    """
    b = NetlistBuilder().port("in", rs).port("out", rl)
    b.capacitor("in", "a", net.c_b, name="C_b")
    b.resistor("a", "0", net.r_g, name="R_G")
    b.inductor("a", "g", net.l_g, q=net.q_d, name="L_g")
    if net.c_x > 0:
        b.capacitor("g", "s", net.c_x, name="C_X")
    b.inductor("s", "0", net.l_s, q=net.q_d, name="L_S")
    b.mos_op(op1, "g", "s", "m", gamma, name="M1")
    b.mos_op(op2, "0", "m", "d", gamma, name="M2")
    b.inductor("d", "0", net.l_d, q=net.q_d, name="L_D")
    b.capacitor("d", "out", net.c_1, name="C_1")
    b.capacitor("out", "0", net.c_p, name="C_P")
    return b.build()


def device_points(id, w1, tech: Technology):
    """Operating points of M1 (W_1) and the half-width cascode M2 at the same current."""
    g1 = MosGeometry(w1, tech.l_min).validate(tech)
    g2 = MosGeometry(w1 / 2.0, tech.l_min).validate(tech)
    return small_signal(id, g1, tech), small_signal(id, g2, tech)


def _s_at(net, op1, op2, spec, gamma=0.0):
    nl = build_lna_netlist(net, op1, op2, spec.rs, spec.rl, gamma)
    return mna.extract_two_port(nl, [spec.center]).s[0]


def _refine(net, op1, op2, spec):
    """Newton-type closure of gain and both matches on the AC engine."""
    keys = ("l_s", "c_x", "l_g", "c_1", "c_p")
    x0 = np.log([getattr(net, k) for k in keys])

    def make(x):
        vals = dict(zip(keys, np.exp(x)))
        vals["c_b"] = C_B_RATIO * (vals["c_x"] + op1.cgs)
        return _replace(net, **vals)

    def resid(x):
        s = _s_at(make(x), op1, op2, spec)
        g = 20.0 * math.log10(abs(s[1, 0]))
        return [(g - spec.gain_db) / 10.0, s[0, 0].real, s[0, 0].imag, s[1, 1].real, s[1, 1].imag]

    sol = root(resid, x0, method="hybr", options={"xtol": 1e-12, "maxfev": 400})
    if not sol.success or max(abs(v) for v in sol.fun) > 1e-6:
        raise LnaSynthError(f"AC refinement did not converge: {sol.message}")
    return make(sol.x)


def _replace(net, **changes):
    d = asdict(net)
    d.update({k: float(v) for k, v in changes.items()})
    return LnaNetwork(**d)


def synthesize(spec: DesignSpec, id: float, w1: float, tech: Technology, refine: bool = True) -> LnaNetwork:
    """Compute every passive of the amplifier for bias ``id`` (A) and width ``w1`` (um).

    Stage failures are raised as :class:`SynthesisError` carrying the stage
    name.  With ``refine`` (default) the closed-form values seed an AC
    closure.  Either way the result must verify as matched (S11 and S22 at
    or below -15 dB) at the band centre.
    """
    stage = "devices"
    try:
        omega0 = spec.omega0
        op1, op2 = device_points(id, w1, tech)
        q_d = tech.inductor_q

        stage = "cascode"
        y_od = cascode_output_admittance(op1, op2, omega0)
        y_od_real = y_od.real
        c_out = y_od.imag / omega0

        stage = "l_d"
        l_d = min(tech.inductor_range[1], 1.0 / (omega0 * omega0 * (c_out + C_EQ_FLOOR)))
        _check_inductor("l_d", l_d, tech)

        stage = "ls_for_gain"
        g_lin = 10.0 ** (spec.gain_db / 10.0)
        l_s = ls_for_gain(g_lin, l_d, q_d, y_od_real, spec.rs, omega0, tech)

        stage = "ct_for_match"
        c_t = ct_for_match(op1.gm, l_s, spec.rs)

        stage = "split_ct"
        c_x = split_ct(c_t, op1.cgs)

        stage = "lg_for_resonance"
        l_g = lg_for_resonance(c_t, l_s, omega0, tech)

        stage = "output_divider"
        c_1, c_p = output_divider(l_d, q_d, y_od_real, c_out, spec.rl, omega0)

        net = LnaNetwork(
            l_s=l_s, l_g=l_g, l_d=l_d, c_x=c_x, c_1=c_1, c_p=c_p,
            c_b=C_B_RATIO * c_t, r_g=R_G_DEFAULT, q_d=q_d,
            id=float(id), w1=float(w1), w2=float(w1) / 2.0, l=tech.l_min,
        )
        if refine:
            stage = "refine"
            # seed the output tap with the exact two-capacitor match; the
            # high-Q estimate is far off when the divider ratio is large
            c_1x, c_px = output_divider_exact(l_d, omega0 * l_d / q_d, y_od, spec.rl, omega0)
            net = _refine(_replace(net, c_1=c_1x, c_p=c_px), op1, op2, spec)

        stage = "range_check"
        net.validate(tech)

        stage = "verify"
        s = _s_at(net, op1, op2, spec)
        s11 = 20.0 * math.log10(max(abs(s[0, 0]), 1e-300))
        s22 = 20.0 * math.log10(max(abs(s[1, 1]), 1e-300))
        if s11 > MATCH_LIMIT_DB or s22 > MATCH_LIMIT_DB:
            raise LnaSynthError(f"verified match S11 = {s11:.2f} dB, S22 = {s22:.2f} dB above {MATCH_LIMIT_DB} dB")
        return net
    except SynthesisError:
        raise
    except (LnaSynthError, ValueError) as exc:
        raise SynthesisError(stage, exc) from exc


def estimated_gain(net: LnaNetwork, op1, op2, spec: DesignSpec):
    """Closed-form gain estimate of a network (for estimator/verifier comparison)."""
    y_od = cascode_output_admittance(op1, op2, spec.omega0)
    return available_gain(net.l_s, net.l_d, net.q_d, y_od.real, spec.rs, spec.omega0)
