"""Touchstone v1 two-port files (.s2p) and measured-vs-simulated comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FrequencyOutOfRange,
    NonMonotonicFrequency,
    TouchstoneSyntaxError,
    WrongColumnCount,
)
from .twoport import TwoPortParams, stability, y_to_s, z_to_s

FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
UNIT_NAMES = {"HZ": "Hz", "KHZ": "kHz", "MHZ": "MHz", "GHZ": "GHz"}
FORMATS = ("RI", "MA", "DB")
KINDS = ("S", "Y", "Z")
# v1 two-port column order
ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass
class TouchstoneData:
    """Parsed file.  ``freqs`` in Hz, ``data`` complex (m, 2, 2), always RI internally.

    ``freq_unit`` and ``format`` only record how the file was (or will be)
    written.  Y and Z data stay normalised to ``z0`` as in the file.
    """

    freqs: np.ndarray
    data: np.ndarray
    freq_unit: str = "GHz"
    param_kind: str = "S"
    format: str = "MA"
    z0: float = 50.0
    comments: list = field(default_factory=list)

    def to_twoport(self) -> TwoPortParams:
        if self.param_kind == "S":
            s = self.data
        elif self.param_kind == "Z":
            s = z_to_s(self.data, 1.0)
        else:
            s = y_to_s(self.data, 1.0)
        return TwoPortParams(self.freqs, s, self.z0)

    @classmethod
    def from_twoport(cls, p: TwoPortParams, freq_unit="GHz", format="MA", comments=()):
        return cls(p.freqs.copy(), p.s.copy(), freq_unit, "S", format, p.z0, list(comments))


def _parse_options(tokens, lineno):
    opts = {"unit": "GHZ", "kind": "S", "fmt": "MA", "z0": 50.0}
    i = 0
    while i < len(tokens):
        t = tokens[i].upper()
        if t in FREQ_UNITS:
            opts["unit"] = t
        elif t in KINDS:
            opts["kind"] = t
        elif t in ("G", "H"):
            raise TouchstoneSyntaxError(f"unsupported parameter type {t!r}", lineno)
        elif t in FORMATS:
            opts["fmt"] = t
        elif t == "R":
            if i + 1 >= len(tokens):
                raise TouchstoneSyntaxError("'R' option without a reference resistance", lineno)
            try:
                z0 = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneSyntaxError(f"bad reference resistance {tokens[i + 1]!r}", lineno) from None
            if not z0 > 0:
                raise TouchstoneSyntaxError("reference resistance must be > 0", lineno)
            opts["z0"] = z0
            i += 1
        else:
            raise TouchstoneSyntaxError(f"unknown option {tokens[i]!r}", lineno)
        i += 1
    return opts


def _to_complex(a, b, fmt):
    if fmt == "RI":
        return complex(a, b)
    mag = a if fmt == "MA" else 10.0 ** (a / 20.0)
    ang = math.radians(b)
    return complex(mag * math.cos(ang), mag * math.sin(ang))


def parse(text: str) -> TouchstoneData:
    """Parse Touchstone v1 two-port text.

    Rows may be continued over several lines; every logical row must hold
    exactly nine numbers.  The first option line wins (later ones are
    ignored, as v1 prescribes); without one, ``GHz S MA R 50`` applies.
    """
    comments = []
    opts = None
    rows = []  # (lineno, [floats])
    pending, pending_line = [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, bang, comment = raw.partition("!")
        if bang:
            comments.append(comment.strip())
        line = line.strip()
        if not line:
            continue
        if line.startswith("["):
            raise TouchstoneSyntaxError(f"Touchstone v2 keyword {line.split()[0]!r} not supported", lineno)
        if line.startswith("#"):
            if pending:
                raise WrongColumnCount(f"row starting on line {pending_line} incomplete before option line", lineno)
            if opts is None:
                opts = _parse_options(line[1:].split(), lineno)
            continue
        try:
            vals = [float(t) for t in line.split()]
        except ValueError as exc:
            raise TouchstoneSyntaxError(f"non-numeric data: {exc}", lineno) from None
        if not pending:
            pending_line = lineno
        pending.extend(vals)
        if len(pending) > 9:
            raise WrongColumnCount(f"expected 9 values per two-port row, got {len(pending)}", lineno)
        if len(pending) == 9:
            rows.append((pending_line, pending))
            pending = []
    if pending:
        raise WrongColumnCount(f"expected 9 values per two-port row, got {len(pending)}", pending_line)
    if not rows:
        raise TouchstoneSyntaxError("no data rows")
    if opts is None:
        opts = {"unit": "GHZ", "kind": "S", "fmt": "MA", "z0": 50.0}

    scale = FREQ_UNITS[opts["unit"]]
    freqs = np.empty(len(rows))
    data = np.empty((len(rows), 2, 2), dtype=np.complex128)
    prev = -math.inf
    for k, (ln, v) in enumerate(rows):
        f = v[0] * scale
        if not f > prev:
            raise NonMonotonicFrequency(f"frequency {v[0]:g} not above previous row", ln)
        prev = f
        freqs[k] = f
        for n, (i, j) in enumerate(ORDER):
            data[k, i, j] = _to_complex(v[1 + 2 * n], v[2 + 2 * n], opts["fmt"])
    return TouchstoneData(freqs, data, UNIT_NAMES[opts["unit"]], opts["kind"], opts["fmt"], opts["z0"], comments)


def _fmt_num(x):
    return f"{x:.6g}"


def _pair(z, fmt):
    if fmt == "RI":
        return z.real, z.imag
    mag = abs(z)
    ang = math.degrees(math.atan2(z.imag, z.real))
    if fmt == "MA":
        return mag, ang
    return (20.0 * math.log10(mag) if mag > 0 else -math.inf), ang


def write(data: TouchstoneData, format: str | None = None) -> str:
    """Canonical text: comments, one option line, one frequency per row.

    Data values carry 6 significant digits; frequencies are written with up
    to 12 so that dense grids keep strictly increasing values.
    """
    fmt = (format or data.format).upper()
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    unit_key = data.freq_unit.upper()
    scale = FREQ_UNITS[unit_key]
    lines = [f"! {c}" for c in data.comments]
    lines.append(f"# {UNIT_NAMES[unit_key]} {data.param_kind} {fmt} R {data.z0:g}")
    for f, m in zip(data.freqs, data.data):
        parts = [f"{f / scale:.12g}"]
        for i, j in ORDER:
            a, b = _pair(complex(m[i, j]), fmt)
            parts.append(_fmt_num(a))
            parts.append(_fmt_num(b))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def read(path) -> TouchstoneData:
    with open(path) as fh:
        return parse(fh.read())


# -- comparison ------------------------------------------------------------------

PARAMS = ("S11", "S21", "S12", "S22")


def interp_db(freqs, values_db, f0):
    """Linear interpolation in (log f, dB)."""
    freqs = np.asarray(freqs, dtype=float)
    if not freqs[0] * (1 - 1e-12) <= f0 <= freqs[-1] * (1 + 1e-12):
        raise FrequencyOutOfRange(f"{f0:.6g} Hz outside grid [{freqs[0]:.6g}, {freqs[-1]:.6g}] Hz")
    if freqs.size == 1:
        return float(values_db[0])
    return float(np.interp(math.log(f0), np.log(freqs), values_db))


@dataclass
class ComparisonReport:
    f0: float
    measured_db: dict
    simulated_db: dict
    delta_db: dict
    s22_min_freq_measured: float
    s22_min_freq_simulated: float
    s22_min_shift: float
    stable_measured: bool
    stable_simulated: bool
    min_k_measured: float
    min_k_simulated: float
    max_delta_measured: float
    max_delta_simulated: float

    def to_dict(self):
        def clean(x):
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, (float, np.floating)):
                x = float(x)
                return x if math.isfinite(x) else str(x)
            if isinstance(x, np.bool_):
                return bool(x)
            return x

        return clean(dict(self.__dict__))


def compare(measured: TouchstoneData, simulated: TouchstoneData, f0: float) -> ComparisonReport:
    """Measured minus simulated dB magnitudes at ``f0`` plus S22-minimum shift and stability."""
    pm, ps = measured.to_twoport(), simulated.to_twoport()
    meas, sim, delta = {}, {}, {}
    for name in PARAMS:
        meas[name] = interp_db(pm.freqs, pm.db(name), f0)
        sim[name] = interp_db(ps.freqs, ps.db(name), f0)
        delta[name] = meas[name] - sim[name]
    fm = float(pm.freqs[np.argmin(np.abs(pm.param("S22")))])
    fs = float(ps.freqs[np.argmin(np.abs(ps.param("S22")))])
    sm, ss = stability(pm), stability(ps)
    return ComparisonReport(
        f0=float(f0),
        measured_db=meas,
        simulated_db=sim,
        delta_db=delta,
        s22_min_freq_measured=fm,
        s22_min_freq_simulated=fs,
        s22_min_shift=fm - fs,
        stable_measured=sm.all_stable,
        stable_simulated=ss.all_stable,
        min_k_measured=float(np.min(sm.k)),
        min_k_simulated=float(np.min(ss.k)),
        max_delta_measured=float(np.max(sm.delta_mag)),
        max_delta_simulated=float(np.max(ss.delta_mag)),
    )
