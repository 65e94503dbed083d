"""Design-space exploration over (bias current, input-device width).

Each grid point is synthesized, verified with the AC engine and scored;
points that cannot be synthesized stay in the result as records with a
failure reason.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import mna
from .devices import Technology, iip3_power_series
from .errors import LnaSynthError, NoFeasibleCandidate
from .synthesis import DesignSpec, LnaNetwork, build_lna_netlist, device_points, synthesize
from .twoport import mag_db

W_BIAS_UM = 4.0
CSV_HEADER = ("id_mA", "w1_um", "gain_db", "nf_db", "iip3_dbm", "s11_db", "s22_db", "s12_db", "p_dc_uW", "feasible")
METRICS = ("gain_db", "nf_db", "iip3_dbm", "s11_db", "s22_db", "s12_db")


@dataclass(frozen=True)
class SweepGrid:
    id_values: tuple = (0.3e-3, 0.4e-3)
    w1_values: tuple = (24.0, 32.0, 40.0, 48.0, 56.0, 64.0)

    def __post_init__(self):
        for name in ("id_values", "w1_values"):
            v = tuple(float(x) for x in getattr(self, name))
            if not v:
                raise ValueError(f"{name} must be nonempty")
            if any(x <= 0 for x in v) or any(b <= a for a, b in zip(v, v[1:])):
                raise ValueError(f"{name} must be positive and strictly increasing")
            object.__setattr__(self, name, v)

    def points(self):
        return [(i, w) for i in self.id_values for w in self.w1_values]


@dataclass(frozen=True)
class CandidateRecord:
    id: float
    w1: float
    p_dc: float
    i_ref: float
    network: LnaNetwork | None = None
    failure: str | None = None
    gain_db: float | None = None
    nf_db: float | None = None
    iip3_dbm: float | None = None
    s11_db: float | None = None
    s22_db: float | None = None
    s12_db: float | None = None
    feasible: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.network is not None

    @property
    def meets_spec(self):
        return self.ok and bool(self.feasible) and all(self.feasible.values())


def spec_checks(rec, spec: DesignSpec):
    return {
        "gain": abs(rec["gain_db"] - spec.gain_db) <= spec.gain_tol_db,
        "nf": rec["nf_db"] < spec.nf_max_db,
        "iip3": rec["iip3_dbm"] > spec.iip3_min_dbm,
        "s11": rec["s11_db"] < spec.s11_max_db,
        "s22": rec["s22_db"] < spec.s22_max_db,
    }


def evaluate_point(spec: DesignSpec, id: float, w1: float, tech: Technology, i_ref: float | None = None,
                   refine: bool = True) -> CandidateRecord:
    """Synthesize and verify one (I_D, W_1) point at the band centre."""
    if i_ref is None:
        i_ref = id * W_BIAS_UM / w1
    p_dc = (i_ref + id) * tech.vdd
    try:
        net = synthesize(spec, id, w1, tech, refine=refine)
    except LnaSynthError as exc:
        return CandidateRecord(id, w1, p_dc, i_ref, failure=str(exc))
    op1, op2 = device_points(id, w1, tech)
    nl = build_lna_netlist(net, op1, op2, spec.rs, spec.rl, tech.gamma_noise)
    f0 = spec.center
    try:
        s = mna.extract_two_port(nl, [f0]).s[0]
        nf = mna.noise_figure(nl, f0, 0, 1)
    except LnaSynthError as exc:
        return CandidateRecord(id, w1, p_dc, i_ref, failure=f"[verify] {exc}")
    m = {
        "gain_db": float(mag_db(s[1, 0])),
        "nf_db": float(nf),
        "iip3_dbm": float(iip3_power_series(op1, spec.rs)),
        "s11_db": float(mag_db(s[0, 0])),
        "s22_db": float(mag_db(s[1, 1])),
        "s12_db": float(mag_db(s[0, 1])),
    }
    return CandidateRecord(id, w1, p_dc, i_ref, network=net, feasible=spec_checks(m, spec), **m)


def sweep(spec: DesignSpec, grid: SweepGrid, tech: Technology, workers: int = 1, refine: bool = True):
    """Evaluate every grid point, id-major order; per-point failures are records, not exceptions."""
    pts = grid.points()
    fn = partial(_eval_tuple, spec, tech, refine)
    if workers and workers > 1 and len(pts) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, pts))
    return [fn(p) for p in pts]


def _eval_tuple(spec, tech, refine, pt):
    return evaluate_point(spec, pt[0], pt[1], tech, refine=refine)


@dataclass(frozen=True)
class FeasibilityWindow:
    s_max_db: float = -15.0
    gain_lo: float = 10.3
    gain_hi: float = 10.9


def filter_feasible(records, window: FeasibilityWindow = FeasibilityWindow()):
    """Records whose verified S11 and S22 are strictly below ``s_max_db`` and gain is in the window."""
    return [
        r
        for r in records
        if r.ok
        and r.s11_db < window.s_max_db
        and r.s22_db < window.s_max_db
        and window.gain_lo <= r.gain_db <= window.gain_hi
    ]


def _binding(rec, spec):
    if not rec.ok:
        return f"id={rec.id * 1e3:g} mA w1={rec.w1:g} um: {rec.failure}"
    checks = rec.feasible or spec_checks(
        {k: getattr(rec, k) for k in METRICS}, spec
    )
    failed = [k for k, v in checks.items() if not v]
    return f"id={rec.id * 1e3:g} mA w1={rec.w1:g} um: fails {', '.join(failed)}"


def select(records, spec: DesignSpec) -> CandidateRecord:
    """Lowest bias current meeting every requirement; ties go to the highest IIP3, then the smallest W_1."""
    records = list(records)
    if not records:
        raise NoFeasibleCandidate("no candidate records given")
    good = []
    reasons = []
    for r in records:
        checks = spec_checks({k: getattr(r, k) for k in METRICS}, spec) if r.ok else {}
        if checks and all(checks.values()):
            good.append(r)
        else:
            reasons.append(_binding(r, spec))
    if not good:
        raise NoFeasibleCandidate(
            "no candidate meets every requirement:\n  " + "\n  ".join(reasons), reasons
        )
    return min(good, key=lambda r: (r.id, -r.iip3_dbm, r.w1))


# -- CSV -------------------------------------------------------------------------


def _fmt(x):
    if x is None:
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6f}"


def table_rows(records):
    for r in records:
        yield [
            _fmt(r.id * 1e3),
            _fmt(r.w1),
            *(_fmt(getattr(r, k)) for k in METRICS),
            _fmt(r.p_dc * 1e6),
            "1" if r.meets_spec else "0",
        ]


def export_table(records, path):
    """Write the sweep table as CSV atomically (temp file + rename)."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".sweep-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            w.writerows(table_rows(records))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_table(path):
    """Parse an exported table back into dicts (floats, None for blanks, bool feasible)."""
    out = []
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if tuple(rd.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected header {rd.fieldnames!r}")
        for row in rd:
            rec = {k: (float(v) if v != "" else None) for k, v in row.items() if k != "feasible"}
            rec["feasible"] = row["feasible"] == "1"
            out.append(rec)
    return out


def op_points(records, tech: Technology):
    """Re-derive (gm, C_T) for every synthesized record, used for monotonicity checks."""
    out = []
    for r in records:
        if not r.ok:
            continue
        op1, _ = device_points(r.id, r.w1, tech)
        out.append((r.id, r.w1, op1.gm, r.network.c_x + op1.cgs))
    return np.array(out)
