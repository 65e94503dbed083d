"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 domain error (infeasible design,
parse failure, singular circuit...).  Data goes to stdout or the ``-o``
file; diagnostics go to stderr.  Output files are written to a temporary
name and renamed into place only on success.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import tempfile

import numpy as np

from . import mna, touchstone
from .devices import Technology, default_technology
from .errors import LnaSynthError
from .explorer import CSV_HEADER, SweepGrid, export_table, select, sweep, table_rows
from .netlist import Netlist
from .synthesis import DesignSpec, synthesize
from .twoport import stability

SUFFIX = {"": 1.0, "k": 1e3, "K": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}


class UsageError(Exception):
    pass


def parse_freq(text):
    """``'2.45G'`` -> 2.45e9; an optional trailing ``Hz`` is accepted."""
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*([kKMGT]?)(?:[hH][zZ])?\s*", text)
    if not m:
        raise UsageError(f"bad frequency {text!r}")
    try:
        value = float(m.group(1)) * SUFFIX[m.group(2)]
    except ValueError:
        raise UsageError(f"bad frequency {text!r}") from None
    if not value > 0:
        raise UsageError(f"frequency must be > 0, got {text!r}")
    return value


def parse_grid(text):
    """``lo:hi:n`` linear grid in Hz, unit suffixes allowed."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be lo:hi:n, got {text!r}")
    lo, hi = parse_freq(parts[0]), parse_freq(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise UsageError(f"grid point count must be an integer, got {parts[2]!r}") from None
    if n < 1 or (n > 1 and not hi > lo) or (n == 1 and hi != lo):
        raise UsageError(f"invalid grid {text!r}")
    return np.linspace(lo, hi, n)


def _atomic_write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".lnasynth-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise LnaSynthError(f"{path}: invalid JSON: {exc}") from None


def _tech(path):
    if path is None:
        return default_technology()
    try:
        return Technology.from_dict(_load_json(path))
    except ValueError as exc:
        raise LnaSynthError(f"{path}: {exc}") from None


def _spec(doc, path="spec"):
    try:
        return DesignSpec.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise LnaSynthError(f"{path}: {exc}") from None


def cmd_analyze(args):
    nl = Netlist.from_dict(_load_json(args.netlist))
    grid = parse_grid(args.grid)
    p = mna.extract_two_port(nl, grid)
    data = touchstone.TouchstoneData.from_twoport(
        p, freq_unit=args.unit, format=args.format, comments=[f"lnasynth analyze {os.path.basename(args.netlist)}"]
    )
    _atomic_write(args.output, touchstone.write(data))


def cmd_synthesize(args):
    spec = _spec(_load_json(args.spec), args.spec)
    tech = _tech(args.tech)
    net = synthesize(spec, args.id * 1e-3, args.w1, tech, refine=not args.no_refine)
    _atomic_write(args.output, json.dumps(net.to_dict(), indent=2) + "\n")


def cmd_sweep(args):
    cfg = _load_json(args.config)
    base = os.path.dirname(os.path.abspath(args.config))
    spec_doc = cfg.get("spec", {})
    if isinstance(spec_doc, str):
        spec_doc = _load_json(os.path.join(base, spec_doc))
    spec = _spec(spec_doc)
    grid_doc = cfg.get("grid", {})
    try:
        grid = SweepGrid(
            tuple(x * 1e-3 for x in grid_doc["id_mA"]) if "id_mA" in grid_doc else SweepGrid().id_values,
            tuple(grid_doc.get("w1_um", SweepGrid().w1_values)),
        )
    except ValueError as exc:
        raise LnaSynthError(f"{args.config}: grid: {exc}") from None
    tech_path = cfg.get("technology")
    if args.tech:
        tech_path = args.tech
    elif tech_path:
        tech_path = os.path.join(base, tech_path)
    tech = _tech(tech_path)
    records = sweep(spec, grid, tech, workers=args.workers)
    if args.output and args.output != "-":
        export_table(records, args.output)
    else:
        import csv

        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(table_rows(records))
    try:
        best = select(records, spec)
        print(f"selected: id={best.id * 1e3:g} mA w1={best.w1:g} um iip3={best.iip3_dbm:.2f} dBm", file=sys.stderr)
    except LnaSynthError as exc:
        print(f"selection: {exc}", file=sys.stderr)


def cmd_compare(args):
    meas = touchstone.read(args.measured)
    sim = touchstone.read(args.simulated)
    rep = touchstone.compare(meas, sim, args.f0 * 1e9)
    _atomic_write(args.output, json.dumps(rep.to_dict(), indent=2) + "\n")


def cmd_stability(args):
    p = touchstone.read(args.file).to_twoport()
    rep = stability(p)
    out = ["freq_hz,k,delta_mag,unilateral,stable"]
    for f, k, d, u, s in zip(rep.freqs, rep.k, rep.delta_mag, rep.unilateral, rep.stable):
        kk = f"{k:.6g}" if math.isfinite(k) else ("inf" if k > 0 else "-inf")
        out.append(f"{f:.12g},{kk},{d:.6g},{'unilateral' if u else '-'},{'stable' if s else 'unstable'}")
    sys.stdout.write("\n".join(out) + "\n")


def build_parser():
    ap = argparse.ArgumentParser(prog="lnasynth", description="CMOS LNA synthesis and verification toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="AC-analyse a netlist JSON into a Touchstone file")
    p.add_argument("netlist")
    p.add_argument("--grid", required=True, help="lo:hi:n, e.g. 1G:4G:301")
    p.add_argument("--format", default="MA", choices=touchstone.FORMATS)
    p.add_argument("--unit", default="GHz", choices=list(touchstone.UNIT_NAMES.values()))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", help="synthesize the passive network for one bias point")
    p.add_argument("spec")
    p.add_argument("--id", type=float, required=True, help="bias current in mA")
    p.add_argument("--w1", type=float, required=True, help="input device width in um")
    p.add_argument("--tech", help="technology JSON (default: built-in)")
    p.add_argument("--no-refine", action="store_true", help="closed-form values only, no AC closure")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("sweep", help="design-space sweep to CSV")
    p.add_argument("config")
    p.add_argument("--tech")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="measured vs simulated Touchstone comparison")
    p.add_argument("measured")
    p.add_argument("simulated")
    p.add_argument("--f0", type=float, required=True, help="comparison frequency in GHz")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stability", help="per-frequency Rollett K and |Delta|")
    p.add_argument("file")
    p.set_defaults(func=cmd_stability)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    for attr in ("netlist", "spec", "config", "measured", "simulated", "file", "tech"):
        path = getattr(args, attr, None)
        if path and not os.path.isfile(path):
            print(f"lnasynth: error: no such file: {path}", file=sys.stderr)
            return 1
    try:
        args.func(args)
    except UsageError as exc:
        print(f"lnasynth: error: {exc}", file=sys.stderr)
        return 1
    except LnaSynthError as exc:
        print(f"lnasynth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"lnasynth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())
