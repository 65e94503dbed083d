"""Small-signal AC and noise analysis of a :class:`~lnasynth.netlist.Netlist`.

All elements are admittance-stampable, so the system is plain nodal
analysis: ``Y(omega) v = i``.  Ports are Thevenin sources (EMF ``E`` behind
the port's reference impedance) and are stamped as their Norton equivalent;
non-excited ports stay terminated in their reference impedance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidPort, MissingSourceNoise, SingularSystem
from .netlist import BOLTZMANN, GROUND, Netlist
from .twoport import TwoPortParams

RESIDUAL_TOL = 1e-10
T_REF = 290.0


@dataclass(frozen=True)
class AcSolution:
    freq: float
    nodes: tuple
    voltages: np.ndarray

    def voltage(self, node):
        node = str(node)
        if node == GROUND:
            return 0j
        return complex(self.voltages[self.nodes.index(node)])


def _omegas(freqs):
    f = np.atleast_1d(np.asarray(freqs, dtype=float))
    if f.ndim != 1 or f.size == 0:
        raise ValueError("frequency grid must be a nonempty 1-D sequence")
    if np.any(~np.isfinite(f)) or np.any(f <= 0):
        raise ValueError("analysis frequencies must be finite and > 0")
    return f, 2.0 * np.pi * f


def _port_z0(netlist, z0_override=None):
    return [float(z0_override) if z0_override is not None else p.z0 for p in netlist.ports]


def assemble(netlist: Netlist, omega, z0_override=None):
    """Nodal matrices for every omega, port terminations included. Shape (m, n, n)."""
    idx = netlist.index
    n = len(netlist.nodes)
    rows, cols, vals = [], [], []
    for el in netlist.elements:
        for r, c, v in el.stamps(omega, idx):
            rows.append(r)
            cols.append(c)
            vals.append(v)
    for p, z0 in zip(netlist.ports, _port_z0(netlist, z0_override)):
        k = idx[p.node]
        rows.append(k)
        cols.append(k)
        vals.append(np.full(omega.shape, 1.0 / z0, dtype=np.complex128))
    if not vals:
        return np.zeros((omega.size, n, n), dtype=np.complex128)
    return kernels.scatter_stamps(n, rows, cols, np.stack(vals, axis=1))


def _check(netlist, freqs, y, rhs, x, first_singular, skip_singular=False):
    """Singular/residual checks. Returns a boolean mask of valid frequencies."""
    ok = np.ones(freqs.size, dtype=bool)
    if first_singular >= 0:
        bad = ~np.all(np.isfinite(x.reshape(freqs.size, -1)), axis=1)
        ok &= ~bad
    res = np.einsum("mij,mjk->mik", y, np.nan_to_num(x)) - rhs
    ynorm = np.abs(y).reshape(freqs.size, -1).max(axis=1)
    xn = np.abs(np.nan_to_num(x)).reshape(freqs.size, -1).max(axis=1)
    bn = np.abs(rhs).reshape(freqs.size, -1).max(axis=1)
    rel = np.abs(res).reshape(freqs.size, -1).max(axis=1) / (ynorm * xn * y.shape[1] + bn)
    ok &= rel <= RESIDUAL_TOL
    if not ok.all() and not skip_singular:
        k = int(np.flatnonzero(~ok)[0])
        raise SingularSystem(
            f"nodal matrix singular or ill-conditioned at {freqs[k]:.6g} Hz "
            f"(floating node or degenerate element set)",
            freq=float(freqs[k]),
        )
    return ok


def port_voltages(netlist: Netlist, freqs, z0_override=None, skip_singular=False):
    """Node voltages for unit-EMF excitation of each port in turn.

    Returns ``(freqs, x, ok)`` with ``x`` of shape (m, n_nodes, n_ports).
    """
    if not netlist.ports:
        raise InvalidPort("netlist has no ports")
    f, w = _omegas(freqs)
    y = assemble(netlist, w, z0_override)
    idx = netlist.index
    n = len(netlist.nodes)
    rhs = np.zeros((f.size, n, len(netlist.ports)), dtype=np.complex128)
    for j, (p, z0) in enumerate(zip(netlist.ports, _port_z0(netlist, z0_override))):
        rhs[:, idx[p.node], j] += 1.0 / z0
    x, first = kernels.solve_batch(y, rhs)
    ok = _check(netlist, f, y, rhs, x, first, skip_singular)
    return f, x, ok


def _port_index(netlist, port):
    if isinstance(port, bool) or not isinstance(port, (int, np.integer)):
        raise InvalidPort(f"port index must be an integer, got {port!r}")
    if not 0 <= port < len(netlist.ports):
        raise InvalidPort(f"port {port} out of range (netlist has {len(netlist.ports)} ports)")
    return int(port)


def solve_ac(netlist: Netlist, freq: float, excited_port: int = 0) -> AcSolution:
    """Node voltages with a 1 V EMF behind ``excited_port``'s reference impedance."""
    j = _port_index(netlist, excited_port)
    f, x, _ = port_voltages(netlist, [freq])
    return AcSolution(float(f[0]), netlist.nodes, x[0, :, j].copy())


def extract_two_port(netlist: Netlist, freq_grid, z0=None, skip_singular=False) -> TwoPortParams:
    """S-parameters of a two-port netlist over ``freq_grid``.

    ``z0`` overrides the ports' own reference impedances (both ports are
    then terminated in ``z0``).  With ``skip_singular`` the frequencies where
    the nodal system is singular are dropped instead of raising.
    """
    if len(netlist.ports) != 2:
        raise InvalidPort(f"two-port extraction needs exactly 2 ports, netlist has {len(netlist.ports)}")
    grid = np.asarray(freq_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("frequency grid must be nonempty and strictly increasing")
    z = _port_z0(netlist, z0)
    if not math.isclose(z[0], z[1], rel_tol=1e-12):
        raise ValueError("two-port extraction requires equal port reference impedances")
    f, x, ok = port_voltages(netlist, grid, z0, skip_singular)
    idx = netlist.index
    k = [idx[p.node] for p in netlist.ports]
    v = x[:, k, :]  # v[m, i, j]: port-i voltage, port-j excited
    s = 2.0 * v - np.eye(2)[None, :, :]
    return TwoPortParams(f[ok], s[ok], z[0])


def port_y_matrix(netlist: Netlist, freq_grid):
    """Short-circuit admittance matrix seen at the ports (ports unterminated).

    Raises SingularSystem when it does not exist, e.g. for a direct
    through-connection between the ports.
    """
    f, w = _omegas(freq_grid)
    bare = Netlist(netlist.nodes, netlist.elements, ())
    y = assemble(bare, w)
    idx = netlist.index
    k = [idx[p.node] for p in netlist.ports]
    n = len(netlist.nodes)
    rhs = np.zeros((f.size, n, len(k)), dtype=np.complex128)
    for j, node in enumerate(k):
        rhs[:, node, j] = 1.0
    x, first = kernels.solve_batch(y, rhs)
    _check(bare, f, y, rhs, x, first)
    zport = x[:, k, :]
    return np.linalg.inv(zport)


def input_impedance(netlist: Netlist, port: int, freq: float) -> complex:
    """Impedance looking into ``port``, other ports terminated in their reference impedance."""
    j = _port_index(netlist, port)
    f, x, _ = port_voltages(netlist, [freq])
    v = x[0, netlist.index[netlist.ports[j].node], j]
    z0 = netlist.ports[j].z0
    i_in = (1.0 - v) / z0
    if i_in == 0:
        return complex(math.inf, 0.0)
    return complex(v / i_in)


def noise_contributions(netlist: Netlist, freq: float, in_port: int = 0, out_port: int = 1, temp: float = T_REF):
    """Output noise density (V^2/Hz at the out-port node) per source tag.

    The source resistance of ``in_port`` appears under the tag ``"source"``.
    The out-port termination is treated as noiseless, as the noise-figure
    definition requires.
    """
    i = _port_index(netlist, in_port)
    o = _port_index(netlist, out_port)
    if i == o:
        raise InvalidPort("input and output port must differ")
    f, w = _omegas([freq])
    y = assemble(netlist, w)
    idx = netlist.index
    n = len(netlist.nodes)
    e = np.zeros((1, n, 1), dtype=np.complex128)
    e[0, idx[netlist.ports[o].node], 0] = 1.0
    yt = np.ascontiguousarray(np.swapaxes(y, 1, 2))
    x, first = kernels.solve_batch(yt, e)
    _check(netlist, f, yt, e, x, first)
    # x[k] is the transimpedance from a current injected at node k to V(out)
    xk = np.append(x[0, :, 0], 0.0)  # index -1 -> ground -> 0

    contrib = {}
    src = netlist.ports[i]
    contrib["source"] = float(abs(xk[idx[src.node]]) ** 2 * 4.0 * BOLTZMANN * temp / src.z0)
    for el in netlist.elements:
        for a, b, dens, tag in el.noise(w, temp, idx):
            h = xk[a] - xk[b]
            contrib[tag] = contrib.get(tag, 0.0) + float(abs(h) ** 2 * dens[0])
    return contrib


def noise_figure(netlist: Netlist, freq: float, in_port: int = 0, out_port: int = 1, temp: float = T_REF) -> float:
    """Spot noise figure in dB at ``freq``, source resistance at ``temp`` kelvin."""
    contrib = noise_contributions(netlist, freq, in_port, out_port, temp)
    src = contrib["source"]
    if not src > 0:
        raise MissingSourceNoise(
            f"source resistance of port {in_port} produces no output noise at port {out_port}"
        )
    total = sum(contrib.values())
    return 10.0 * math.log10(total / src)
