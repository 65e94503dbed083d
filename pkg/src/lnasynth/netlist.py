"""Linear small-signal netlists: element types, the ``Netlist`` container,
a fluent builder and the JSON document format.

Nodes are identified by strings or integers; ``0`` (or ``"0"``) is ground.
Every element knows how to produce admittance stamps for a vector of
angular frequencies and the current-noise sources it carries.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from typing import Any, Union

import numpy as np

from .errors import NetlistError

BOLTZMANN = 1.380649e-23

Node = Union[str, int]
GROUND = "0"


def norm_node(node: Node) -> str:
    if isinstance(node, bool) or not isinstance(node, (str, int)):
        raise NetlistError(f"node identifiers must be str or int, got {node!r}")
    name = str(node).strip()
    if not name:
        raise NetlistError("empty node identifier")
    return name


def _positive(name, value, allow_zero=False):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise NetlistError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise NetlistError(f"{name} must be finite and {bound}, got {value!r}")
    return value


def _two_terminal(a, b, y):
    """Stamp triplets for admittance ``y`` (array over omega) between a and b."""
    out = []
    if a >= 0:
        out.append((a, a, y))
    if b >= 0:
        out.append((b, b, y))
    if a >= 0 and b >= 0:
        out.append((a, b, -y))
        out.append((b, a, -y))
    return out


def _vccs(cp, cn, op, on, g):
    out = []
    for r, rs in ((op, 1.0), (on, -1.0)):
        if r < 0:
            continue
        for c, cs in ((cp, 1.0), (cn, -1.0)):
            if c >= 0:
                out.append((r, c, rs * cs * g))
    return out


@dataclass(frozen=True)
class Resistor:
    a: str
    b: str
    r: float
    noisy: bool = True
    name: str = ""

    kind = "resistor"

    def __post_init__(self):
        object.__setattr__(self, "a", norm_node(self.a))
        object.__setattr__(self, "b", norm_node(self.b))
        object.__setattr__(self, "r", _positive("resistance", self.r))

    def terminals(self):
        return (self.a, self.b)

    def stamps(self, omega, idx):
        y = np.full(omega.shape, 1.0 / self.r, dtype=np.complex128)
        return _two_terminal(idx[self.a], idx[self.b], y)

    def noise(self, omega, temp, idx):
        if not self.noisy:
            return []
        dens = np.full(omega.shape, 4.0 * BOLTZMANN * temp / self.r)
        return [(idx[self.a], idx[self.b], dens, self.name or "resistor")]


@dataclass(frozen=True)
class Capacitor:
    a: str
    b: str
    c: float
    name: str = ""

    kind = "capacitor"

    def __post_init__(self):
        object.__setattr__(self, "a", norm_node(self.a))
        object.__setattr__(self, "b", norm_node(self.b))
        object.__setattr__(self, "c", _positive("capacitance", self.c))

    def terminals(self):
        return (self.a, self.b)

    def stamps(self, omega, idx):
        return _two_terminal(idx[self.a], idx[self.b], 1j * omega * self.c)

    def noise(self, omega, temp, idx):
        return []


@dataclass(frozen=True)
class Inductor:
    """Inductor with series loss.

    The loss is ``r_series`` ohms, or ``omega*l/q`` at each analysis
    frequency when ``q`` is given (``q`` wins if both are set).
    """

    a: str
    b: str
    l: float
    r_series: float = 0.0
    q: float | None = None
    noisy: bool = True
    name: str = ""

    kind = "inductor"

    def __post_init__(self):
        object.__setattr__(self, "a", norm_node(self.a))
        object.__setattr__(self, "b", norm_node(self.b))
        object.__setattr__(self, "l", _positive("inductance", self.l))
        object.__setattr__(self, "r_series", _positive("loss resistance", self.r_series, True))
        if self.q is not None:
            object.__setattr__(self, "q", _positive("quality factor", self.q))

    def terminals(self):
        return (self.a, self.b)

    def loss(self, omega):
        if self.q is not None:
            return omega * self.l / self.q
        return np.full(omega.shape, self.r_series)

    def stamps(self, omega, idx):
        y = 1.0 / (self.loss(omega) + 1j * omega * self.l)
        return _two_terminal(idx[self.a], idx[self.b], y)

    def noise(self, omega, temp, idx):
        r = self.loss(omega)
        if not self.noisy or not np.any(r > 0):
            return []
        # Norton equivalent of the series 4kTR voltage noise
        y = 1.0 / (r + 1j * omega * self.l)
        dens = 4.0 * BOLTZMANN * temp * r * np.abs(y) ** 2
        return [(idx[self.a], idx[self.b], dens, self.name or "inductor")]


@dataclass(frozen=True)
class VCCS:
    """Current ``gm*(V(ctrl_p)-V(ctrl_n))`` flowing from out_p to out_n through the source."""

    ctrl_p: str
    ctrl_n: str
    out_p: str
    out_n: str
    gm: float
    name: str = ""

    kind = "vccs"

    def __post_init__(self):
        for f in ("ctrl_p", "ctrl_n", "out_p", "out_n"):
            object.__setattr__(self, f, norm_node(getattr(self, f)))
        try:
            gm = float(self.gm)
        except (TypeError, ValueError):
            raise NetlistError(f"transconductance must be a number, got {self.gm!r}") from None
        if not math.isfinite(gm):
            raise NetlistError("transconductance must be finite")
        object.__setattr__(self, "gm", gm)

    def terminals(self):
        return (self.ctrl_p, self.ctrl_n, self.out_p, self.out_n)

    def stamps(self, omega, idx):
        g = np.full(omega.shape, self.gm, dtype=np.complex128)
        return _vccs(idx[self.ctrl_p], idx[self.ctrl_n], idx[self.out_p], idx[self.out_n], g)

    def noise(self, omega, temp, idx):
        return []


@dataclass(frozen=True)
class Mos:
    """Quasi-static MOS small-signal stamp: gm, gds, cgs, cgd and 4kT*gamma*gm channel noise."""

    gate: str
    source: str
    drain: str
    gm: float
    gds: float = 0.0
    cgs: float = 0.0
    cgd: float = 0.0
    gamma: float = 0.0
    name: str = ""

    kind = "mos"

    def __post_init__(self):
        for f in ("gate", "source", "drain"):
            object.__setattr__(self, f, norm_node(getattr(self, f)))
        object.__setattr__(self, "gm", _positive("gm", self.gm))
        for f in ("gds", "cgs", "cgd", "gamma"):
            object.__setattr__(self, f, _positive(f, getattr(self, f), True))

    @classmethod
    def from_op(cls, op, gate, source, drain, gamma=0.0, name=""):
        return cls(gate, source, drain, op.gm, op.gds, op.cgs, op.cgd, gamma, name)

    def terminals(self):
        return (self.gate, self.source, self.drain)

    def stamps(self, omega, idx):
        g, s, d = idx[self.gate], idx[self.source], idx[self.drain]
        out = _vccs(g, s, d, s, np.full(omega.shape, self.gm, dtype=np.complex128))
        if self.gds:
            out += _two_terminal(d, s, np.full(omega.shape, self.gds, dtype=np.complex128))
        if self.cgs:
            out += _two_terminal(g, s, 1j * omega * self.cgs)
        if self.cgd:
            out += _two_terminal(g, d, 1j * omega * self.cgd)
        return out

    def noise(self, omega, temp, idx):
        if not self.gamma:
            return []
        dens = np.full(omega.shape, 4.0 * BOLTZMANN * temp * self.gamma * self.gm)
        return [(idx[self.drain], idx[self.source], dens, self.name or "mos")]


@dataclass(frozen=True)
class NoiseSource:
    """Independent current-noise source, one-sided density in A^2/Hz."""

    a: str
    b: str
    density: float
    tag: str = "noise"

    kind = "noise"

    def __post_init__(self):
        object.__setattr__(self, "a", norm_node(self.a))
        object.__setattr__(self, "b", norm_node(self.b))
        object.__setattr__(self, "density", _positive("noise density", self.density, True))

    def terminals(self):
        return (self.a, self.b)

    def stamps(self, omega, idx):
        return []

    def noise(self, omega, temp, idx):
        dens = np.full(omega.shape, self.density)
        return [(idx[self.a], idx[self.b], dens, self.tag)]


Element = Union[Resistor, Capacitor, Inductor, VCCS, Mos, NoiseSource]
ELEMENT_TYPES = {cls.kind: cls for cls in (Resistor, Capacitor, Inductor, VCCS, Mos, NoiseSource)}


@dataclass(frozen=True)
class Port:
    node: str
    z0: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "node", norm_node(self.node))
        if self.node == GROUND:
            raise NetlistError("a port cannot sit on the ground node")
        try:
            z0 = float(self.z0)
        except (TypeError, ValueError):
            raise NetlistError(f"reference impedance must be real, got {self.z0!r}") from None
        if not (math.isfinite(z0) and z0 > 0):
            raise NetlistError(f"reference impedance must be > 0, got {self.z0!r}")
        object.__setattr__(self, "z0", z0)


@dataclass(frozen=True)
class Netlist:
    nodes: tuple
    elements: tuple
    ports: tuple = ()

    def __post_init__(self):
        nodes = tuple(dict.fromkeys(norm_node(n) for n in self.nodes if norm_node(n) != GROUND))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", tuple(self.elements))
        ports = tuple(p if isinstance(p, Port) else Port(*p) for p in self.ports)
        object.__setattr__(self, "ports", ports)
        known = set(nodes) | {GROUND}
        for el in self.elements:
            for t in el.terminals():
                if t not in known:
                    raise NetlistError(f"{el.kind} {el.name or ''} references undeclared node {t!r}")
        for p in ports:
            if p.node not in known:
                raise NetlistError(f"port references undeclared node {p.node!r}")

    @property
    def index(self):
        idx = {n: i for i, n in enumerate(self.nodes)}
        idx[GROUND] = -1
        return idx

    def with_elements(self, *extra):
        return Netlist(self.nodes, self.elements + tuple(extra), self.ports)

    # -- JSON ---------------------------------------------------------------
    def to_dict(self):
        elements = []
        for el in self.elements:
            d = {"type": el.kind}
            for f in fields(el):
                v = getattr(el, f.name)
                if f.name == "name" and not v:
                    continue
                if f.name == "q" and v is None:
                    continue
                d[f.name] = v
            elements.append(d)
        return {
            "nodes": list(self.nodes),
            "elements": elements,
            "ports": [{"node": p.node, "z0": p.z0} for p in self.ports],
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]):
        if not isinstance(doc, dict):
            raise NetlistError("netlist document must be a JSON object")
        for key in ("nodes", "elements"):
            if key not in doc:
                raise NetlistError(f"netlist document lacks {key!r}")
        elements = []
        for i, raw in enumerate(doc["elements"]):
            raw = dict(raw)
            kind = raw.pop("type", None)
            if kind not in ELEMENT_TYPES:
                raise NetlistError(f"element #{i}: unknown type {kind!r}")
            try:
                elements.append(ELEMENT_TYPES[kind](**raw))
            except TypeError as exc:
                raise NetlistError(f"element #{i} ({kind}): {exc}") from None
        ports = []
        for raw in doc.get("ports", []):
            if "node" not in raw:
                raise NetlistError("port entry lacks 'node'")
            ports.append(Port(raw["node"], raw.get("z0", 50.0)))
        return cls(tuple(doc["nodes"]), tuple(elements), tuple(ports))

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise NetlistError(f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)


@dataclass
class NetlistBuilder:
    """Incremental netlist construction; nodes are declared on first use.

    >>> nl = (NetlistBuilder().port("in").resistor("in", 0, 50.0)).build()
    >>> nl.nodes
    ('in',)
    """

    _nodes: dict = field(default_factory=dict)
    _elements: list = field(default_factory=list)
    _ports: list = field(default_factory=list)

    def _touch(self, *nodes):
        for n in nodes:
            n = norm_node(n)
            if n != GROUND:
                self._nodes.setdefault(n, None)

    def add(self, element):
        self._touch(*element.terminals())
        self._elements.append(element)
        return self

    def port(self, node, z0=50.0):
        self._touch(node)
        self._ports.append(Port(node, z0))
        return self

    def resistor(self, a, b, r, noisy=True, name=""):
        return self.add(Resistor(a, b, r, noisy, name))

    def capacitor(self, a, b, c, name=""):
        return self.add(Capacitor(a, b, c, name))

    def inductor(self, a, b, l, r_series=0.0, q=None, noisy=True, name=""):
        return self.add(Inductor(a, b, l, r_series, q, noisy, name))

    def vccs(self, ctrl_p, ctrl_n, out_p, out_n, gm, name=""):
        return self.add(VCCS(ctrl_p, ctrl_n, out_p, out_n, gm, name))

    def mos(self, gate, source, drain, gm, gds=0.0, cgs=0.0, cgd=0.0, gamma=0.0, name=""):
        return self.add(Mos(gate, source, drain, gm, gds, cgs, cgd, gamma, name))

    def mos_op(self, op, gate, source, drain, gamma=0.0, name=""):
        """MOS stamp from a ``MosOpPoint``."""
        return self.add(Mos.from_op(op, gate, source, drain, gamma, name))

    def noise(self, a, b, density, tag="noise"):
        return self.add(NoiseSource(a, b, density, tag))

    def build(self):
        return Netlist(tuple(self._nodes), tuple(self._elements), tuple(self._ports))
