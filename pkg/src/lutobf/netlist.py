"""Netlist graph: typed instances over named nets, with validation.

Instances are addressed by a 64-bit stable hash of their original name so
that downstream reports and chain orders do not depend on lengthy tool
names.  Hash collisions abort instead of being resolved silently.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

from .boolfn import TruthTable

LUT_KINDS = {"LUT1": 1, "LUT2": 2, "LUT3": 3, "LUT4": 4, "LUT5": 5, "LUT6": 6}
BUF_KINDS = ("BUF", "IBUF", "OBUF")
GATE_KINDS = ("INV", "AND2", "OR2")  # decoded static logic
TIE_KINDS = ("TIE0", "TIE1")

# pin order is positional and fixed per kind
PIN_ORDER = {
    "FF": ("D",),
    "MUX2": ("I0", "I1", "S"),
    "CARRY": ("A", "B", "CI"),
    "BUF": ("I",),
    "IBUF": ("I",),
    "OBUF": ("I",),
    "INV": ("I",),
    "AND2": ("I0", "I1"),
    "OR2": ("I0", "I1"),
    "TIE0": (),
    "TIE1": (),
}
OUT_PIN = {"FF": "Q", "CARRY": "CO"}
for _k, _w in LUT_KINDS.items():
    PIN_ORDER[_k] = tuple("I%d" % i for i in range(_w))

RECONFIGURABLE = "re"
STATIC = "st"

STATE_KINDS = frozenset(LUT_KINDS)


class NetlistError(Exception):
    """Structural problem in a netlist; kind is a stable diagnostic tag."""

    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind


def stable_uid(name):
    """64-bit hash of an instance name, printed as 16 hex digits."""
    return hashlib.blake2b(name.encode(), digest_size=8).hexdigest()


@dataclass
class Instance:
    name: str
    kind: str
    inputs: tuple
    output: str | None
    mask: TruthTable | None = None
    state: str | None = None
    uid: str = field(default="")

    def __post_init__(self):
        if not self.uid:
            self.uid = stable_uid(self.name)
        if self.kind in LUT_KINDS:
            width = LUT_KINDS[self.kind]
            if len(self.inputs) != width:
                raise NetlistError(
                    "pin-count",
                    "%s %s needs %d inputs, got %d" % (self.kind, self.name, width, len(self.inputs)))
            if self.mask is not None and self.mask.k != width:
                raise NetlistError(
                    "width-mismatch",
                    "%s %s carries a %d-input table" % (self.kind, self.name, self.mask.k))
            if self.state is None:
                self.state = RECONFIGURABLE
        elif self.kind in PIN_ORDER:
            if len(self.inputs) != len(PIN_ORDER[self.kind]):
                raise NetlistError(
                    "pin-count",
                    "%s %s needs %d inputs, got %d"
                    % (self.kind, self.name, len(PIN_ORDER[self.kind]), len(self.inputs)))
        elif self.kind == "PI":
            if self.inputs or self.output is None:
                raise NetlistError("pin-count", "PI %s must only drive a net" % self.name)
        elif self.kind == "PO":
            if len(self.inputs) != 1 or self.output is not None:
                raise NetlistError("pin-count", "PO %s must only read a net" % self.name)
        else:
            raise NetlistError("unknown-kind", "unknown instance kind %s" % self.kind)

    def lut_width(self):
        return LUT_KINDS.get(self.kind)

    def is_lut(self):
        return self.kind in LUT_KINDS

    def is_comb(self):
        return self.kind not in ("FF", "PI", "PO")


class Netlist:
    """Instances keyed by uid, in insertion order, plus port name lists."""

    def __init__(self, name):
        self.name = name
        self.instances = {}
        self.ports_in = []
        self.ports_out = []
        self._topo = None

    def add(self, inst):
        if inst.uid in self.instances:
            other = self.instances[inst.uid]
            if other.name == inst.name:
                raise NetlistError("duplicate-instance", "instance %s defined twice" % inst.name)
            raise NetlistError(
                "hash-collision",
                "uid collision between %s and %s" % (other.name, inst.name))
        self.instances[inst.uid] = inst
        self._topo = None
        if inst.kind == "PI":
            self.ports_in.append(inst.name)
        elif inst.kind == "PO":
            self.ports_out.append(inst.name)
        return inst

    def add_pi(self, name, net=None):
        return self.add(Instance(name, "PI", (), net if net is not None else name))

    def add_po(self, name, net):
        return self.add(Instance(name, "PO", (net,), None))

    def remove(self, uid):
        inst = self.instances.pop(uid)
        self._topo = None
        if inst.kind == "PI":
            self.ports_in.remove(inst.name)
        elif inst.kind == "PO":
            self.ports_out.remove(inst.name)
        return inst

    def luts(self):
        return [i for i in self.instances.values() if i.is_lut()]

    def by_name(self, name):
        inst = self.instances.get(stable_uid(name))
        if inst is None or inst.name != name:
            raise KeyError(name)
        return inst

    def drivers(self):
        """net -> driving uid.  Raises on nets with two drivers."""
        out = {}
        for inst in self.instances.values():
            if inst.output is None:
                continue
            if inst.output in out:
                raise NetlistError(
                    "multiple-drivers",
                    "net %s driven by %s and %s"
                    % (inst.output, self.instances[out[inst.output]].name, inst.name))
            out[inst.output] = inst.uid
        return out

    def fanouts(self):
        """net -> [(uid, pin index)] readers in insertion order."""
        out = {}
        for inst in self.instances.values():
            for pin, net in enumerate(inst.inputs):
                out.setdefault(net, []).append((inst.uid, pin))
        return out

    def validate(self):
        drivers = self.drivers()
        for inst in self.instances.values():
            for net in inst.inputs:
                if net not in drivers:
                    raise NetlistError(
                        "dangling-input",
                        "net %s read by %s has no driver" % (net, inst.name))
        self.topo_order()
        return self

    def topo_order(self):
        """Combinational topological order of uids; FF outputs are sources.

        Raises on combinational cycles.
        """
        if self._topo is not None:
            return self._topo
        drivers = self.drivers()
        order = []
        state = {}  # uid -> 1 visiting, 2 done

        def visit(uid):
            stack = [(uid, 0)]
            while stack:
                u, pi = stack[-1]
                if pi == 0:
                    if state.get(u) == 2:
                        stack.pop()
                        continue
                    if state.get(u) == 1:
                        raise NetlistError("comb-cycle", "combinational cycle through %s"
                                           % self.instances[u].name)
                    state[u] = 1
                inst = self.instances[u]
                feeds = inst.inputs if inst.is_comb() or inst.kind == "PO" else ()
                if pi < len(feeds):
                    stack[-1] = (u, pi + 1)
                    drv = drivers.get(feeds[pi])
                    if drv is not None and state.get(drv) != 2:
                        stack.append((drv, 0))
                else:
                    state[u] = 2
                    order.append(u)
                    stack.pop()

        for uid in self.instances:
            if state.get(uid) != 2:
                visit(uid)
        self._topo = order
        return order

    def invalidate(self):
        self._topo = None

    def copy(self):
        out = Netlist(self.name)
        for inst in self.instances.values():
            out.instances[inst.uid] = replace(inst)
        out.ports_in = list(self.ports_in)
        out.ports_out = list(self.ports_out)
        return out

    def signature(self, mask_free_states=()):
        """Order-independent structural fingerprint used by round-trip tests.

        Net names are replaced by their driver's uid, so renamings that keep
        the graph shape compare equal.  Masks of instances whose state
        appears in mask_free_states are left out, which lets a
        bitstream-programmed emission compare equal to its in-memory source.
        """
        drivers = self.drivers()

        def net_id(n):
            d = drivers.get(n)
            return "@" + d if d is not None else n

        rows = []
        for inst in self.instances.values():
            mask = None
            if inst.mask is not None and inst.state not in mask_free_states:
                mask = inst.mask.to_str()
            rows.append((inst.name, inst.kind, tuple(net_id(n) for n in inst.inputs),
                         net_id(inst.output) if inst.output is not None else None,
                         mask, inst.state))
        rows.sort()
        return (tuple(rows), tuple(sorted(self.ports_in)), tuple(sorted(self.ports_out)))


def splice_out(netlist, uid):
    """Remove a single-input, single-output instance and merge its nets.

    The input net survives; every reader of the removed output net is
    re-pointed at it.  Used for buffer removal.
    """
    inst = netlist.instances[uid]
    if len(inst.inputs) != 1 or inst.output is None:
        raise NetlistError("splice", "cannot splice %s %s" % (inst.kind, inst.name))
    src = inst.inputs[0]
    dead = inst.output
    netlist.remove(uid)
    if src == dead:
        return
    for other in netlist.instances.values():
        if dead in other.inputs:
            other.inputs = tuple(src if n == dead else n for n in other.inputs)
    netlist.invalidate()


def strip_buffers(netlist):
    """Drop every BUF/IBUF/OBUF, splicing their nets.  Returns the netlist."""
    for inst in list(netlist.instances.values()):
        if inst.kind in BUF_KINDS:
            splice_out(netlist, inst.uid)
    return netlist
