"""Delay model and path timing.

The model is deliberately pre-layout: LUTs carry the block-characterization
average delays, per-pin arcs spread linearly around that average, wires are
free.  A decoded static LUT is timed as a scaled fraction of its original
delay, floored by the depth of its minimized two-level form, and never
slower than the reconfigurable original.

Path bookkeeping follows the report vocabulary: a path is an ordered list
of (instance uid, arc delay) elements, cp is the worst total, sum_delay the
sum over all tracked paths.  update_timing() is the in-loop recalculation:
it touches only paths containing the changed instance and must agree with
a from-scratch rebuild, which the tests enforce.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .boolfn import isop_minimize
from .netlist import LUT_KINDS, NetlistError

DEFAULT_LUT_AVG = (0.049, 0.052, 0.119, 0.192, 0.257, 0.295)


def _ceil_log2(n):
    return (n - 1).bit_length() if n > 1 else 0


@dataclass(eq=False)
class DelayModel:
    """All delays in ns.  lut_avg_delay is indexed by k-1."""

    lut_avg_delay: tuple = DEFAULT_LUT_AVG
    ff_delay: float = 0.0
    mux_delay: float = 0.03
    carry_delay: float = 0.04
    static_scale: float = 0.5
    gate_delay: float = 0.03
    arc_slow: float = 1.3
    arc_fast: float = 0.7
    _arc_cache: dict = field(default_factory=dict, repr=False)
    _static_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.lut_avg_delay = tuple(float(d) for d in self.lut_avg_delay)
        if len(self.lut_avg_delay) != 6:
            raise ValueError("lut_avg_delay needs six entries")
        if any(d < 0 for d in self.lut_avg_delay):
            raise ValueError("negative LUT delay")
        if not 0 < self.static_scale <= 1:
            raise ValueError("static_scale must be in (0, 1]")
        if min(self.ff_delay, self.mux_delay, self.carry_delay, self.gate_delay) < 0:
            raise ValueError("negative delay")
        if not self.arc_slow >= self.arc_fast >= 0:
            raise ValueError("arc spread must be non-increasing toward the output pin")

    def avg(self, k):
        return self.lut_avg_delay[k - 1]

    def arcs(self, k):
        """Per-pin arc delays; pin k-1 sits nearest the output and is fastest."""
        got = self._arc_cache.get(k)
        if got is not None:
            return got
        if k == 1:
            arcs = (self.lut_avg_delay[0],)
        else:
            span = self.arc_fast - self.arc_slow
            factors = [self.arc_slow + span * i / (k - 1) for i in range(k)]
            raw = [self.avg(k) * f for f in factors]
            mean = sum(raw) / k
            arcs = tuple(a * self.avg(k) / mean for a in raw) if mean else tuple(raw)
        self._arc_cache[k] = arcs
        return arcs

    def to_dict(self):
        return {
            "lut_avg_delay": list(self.lut_avg_delay),
            "ff_delay": self.ff_delay,
            "mux_delay": self.mux_delay,
            "carry_delay": self.carry_delay,
            "static_scale": self.static_scale,
            "gate_delay": self.gate_delay,
            "arc_slow": self.arc_slow,
            "arc_fast": self.arc_fast,
        }

    @classmethod
    def from_dict(cls, doc):
        known = {"lut_avg_delay", "ff_delay", "mux_delay", "carry_delay",
                 "static_scale", "gate_delay", "arc_slow", "arc_fast"}
        bad = set(doc) - known
        if bad:
            raise ValueError("unknown delay model keys: %s" % ", ".join(sorted(bad)))
        return cls(**doc)


def load_delay_model(path):
    """Read a DelayModel from a .json or .toml file; see docs/formats.md."""
    text = open(path, "rb").read()
    if str(path).endswith(".toml"):
        try:
            import tomllib as toml
        except ImportError:
            import tomli as toml
        doc = toml.loads(text.decode())
    else:
        doc = json.loads(text)
    return DelayModel.from_dict(doc)


def lut_arc_delay(k, pin, model):
    if not 1 <= k <= len(LUT_KINDS):
        raise ValueError("k out of range: %d" % k)
    if not 0 <= pin < k:
        raise ValueError("pin %d out of range for a %d-input LUT" % (pin, k))
    return model.arcs(k)[pin]


def sop_depth(table):
    """Gate levels of the minimized two-level form: inverters, AND tree, OR tree."""
    cubes = isop_minimize(table)
    if not cubes:
        return 0
    inv = 1 if any(c.neg for c in cubes) else 0
    widest = max((c.pos | c.neg).bit_count() for c in cubes)
    return inv + _ceil_log2(widest) + _ceil_log2(len(cubes))


def static_lut_delay(model, table):
    """Delay of a LUT once decoded to static gates.

    Scaled from the reconfigurable delay, floored by two-level depth, and
    clamped so going static never slows a path down.
    """
    if table is None:
        raise NetlistError("unprogrammed", "cannot time a static LUT without a table")
    key = (table.k, table.mask)
    got = model._static_cache.get(key)
    if got is None:
        avg = model.avg(table.k)
        got = min(avg, max(model.static_scale * avg, sop_depth(table) * model.gate_delay))
        model._static_cache[key] = got
    return got


def element_delay(inst, model):
    """Arc delay an instance contributes to a path it launches or passes."""
    if inst.is_lut():
        if inst.state == "st" and inst.mask is not None:
            return static_lut_delay(model, inst.mask)
        return model.avg(inst.lut_width())
    return {
        "FF": model.ff_delay,
        "MUX2": model.mux_delay,
        "CARRY": model.carry_delay,
        "INV": model.gate_delay,
        "AND2": model.gate_delay,
        "OR2": model.gate_delay,
        "BUF": 0.0, "IBUF": 0.0, "OBUF": 0.0,
        "TIE0": 0.0, "TIE1": 0.0,
        "PI": 0.0, "PO": 0.0,
    }[inst.kind]


class TimedPath:
    """Ordered (uid, delay) elements from launch to capture."""

    __slots__ = ("elements", "total", "_uids")

    def __init__(self, elements, total):
        self.elements = list(elements)
        self.total = total
        self._uids = None

    @classmethod
    def of(cls, elements):
        return cls(elements, sum(d for _, d in elements))

    def uids(self):
        # the element sequence is fixed at creation, only delays change,
        # so the tuple is safe to cache for the sort keys
        if self._uids is None:
            self._uids = tuple(u for u, _ in self.elements)
        return self._uids

    def __repr__(self):
        return "TimedPath(%.3f, %d elems)" % (self.total, len(self.elements))


def path_sort_key(path):
    # ascending by total; hash order settles ties deterministically
    return (path.total, path.uids())


def cp_sumcp(paths):
    if not paths:
        raise NetlistError("no-paths", "timing requires at least one path")
    return max(p.total for p in paths), sum(p.total for p in paths)


class TimingState:
    """Sorted path list plus an instance index for in-loop updates."""

    def __init__(self, paths):
        self.paths = sorted(paths, key=path_sort_key)
        self.index = {}
        for p in self.paths:
            for uid in p.uids():
                self.index.setdefault(uid, []).append(p)
        self._refresh()

    def _refresh(self):
        if not self.paths:
            raise NetlistError("no-paths", "timing requires at least one path")
        self.cp = self.paths[-1].total
        self.sum_delay = sum(p.total for p in self.paths)

    def resort(self):
        self.paths.sort(key=path_sort_key)
        self._refresh()


def update_timing(state, inst, model):
    """Re-time every path through a LUT that just went static."""
    if not inst.is_lut():
        raise NetlistError("not-a-lut", "%s %s cannot go static" % (inst.kind, inst.name))
    sd = static_lut_delay(model, inst.mask)
    for path in state.index.get(inst.uid, ()):
        path.elements = [(u, sd if u == inst.uid else d) for u, d in path.elements]
        path.total = sum(d for _, d in path.elements)
    state.resort()
    return state


def enumerate_paths(netlist, model, cap=64):
    """All PI/FF-to-FF/PO paths, worst-first per endpoint, at most cap each.

    Stands in for a place-and-route timing report.  Element delays are the
    model averages; launch FFs contribute ff_delay, capture FFs 0, PI/PO
    nothing.  One topological sweep keeps the cap worst partial paths per
    node; any of the cap worst paths to an endpoint extends one of the cap
    worst partials at every node it crosses, so the per-endpoint lists are
    exact.  Ties at the cap boundary break by construction order, which is
    itself deterministic.
    """
    drivers = netlist.drivers()

    def preds(inst):
        # one worst arc per (instance, path): a driver feeding two pins of
        # the same instance is a single predecessor edge
        return tuple(dict.fromkeys(drivers[net] for net in inst.inputs))

    # per-node (total, chain) partials, worst first; chain is a linked
    # (uid, delay, parent) cell so shared prefixes are stored once
    entries = {}
    for uid in netlist.topo_order():
        inst = netlist.instances[uid]
        d = element_delay(inst, model)
        if inst.kind == "PI":
            entries[uid] = [(0.0, None)]
        elif inst.kind == "FF":
            entries[uid] = [(d, (uid, d, None))]
        elif inst.kind != "PO":
            qs = preds(inst)
            if len(qs) == 1:
                # a single predecessor keeps its order; no re-sort needed
                entries[uid] = [(total + d, (uid, d, chain))
                                for total, chain in entries[qs[0]]]
                continue
            cands = []
            for q in qs:
                for total, chain in entries[q]:
                    cands.append((total + d, (uid, d, chain)))
            cands.sort(key=lambda c: -c[0])
            entries[uid] = cands[:cap]

    out = []
    endpoints = sorted(
        (i for i in netlist.instances.values() if i.kind in ("FF", "PO")),
        key=lambda i: i.uid)
    for end in endpoints:
        suffix = [(end.uid, 0.0)] if end.kind == "FF" else []
        for _total, chain in entries[drivers[end.inputs[0]]]:
            elems = []
            while chain is not None:
                elems.append((chain[0], chain[1]))
                chain = chain[2]
            elems.reverse()
            out.append(TimedPath.of(elems + suffix))
    return out
