"""Input pin reordering against per-pin arc delays.

A LUT computes the same function under any permutation of its input pins
once the table is permuted to match, but not with the same timing: arc
delays fall from pin 0 to pin k-1, so a late-arriving net wants a fast
pin.  swap_pins() searches every assignment of nets to pins for one LUT.
swap_sweep() walks the LUTs of violating paths, worst path first, and
keeps exactly the swaps that improve the design's worst slack, so the
recorded trajectory never worsens.

Arrival and required times here are arc-accurate, unlike the per-path
view in timing.py, which carries the averaged delays of a block report.
Pin position only matters on reconfigurable LUTs; a decoded static LUT is
a gate network with no pin ordering left to exploit, so static logic is
timed uniformly and never swapped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

from .boolfn import TruthTable, permute_inputs
from .netlist import NetlistError, RECONFIGURABLE
from .timing import element_delay, path_sort_key, static_lut_delay


@dataclass(frozen=True)
class PinTimingContext:
    """One LUT's timing neighborhood: arrivals per net, arcs per pin.

    at[i] is the arrival of the net currently on pin i; dly[j] stays with
    pin position j when nets move.  rt is the required time at the output.
    """

    tt: TruthTable
    at: tuple
    dly: tuple
    rt: float

    def __post_init__(self):
        object.__setattr__(self, "at", tuple(float(a) for a in self.at))
        object.__setattr__(self, "dly", tuple(float(d) for d in self.dly))
        k = self.tt.k
        if len(self.at) != k or len(self.dly) != k:
            raise ValueError("expected %d arrivals and arc delays, got %d and %d"
                             % (k, len(self.at), len(self.dly)))
        if not all(map(math.isfinite, self.at + self.dly + (self.rt,))):
            raise ValueError("pin timing context requires finite times")

    @property
    def k(self):
        return self.tt.k


@dataclass(frozen=True)
class SwapResult:
    """net_order[j] is the original pin index of the net now on pin j."""

    new_tt: TruthTable
    net_order: tuple
    wns: float
    tns: float


def _slacks(ctx, order):
    wns = math.inf
    tns = 0.0
    for pin, net in enumerate(order):
        slack = ctx.rt - (ctx.at[net] + ctx.dly[pin])
        if slack < wns:
            wns = slack
        if slack < 0.0:
            tns += slack
    return wns, tns


def swap_pins(ctx):
    """Best assignment of nets to pins over all k! choices.

    Maximizes WNS, then TNS; remaining ties go to the lexicographically
    smallest net order, so a fully symmetric context keeps the identity
    and reruns are reproducible.  The returned table is permuted so the
    LUT still computes the original function of the original nets.
    """
    best = None
    best_order = None
    for order in permutations(range(ctx.k)):
        cand = _slacks(ctx, order)
        if best is None or cand > best:
            best, best_order = cand, order
    return SwapResult(permute_inputs(ctx.tt, best_order), best_order, best[0], best[1])


def arc_arrivals(netlist, model):
    """net -> arrival in ns with per-pin arcs on reconfigurable LUTs."""
    drivers = netlist.drivers()
    arr = {}
    for uid in netlist.topo_order():
        inst = netlist.instances[uid]
        if inst.kind == "PO":
            continue
        if inst.kind == "PI":
            arr[inst.output] = 0.0
        elif inst.kind == "FF":
            arr[inst.output] = model.ff_delay
        elif inst.is_lut() and inst.state == RECONFIGURABLE:
            arcs = model.arcs(inst.lut_width())
            arr[inst.output] = max(arr[net] + arcs[pin]
                                   for pin, net in enumerate(inst.inputs))
        else:
            d = (static_lut_delay(model, inst.mask) if inst.is_lut()
                 else element_delay(inst, model))
            arr[inst.output] = max((arr[net] for net in inst.inputs), default=0.0) + d
    return arr


def arc_required(netlist, model, rt):
    """net -> required time in ns; inf on nets no endpoint observes."""
    req = {}
    for inst in netlist.instances.values():
        if inst.output is not None:
            req[inst.output] = math.inf
    for uid in reversed(netlist.topo_order()):
        inst = netlist.instances[uid]
        if inst.kind in ("PO", "FF"):
            for net in inst.inputs:
                req[net] = min(req[net], rt)
            continue
        if inst.kind == "PI" or inst.output is None:
            continue
        r = req[inst.output]
        if r == math.inf:
            continue
        if inst.is_lut() and inst.state == RECONFIGURABLE:
            arcs = model.arcs(inst.lut_width())
            for pin, net in enumerate(inst.inputs):
                req[net] = min(req[net], r - arcs[pin])
        else:
            d = (static_lut_delay(model, inst.mask) if inst.is_lut()
                 else element_delay(inst, model))
            for net in inst.inputs:
                req[net] = min(req[net], r - d)
    return req


def design_slacks(netlist, model, rt, arrivals=None):
    """(WNS, TNS) in ns over every capture point at the given period."""
    arr = arc_arrivals(netlist, model) if arrivals is None else arrivals
    slacks = []
    for inst in netlist.instances.values():
        if inst.kind in ("PO", "FF"):
            slacks.append(rt - arr[inst.inputs[0]])
    if not slacks:
        raise NetlistError("no-paths", "no capture points to time")
    return min(slacks), sum(s for s in slacks if s < 0.0)


def select_swap_candidates(netlist, state, freq_target):
    """Reconfigurable LUTs on violating paths, worst path first, deduplicated.

    The period 1000/freq_target is the required time at every endpoint; a
    path violates when its total exceeds it.
    """
    if freq_target <= 0:
        raise ValueError("frequency target must be positive, got %r" % (freq_target,))
    rt = 1000.0 / freq_target
    out = []
    seen = set()
    for path in sorted(state.paths, key=path_sort_key, reverse=True):
        if path.total <= rt:
            break
        for uid in path.uids():
            inst = netlist.instances.get(uid)
            if inst is None or uid in seen:
                continue
            seen.add(uid)
            if (inst.is_lut() and inst.state == RECONFIGURABLE
                    and inst.lut_width() >= 2 and inst.mask is not None):
                out.append(uid)
    return out


def swap_sweep(netlist, state, model, freq_target, max_swaps=200):
    """Swap candidate pins one by one, keeping only strict improvements.

    Returns the reworked netlist copy and the trajectory, one
    (attempt index, WNS, TNS) row per attempted swap.  A swap is committed
    only when it improves (WNS, TNS) lexicographically, so both series are
    non-worsening and the netlist's function never changes.
    """
    rt = 1000.0 / freq_target
    out = netlist.copy()
    candidates = select_swap_candidates(out, state, freq_target)
    wns, tns = design_slacks(out, model, rt)
    trajectory = []
    attempts = 0
    for uid in candidates:
        if attempts >= max_swaps:
            break
        inst = out.instances[uid]
        req = arc_required(out, model, rt)[inst.output]
        if not math.isfinite(req):
            continue
        attempts += 1
        arr = arc_arrivals(out, model)
        ctx = PinTimingContext(inst.mask, tuple(arr[n] for n in inst.inputs),
                               model.arcs(inst.lut_width()), req)
        res = swap_pins(ctx)
        if res.net_order != tuple(range(ctx.k)):
            before = (inst.inputs, inst.mask)
            inst.inputs = tuple(before[0][i] for i in res.net_order)
            inst.mask = res.new_tt
            got = design_slacks(out, model, rt)
            if got > (wns, tns):
                wns, tns = got
            else:
                inst.inputs, inst.mask = before
        trajectory.append((attempts, wns, tns))
    return out, trajectory
