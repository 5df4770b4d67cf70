"""Hybrid partitioning engine and its programming artifacts.

The core loop walks the timed-path list worst-first: the slowest LUT on the
worst remaining path is converted to static logic and the affected paths
are re-timed; a path whose slowest LUT already went static is dropped from
the worklist.  The loop stops once the static count reaches its target, so
the requested share of LUTs stays reconfigurable.

Everything downstream of the partition also lives here: decoding static
LUTs into plain gates, area estimation, the case-analysis constraint file
for the reconfigurable half, the programming bitstream, and the
simulation-based equivalence check between the original netlist and the
programmed hybrid.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

from .boolfn import TruthTable, isop_minimize
from .netlist import Instance, NetlistError, RECONFIGURABLE, STATIC
from .sim import comb_inputs, exhaustive_words, simulate, vector_bits
from .timing import TimingState, path_sort_key, update_timing

DEFAULT_LUT_AREA = (36.00, 64.80, 117.00, 259.20, 491.40, 957.60)
BITSTREAM_FORMAT = "lutobf-bitstream-1"


@dataclass(frozen=True)
class Partition:
    """Disjoint static/reconfigurable split over every LUT uid."""

    static_ids: frozenset
    reconf_ids: frozenset

    def __post_init__(self):
        if self.static_ids & self.reconf_ids:
            raise NetlistError("partition", "a LUT cannot be both static and reconfigurable")

    @property
    def n_luts(self):
        return len(self.static_ids) + len(self.reconf_ids)

    def obf_pct(self):
        if not self.n_luts:
            return 0.0
        return 100.0 * len(self.reconf_ids) / self.n_luts

    @classmethod
    def of_netlist(cls, netlist):
        return cls(frozenset(i.uid for i in netlist.luts() if i.state == STATIC),
                   frozenset(i.uid for i in netlist.luts() if i.state == RECONFIGURABLE))


def static_target(netlist, obf_pct):
    """Static-LUT count for a requested obfuscation percentage, half-up."""
    if not 0 <= obf_pct <= 100:
        raise NetlistError("bad-target", "obfuscation %% must be in [0, 100], got %r" % obf_pct)
    n = len(netlist.luts())
    return int(n * (100.0 - obf_pct) / 100.0 + 0.5)


def obfuscate(netlist, paths, model, target, trace=None):
    """Move LUTs to static form until `target` of them are static.

    paths must be sorted ascending.  Instance states are updated in place
    and the timing state is rebuilt from the given paths; pass a trace list
    to record (cp, sum_delay) after every conversion.  LUTs no timed path
    reaches are only converted as a last resort, in hash order, with a
    warning.
    """
    luts = {i.uid: i for i in netlist.luts()}
    if target > len(luts):
        raise NetlistError("bad-target",
                           "target of %d static LUTs exceeds the %d available"
                           % (target, len(luts)))
    state = TimingState(paths) if paths else None
    static = {i.uid for i in luts.values() if i.state == STATIC}
    work = list(state.paths) if state else []
    while len(static) < target and work:
        worst = work[-1]
        on_path = [(d, u) for u, d in worst.elements if u in luts]
        if not on_path:
            work.pop()
            continue
        _, slow = max(on_path)
        if slow in static:
            work.pop()
            continue
        luts[slow].state = STATIC
        static.add(slow)
        update_timing(state, luts[slow], model)
        work.sort(key=path_sort_key)
        if trace is not None:
            trace.append((state.cp, state.sum_delay))
    if len(static) < target:
        leftover = sorted(u for u in luts if u not in static)
        needed = target - len(static)
        warnings.warn("paths exhausted; converting %d unreached LUTs in hash order" % needed)
        for uid in leftover[:needed]:
            luts[uid].state = STATIC
            static.add(uid)
            if state is not None:
                update_timing(state, luts[uid], model)
                if trace is not None:
                    trace.append((state.cp, state.sum_delay))
    return Partition(frozenset(static), frozenset(u for u in luts if u not in static))


@lru_cache(maxsize=None)
def _decode_plan(k, mask):
    """Gate list realizing a mask: (kind, input slots, out slot).

    Slots < k are LUT pins, k + i is gate i's output.  The last gate drives
    the decoded output.  Inverters are shared across cubes.
    """
    cubes = isop_minimize(TruthTable(k, mask))
    if not cubes:
        return (("TIE0", (), k),)
    if len(cubes) == 1 and not (cubes[0].pos | cubes[0].neg):
        return (("TIE1", (), k),)
    plan = []
    inv_slot = {}
    need_inv = 0
    for c in cubes:
        need_inv |= c.neg
    for v in range(k):
        if need_inv >> v & 1:
            inv_slot[v] = k + len(plan)
            plan.append(("INV", (v,), k + len(plan)))

    def tree(kind, slots):
        while len(slots) > 1:
            nxt = []
            for i in range(0, len(slots) - 1, 2):
                plan.append((kind, (slots[i], slots[i + 1]), k + len(plan)))
                nxt.append(k + len(plan) - 1)
            if len(slots) % 2:
                nxt.append(slots[-1])
            slots = nxt
        return slots[0]

    terms = []
    for c in cubes:
        leaves = [v for v in range(k) if c.pos >> v & 1]
        leaves += [inv_slot[v] for v in range(k) if c.neg >> v & 1]
        terms.append(tree("AND2", leaves))
    root = tree("OR2", terms)
    if root < k or plan[-1][2] != root:
        # single-literal cover: route it through a buffer so the LUT's
        # output net keeps a driver of its own
        plan.append(("BUF", (root,), k + len(plan)))
    return tuple(plan)


def decode_gate_count(table):
    return len(_decode_plan(table.k, table.mask))


def decode_static(netlist, inst):
    """Replace one static LUT with its gate decoding, in place."""
    if not inst.is_lut() or inst.state != STATIC:
        raise NetlistError("not-static", "%s is not a static LUT" % inst.name)
    if inst.mask is None:
        raise NetlistError("unprogrammed", "static LUT %s has no table" % inst.name)
    plan = _decode_plan(inst.lut_width(), inst.mask.mask)
    k = inst.lut_width()
    netlist.remove(inst.uid)
    nets = list(inst.inputs)
    last = len(plan) - 1
    for i, (kind, slots, _) in enumerate(plan):
        out = inst.output if i == last else "%s__d%d" % (inst.name, i)
        netlist.add(Instance("%s__g%d" % (inst.name, i), kind,
                             tuple(nets[s] for s in slots), out))
        nets.append(out)
    netlist.invalidate()


def decode_netlist(netlist, partition):
    """Decode every static LUT of the partition; returns the netlist."""
    for uid in sorted(partition.static_ids):
        inst = netlist.instances.get(uid)
        if inst is not None and inst.is_lut():
            decode_static(netlist, inst)
    return netlist


@dataclass
class AreaModel:
    """Areas in square micrometres; lut_area indexed by k-1."""

    lut_area: tuple = DEFAULT_LUT_AREA
    gate_area: float = 2.88

    def __post_init__(self):
        self.lut_area = tuple(float(a) for a in self.lut_area)
        if len(self.lut_area) != 6:
            raise ValueError("lut_area needs six entries")
        if any(a < 0 for a in self.lut_area) or self.gate_area < 0:
            raise ValueError("negative area")

    def lut(self, k):
        return self.lut_area[k - 1]

    def to_dict(self):
        return {"lut_area": list(self.lut_area), "gate_area": self.gate_area}

    @classmethod
    def from_dict(cls, doc):
        bad = set(doc) - {"lut_area", "gate_area"}
        if bad:
            raise ValueError("unknown area model keys: %s" % ", ".join(sorted(bad)))
        return cls(**doc)


@dataclass(frozen=True)
class AreaReport:
    reconf_um2: float
    static_um2: float

    @property
    def total_um2(self):
        return self.reconf_um2 + self.static_um2


def estimate_area(partition, netlist, model):
    """Reconfigurable LUTs keep macro area; static ones cost their gates."""
    a_re = 0.0
    a_st = 0.0
    for inst in netlist.luts():
        if inst.uid in partition.reconf_ids:
            a_re += model.lut(inst.lut_width())
        elif inst.uid in partition.static_ids:
            if inst.mask is None:
                raise NetlistError("unprogrammed", "static LUT %s has no table" % inst.name)
            a_st += model.gate_area * decode_gate_count(inst.mask)
    # already-decoded static LUTs appear as plain gates
    for inst in netlist.instances.values():
        if inst.kind in ("INV", "AND2", "OR2", "TIE0", "TIE1", "BUF"):
            a_st += model.gate_area
    return AreaReport(a_re, a_st)


def _chain(partition, netlist):
    insts = []
    for uid in sorted(partition.reconf_ids):
        inst = netlist.instances.get(uid)
        if inst is None or not inst.is_lut():
            raise NetlistError("partition", "reconfigurable id %s is not a LUT in this netlist"
                               % uid)
        insts.append(inst)
    return insts


def gen_case_constraints(partition, netlist):
    """One force line per configuration bit, in chain order."""
    lines = []
    for inst in _chain(partition, netlist):
        if inst.mask is None:
            raise NetlistError("unprogrammed", "LUT %s has no table" % inst.name)
        for i in range(1 << inst.lut_width()):
            lines.append("set_case %s/cfg[%d] %d" % (inst.name, i, inst.mask.mask >> i & 1))
    return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class Bitstream:
    """Configuration chain: mask bits of each LUT, LSB first, concatenated."""

    chain: tuple  # (uid, width in bits) in shift order
    bits: int
    length: int
    offsets: dict = field(compare=False)

    def mask_for(self, uid):
        off = self.offsets.get(uid)
        if off is None:
            raise NetlistError("not-in-chain", "uid %s is not in the bitstream chain" % uid)
        width = dict(self.chain)[uid]
        return (self.bits >> off) & ((1 << width) - 1)

    def to_hex(self):
        nibbles = max(1, (self.length + 3) // 4)
        return "%0*x" % (nibbles, self.bits)


def gen_bitstream(partition, netlist):
    if not partition.reconf_ids:
        raise NetlistError("nothing-to-program", "no reconfigurable LUTs, nothing to program")
    chain = []
    offsets = {}
    bits = 0
    length = 0
    for inst in _chain(partition, netlist):
        if inst.mask is None:
            raise NetlistError("unprogrammed", "LUT %s has no table" % inst.name)
        width = 1 << inst.lut_width()
        chain.append((inst.uid, width))
        offsets[inst.uid] = length
        bits |= inst.mask.mask << length
        length += width
    return Bitstream(tuple(chain), bits, length, offsets)


def bitstream_manifest(bitstream, netlist):
    rows = []
    for uid, width in bitstream.chain:
        rows.append({"name": netlist.instances[uid].name, "uid": uid,
                     "width": width, "offset": bitstream.offsets[uid]})
    return {"format": BITSTREAM_FORMAT, "length": bitstream.length,
            "hex": bitstream.to_hex(), "chain": rows}


def bitstream_from_manifest(doc):
    if not isinstance(doc, dict) or doc.get("format") != BITSTREAM_FORMAT:
        raise NetlistError("schema", "expected a %r document" % BITSTREAM_FORMAT)
    try:
        bits = int(doc["hex"], 16)
        length = int(doc["length"])
        chain = tuple((row["uid"], int(row["width"])) for row in doc["chain"])
        offsets = {row["uid"]: int(row["offset"]) for row in doc["chain"]}
    except (KeyError, TypeError, ValueError) as e:
        raise NetlistError("schema", "bad bitstream manifest: %s" % e) from None
    expect = 0
    for uid, width in chain:
        if offsets[uid] != expect:
            raise NetlistError("schema", "chain offsets must be contiguous")
        expect += width
    if expect != length or bits >> max(length, 1):
        raise NetlistError("schema", "bitstream length does not match its chain")
    return Bitstream(chain, bits, length, offsets)


def dump_bitstream(bitstream, netlist):
    return json.dumps(bitstream_manifest(bitstream, netlist), indent=2) + "\n"


def load_bitstream(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetlistError("schema", "bad JSON: %s" % e) from None
    return bitstream_from_manifest(doc)


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    vectors: int
    counterexample: dict | None = None

    def __str__(self):
        if self.ok:
            return "equivalent on %d vectors" % self.vectors
        return "MISMATCH on %s at vector %d" % (
            self.counterexample["signal"], self.counterexample["vector"])


def _check_ports(original, hybrid):
    pis, ffs = comb_inputs(original)
    if (pis, ffs) != comb_inputs(hybrid) or sorted(original.ports_out) != sorted(hybrid.ports_out):
        raise NetlistError("port-mismatch", "netlists expose different ports or flops")
    return pis, ffs


def _override(bitstream):
    if bitstream is None:
        return None
    return {uid: bitstream.mask_for(uid) for uid, _ in bitstream.chain}


def _compare(original, hybrid, override, pw, fw, width, pis, ffs):
    po_a, ffd_a = simulate(original, pw, fw, width)
    po_b, ffd_b = simulate(hybrid, pw, fw, width, mask_override=override)
    full = (1 << width) - 1
    for got, want in ((po_b, po_a), (ffd_b, ffd_a)):
        for name in sorted(want):
            diff = (got[name] ^ want[name]) & full
            if diff:
                idx = (diff & -diff).bit_length() - 1
                ce = {"signal": name, "vector": idx,
                      "inputs": vector_bits(pw, pis, idx) | vector_bits(fw, ffs, idx),
                      "got": got[name] >> idx & 1, "want": want[name] >> idx & 1}
                return VerifyReport(False, width, ce)
    return VerifyReport(True, width)


def verify_equivalence(original, hybrid, bitstream=None, vectors=10000, seed=0):
    """Simulate both netlists on corners plus seeded random stimulus.

    Sequential elements are cut: FF outputs are driven as extra inputs and
    FF inputs observed as extra outputs, so one pass covers all reachable
    combinational behavior.  The hybrid's unprogrammed LUTs take their
    tables from the bitstream.
    """
    import random as _random

    pis, ffs = _check_ports(original, hybrid)
    rng = _random.Random(seed)
    width = vectors + 2

    def stim():
        return ((rng.getrandbits(vectors) if vectors else 0) << 2) | 0b10

    pw = {n: stim() for n in pis}
    fw = {n: stim() for n in ffs}
    return _compare(original, hybrid, _override(bitstream), pw, fw, width, pis, ffs)


def verify_exhaustive(original, hybrid, bitstream=None, limit=16):
    """Compare on every input assignment; inputs plus flops capped by limit."""
    pis, ffs = _check_ports(original, hybrid)
    if len(pis) + len(ffs) > limit:
        raise NetlistError("too-wide",
                           "%d stimulus bits exceed the exhaustive limit of %d"
                           % (len(pis) + len(ffs), limit))
    words, width = exhaustive_words(pis + ffs)
    pw = {n: words[n] for n in pis}
    fw = {n: words[n] for n in ffs}
    return _compare(original, hybrid, _override(bitstream), pw, fw, width, pis, ffs)
