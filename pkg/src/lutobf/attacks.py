"""Attacker-side views of a hybrid netlist.

The attacker sees the static logic in full, knows which cells are
reconfigurable, and knows their pin counts, but not their tables.  Three
analyses live here: masking-pattern statistics over what is exposed
(histograms, search-space width, rank-frequency extrapolation), design
identification by Pearson correlation against a pattern database, and
conversion to .bench text where configuration bits become key inputs, so
external SAT-family tools can chew on the result.  The tools themselves
stay external; we only emit their input and read their logs back.

Patterns are bucketed by LUT width rather than padded to one width, so a
LUT3 table never collides with the LUT6 table that shares its bits.  For
the single-width netlists of the block reports both views agree.
"""

from __future__ import annotations

import json
import math
import re
import statistics
from dataclasses import dataclass, field

import numpy

from .boolfn import isop_minimize
from .netlist import NetlistError, STATIC

_BENCH_OPS = ("AND", "OR", "NAND", "NOR", "XOR", "NOT", "BUF")


@dataclass(frozen=True)
class PatternHistogram:
    """Multiset of (width, mask) masking patterns."""

    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        for (k, mask), count in self.entries.items():
            if count < 1:
                raise ValueError("pattern %d:%#x has count %d" % (k, mask, count))

    @property
    def total(self):
        return sum(self.entries.values())

    @property
    def unique(self):
        return len(self.entries)

    def merge(self, other):
        out = dict(self.entries)
        for key, count in other.entries.items():
            out[key] = out.get(key, 0) + count
        return PatternHistogram(out)

    def to_dict(self):
        return {"%d:%x" % key: count for key, count in sorted(self.entries.items())}

    @classmethod
    def from_dict(cls, doc):
        entries = {}
        for text, count in doc.items():
            k, mask = text.split(":")
            entries[(int(k), int(mask, 16))] = int(count)
        return cls(entries)


def pattern_histogram(netlist, scope="static_only"):
    """Masking patterns of the scoped LUTs, exact multiset.

    static_only is the attacker's view: reconfigurable tables are hidden
    in the bitstream.  A fully obfuscated design therefore yields an empty
    histogram.
    """
    if scope not in ("static_only", "all"):
        raise ValueError("scope must be static_only or all, got %r" % (scope,))
    entries = {}
    for inst in netlist.luts():
        if scope == "static_only" and inst.state != STATIC:
            continue
        if inst.mask is None:
            raise NetlistError("unprogrammed",
                               "LUT %s has no table to histogram" % inst.name)
        key = (inst.mask.k, inst.mask.mask)
        entries[key] = entries.get(key, 0) + 1
    return PatternHistogram(entries)


@dataclass(frozen=True)
class PatternDatabase:
    """Per-design histograms plus their merge; the attacker's prior."""

    designs: dict
    merged: PatternHistogram

    @classmethod
    def build(cls, designs):
        merged = PatternHistogram({})
        for name in sorted(designs):
            merged = merged.merge(designs[name])
        return cls(dict(designs), merged)

    def add(self, name, hist):
        if name in self.designs:
            raise ValueError("design %r already in the database" % name)
        out = dict(self.designs)
        out[name] = hist
        return self.build(out)

    def to_json(self):
        return json.dumps(
            {"designs": {n: h.to_dict() for n, h in sorted(self.designs.items())}},
            indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls.build({n: PatternHistogram.from_dict(d)
                          for n, d in doc["designs"].items()})


def search_space_bits(source):
    """log2 of the number of unique patterns an attacker must consider."""
    unique = source.merged.unique if isinstance(source, PatternDatabase) else source.unique
    if unique < 1:
        raise ValueError("no patterns observed, search space undefined")
    return math.log2(unique)


@dataclass(frozen=True)
class DistributionFit:
    """Polynomial trend over rank-ordered log2 frequencies."""

    degree: int
    coefficients: tuple
    residual: float
    fitted: tuple            # modeled frequency per rank, descending
    outlier_ranks: tuple     # 1-based ranks the model calls outliers
    outlier_patterns: tuple  # the observed patterns at those ranks


def predict_distribution(exposed, degree=3, outlier_factor=3.0):
    """Fit the exposed rank-frequency curve and point at its outliers.

    The fit runs over (rank, log2 frequency); the outlier set holds the
    ranks whose modeled frequency exceeds outlier_factor times the median
    modeled frequency, which is how a handful of heavy patterns stand out
    from the long tail of single-occurrence ones.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    ordered = sorted(exposed.entries.items(), key=lambda kv: (-kv[1], kv[0]))
    if len(ordered) < degree + 1:
        raise ValueError("%d patterns cannot pin a degree-%d fit"
                         % (len(ordered), degree))
    ranks = numpy.arange(1, len(ordered) + 1, dtype=float)
    logs = numpy.log2([count for _, count in ordered])
    coeffs = numpy.polyfit(ranks, logs, degree)
    modeled = numpy.polyval(coeffs, ranks)
    residual = float(numpy.sum((modeled - logs) ** 2))
    fitted = tuple(float(f) for f in 2.0 ** modeled)
    cut = outlier_factor * float(numpy.median(fitted))
    outliers = tuple(i + 1 for i, f in enumerate(fitted) if f > cut)
    patterns = tuple(ordered[i - 1][0] for i in outliers)
    return DistributionFit(degree, tuple(float(c) for c in coeffs), residual,
                           fitted, outliers, patterns)


def pearson_correlate(a, b):
    """Pearson r between two histograms over the union of their patterns."""
    union = sorted(set(a.entries) | set(b.entries))
    if len(union) < 2:
        raise ValueError("need at least two patterns to correlate")
    va = [a.entries.get(key, 0) for key in union]
    vb = [b.entries.get(key, 0) for key in union]
    try:
        return statistics.correlation(va, vb)
    except statistics.StatisticsError:
        raise ValueError("constant pattern vector, correlation undefined") from None


@dataclass(frozen=True)
class CompositionReport:
    """Ranked design matches; regime labels follow the report thresholds."""

    ranking: tuple           # (design, r) best first
    skipped: tuple           # (design, reason)
    regime: str | None

    def best(self):
        return self.ranking[0] if self.ranking else None


def composition_attack(exposed, db, low=0.3, high=0.9):
    """Correlate an exposed histogram against every database design.

    Designs whose correlation is undefined are skipped with the reason
    kept.  The regime annotation reads the top match: below low there is
    no usable correlation, above high the design is effectively
    identified, and in between it resembles some other circuit.
    """
    if not db.designs:
        raise ValueError("empty pattern database")
    scored = []
    skipped = []
    for name in sorted(db.designs):
        try:
            scored.append((name, pearson_correlate(exposed, db.designs[name])))
        except ValueError as err:
            skipped.append((name, str(err)))
    scored.sort(key=lambda row: (-row[1], row[0]))
    if not scored:
        regime = None
    elif scored[0][1] >= high:
        regime = "self-correlation"
    elif scored[0][1] < low:
        regime = "no-correlation"
    else:
        regime = "cross-correlation"
    return CompositionReport(tuple(scored), tuple(skipped), regime)


# -- .bench emission for external SAT tooling --


def _bench_wire(net):
    return re.sub(r"[^A-Za-z0-9_]", "_", net)


class BenchCircuit:
    """Combinational circuit in ISCAS bench form.

    gates rows are (wire, op, operands).  Key inputs are named
    keyinput<N> with N aligned to the bitstream bit the wire stands for.
    """

    def __init__(self, name, inputs, outputs, gates, key_length):
        self.name = name
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        self.gates = tuple(gates)
        self.key_length = key_length
        defined = set(self.inputs)
        for wire, op, operands in self.gates:
            if op not in _BENCH_OPS:
                raise ValueError("unknown bench op %r" % op)
            if wire in defined:
                raise ValueError("wire %s defined twice" % wire)
            if op in ("NOT", "BUF") and len(operands) != 1:
                raise ValueError("%s takes one operand" % op)
            if op not in ("NOT", "BUF") and len(operands) < 2:
                raise ValueError("%s on %s needs two or more operands" % (op, wire))
            for operand in operands:
                if operand not in defined:
                    raise ValueError("wire %s used before definition" % operand)
            defined.add(wire)
        for out in self.outputs:
            if out not in defined:
                raise ValueError("output %s is never driven" % out)

    @property
    def key_inputs(self):
        return tuple(w for w in self.inputs if re.fullmatch(r"keyinput\d+", w))

    def to_text(self):
        lines = ["# %s" % self.name]
        lines += ["INPUT(%s)" % w for w in self.inputs]
        lines += ["OUTPUT(%s)" % w for w in self.outputs]
        lines += ["%s = %s(%s)" % (wire, op, ", ".join(operands))
                  for wire, op, operands in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, name="bench"):
        inputs = []
        outputs = []
        gates = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            m = re.fullmatch(r"INPUT\((\w+)\)", line)
            if m:
                inputs.append(m.group(1))
                continue
            m = re.fullmatch(r"OUTPUT\((\w+)\)", line)
            if m:
                outputs.append(m.group(1))
                continue
            m = re.fullmatch(r"(\w+)\s*=\s*([A-Za-z]+)\(([\w\s,]*)\)", line)
            if not m:
                raise ValueError("line %d is not bench syntax: %r" % (lineno, raw))
            wire, op, args = m.group(1), m.group(2).upper(), m.group(3)
            if op == "BUFF":
                op = "BUF"
            operands = tuple(a.strip() for a in args.split(",") if a.strip())
            gates.append((wire, op, operands))
        key_length = sum(1 for w in inputs if re.fullmatch(r"keyinput\d+", w))
        return cls(name, inputs, outputs, gates, key_length)

    def simulate(self, words, width):
        """Word-parallel evaluation; words maps every input wire to an int."""
        full = (1 << width) - 1
        values = {}
        for wire in self.inputs:
            values[wire] = words[wire] & full
        for wire, op, operands in self.gates:
            ins = [values[x] for x in operands]
            if op == "AND":
                out = full
                for v in ins:
                    out &= v
            elif op == "OR":
                out = 0
                for v in ins:
                    out |= v
            elif op == "NAND":
                out = full
                for v in ins:
                    out &= v
                out ^= full
            elif op == "NOR":
                out = 0
                for v in ins:
                    out |= v
                out ^= full
            elif op == "XOR":
                out = 0
                for v in ins:
                    out ^= v
            elif op == "NOT":
                out = ins[0] ^ full
            else:
                out = ins[0]
            values[wire] = out
        return {w: values[w] for w in self.outputs}


class _BenchBuilder:
    def __init__(self, name):
        self.name = name
        self.inputs = []
        self.outputs = []
        self.gates = []
        self._defined = set()
        self._inverted = {}
        self._const = {}

    def add_input(self, wire):
        if wire not in self._defined:
            self.inputs.append(wire)
            self._defined.add(wire)
        return wire

    def emit(self, wire, op, operands):
        self.gates.append((wire, op, tuple(operands)))
        self._defined.add(wire)
        return wire

    def inverted(self, wire):
        got = self._inverted.get(wire)
        if got is None:
            got = self.emit(wire + "_bar", "NOT", (wire,))
            self._inverted[wire] = got
        return got

    def const(self, value):
        got = self._const.get(value)
        if got is not None:
            return got
        if not self.inputs:
            raise NetlistError("no-inputs", "cannot express a constant without inputs")
        anchor = self.inputs[0]
        zero = self._const.get(0)
        if zero is None:
            zero = self.emit("tie0", "XOR", (anchor, anchor))
            self._const[0] = zero
        if value == 0:
            return zero
        one = self.emit("tie1", "NOT", (zero,))
        self._const[1] = one
        return one

    def cube_wire(self, prefix, idx, cube, pins):
        lits = [pins[var] if pol else self.inverted(pins[var])
                for var, pol in cube.literals()]
        if not lits:
            return self.const(1)
        if len(lits) == 1:
            return lits[0]
        return self.emit("%s_c%d" % (prefix, idx), "AND", lits)

    def sop(self, out_wire, table, pins):
        cubes = isop_minimize(table)
        if not cubes:
            return self.emit(out_wire, "BUF", (self.const(0),))
        wires = [self.cube_wire(out_wire, i, cube, pins) for i, cube in enumerate(cubes)]
        if len(wires) == 1:
            return self.emit(out_wire, "BUF", (wires[0],))
        return self.emit(out_wire, "OR", wires)


def export_bench(netlist, partition, name=None):
    """Convert a hybrid netlist to a keyed combinational bench circuit.

    Reconfigurable LUTs become key-gated minterm networks: the output is
    the OR over rows of AND(keyinput, row minterm), with key indices
    matching the bitstream bit order, so the programming bits are exactly
    the circuit's correct key.  Static LUTs are exposed as their minimized
    two-level logic.  Flip-flops are cut: Q nets turn into extra inputs
    and D nets into extra outputs.
    """
    builder = _BenchBuilder(name or netlist.name)
    wire_of = {}
    for inst in netlist.instances.values():
        if inst.output is not None:
            wire_of[inst.output] = _bench_wire(inst.output)

    offsets = {}
    key_length = 0
    for uid in sorted(partition.reconf_ids):
        inst = netlist.instances.get(uid)
        if inst is None or not inst.is_lut():
            raise NetlistError("partition", "reconfigurable uid %s not in netlist" % uid)
        offsets[uid] = key_length
        key_length += 1 << inst.lut_width()
    for bit in range(key_length):
        builder.add_input("keyinput%d" % bit)

    for inst in netlist.instances.values():
        if inst.kind == "PI":
            builder.add_input(wire_of[inst.output])
        elif inst.kind == "FF":
            builder.add_input(wire_of[inst.output])

    order = netlist.topo_order()
    outputs = []
    for uid in order:
        inst = netlist.instances[uid]
        if inst.kind in ("PI", "FF"):
            continue
        if inst.kind == "PO":
            outputs.append(wire_of[inst.inputs[0]])
            continue
        out = wire_of[inst.output]
        pins = [wire_of[n] for n in inst.inputs]
        if inst.is_lut() and uid in offsets:
            base = offsets[uid]
            k = inst.lut_width()
            rows = []
            for row in range(1 << k):
                lits = ["keyinput%d" % (base + row)]
                lits += [pins[j] if row >> j & 1 else builder.inverted(pins[j])
                         for j in range(k)]
                rows.append(builder.emit("%s_r%d" % (out, row), "AND", lits))
            builder.emit(out, "OR", rows)
        elif inst.is_lut():
            if inst.mask is None:
                raise NetlistError("unprogrammed",
                                   "static LUT %s has no table to expose" % inst.name)
            builder.sop(out, inst.mask, pins)
        elif inst.kind == "INV":
            builder.emit(out, "NOT", pins)
        elif inst.kind == "AND2":
            builder.emit(out, "AND", pins)
        elif inst.kind == "OR2":
            builder.emit(out, "OR", pins)
        elif inst.kind in ("BUF", "IBUF", "OBUF"):
            builder.emit(out, "BUF", pins)
        elif inst.kind == "MUX2":
            i0, i1, sel = pins
            hi = builder.emit(out + "_hi", "AND", (sel, i1))
            lo = builder.emit(out + "_lo", "AND", (builder.inverted(sel), i0))
            builder.emit(out, "OR", (hi, lo))
        elif inst.kind == "CARRY":
            a, b, ci = pins
            gen = builder.emit(out + "_g", "AND", (a, b))
            prop = builder.emit(out + "_p", "OR", (a, b))
            ripple = builder.emit(out + "_r", "AND", (ci, prop))
            builder.emit(out, "OR", (gen, ripple))
        elif inst.kind == "TIE0":
            builder.emit(out, "BUF", (builder.const(0),))
        elif inst.kind == "TIE1":
            builder.emit(out, "BUF", (builder.const(1),))
        else:
            raise NetlistError("unknown-kind", "cannot export %s" % inst.kind)

    for uid in order:
        inst = netlist.instances[uid]
        if inst.kind == "FF":
            outputs.append(wire_of[inst.inputs[0]])

    return BenchCircuit(builder.name, builder.inputs, outputs, builder.gates, key_length)


def key_words(key, key_length, width):
    """Constant stimulus words for every keyinput wire from an int key."""
    full = (1 << width) - 1
    return {"keyinput%d" % i: full if key >> i & 1 else 0 for i in range(key_length)}


# -- CNF size accounting and solver-log intake --


def _tseitin_counts(bench):
    variables = len(bench.inputs)
    clauses = 0
    for _wire, op, operands in bench.gates:
        fanin = len(operands)
        variables += 1
        if op in ("AND", "NAND", "OR", "NOR"):
            clauses += fanin + 1
        elif op == "XOR":
            # chained two-input XORs, four clauses each
            variables += max(0, fanin - 2)
            clauses += 4 * (fanin - 1)
        else:
            clauses += 2
    return variables, clauses


@dataclass(frozen=True)
class SatSizeReport:
    """Clause/variable accounting, computed or read from a solver log."""

    source: str
    variables: int
    clauses: int
    ratio: float
    ideal: bool
    key_length: int | None = None
    iterations: int | None = None
    reported_ratio: float | None = None

    def to_dict(self):
        return {
            "source": self.source, "variables": self.variables,
            "clauses": self.clauses, "ratio": self.ratio, "ideal": self.ideal,
            "key_length": self.key_length, "iterations": self.iterations,
            "reported_ratio": self.reported_ratio,
        }


_LOG_FIELDS = {
    "key length": "key_length", "key_length": "key_length",
    "variables": "variables", "clauses": "clauses",
    "iterations": "iterations", "ratio": "ratio",
}
_LOG_LINE = re.compile(
    r"^c\s+(key[ _]length|variables|clauses|iterations|ratio)\s*[:=]\s*([0-9.]+)\s*$",
    re.IGNORECASE)


def parse_solver_log(text):
    """Field dict from the documented `c name: value` solver log lines."""
    found = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        m = _LOG_LINE.match(raw.strip())
        if not m:
            continue
        name = _LOG_FIELDS[m.group(1).lower().replace("_", " ")]
        value = m.group(2)
        try:
            found[name] = float(value) if name == "ratio" else int(value)
        except ValueError:
            raise ValueError("line %d: bad %s value %r" % (lineno, name, value)) from None
    missing = {"variables", "clauses"} - set(found)
    if missing:
        raise ValueError("solver log lacks %s lines" % ", ".join(sorted(missing)))
    return found


def sat_ratio_report(bench=None, solver_log=None, ideal_band=(3.5, 5.0)):
    """Clauses-to-variables ratio, the standard hardness indicator.

    With only a bench the counts come from its Tseitin encoding; with a
    solver log the counts, iterations, and the solver's own printed ratio
    come from the log.  The ideal flag marks the region around the 4.2
    phase-transition ratio.
    """
    if solver_log is not None:
        fields = parse_solver_log(solver_log)
        variables = fields["variables"]
        clauses = fields["clauses"]
        source = "log"
    elif bench is not None:
        variables, clauses = _tseitin_counts(bench)
        fields = {"key_length": bench.key_length}
        source = "encoding"
    else:
        raise ValueError("need a bench circuit or a solver log")
    if variables < 1:
        raise ValueError("no variables, ratio undefined")
    ratio = clauses / variables
    return SatSizeReport(
        source, variables, clauses, ratio,
        ideal_band[0] <= ratio <= ideal_band[1],
        fields.get("key_length"), fields.get("iterations"), fields.get("ratio"))
