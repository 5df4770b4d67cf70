"""Bit-parallel netlist simulation.

Nets carry integer words holding one bit per stimulus vector, so a whole
batch of vectors is evaluated in one topological pass.  Sequential elements
are cut: FF outputs are extra stimulus, FF inputs extra observables.
"""

from __future__ import annotations

from .boolfn import eval_words
from .netlist import NetlistError


def comb_inputs(netlist):
    """Stimulus points: (PI port names, FF instance names), both sorted."""
    pis = sorted(netlist.ports_in)
    ffs = sorted(i.name for i in netlist.instances.values() if i.kind == "FF")
    return pis, ffs


def simulate(netlist, pi_words, ff_words, width, mask_override=None):
    """One combinational pass.  Returns (po_words, ff_d_words) keyed by name.

    pi_words / ff_words map PI port names and FF instance names to stimulus
    words.  mask_override maps a LUT uid to an integer mask and takes
    precedence over the stored table; a reconfigurable LUT with no stored
    table and no override is an error.
    """
    full = (1 << width) - 1
    values = {}
    for inst in netlist.instances.values():
        if inst.kind == "PI":
            values[inst.output] = pi_words[inst.name] & full
        elif inst.kind == "FF":
            values[inst.output] = ff_words[inst.name] & full

    for uid in netlist.topo_order():
        inst = netlist.instances[uid]
        kind = inst.kind
        if kind in ("PI", "FF", "PO"):
            continue
        ins = [values[n] for n in inst.inputs]
        if inst.is_lut():
            if mask_override is not None and uid in mask_override:
                mask = mask_override[uid]
            elif inst.mask is not None:
                mask = inst.mask.mask
            else:
                raise NetlistError("unprogrammed", "LUT %s has no table to simulate" % inst.name)
            out = eval_words(inst.lut_width(), mask, ins, width)
        elif kind == "MUX2":
            i0, i1, s = ins
            out = (s & i1) | (~s & full & i0)
        elif kind == "CARRY":
            a, b, ci = ins
            out = (a & b) | (ci & (a | b))
        elif kind in ("BUF", "IBUF", "OBUF"):
            out = ins[0]
        elif kind == "INV":
            out = ~ins[0] & full
        elif kind == "AND2":
            out = ins[0] & ins[1]
        elif kind == "OR2":
            out = ins[0] | ins[1]
        elif kind == "TIE0":
            out = 0
        elif kind == "TIE1":
            out = full
        else:
            raise NetlistError("unknown-kind", "cannot simulate %s" % kind)
        values[inst.output] = out

    po_words = {}
    for name in netlist.ports_out:
        inst = netlist.by_name(name)
        po_words[name] = values[inst.inputs[0]]
    ff_d = {}
    for inst in netlist.instances.values():
        if inst.kind == "FF":
            ff_d[inst.name] = values[inst.inputs[0]]
    return po_words, ff_d


def random_words(names, width, rng):
    return {n: rng.getrandbits(width) for n in names}


def exhaustive_words(names):
    """Stimulus covering all 2^n assignments; bit r of names[i] is r>>i&1."""
    n = len(names)
    width = 1 << n
    out = {}
    for i, name in enumerate(names):
        b = 1 << i
        unit = ((1 << b) - 1) << b
        out[name] = unit * (((1 << width) - 1) // ((1 << (2 * b)) - 1))
    return out, width


def corner_words(names, width):
    """All-zero and all-one vectors prepended by the callers."""
    full = (1 << width) - 1
    return {n: 0 for n in names}, {n: full for n in names}


def vector_bits(words, names, index):
    """Extract one stimulus vector as {name: bit} for counterexamples."""
    return {n: (words[n] >> index) & 1 for n in names}
