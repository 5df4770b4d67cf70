"""Reading and writing circuits.

Three formats are handled, all documented in docs/formats.md:

  * a structural Verilog subset covering the primitives left after LUT
    mapping (LUTk, FF, MUX2, CARRY, buffers) plus the kinds this flow
    emits itself (RLUTk for reconfigurable holes, INV/AND2/OR2/TIE for
    decoded static logic),
  * a JSON interchange form of the same graph,
  * a JSON timing-path list that stands in for a place-and-route timing
    report.

preprocess() is the ingestion step: buffers are spliced out, paths are
re-targeted to instance uids, and the path list is sorted ascending.
"""

from __future__ import annotations

import json
import re

from .boolfn import table_from_str
from .netlist import (
    BUF_KINDS,
    LUT_KINDS,
    OUT_PIN,
    PIN_ORDER,
    RECONFIGURABLE,
    Instance,
    Netlist,
    NetlistError,
    strip_buffers,
)
from . import timing

NETLIST_FORMAT = "lutobf-netlist-1"
PATHS_FORMAT = "lutobf-paths-1"


class ParseError(NetlistError):
    """Input rejection with a location when one is known."""

    def __init__(self, kind, message, line=None, col=None):
        if line is not None:
            message = "line %d, col %d: %s" % (line, col, message)
        super().__init__(kind, message)
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"\s+|//[^\n]*|/\*.*?\*/"
    r"|(?P<sized>\d+'[hH][0-9a-fA-F]+)"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_$]*)"
    r"|(?P<punct>[();,.#=])",
    re.DOTALL,
)


def _tokenize(text):
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError("syntax", "unexpected character %r" % text[pos], line, col)
        lexeme = m.group(0)
        if m.lastgroup is not None:
            tokens.append((m.lastgroup, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        if tok[0] != "eof":
            self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ParseError("syntax", "expected %s, got %r" % (want, tok[1]), tok[2], tok[3])
        return tok

    def ident(self, what="identifier"):
        tok = self.next()
        if tok[0] != "id":
            raise ParseError("syntax", "expected %s, got %r" % (what, tok[1]), tok[2], tok[3])
        return tok


def _ident_list(p):
    names = [p.ident()[1]]
    while p.peek()[1] == ",":
        p.next()
        names.append(p.ident()[1])
    p.expect("punct", ";")
    return names


def _connections(p):
    """.PIN(net) list; returns {pin: (net, line, col)} in source order."""
    conns = {}
    p.expect("punct", "(")
    while True:
        p.expect("punct", ".")
        pin = p.ident("pin name")
        p.expect("punct", "(")
        net = p.ident("net name")
        p.expect("punct", ")")
        if pin[1] in conns:
            raise ParseError("duplicate-pin", "pin %s connected twice" % pin[1], pin[2], pin[3])
        conns[pin[1]] = (net[1], net[2], net[3])
        tok = p.next()
        if tok[1] == ")":
            break
        if tok[1] != ",":
            raise ParseError("syntax", "expected , or ) in connection list, got %r" % tok[1],
                             tok[2], tok[3])
    p.expect("punct", ";")
    return conns


def parse_verilog(text, validate=True):
    """Parse one module of the documented Verilog subset into a Netlist."""
    p = _Parser(text)
    p.expect("id", "module")
    name = p.ident("module name")[1]
    port_order = []
    p.expect("punct", "(")
    if p.peek()[1] != ")":
        port_order.append(p.ident("port name")[1])
        while p.peek()[1] == ",":
            p.next()
            port_order.append(p.ident("port name")[1])
    p.expect("punct", ")")
    p.expect("punct", ";")

    inputs, outputs, wires = [], [], []
    declared = {}
    aliases = []
    raw_insts = []

    def declare(names, cls, store):
        for n in names:
            if n in declared:
                raise ParseError("duplicate-decl", "%s already declared as %s" % (n, declared[n]))
            declared[n] = cls
            store.append(n)

    while True:
        tok = p.next()
        if tok[0] == "eof":
            raise ParseError("syntax", "missing endmodule", tok[2], tok[3])
        word = tok[1]
        if word == "endmodule":
            break
        if word == "input":
            declare(_ident_list(p), "input", inputs)
        elif word == "output":
            declare(_ident_list(p), "output", outputs)
        elif word == "wire":
            declare(_ident_list(p), "wire", wires)
        elif word == "assign":
            lhs = p.ident("net name")
            p.expect("punct", "=")
            rhs = p.ident("net name")
            p.expect("punct", ";")
            aliases.append((lhs, rhs))
        elif tok[0] == "id":
            raw_insts.append(_parse_instance(p, tok))
        else:
            raise ParseError("syntax", "expected a declaration or instance, got %r" % word,
                             tok[2], tok[3])
    if p.peek()[0] != "eof":
        tok = p.peek()
        raise ParseError("syntax", "text after endmodule", tok[2], tok[3])

    if set(port_order) != set(inputs) | set(outputs):
        raise ParseError("port-list", "module port list does not match input/output declarations")

    # assigns are net aliases; each alias class collapses onto one canonical
    # net, preferring input port names so PI instances keep their own nets
    parent = {}

    def find(n):
        root = n
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(n, n) != n:
            parent[n], n = root, parent[n]
        return root

    def check_declared(net, line, col):
        if net not in declared:
            raise ParseError("undeclared-net", "net %s is not declared" % net, line, col)

    for lhs, rhs in aliases:
        check_declared(lhs[1], lhs[2], lhs[3])
        check_declared(rhs[1], rhs[2], rhs[3])
        parent[find(lhs[1])] = find(rhs[1])
    groups = {}
    for n in declared:
        groups.setdefault(find(n), []).append(n)
    # inputs first and outputs last keeps emitted alias assigns stable
    # across parse/emit cycles
    rank = {n: 0 for n in inputs}
    rank.update({n: 2 for n in outputs})
    canon = {}
    for members in groups.values():
        best = min(members, key=lambda n: (rank.get(n, 1), n))
        for n in members:
            canon[n] = best

    nl = Netlist(name)
    for n in inputs:
        nl.add_pi(n, net=canon[n])
    for kind, iname, conns, line, col in raw_insts:
        base = kind[1:] if kind.startswith("RLUT") else kind
        width = LUT_KINDS.get(base)
        pins = PIN_ORDER[base] + (OUT_PIN.get(base, "O"),)
        for pin in conns:
            if pin not in pins and pin != "INIT":
                raise ParseError("unknown-pin", "%s has no pin %s" % (kind, pin),
                                 conns[pin][1], conns[pin][2])
        for pin in pins:
            if pin not in conns:
                raise ParseError("pin-count", "%s %s is missing pin %s" % (kind, iname, pin),
                                 line, col)
        mask = None
        if "INIT" in conns:
            init, iline, icol = conns["INIT"]
            if kind.startswith("RLUT") or width is None:
                raise ParseError("unexpected-init", "%s %s must not carry INIT" % (kind, iname),
                                 iline, icol)
            try:
                mask = table_from_str(init)
            except ValueError as e:
                raise ParseError("width-mismatch", str(e), iline, icol) from None
            if mask.k != width:
                raise ParseError(
                    "width-mismatch",
                    "%s %s INIT is %d wide, needs %d" % (kind, iname, 1 << mask.k, 1 << width),
                    iline, icol)
        elif width is not None and not kind.startswith("RLUT"):
            raise ParseError("missing-init", "%s %s needs an INIT value" % (kind, iname),
                             line, col)
        for pin in pins:
            check_declared(conns[pin][0], conns[pin][1], conns[pin][2])
        ins = tuple(canon[conns[pin][0]] for pin in PIN_ORDER[base])
        out = canon[conns[pins[-1]][0]]
        try:
            nl.add(Instance(iname, base, ins, out, mask=mask,
                            state=RECONFIGURABLE if base in LUT_KINDS else None))
        except NetlistError as e:
            raise ParseError(e.kind, str(e), line, col) from None
    for n in outputs:
        nl.add_po(n, canon[n])

    if validate:
        nl.validate()
    return nl


def _parse_instance(p, kind_tok):
    kind = kind_tok[1]
    base = kind[1:] if kind.startswith("RLUT") else kind
    if base not in PIN_ORDER:
        raise ParseError("unknown-kind", "unknown instance kind %s" % kind,
                         kind_tok[2], kind_tok[3])
    init = None
    if p.peek()[1] == "#":
        p.next()
        p.expect("punct", "(")
        p.expect("punct", ".")
        key = p.ident("parameter name")
        if key[1] != "INIT":
            raise ParseError("syntax", "only INIT parameters are supported, got %s" % key[1],
                             key[2], key[3])
        p.expect("punct", "(")
        tok = p.next()
        if tok[0] != "sized":
            raise ParseError("syntax", "INIT needs a sized hex literal, got %r" % tok[1],
                             tok[2], tok[3])
        init = tok
        p.expect("punct", ")")
        p.expect("punct", ")")
    name = p.ident("instance name")
    conns = _connections(p)
    if init is not None:
        conns["INIT"] = (init[1], init[2], init[3])
    return kind, name[1], conns, name[2], name[3]


def emit_verilog(netlist, partition=None):
    """Deterministic source text; re-parsing yields an isomorphic netlist.

    With a partition, reconfigurable LUTs come out as mask-free RLUTk
    macros (the bitstream carries their tables); without one every LUT
    keeps its INIT.  Static LUTs are expected to be decoded to gates
    before a hybrid emission, but are tolerated and emitted plain.
    """
    reconf = None
    if partition is not None:
        reconf = set(partition.reconf_ids)
    lines = ["module %s (%s);" % (netlist.name, ", ".join(netlist.ports_in + netlist.ports_out))]
    for n in netlist.ports_in:
        lines.append("  input %s;" % n)
    for n in netlist.ports_out:
        lines.append("  output %s;" % n)

    ports = set(netlist.ports_in) | set(netlist.ports_out)
    nets = set()
    for inst in netlist.instances.values():
        nets.update(inst.inputs)
        if inst.output is not None:
            nets.add(inst.output)
    for n in sorted(nets - ports):
        lines.append("  wire %s;" % n)
    for name in netlist.ports_in:
        net = netlist.by_name(name).output
        if net != name:
            lines.append("  assign %s = %s;" % (net, name))
    for name in netlist.ports_out:
        net = netlist.by_name(name).inputs[0]
        if net != name:
            lines.append("  assign %s = %s;" % (name, net))

    for inst in netlist.instances.values():
        if inst.kind in ("PI", "PO"):
            continue
        pins = PIN_ORDER[inst.kind]
        conns = [".%s(%s)" % (pin, net) for pin, net in zip(pins, inst.inputs)]
        conns.append(".%s(%s)" % (OUT_PIN.get(inst.kind, "O"), inst.output))
        kind = inst.kind
        param = ""
        if inst.is_lut():
            as_hole = inst.mask is None or (reconf is not None and inst.uid in reconf)
            if as_hole:
                kind = "R" + inst.kind
            else:
                param = " #(.INIT(%s))" % inst.mask.to_str()
        lines.append("  %s%s %s (%s);" % (kind, param, inst.name, ", ".join(conns)))
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def emit_json(netlist):
    doc = {"format": NETLIST_FORMAT, "name": netlist.name, "instances": []}
    for inst in netlist.instances.values():
        doc["instances"].append({
            "name": inst.name,
            "kind": inst.kind,
            "inputs": list(inst.inputs),
            "output": inst.output,
            "table": inst.mask.to_str() if inst.mask is not None else None,
            "state": inst.state,
        })
    return json.dumps(doc, indent=2) + "\n"


def parse_json(text, validate=True):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError("syntax", "bad JSON: %s" % e) from None
    if not isinstance(doc, dict) or doc.get("format") != NETLIST_FORMAT:
        raise ParseError("schema", "expected a %r document" % NETLIST_FORMAT)
    nl = Netlist(doc.get("name", "top"))
    for row in doc.get("instances", ()):
        try:
            mask = table_from_str(row["table"]) if row.get("table") else None
            nl.add(Instance(row["name"], row["kind"], tuple(row["inputs"]),
                            row.get("output"), mask=mask, state=row.get("state")))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError("schema", "bad instance record: %s" % e) from None
    if validate:
        nl.validate()
    return nl


def load_paths(text):
    """Timing-path JSON -> list of [(instance name, delay ns), ...]."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError("syntax", "bad JSON: %s" % e) from None
    if not isinstance(doc, dict) or doc.get("format") != PATHS_FORMAT:
        raise ParseError("schema", "expected a %r document" % PATHS_FORMAT)
    out = []
    for path in doc.get("paths", ()):
        elems = []
        for row in path.get("elements", ()):
            if (not isinstance(row, (list, tuple)) or len(row) != 2
                    or not isinstance(row[0], str) or not isinstance(row[1], (int, float))
                    or row[1] < 0):
                raise ParseError("schema", "path element must be [name, delay>=0], got %r" % (row,))
            elems.append((row[0], float(row[1])))
        if not elems:
            raise ParseError("schema", "empty path")
        out.append(elems)
    return out


def dump_paths(paths):
    doc = {"format": PATHS_FORMAT,
           "paths": [{"elements": [[n, d] for n, d in p]} for p in paths]}
    return json.dumps(doc, indent=2) + "\n"


def preprocess(netlist, raw_paths=None, model=None, cap=64):
    """Strip buffers and build the ascending timed-path list.

    raw_paths uses original instance names (the timing-report contract);
    buffer elements vanish with the buffers themselves.  Without raw_paths
    the list is synthesized from the delay model.  Returns (netlist, paths)
    with the netlist modified in place.
    """
    buffer_names = {i.name for i in netlist.instances.values() if i.kind in BUF_KINDS}
    strip_buffers(netlist)
    netlist.validate()
    if model is None:
        model = timing.DelayModel()
    if raw_paths is None:
        paths = timing.enumerate_paths(netlist, model, cap=cap)
        paths.sort(key=timing.path_sort_key)
        return netlist, paths
    paths = []
    for raw in raw_paths:
        elems = []
        for pname, delay in raw:
            if pname in buffer_names:
                continue
            try:
                inst = netlist.by_name(pname)
            except KeyError:
                raise NetlistError("unknown-instance",
                                   "timing path references unknown instance %s" % pname) from None
            elems.append((inst.uid, delay))
        if elems:
            paths.append(timing.TimedPath.of(elems))
    paths.sort(key=timing.path_sort_key)
    return netlist, paths
