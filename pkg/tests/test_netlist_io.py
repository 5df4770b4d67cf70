"""Verilog subset, JSON interchange, path ingestion, and preprocessing."""

import random
from types import SimpleNamespace

import pytest
from conftest import make_random_netlist

from lutobf.netlist import NetlistError
from lutobf.netlist_io import (
    ParseError,
    dump_paths,
    emit_json,
    emit_verilog,
    load_paths,
    parse_json,
    parse_verilog,
    preprocess,
)
from lutobf.sim import comb_inputs, random_words, simulate
from lutobf.timing import DelayModel

TWO_CHAIN = """
// two LUTs in a row
module two_chain (a, b, y);
  input a;
  input b;
  output y;
  wire n1;
  LUT2 #(.INIT(4'h8)) u1 (.I0(a), .I1(b), .O(n1));
  LUT2 #(.INIT(4'hE)) u2 (.I0(n1), .I1(a), .O(y));
endmodule
"""

MIXED = """
module mixed (a, b, c, y, z);
  input a; input b; input c;
  output y; output z;
  wire w1; wire w2; wire w3; wire w4; wire w5; wire q;
  IBUF ib (.I(a), .O(w1));
  LUT3 #(.INIT(8'h96)) x1 (.I0(w1), .I1(b), .I2(c), .O(w2));
  MUX2 m1 (.I0(w2), .I1(b), .S(c), .O(w3));
  CARRY c1 (.A(w3), .B(b), .CI(c), .CO(w4));
  FF f1 (.D(w4), .Q(q));
  RLUT2 r1 (.I0(q), .I1(w2), .O(w5));
  OBUF ob (.I(w5), .O(y));
  assign z = w4;
endmodule
"""


def test_two_lut_chain_parses():
    nl = parse_verilog(TWO_CHAIN)
    assert nl.name == "two_chain"
    assert len(nl.luts()) == 2
    nets = {i.output for i in nl.instances.values() if i.output is not None}
    assert nets - set(nl.ports_in) - set(nl.ports_out) == {"n1"}
    assert nl.by_name("u1").mask.to_str() == "4'h8"
    assert nl.by_name("u2").mask.to_str() == "4'he"
    assert nl.by_name("u1").state == "re"


def test_mixed_kinds_parse():
    nl = parse_verilog(MIXED)
    assert nl.by_name("m1").kind == "MUX2"
    assert nl.by_name("c1").inputs == ("w3", "b", "c")
    assert nl.by_name("f1").output == "q"
    r1 = nl.by_name("r1")
    assert r1.kind == "LUT2" and r1.mask is None and r1.state == "re"
    assert nl.by_name("ob").kind == "OBUF"


def test_round_trip_is_isomorphic():
    for text in (TWO_CHAIN, MIXED):
        nl = parse_verilog(text)
        again = parse_verilog(emit_verilog(nl))
        assert again.signature() == nl.signature()


def test_emission_is_a_fixpoint():
    for text in (TWO_CHAIN, MIXED):
        once = emit_verilog(parse_verilog(text))
        assert emit_verilog(parse_verilog(once)) == once


def test_random_round_trips():
    rng = random.Random(97)
    for _ in range(10):
        nl = make_random_netlist(rng)
        again = parse_verilog(emit_verilog(nl))
        assert again.signature() == nl.signature()
        jagain = parse_json(emit_json(nl))
        assert jagain.signature() == nl.signature()


def test_hybrid_emission_drops_reconfigurable_tables():
    nl = parse_verilog(TWO_CHAIN)
    u1 = nl.by_name("u1")
    part = SimpleNamespace(reconf_ids=frozenset([u1.uid]))
    text = emit_verilog(nl, part)
    assert "RLUT2 u1" in text
    assert "4'h8" not in text
    assert "LUT2 #(.INIT(4'he)) u2" in text
    again = parse_verilog(text)
    assert again.by_name("u1").mask is None
    assert again.signature(mask_free_states=("re",)) == nl.signature(mask_free_states=("re",))


def test_output_alias_assign():
    nl = parse_verilog(MIXED)
    assert nl.by_name("z").inputs == ("w4",)
    text = emit_verilog(nl)
    assert "assign z = w4;" in text


def test_input_passthrough_alias():
    nl = parse_verilog("""
module thru (a, y);
  input a; output y;
  assign y = a;
endmodule
""")
    assert nl.by_name("y").inputs == ("a",)
    assert emit_verilog(parse_verilog(emit_verilog(nl))) == emit_verilog(nl)


def test_alias_chains_collapse():
    nl = parse_verilog("""
module chain (a, y);
  input a; output y;
  wire w1; wire w2;
  LUT1 #(.INIT(2'h1)) u (.I0(a), .O(w1));
  assign w2 = w1;
  assign y = w2;
endmodule
""")
    assert nl.by_name("u").output == "w1"
    assert nl.by_name("y").inputs == ("w1",)


def syntax_kind(text):
    with pytest.raises(ParseError) as e:
        parse_verilog(text)
    return e.value


def test_syntax_errors_carry_location():
    err = syntax_kind("module m (a);\n  input a\nendmodule\n")
    assert err.kind == "syntax"
    assert err.line == 3  # the missing semicolon is noticed at endmodule
    err = syntax_kind("module m (a);\n  in!put a;\nendmodule\n")
    assert err.kind == "syntax" and err.line == 2
    assert syntax_kind("module m (); endmodule extra").kind == "syntax"
    assert syntax_kind("module m ();").kind == "syntax"


def test_unknown_kind_rejected():
    err = syntax_kind("module m (a, y);\n  input a; output y;\n  NAND2 u (.I0(a), .O(y));\nendmodule")
    assert err.kind == "unknown-kind" and err.line == 3


def test_init_errors():
    base = "module m (a, y);\n  input a; output y;\n  %s\nendmodule"
    assert syntax_kind(base % "LUT1 u (.I0(a), .O(y));").kind == "missing-init"
    assert syntax_kind(base % "RLUT1 #(.INIT(2'h1)) u (.I0(a), .O(y));").kind == "unexpected-init"
    assert syntax_kind(base % "FF #(.INIT(2'h1)) u (.D(a), .Q(y));").kind == "unexpected-init"
    err = syntax_kind(base % "LUT1 #(.INIT(63'h0)) u (.I0(a), .O(y));")
    assert err.kind == "width-mismatch"
    err = syntax_kind(base % "LUT1 #(.INIT(4'h8)) u (.I0(a), .O(y));")
    assert err.kind == "width-mismatch"


def test_pin_errors():
    base = "module m (a, y);\n  input a; output y;\n  %s\nendmodule"
    assert syntax_kind(base % "LUT2 #(.INIT(4'h8)) u (.I0(a), .O(y));").kind == "pin-count"
    assert syntax_kind(base % "LUT1 #(.INIT(2'h1)) u (.I0(a), .I1(a), .O(y));").kind == "unknown-pin"
    assert syntax_kind(base % "LUT1 #(.INIT(2'h1)) u (.I0(a), .I0(a), .O(y));").kind == "duplicate-pin"


def test_declaration_errors():
    assert syntax_kind("module m (a);\n  input a; wire a;\nendmodule").kind == "duplicate-decl"
    assert syntax_kind("module m (a, y);\n  input a; output y;\n"
                       "  LUT1 #(.INIT(2'h1)) u (.I0(w), .O(y));\nendmodule").kind == "undeclared-net"
    assert syntax_kind("module m (a, b);\n  input a;\nendmodule").kind == "port-list"
    assert syntax_kind("module m (a);\n  input a; input b;\nendmodule").kind == "port-list"


def test_structural_errors_surface_from_validate():
    with pytest.raises(NetlistError) as e:
        parse_verilog("""
module m (a, y);
  input a; output y;
  LUT1 #(.INIT(2'h1)) u1 (.I0(a), .O(y));
  LUT1 #(.INIT(2'h2)) u2 (.I0(a), .O(y));
endmodule
""")
    assert e.value.kind == "multiple-drivers"
    with pytest.raises(NetlistError) as e:
        parse_verilog("""
module m (a, y);
  input a; output y;
  wire w;
  LUT2 #(.INIT(4'h8)) u1 (.I0(a), .I1(y), .O(w));
  LUT2 #(.INIT(4'h8)) u2 (.I0(w), .I1(a), .O(y));
endmodule
""")
    assert e.value.kind == "comb-cycle"
    with pytest.raises(NetlistError) as e:
        parse_verilog("module m (y);\n  output y;\nendmodule")
    assert e.value.kind == "dangling-input"


def test_json_schema_errors():
    with pytest.raises(ParseError) as e:
        parse_json("{not json")
    assert e.value.kind == "syntax"
    with pytest.raises(ParseError) as e:
        parse_json('{"format": "something-else"}')
    assert e.value.kind == "schema"
    with pytest.raises(ParseError) as e:
        parse_json('{"format": "lutobf-netlist-1", "instances": [{"name": "u"}]}')
    assert e.value.kind == "schema"


def test_paths_round_trip():
    paths = [[("u1", 0.1), ("u2", 0.25)], [("u3", 0.0)]]
    assert load_paths(dump_paths(paths)) == paths


def test_paths_schema_errors():
    assert_load_fails('{"format": "nope", "paths": []}', "schema")
    assert_load_fails('{"format": "lutobf-paths-1", "paths": [{"elements": []}]}', "schema")
    assert_load_fails(
        '{"format": "lutobf-paths-1", "paths": [{"elements": [["u", -0.5]]}]}', "schema")
    assert_load_fails(
        '{"format": "lutobf-paths-1", "paths": [{"elements": [[3, 0.5]]}]}', "schema")


def assert_load_fails(text, kind):
    with pytest.raises(ParseError) as e:
        load_paths(text)
    assert e.value.kind == kind


def test_preprocess_sorts_and_strips():
    nl = parse_verilog(MIXED)
    raw = [
        [("ib", 0.01), ("x1", 0.119), ("m1", 0.03), ("c1", 0.04), ("f1", 0.0)],
        [("f1", 0.0), ("r1", 0.052), ("ob", 0.01)],
        [("x1", 0.05)],
    ]
    nl, paths = preprocess(nl, raw_paths=raw)
    assert not [i for i in nl.instances.values() if i.kind in ("BUF", "IBUF", "OBUF")]
    totals = [p.total for p in paths]
    assert totals == sorted(totals)
    assert paths[-1].total == pytest.approx(0.189)  # cp is last
    # buffer elements disappeared with the buffers
    assert len(paths[0].elements) == 1
    assert len(paths[1].elements) == 2


def test_preprocess_rejects_unknown_instance():
    nl = parse_verilog(TWO_CHAIN)
    with pytest.raises(NetlistError) as e:
        preprocess(nl, raw_paths=[[("ghost", 0.1)]])
    assert e.value.kind == "unknown-instance"


def test_preprocess_enumerates_when_no_report():
    nl = parse_verilog(TWO_CHAIN)
    nl2, paths = preprocess(nl, model=DelayModel())
    totals = [p.total for p in paths]
    assert totals == sorted(totals)
    assert totals[-1] == pytest.approx(0.104)


def test_strip_preserves_function_through_preprocess():
    rng = random.Random(3)
    for _ in range(6):
        nl = make_random_netlist(rng)
        ref = nl.copy()
        nl2, _ = preprocess(nl, model=DelayModel())
        pis, ffs = comb_inputs(ref)
        pw = random_words(pis, 64, rng)
        fw = random_words(ffs, 64, rng)
        assert simulate(ref, pw, fw, 64) == simulate(nl2, pw, fw, 64)
