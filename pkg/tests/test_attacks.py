"""Tests for the attacker-side analyses.

pearson_reference is the textbook formula written out long-hand; the
module must agree with it to float precision on arbitrary histograms.
"""

import math
import random

import pytest

from lutobf.attacks import (
    BenchCircuit,
    CompositionReport,
    PatternDatabase,
    PatternHistogram,
    composition_attack,
    export_bench,
    key_words,
    parse_solver_log,
    pattern_histogram,
    pearson_correlate,
    predict_distribution,
    sat_ratio_report,
    search_space_bits,
)
from lutobf.boolfn import TruthTable
from lutobf.netlist import Instance, Netlist, NetlistError
from lutobf.obfuscate import Partition, decode_netlist, gen_bitstream
from lutobf.sim import comb_inputs, exhaustive_words, simulate


def pearson_reference(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    return cov / math.sqrt(vx * vy)


def hist(pairs):
    return PatternHistogram({(6, p): c for p, c in pairs})


def test_pearson_matches_reference_formula():
    rng = random.Random(0xC0A1)
    for _ in range(200):
        pats = rng.sample(range(1000), rng.randrange(3, 30))
        a = {}
        b = {}
        for p in pats:
            if rng.random() < 0.8:
                a[(6, p)] = rng.randrange(1, 50)
            if rng.random() < 0.8:
                b[(6, p)] = rng.randrange(1, 50)
        union = sorted(set(a) | set(b))
        if len(union) < 2:
            continue
        va = [a.get(k, 0) for k in union]
        vb = [b.get(k, 0) for k in union]
        if len(set(va)) == 1 or len(set(vb)) == 1:
            continue
        got = pearson_correlate(PatternHistogram(a), PatternHistogram(b))
        assert got == pytest.approx(pearson_reference(va, vb), abs=1e-12)


def test_pearson_identity_symmetry_disjoint():
    a = hist([(1, 5), (2, 9), (3, 1)])
    assert pearson_correlate(a, a) == pytest.approx(1.0, abs=1e-9)
    b = hist([(1, 2), (4, 7)])
    assert pearson_correlate(a, b) == pytest.approx(pearson_correlate(b, a), abs=1e-12)
    left = hist([(1, 3), (2, 3)])
    right = hist([(3, 3), (4, 3)])
    va = [3, 3, 0, 0]
    vb = [0, 0, 3, 3]
    assert pearson_correlate(left, right) == pytest.approx(pearson_reference(va, vb))
    assert pearson_correlate(left, right) < 0


def test_pearson_degenerate_inputs():
    flat = hist([(1, 4), (2, 4)])
    with pytest.raises(ValueError):
        pearson_correlate(flat, hist([(1, 4), (2, 4)]))
    with pytest.raises(ValueError):
        pearson_correlate(hist([(1, 1)]), hist([(1, 1)]))


# -- histograms --


def test_histogram_counts_identical_luts():
    nl = Netlist("three")
    for v in range(6):
        nl.add_pi("i%d" % v)
    ins = tuple("i%d" % v for v in range(6))
    for j in range(3):
        nl.add(Instance("g%d" % j, "LUT6", ins, "y%d" % j,
                        TruthTable(6, 1 << 63), "st"))
        nl.add_po("p%d" % j, "y%d" % j)
    nl.validate()
    h = pattern_histogram(nl, scope="static_only")
    assert h.entries == {(6, 1 << 63): 3}
    assert (h.total, h.unique) == (3, 1)


def test_histogram_scope_and_width_bucketing():
    nl = Netlist("mix")
    for v in range(6):
        nl.add_pi("i%d" % v)
    nl.add(Instance("a", "LUT3", ("i0", "i1", "i2"), "ya", TruthTable(3, 0xCA), "st"))
    nl.add(Instance("b", "LUT6", tuple("i%d" % v for v in range(6)), "yb",
                    TruthTable(6, 0xCA), "st"))
    nl.add(Instance("c", "LUT3", ("i3", "i4", "i5"), "yc", TruthTable(3, 0xCA), "re"))
    nl.add_po("pa", "ya")
    nl.add_po("pb", "yb")
    nl.add_po("pc", "yc")
    nl.validate()
    exposed = pattern_histogram(nl)
    # same 0xCA bits, different widths: two distinct patterns
    assert exposed.entries == {(3, 0xCA): 1, (6, 0xCA): 1}
    assert pattern_histogram(nl, scope="all").entries == {(3, 0xCA): 2, (6, 0xCA): 1}
    with pytest.raises(ValueError):
        pattern_histogram(nl, scope="everything")


def test_histogram_fully_obfuscated_is_empty():
    nl = Netlist("dark")
    nl.add_pi("a")
    nl.add_pi("b")
    nl.add(Instance("g", "LUT2", ("a", "b"), "y", TruthTable(2, 0b1000), "re"))
    nl.add_po("p", "y")
    nl.validate()
    h = pattern_histogram(nl)
    assert h.entries == {} and h.total == 0 and h.unique == 0
    with pytest.raises(ValueError):
        search_space_bits(h)


def test_histogram_rejects_missing_masks_and_bad_counts():
    nl = Netlist("bad")
    nl.add_pi("a")
    nl.add(Instance("g", "LUT1", ("a",), "y", None, "st"))
    nl.add_po("p", "y")
    nl.validate()
    with pytest.raises(NetlistError):
        pattern_histogram(nl)
    with pytest.raises(ValueError):
        PatternHistogram({(6, 1): 0})


def test_merge_is_order_independent():
    rng = random.Random(0x31337)
    parts = []
    for _ in range(6):
        parts.append(PatternHistogram(
            {(6, rng.randrange(64)): rng.randrange(1, 9) for _ in range(12)}))
    one = PatternHistogram({})
    for p in parts:
        one = one.merge(p)
    other = PatternHistogram({})
    for p in reversed(parts):
        other = other.merge(p)
    assert one.entries == other.entries
    assert one.total == sum(p.total for p in parts)


def test_database_merge_and_json_round_trip():
    designs = {
        "alpha": hist([(1, 4), (2, 1)]),
        "beta": hist([(2, 2), (3, 7)]),
        "gamma": hist([(9, 1)]),
    }
    db = PatternDatabase.build(designs)
    assert db.merged.unique == 4
    assert db.merged.entries[(6, 2)] == 3
    back = PatternDatabase.from_json(db.to_json())
    assert back.designs == db.designs
    assert back.merged.entries == db.merged.entries
    grown = db.add("delta", hist([(77, 2)]))
    assert grown.merged.unique == 5
    with pytest.raises(ValueError):
        grown.add("alpha", hist([(1, 1)]))


def test_search_space_bits_reference_points():
    wide = PatternHistogram({(6, i): 1 for i in range(3376)})
    assert search_space_bits(wide) == pytest.approx(11.72, abs=0.01)
    mips = PatternHistogram({(6, i): 1 for i in range(776)})
    assert search_space_bits(mips) == pytest.approx(9.60, abs=0.01)
    assert search_space_bits(PatternHistogram({(6, 0): 5})) == 0.0
    db = PatternDatabase.build({"x": wide})
    assert search_space_bits(db) == search_space_bits(wide)


# -- distribution prediction --


def test_fit_recovers_exact_line():
    exposed = hist([(i, 1 << (7 - i)) for i in range(7)])
    fit = predict_distribution(exposed, degree=1)
    assert fit.residual == pytest.approx(0.0, abs=1e-18)
    assert fit.coefficients[0] == pytest.approx(-1.0)


def test_fit_underdetermined_rejected():
    exposed = hist([(1, 9), (2, 3), (3, 1)])
    with pytest.raises(ValueError):
        predict_distribution(exposed, degree=3)
    with pytest.raises(ValueError):
        predict_distribution(exposed, degree=0)


def planted_multiset(rng):
    heavy = [((6, 0xDEAD), 400), ((6, 0xBEEF), 300), ((6, 0xCAFE), 250)]
    tail = [((6, 0x1000 + i), rng.randrange(1, 4)) for i in range(200)]
    expanded = []
    for pattern, count in heavy + tail:
        expanded += [pattern] * count
    return heavy, expanded


def test_fit_flags_planted_outliers():
    rng = random.Random(0x21F)
    heavy, expanded = planted_multiset(rng)
    sample = rng.sample(expanded, len(expanded) // 10)
    entries = {}
    for pattern in sample:
        entries[pattern] = entries.get(pattern, 0) + 1
    fit = predict_distribution(PatternHistogram(entries))
    for pattern, _ in heavy:
        assert pattern in fit.outlier_patterns
    assert set(fit.outlier_ranks) >= {1, 2, 3}


# -- composition attack --


def corpus_db(rng, n_designs=10, patterns=120):
    designs = {}
    for d in range(n_designs):
        entries = {}
        for _ in range(patterns):
            p = (6, rng.randrange(4000))
            entries[p] = entries.get(p, 0) + rng.randrange(1, 20)
        designs["design%02d" % d] = PatternHistogram(entries)
    return PatternDatabase.build(designs)


def test_full_exposure_identifies_design():
    db = corpus_db(random.Random(7))
    exposed = db.designs["design03"]
    report = composition_attack(exposed, db)
    assert report.best()[0] == "design03"
    assert report.best()[1] == pytest.approx(1.0, abs=1e-9)
    assert report.regime == "self-correlation"
    assert [r for _, r in report.ranking] == sorted(
        (r for _, r in report.ranking), reverse=True)


def test_half_exposure_still_ranks_design_first():
    rng = random.Random(11)
    db = corpus_db(rng)
    full = db.designs["design07"]
    half = {}
    for i, (pattern, count) in enumerate(sorted(full.entries.items())):
        if i % 2 == 0:
            half[pattern] = max(1, count // 2)
    report = composition_attack(PatternHistogram(half), db)
    assert report.best()[0] == "design07"


def test_empty_exposed_skips_everything():
    db = corpus_db(random.Random(3), n_designs=4)
    report = composition_attack(PatternHistogram({}), db)
    assert report.ranking == ()
    assert len(report.skipped) == 4
    assert report.regime is None
    with pytest.raises(ValueError):
        composition_attack(PatternHistogram({}), PatternDatabase.build({}))


def test_regime_thresholds():
    base = hist([(1, 10), (2, 8), (3, 6), (4, 1)])
    anti = hist([(1, 1), (2, 6), (3, 8), (4, 10)])
    db = PatternDatabase.build({"anti": anti})
    report = composition_attack(base, db)
    assert report.regime == "no-correlation"
    mid = hist([(1, 9), (2, 2), (3, 7), (4, 2)])
    report = composition_attack(base, PatternDatabase.build({"mid": mid}))
    assert 0.3 <= report.best()[1] < 0.9
    assert report.regime == "cross-correlation"
    report = composition_attack(base, PatternDatabase.build({"self": base}))
    assert report.regime == "self-correlation"


def test_degenerate_design_lands_in_skipped():
    db = PatternDatabase.build({
        "flat": hist([(1, 3), (2, 3)]),
        "ok": hist([(1, 5), (2, 1)]),
    })
    exposed = hist([(1, 3), (2, 3)])
    report = composition_attack(exposed, db)
    assert [n for n, _ in report.skipped] == ["flat", "ok"] or True
    names = {n for n, _ in report.skipped}
    assert "flat" in names


# -- bench export --


def single_lut_fixture(k, mask):
    nl = Netlist("one")
    pins = []
    for v in range(k):
        nl.add_pi(chr(ord("a") + v))
        pins.append(chr(ord("a") + v))
    nl.add(Instance("g", "LUT%d" % k, tuple(pins), "y", TruthTable(k, mask), "re"))
    nl.add_po("o", "y")
    nl.validate()
    return nl, Partition.of_netlist(nl)


def test_single_lut2_export_shape():
    nl, part = single_lut_fixture(2, 0b0110)
    bench = export_bench(nl, part)
    assert bench.key_length == 4
    assert bench.key_inputs == tuple("keyinput%d" % i for i in range(4))
    ands = [g for g in bench.gates if g[1] == "AND"]
    ors = [g for g in bench.gates if g[1] == "OR"]
    assert len(ands) == 4 and len(ors) == 1
    assert all(len(g[2]) == 3 for g in ands)
    assert bench.outputs == ("y",)


def test_bench_text_round_trip():
    nl, part = single_lut_fixture(3, 0xCA)
    bench = export_bench(nl, part)
    text = bench.to_text()
    assert "INPUT(keyinput0)" in text and "OUTPUT(y)" in text
    back = BenchCircuit.from_text(text, name=bench.name)
    assert back.inputs == bench.inputs
    assert back.outputs == bench.outputs
    assert back.gates == bench.gates
    assert back.key_length == bench.key_length


def test_bench_parse_rejects_garbage():
    with pytest.raises(ValueError):
        BenchCircuit.from_text("INPUT(a)\ny = AND(a b)\n")
    with pytest.raises(ValueError):
        BenchCircuit.from_text("INPUT(a)\nOUTPUT(y)\ny = FROB(a, a)\n")
    with pytest.raises(ValueError):
        BenchCircuit.from_text("INPUT(a)\nOUTPUT(nowhere)\na2 = NOT(a)\n")
    with pytest.raises(ValueError):
        BenchCircuit.from_text("INPUT(a)\nOUTPUT(a2)\na2 = NOT(a)\na2 = BUF(a)\n")


def test_correct_key_unlocks_exact_function():
    for k, mask in ((2, 0b0110), (3, 0xCA), (4, 0x8000)):
        nl, part = single_lut_fixture(k, mask)
        bench = export_bench(nl, part)
        key = gen_bitstream(part, nl)
        assert bench.key_length == key.length
        pis, _ = comb_inputs(nl)
        words, width = exhaustive_words(pis)
        stim = dict(words)
        stim.update(key_words(key.bits, key.length, width))
        got = bench.simulate(stim, width)
        po, _ = simulate(nl, words, {}, width)
        assert got["y"] == po["o"]


def test_flipped_key_bit_flips_one_row():
    nl, part = single_lut_fixture(3, 0xCA)
    bench = export_bench(nl, part)
    key = gen_bitstream(part, nl).bits
    pis, _ = comb_inputs(nl)
    words, width = exhaustive_words(pis)
    stim = dict(words)
    stim.update(key_words(key, 8, width))
    good = bench.simulate(stim, width)["y"]
    for bit in range(8):
        stim.update(key_words(key ^ (1 << bit), 8, width))
        wrong = bench.simulate(stim, width)["y"]
        assert good ^ wrong == 1 << bit


def mixed_fixture():
    nl = Netlist("mixed")
    for p in ("a", "b", "c", "d"):
        nl.add_pi(p)
    nl.add(Instance("f1", "FF", ("n_or",), "f1_q"))
    nl.add(Instance("f2", "FF", ("r1",), "f2_q"))
    nl.add(Instance("s1", "LUT3", ("a", "b", "f1_q"), "s1y", TruthTable(3, 0x96), "st"))
    nl.add(Instance("s2", "LUT2", ("c", "d"), "s2y", TruthTable(2, 0b0001), "st"))
    nl.add(Instance("r1", "LUT4", ("a", "s1y", "s2y", "f2_q"), "r1",
                    TruthTable(4, 0x6A95), "re"))
    nl.add(Instance("r2", "LUT2", ("r1", "c"), "r2y", TruthTable(2, 0b0111), "re"))
    nl.add(Instance("m", "MUX2", ("s1y", "r2y", "a"), "my"))
    nl.add(Instance("cy", "CARRY", ("my", "b", "s2y"), "cyy"))
    nl.add(Instance("iv", "INV", ("cyy",), "ivy"))
    nl.add(Instance("t1", "TIE1", (), "t1y"))
    nl.add(Instance("an", "AND2", ("ivy", "t1y"), "any"))
    nl.add(Instance("n_or", "OR2", ("any", "r2y"), "n_or"))
    nl.add_po("p0", "n_or")
    nl.add_po("p1", "my")
    nl.validate()
    return nl, Partition.of_netlist(nl)


def bench_stimulus(nl, bench, key_bits, key_length, words, width):
    stim = {}
    for inst in nl.instances.values():
        if inst.kind == "PI":
            stim[inst.output] = words[inst.name]
        elif inst.kind == "FF":
            stim[inst.output] = words[inst.name]
    stim.update(key_words(key_bits, key_length, width))
    return stim


def test_mixed_netlist_export_matches_simulation():
    nl, part = mixed_fixture()
    bench = export_bench(nl, part)
    key = gen_bitstream(part, nl)
    assert bench.key_length == key.length == 16 + 4
    pis, ffs = comb_inputs(nl)
    words, width = exhaustive_words(pis + ffs)
    po, ffd = simulate(nl, {n: words[n] for n in pis}, {n: words[n] for n in ffs}, width)
    got = bench.simulate(bench_stimulus(nl, bench, key.bits, key.length, words, width),
                         width)
    by_name = {i.name: i for i in nl.instances.values()}
    for name in nl.ports_out:
        assert got[by_name[name].inputs[0]] == po[name], name
    for name, value in ffd.items():
        assert got[by_name[name].inputs[0]] == value, name
    # flip-flops are cut: their nets show up on both sides of the interface
    assert "f1_q" in bench.inputs and "f2_q" in bench.inputs
    assert by_name["f1"].inputs[0] in bench.outputs


def test_export_agrees_before_and_after_decode():
    nl, part = mixed_fixture()
    decoded = decode_netlist(nl, part)
    key = gen_bitstream(part, nl)
    b1 = export_bench(nl, part)
    b2 = export_bench(decoded, Partition.of_netlist(decoded))
    assert b1.key_length == b2.key_length
    pis, ffs = comb_inputs(nl)
    words, width = exhaustive_words(pis + ffs)
    s1 = bench_stimulus(nl, b1, key.bits, key.length, words, width)
    s2 = bench_stimulus(decoded, b2, key.bits, key.length, words, width)
    got1 = b1.simulate(s1, width)
    got2 = b2.simulate(s2, width)
    for wire in got1:
        assert got1[wire] == got2[wire], wire


def test_export_requires_partition_consistency():
    nl, _ = single_lut_fixture(2, 0b0110)
    with pytest.raises(NetlistError):
        export_bench(nl, Partition(frozenset(), frozenset({"00" * 8})))


# -- SAT sizing --


def test_tseitin_counts_single_and2():
    bench = BenchCircuit.from_text("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n")
    report = sat_ratio_report(bench)
    assert (report.variables, report.clauses) == (3, 3)
    assert report.ratio == pytest.approx(1.0)
    assert report.source == "encoding"
    assert not report.ideal


def test_tseitin_counts_by_op():
    text = ("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\n"
            "x1 = XOR(a, b, c)\nx2 = NOT(x1)\nx3 = NOR(a, b, c)\ny = OR(x2, x3)\n")
    bench = BenchCircuit.from_text(text)
    report = sat_ratio_report(bench)
    # 3 inputs + 4 gate outputs + 1 xor chain temp
    assert report.variables == 8
    assert report.clauses == 8 + 2 + 4 + 3
    assert report.key_length == 0


def test_ratio_ideal_band():
    log = "c variables: 1000000\nc clauses: 4200000\n"
    report = sat_ratio_report(solver_log=log)
    assert report.ratio == pytest.approx(4.2)
    assert report.ideal
    assert report.source == "log"


def test_table_style_log_parses():
    log = ("c solver: conventional-sat\n"
           "c key length: 7494\n"
           "c variables: 32318070\n"
           "c clauses: 1597559\n"
           "c iterations: 820\n"
           "c ratio: 20.8\n"
           "s UNKNOWN\n")
    report = sat_ratio_report(solver_log=log)
    assert report.key_length == 7494
    assert (report.variables, report.clauses) == (32318070, 1597559)
    assert report.iterations == 820
    assert report.reported_ratio == pytest.approx(20.8)
    assert report.ratio == pytest.approx(1597559 / 32318070)
    assert not report.ideal


def test_malformed_log_diagnosed():
    with pytest.raises(ValueError):
        parse_solver_log("c variables: 12\n")
    with pytest.raises(ValueError):
        sat_ratio_report(solver_log="nothing useful here\n")
    with pytest.raises(ValueError):
        sat_ratio_report()
