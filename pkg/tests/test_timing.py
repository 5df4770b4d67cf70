"""Delay model, path arithmetic, and the in-loop timing update."""

import random

import pytest
from conftest import make_random_netlist

from lutobf.boolfn import TruthTable, table_from_str
from lutobf.netlist import Instance, Netlist, NetlistError
from lutobf.timing import (
    DelayModel,
    TimedPath,
    TimingState,
    cp_sumcp,
    element_delay,
    enumerate_paths,
    lut_arc_delay,
    path_sort_key,
    sop_depth,
    static_lut_delay,
    update_timing,
)

AVG = (0.049, 0.052, 0.119, 0.192, 0.257, 0.295)


def dfs_paths(nl, model):
    """Exhaustive reference enumeration, capture to launch."""
    drivers = nl.drivers()
    delays = {uid: element_delay(i, model) for uid, i in nl.instances.items()}
    out = []

    def walk(uid, tail):
        inst = nl.instances[uid]
        elems = () if inst.kind == "PI" else ((uid, delays[uid]),)
        if inst.kind in ("PI", "FF"):
            out.append(tuple(elems + tail))
            return
        for q in dict.fromkeys(drivers[n] for n in inst.inputs):
            walk(q, elems + tail)

    for end in nl.instances.values():
        if end.kind in ("FF", "PO"):
            tail = ((end.uid, 0.0),) if end.kind == "FF" else ()
            walk(drivers[end.inputs[0]], tail)
    return out


def test_default_model_matches_block_characterization():
    m = DelayModel()
    assert m.lut_avg_delay == AVG
    assert m.ff_delay == 0.0
    assert m.static_scale == 0.5


def test_model_validation():
    with pytest.raises(ValueError):
        DelayModel(lut_avg_delay=(0.1, 0.2))
    with pytest.raises(ValueError):
        DelayModel(static_scale=0.0)
    with pytest.raises(ValueError):
        DelayModel(static_scale=1.5)
    with pytest.raises(ValueError):
        DelayModel(gate_delay=-1.0)
    with pytest.raises(ValueError):
        DelayModel(arc_slow=0.7, arc_fast=1.3)
    with pytest.raises(ValueError):
        DelayModel.from_dict({"lut_delay": [1] * 6})


def test_model_dict_round_trip():
    m = DelayModel(static_scale=0.25, gate_delay=0.05)
    again = DelayModel.from_dict(m.to_dict())
    assert again.to_dict() == m.to_dict()


def test_arcs_monotone_and_mean_preserving():
    m = DelayModel()
    for k in range(1, 7):
        arcs = m.arcs(k)
        assert len(arcs) == k
        assert all(arcs[i] >= arcs[i + 1] for i in range(k - 1))
        assert abs(sum(arcs) / k - AVG[k - 1]) < 1e-9
    assert m.arcs(6)[5] == min(m.arcs(6))
    assert lut_arc_delay(1, 0, m) == 0.049


def test_arc_pin_range_checked():
    m = DelayModel()
    with pytest.raises(ValueError):
        lut_arc_delay(4, 4, m)
    with pytest.raises(ValueError):
        lut_arc_delay(7, 0, m)


def test_sop_depth_known_shapes():
    assert sop_depth(table_from_str("64'h8000000000000000")) == 3  # 6-wide AND, one cube
    assert sop_depth(table_from_str("4'h6")) == 3  # xor: inverters + 2-AND + 2-OR
    assert sop_depth(table_from_str("4'h0")) == 0
    assert sop_depth(table_from_str("4'hf")) == 0
    assert sop_depth(table_from_str("2'h2")) == 0  # single positive literal


def test_static_delay_examples():
    m = DelayModel()
    and6 = table_from_str("64'h8000000000000000")
    assert static_lut_delay(m, and6) == pytest.approx(0.1475)
    # shallow functions are depth-limited, never slower than the LUT
    xor2 = table_from_str("4'h6")
    assert static_lut_delay(m, xor2) == pytest.approx(0.052)
    const = table_from_str("4'h0")
    assert static_lut_delay(m, const) == pytest.approx(0.5 * 0.052)
    with pytest.raises(NetlistError):
        static_lut_delay(m, None)


def test_static_delay_never_exceeds_reconfigurable():
    m = DelayModel()
    rng = random.Random(5)
    for _ in range(200):
        k = rng.randrange(1, 7)
        tt = TruthTable(k, rng.getrandbits(1 << k))
        assert static_lut_delay(m, tt) <= m.avg(k) + 1e-12


def test_cp_sumcp():
    paths = [TimedPath.of([("a", 0.1)]), TimedPath.of([("b", 0.2)]), TimedPath.of([("c", 0.3)])]
    assert cp_sumcp(paths) == (0.3, pytest.approx(0.6))
    one = [TimedPath.of([("a", 0.17)])]
    cp, s = cp_sumcp(one)
    assert cp == s == pytest.approx(0.17)
    with pytest.raises(NetlistError) as e:
        cp_sumcp([])
    assert e.value.kind == "no-paths"


def test_path_sort_ties_break_on_uids():
    a = TimedPath.of([("bbb", 0.1)])
    b = TimedPath.of([("aaa", 0.1)])
    assert sorted([a, b], key=path_sort_key) == [b, a]


def test_timing_state_index_and_order():
    p1 = TimedPath.of([("x", 0.3), ("y", 0.1)])
    p2 = TimedPath.of([("y", 0.2)])
    st = TimingState([p1, p2])
    assert st.paths == [p2, p1]
    assert st.cp == pytest.approx(0.4)
    assert st.sum_delay == pytest.approx(0.6)
    assert st.index["y"] == [p2, p1]
    assert st.index["x"] == [p1]


def lone_lut6_fixture():
    nl = Netlist("lone")
    nl.add_pi("a")
    mask = table_from_str("64'h8000000000000000")
    nl.add(Instance("f1", "FF", ("a",), "q1"))
    nl.add(Instance("u", "LUT6", ("q1",) * 6, "n", mask=mask))
    nl.add(Instance("f2", "FF", ("n",), "q2"))
    nl.add_po("y", "q2")
    nl.validate()
    return nl


def test_lone_lut6_path_delay():
    nl = lone_lut6_fixture()
    m = DelayModel()
    paths = enumerate_paths(nl, m)
    by_total = sorted(p.total for p in paths)
    # a -> f1, f2 -> y, and the FF-to-FF path through the LUT6
    assert by_total == [pytest.approx(0.0), pytest.approx(0.0), pytest.approx(0.295)]
    worst = max(paths, key=lambda p: p.total)
    assert worst.uids() == (nl.by_name("f1").uid, nl.by_name("u").uid, nl.by_name("f2").uid)


def test_update_timing_halves_lone_path():
    nl = lone_lut6_fixture()
    m = DelayModel()
    st = TimingState(enumerate_paths(nl, m))
    before = st.sum_delay
    lut = nl.by_name("u")
    lut.state = "st"
    update_timing(st, lut, m)
    assert st.cp == pytest.approx(0.1475)
    assert st.sum_delay == pytest.approx(before / 2)


def test_update_timing_rejects_non_lut():
    nl = lone_lut6_fixture()
    m = DelayModel()
    st = TimingState(enumerate_paths(nl, m))
    with pytest.raises(NetlistError) as e:
        update_timing(st, nl.by_name("f1"), m)
    assert e.value.kind == "not-a-lut"


def test_update_timing_untouched_when_absent():
    m = DelayModel()
    st = TimingState([TimedPath.of([("zzz", 0.3)])])
    lut = Instance("u", "LUT2", ("a", "b"), "n", mask=table_from_str("4'h8"))
    update_timing(st, lut, m)
    assert st.cp == pytest.approx(0.3)


def test_update_timing_matches_full_recompute():
    rng = random.Random(71)
    m = DelayModel()
    for _ in range(10):
        nl = make_random_netlist(rng, n_inst=30)
        paths = enumerate_paths(nl, m, cap=32)
        if not paths:
            continue
        frozen = [list(p.elements) for p in paths]
        st = TimingState(paths)
        luts = sorted(nl.luts(), key=lambda i: i.uid)
        moved = {}
        for lut in rng.sample(luts, min(5, len(luts))):
            lut.state = "st"
            moved[lut.uid] = static_lut_delay(m, lut.mask)
            update_timing(st, lut, m)
            rebuilt = TimingState([
                TimedPath.of([(u, moved.get(u, d)) for u, d in elems]) for elems in frozen])
            assert [p.total for p in st.paths] == [p.total for p in rebuilt.paths]
            assert [p.uids() for p in st.paths] == [p.uids() for p in rebuilt.paths]
            assert (st.cp, st.sum_delay) == (rebuilt.cp, rebuilt.sum_delay)


def test_enumerate_matches_dfs_oracle():
    rng = random.Random(13)
    m = DelayModel()
    for _ in range(12):
        nl = make_random_netlist(rng, n_inst=20)
        got = sorted(tuple(p.elements) for p in enumerate_paths(nl, m, cap=10 ** 6))
        want = sorted(dfs_paths(nl, m))
        assert got == want


def test_enumerate_diamond_two_paths():
    nl = Netlist("diamond")
    nl.add_pi("a")
    t = table_from_str("4'h8")
    nl.add(Instance("l", "LUT2", ("a", "a"), "nl_", mask=t))
    nl.add(Instance("r", "LUT2", ("a", "a"), "nr", mask=t))
    nl.add(Instance("j", "LUT2", ("nl_", "nr"), "nj", mask=t))
    nl.add_po("y", "nj")
    nl.validate()
    paths = enumerate_paths(nl, DelayModel())
    assert len(paths) == 2
    assert all(p.total == pytest.approx(0.104) for p in paths)


def test_enumerate_cap_keeps_worst_per_endpoint():
    rng = random.Random(29)
    m = DelayModel()
    for _ in range(8):
        nl = make_random_netlist(rng, n_inst=18, n_ff=0, n_po=1,
                                 kinds=["LUT2", "LUT3", "LUT4"])
        full = sorted((p.total for p in enumerate_paths(nl, m, cap=10 ** 6)), reverse=True)
        capped = [p.total for p in enumerate_paths(nl, m, cap=5)]
        assert all(x >= y for x, y in zip(capped, capped[1:]))
        assert capped == pytest.approx(full[:min(5, len(full))])
