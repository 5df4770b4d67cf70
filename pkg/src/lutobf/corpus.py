"""Seeded benchmark generator.

Real mapped designs reuse a small vocabulary of LUT functions: a handful
of patterns (adder slices, muxes, parity nodes) dominate and everything
else sits in a long tail.  The generator mimics that with weighted mask
pools.  Part of each design's pool is drawn from a shared vocabulary and
part is private, so different designs have overlapping but
distinguishable pattern distributions, which is exactly the situation
the composition analysis needs to be exercised against.

Everything is derived from explicit seeds; the same seed always yields
the same netlist, down to instance names.
"""

from __future__ import annotations

import random
from importlib import resources

from .boolfn import TruthTable
from .netlist import Instance, Netlist
from .netlist_io import parse_verilog

WIDTH_WEIGHTS = {2: 22, 3: 24, 4: 26, 5: 12, 6: 16}
_POOL_SEED = 0x10075EED
_POOL_SIZE = 96
_SHARED_PER_WIDTH = 12
_PRIVATE_PER_WIDTH = 8


def _full_support_mask(rng, k):
    full = (1 << (1 << k)) - 1
    while True:
        m = rng.getrandbits(1 << k)
        if m in (0, full):
            continue
        if TruthTable(k, m).support() == tuple(range(k)):
            return m


def _shared_pool(k, _cache={}):
    pool = _cache.get(k)
    if pool is None:
        if k == 2:
            # only ten two-input functions have full support; take them all
            pool = sorted(m for m in range(16)
                          if TruthTable(2, m).support() == (0, 1))
        else:
            rng = random.Random(_POOL_SEED ^ k)
            seen = set()
            while len(seen) < _POOL_SIZE:
                seen.add(_full_support_mask(rng, k))
            pool = sorted(seen)
        _cache[k] = pool
    return pool


def _house_pool(rng, k):
    """Per-design mask list, heavy first; weights fall off like 1/rank."""
    shared = _shared_pool(k)
    masks = rng.sample(shared, min(_SHARED_PER_WIDTH, len(shared)))
    if k > 2:
        private = set()
        while len(private) < _PRIVATE_PER_WIDTH:
            m = _full_support_mask(rng, k)
            if m not in masks:
                private.add(m)
        masks = masks + sorted(private)
    rng.shuffle(masks)
    weights = [1.0 / (rank + 1) for rank in range(len(masks))]
    return masks, weights


def make_design(seed, n_luts, name=None, n_pi=None, n_ff=None, n_po=None):
    """One random LUT-mapped design with a stable per-seed identity.

    Besides LUTs a sprinkling of MUX2/CARRY instances is added (about one
    per 12 LUTs) so downstream passes see non-LUT combinational logic.
    """
    if n_luts < 1:
        raise ValueError("n_luts must be positive, got %r" % (n_luts,))
    rng = random.Random(seed)
    if name is None:
        name = "gen%08x" % (seed & 0xFFFFFFFF)
    if n_pi is None:
        n_pi = max(4, min(24, n_luts // 8))
    if n_ff is None:
        n_ff = max(1, n_luts // 16)
    if n_po is None:
        n_po = max(2, min(20, n_luts // 10))

    pools = {k: _house_pool(rng, k) for k in WIDTH_WEIGHTS}
    widths = sorted(WIDTH_WEIGHTS)
    width_w = [WIDTH_WEIGHTS[k] for k in widths]

    nl = Netlist(name)
    nets = []
    for i in range(n_pi):
        nl.add_pi("pi%d" % i)
        nets.append("pi%d" % i)
    for i in range(n_ff):
        nets.append("ff%d_q" % i)

    def pick_inputs(k):
        # bias toward recent nets; keeps depth growing instead of flat fanout
        chosen = []
        seen = set()
        while len(chosen) < k:
            if rng.random() < 0.6:
                net = nets[rng.randrange(max(0, len(nets) - 3 * n_pi), len(nets))]
            else:
                net = nets[rng.randrange(len(nets))]
            if net not in seen:
                seen.add(net)
                chosen.append(net)
            elif len(seen) >= len(nets):
                break
        while len(chosen) < k:
            chosen.append(nets[rng.randrange(len(nets))])
        return tuple(chosen)

    n_extra = n_luts // 12
    g = 0
    for _ in range(n_luts):
        k = rng.choices(widths, width_w)[0]
        k = min(k, len(nets))
        if k < 2:
            k = 2
        masks, weights = pools[k]
        mask = rng.choices(masks, weights)[0]
        out = "g%d" % g
        nl.add(Instance(out, "LUT%d" % k, pick_inputs(k), out, TruthTable(k, mask)))
        nets.append(out)
        g += 1
        if n_extra and g % 13 == 0:
            out = "g%d" % g
            kind = "MUX2" if rng.random() < 0.5 else "CARRY"
            nl.add(Instance(out, kind, pick_inputs(3), out))
            nets.append(out)
            g += 1
            n_extra -= 1

    for i in range(n_ff):
        nl.add(Instance("ff%d" % i, "FF", (nets[rng.randrange(n_pi, len(nets))],),
                        "ff%d_q" % i))
    po_pool = nets[n_pi + n_ff:]
    for i in range(n_po):
        nl.add_po("po%d" % i, po_pool[rng.randrange(len(po_pool))] if po_pool else nets[0])
    return nl.validate()


def fixture_names():
    """Basenames of the bundled handcrafted designs, sorted."""
    root = resources.files(__package__).joinpath("fixtures")
    return sorted(p.name[:-2] for p in root.iterdir() if p.name.endswith(".v"))


def fixture_text(name):
    path = resources.files(__package__).joinpath("fixtures", name + ".v")
    if not path.is_file():
        raise KeyError("no bundled fixture named %r" % name)
    return path.read_text()


def load_fixture(name):
    return parse_verilog(fixture_text(name))


def fixture_corpus():
    return [load_fixture(n) for n in fixture_names()]


def generated_corpus(count=50, lo=20, hi=500, seed=0xC0DE):
    """The standard generated set: sizes spread geometrically over [lo, hi]."""
    if count < 1 or lo < 1 or hi < lo:
        raise ValueError("bad corpus shape")
    designs = []
    for i in range(count):
        frac = i / (count - 1) if count > 1 else 0.0
        size = round(lo * (hi / lo) ** frac)
        designs.append(make_design(seed + i, size, name="gen%02d_%d" % (i, size)))
    return designs
