"""Shared builders for randomized netlist tests."""

from lutobf.boolfn import TruthTable
from lutobf.netlist import Instance, Netlist


def make_random_netlist(rng, n_pi=4, n_inst=24, n_ff=2, n_po=3, kinds=None):
    """Seeded random DAG over the supported primitive kinds, validated."""
    if kinds is None:
        kinds = ["LUT2", "LUT3", "LUT4", "MUX2", "CARRY", "INV", "AND2", "BUF", "TIE1"]
    nl = Netlist("rand%d" % rng.randrange(1 << 16))
    nets = []
    for i in range(n_pi):
        nl.add_pi("pi%d" % i)
        nets.append("pi%d" % i)
    # FF outputs are extra sources; their D pins get wired at the end
    for i in range(n_ff):
        nets.append("ff%d_q" % i)
    n_in_fixed = {"MUX2": 3, "CARRY": 3, "INV": 1, "BUF": 1, "TIE0": 0, "TIE1": 0, "AND2": 2,
                  "OR2": 2}
    for i in range(n_inst):
        kind = rng.choice(kinds)
        n_in = int(kind[-1]) if kind.startswith("LUT") else n_in_fixed[kind]
        ins = tuple(rng.choice(nets) for _ in range(n_in))
        name = "g%d" % i
        if kind.startswith("LUT"):
            mask = TruthTable(n_in, rng.getrandbits(1 << n_in))
            nl.add(Instance(name, kind, ins, name, mask=mask))
        else:
            nl.add(Instance(name, kind, ins, name))
        nets.append(name)
    for i in range(n_ff):
        nl.add(Instance("ff%d" % i, "FF", (rng.choice(nets),), "ff%d_q" % i))
    for i in range(n_po):
        nl.add_po("po%d" % i, rng.choice(nets))
    nl.validate()
    return nl
