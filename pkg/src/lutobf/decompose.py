"""LUT decomposition: exact trees for small functions, heuristic for wide.

A reconfigurable LUT can be replaced by a tree of smaller reconfigurable
LUTs when the tree's macro area beats the single LUT.  Trees are fanout
free: every node output feeds exactly one parent pin, though one input
variable may feed several leaves.  For functions of up to four inputs the
optimal tree is found once by an exhaustive bucket search and kept in a
table; five and six input functions go through a cofactor heuristic that
composes table entries.

Costs are kept as exact integers so equal-cost buckets stay exact: areas
in hundredths of a square micrometre, delays in picoseconds.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from hashlib import blake2b
from heapq import heappush, heappop
from itertools import count

from .boolfn import (MAX_INPUTS, Cube, TruthTable, _COFACTOR_MASKS, cube_cofactor,
                     eval_words, npn_canonicalize, var_table)
from .netlist import Instance, NetlistError, RECONFIGURABLE


def _full(k):
    return (1 << (1 << k)) - 1


# Two-input operators: every mask that depends on both pins.  Row index is
# I0 + 2*I1, so 8 is AND, 14 OR, 6 XOR, 9 XNOR, 7 NAND, 1 NOR.
OPS2 = tuple(m for m in range(16) if TruthTable(2, m).support() == (0, 1))

_AND2, _OR2, _XOR2, _XNOR2, _NAND2, _NOR2 = 8, 14, 6, 9, 7, 1
# out = I2 ? I1 : I0
_MUX3 = 0xCA


def _ops3():
    return tuple(m for m in range(256) if TruthTable(3, m).support() == (0, 1, 2))


def _apply2(op, f, g, full):
    out = 0
    nf = ~f & full
    ng = ~g & full
    if op & 1:
        out = nf & ng
    if op & 2:
        out |= f & ng
    if op & 4:
        out |= nf & g
    if op & 8:
        out |= f & g
    return out


def _apply_op(op, opk, masks, full):
    out = 0
    for row in range(1 << opk):
        if not (op >> row) & 1:
            continue
        term = full
        for j in range(opk):
            term &= masks[j] if (row >> j) & 1 else ~masks[j] & full
            if not term:
                break
        out |= term
    return out


def _support_size(mask, k):
    n = 0
    for v in range(k):
        if ((mask >> (1 << v)) ^ mask) & _COFACTOR_MASKS[0][v] & _full(k):
            n += 1
    return n


def _not_comparable(a, b, full):
    """Neither function implies the other."""
    return (a & ~b & full) != 0 and (b & ~a & full) != 0


@dataclass(frozen=True)
class CostConfig:
    """Integer cost model for decomposition trees.

    lut_area is in hundredths of a square micrometre and lut_delay in
    picoseconds, both indexed by k-1.  A tree's scalar cost is
    area + weight_delay * delay; candidates with equal scalars are ranked
    by delay.  weight_delay defaults to 0, so area decides and delay only
    breaks ties.
    """

    lut_area: tuple = (3600, 6480, 11700, 25920, 49140, 95760)
    lut_delay: tuple = (49, 52, 119, 192, 257, 295)
    weight_delay: int = 0
    max_op_width: int = 2
    assoc_cap: int = 50000

    def __post_init__(self):
        object.__setattr__(self, "lut_area", tuple(int(a) for a in self.lut_area))
        object.__setattr__(self, "lut_delay", tuple(int(d) for d in self.lut_delay))
        if len(self.lut_area) != 6 or len(self.lut_delay) != 6:
            raise ValueError("cost tables need six entries")
        if any(a <= 0 for a in self.lut_area) or any(d < 0 for d in self.lut_delay):
            raise ValueError("areas must be positive and delays non-negative")
        if self.weight_delay < 0:
            raise ValueError("weight_delay must be non-negative")
        if self.max_op_width not in (2, 3):
            raise ValueError("max_op_width must be 2 or 3")
        if self.assoc_cap < 0:
            raise ValueError("assoc_cap must be non-negative")

    @classmethod
    def from_models(cls, area_model, delay_model, **kw):
        """Convert the float area/delay models into exact integer tables."""
        return cls(lut_area=tuple(round(a * 100) for a in area_model.lut_area),
                   lut_delay=tuple(round(d * 1000) for d in delay_model.lut_avg),
                   **kw)

    def scalar(self, area, delay):
        return area + self.weight_delay * delay

    def key(self, area, delay):
        return (self.scalar(area, delay), delay)

    def naive_key(self, k):
        return self.key(self.lut_area[k - 1], self.lut_delay[k - 1])

    def digest(self):
        text = repr((1, self.lut_area, self.lut_delay, self.weight_delay,
                     self.max_op_width, self.assoc_cap))
        return blake2b(text.encode(), digest_size=16).digest()


@dataclass(frozen=True)
class LutTree:
    """One decomposition tree node.

    kind "var" is a leaf reading input `index`; "const" a constant of value
    `index`; "lut" an internal node of width k with `mask` over its ordered
    children.  Children of one node are pairwise distinct and never
    constants: a constant child would make the node degenerate.
    """

    kind: str
    index: int = 0
    k: int = 0
    mask: int = 0
    children: tuple = ()

    def __post_init__(self):
        if self.kind == "var":
            if not 0 <= self.index < MAX_INPUTS:
                raise ValueError("leaf variable %d out of range" % self.index)
        elif self.kind == "const":
            if self.index not in (0, 1):
                raise ValueError("constant must be 0 or 1")
        elif self.kind == "lut":
            if not 1 <= self.k <= MAX_INPUTS:
                raise ValueError("node width %d out of range" % self.k)
            if not 0 <= self.mask <= _full(self.k):
                raise ValueError("node mask does not fit %d inputs" % self.k)
            if len(self.children) != self.k:
                raise ValueError("node width %d with %d children" % (self.k, len(self.children)))
            if len(set(self.children)) != len(self.children):
                raise ValueError("children of one node must be distinct")
            if any(c.kind == "const" for c in self.children):
                raise ValueError("constant children are degenerate")
        else:
            raise ValueError("unknown tree node kind %r" % self.kind)

    @classmethod
    def leaf(cls, var):
        return cls("var", index=var)

    @classmethod
    def const(cls, value):
        return cls("const", index=1 if value else 0)

    @classmethod
    def node(cls, k, mask, children):
        return cls("lut", k=k, mask=mask, children=tuple(children))


def tree_nodes(tree):
    """Every node of the tree, preorder."""
    stack = [tree]
    while stack:
        t = stack.pop()
        yield t
        stack.extend(reversed(t.children))


def lut_count(tree):
    return sum(1 for t in tree_nodes(tree) if t.kind == "lut")


def tree_vars(tree):
    return sorted({t.index for t in tree_nodes(tree) if t.kind == "var"})


def tree_cost(tree, config):
    """(area, delay) integer pair: summed node areas, worst root-to-leaf delay."""
    if tree.kind != "lut":
        return (0, 0)
    area = config.lut_area[tree.k - 1]
    depth = 0
    for child in tree.children:
        ca, cd = tree_cost(child, config)
        area += ca
        depth = max(depth, cd)
    return (area, depth + config.lut_delay[tree.k - 1])


def tree_key(tree, config):
    area, delay = tree_cost(tree, config)
    return config.key(area, delay)


def tree_table(tree, k):
    """Evaluate the tree into a k-input mask."""
    if tree.kind == "var":
        if tree.index >= k:
            raise ValueError("leaf variable %d outside a %d-input universe" % (tree.index, k))
        return var_table(k, tree.index).mask
    if tree.kind == "const":
        return _full(k) if tree.index else 0
    words = [tree_table(c, k) for c in tree.children]
    return eval_words(tree.k, tree.mask, words, 1 << k)


def _flip_input(mask, k, j):
    """Invert input j of a k-input mask."""
    step = 1 << j
    hi = _COFACTOR_MASKS[1][j] & _full(k)
    lo = _COFACTOR_MASKS[0][j] & _full(k)
    return ((mask & hi) >> step) | ((mask & lo) << step)


def _relabel(tree, sup):
    """Rename leaf i to sup[i]."""
    if tree.kind == "var":
        return LutTree.leaf(sup[tree.index])
    if tree.kind == "const":
        return tree
    return LutTree.node(tree.k, tree.mask, tuple(_relabel(c, sup) for c in tree.children))


def _transform(tree, transform):
    """Rewrite a tree of the canonical function into one of transform.apply.

    Leaf renames come from the inverse permutation; input flips fold into
    the parent node's mask and an output flip inverts the root.  A bare
    leaf that ends up negated is wrapped in an inverting LUT1.
    """
    k = len(transform.perm)
    inv = [0] * k
    for j, p in enumerate(transform.perm):
        inv[p] = j

    def rec(t):
        if t.kind == "var":
            q = inv[t.index]
            return LutTree.leaf(q), bool((transform.flips >> q) & 1)
        mask = t.mask
        kids = []
        for j, child in enumerate(t.children):
            sub, neg = rec(child)
            if neg:
                mask = _flip_input(mask, t.k, j)
            kids.append(sub)
        return LutTree.node(t.k, mask, tuple(kids)), False

    out, neg = rec(tree)
    if neg ^ transform.out_flip:
        if out.kind == "lut":
            out = LutTree.node(out.k, out.mask ^ _full(out.k), out.children)
        else:
            out = LutTree.node(1, 0b01, (out,))
    return out


def _op_widths(config, k):
    """Operator widths usable when building the k-input table (2..k-1)."""
    return tuple(w for w in (2, 3) if w <= config.max_op_width and w <= k - 1)


def _reachable(k, config):
    """Cheapest operator tree per k-input function, grown cheapest first.

    Seeds are the bare variables; each settled function is combined with
    every earlier one through the operator set.  A candidate is kept only
    while its scalar cost is strictly below the naive LUT for its own
    support, so the naive single-LUT fallback stays the reference point.
    Of equal-scalar candidates the one with the smaller delay settles
    first, and ties beyond that go to generation order.
    """
    full = _full(k)
    widths = _op_widths(config, k)
    naive_scalar = [None] + [config.scalar(config.lut_area[m - 1], config.lut_delay[m - 1])
                             for m in range(1, k + 1)]
    cap = naive_scalar[k]

    settled = {}
    order = []  # (mask, area, delay, tree, scalar) in settle order
    heap = []
    seq = count()
    pending = {}

    def push(mask, area, delay, tree):
        scl = config.scalar(area, delay)
        cur = pending.get(mask)
        if cur is not None and cur <= (scl, delay):
            return
        pending[mask] = (scl, delay)
        heappush(heap, (scl, delay, next(seq), mask, area, tree))

    for v in range(k):
        push(var_table(k, v).mask, 0, 0, LutTree.leaf(v))

    ops3 = _ops3() if 3 in widths else ()
    area2 = config.lut_area[1]
    delay2 = config.lut_delay[1]
    min_extra = area2 + config.weight_delay * delay2

    def offer(mask, area, delay, tree):
        if mask in settled:
            return
        sup = _support_size(mask, k)
        if sup <= 1:
            return
        scl = config.scalar(area, delay)
        # Worth keeping if it can still beat its own naive LUT, or if it can
        # still fit under at least one more operator node as a subtree.
        if scl >= naive_scalar[sup] and scl + min_extra >= cap:
            return
        push(mask, area, delay, tree)

    a3 = config.lut_area[2] if ops3 else 0
    d3 = config.lut_delay[2] if ops3 else 0

    while heap:
        _scl, delay, _n, mask, area, tree = heappop(heap)
        if mask in settled:
            continue
        settled[mask] = (area, delay, tree)
        order.append((mask, area, delay, tree, _scl))
        if not widths:
            continue
        for gi, (gmask, garea, gdelay, gtree, gscl) in enumerate(order):
            if area + min_extra + gscl >= cap:
                break
            if gmask == mask:
                continue
            carea = area + garea + area2
            cdelay = max(delay, gdelay) + delay2
            for op in OPS2:
                offer(_apply2(op, mask, gmask, full), carea, cdelay,
                      LutTree.node(2, op, (tree, gtree)))
            if not ops3:
                continue
            head = area + garea + a3 + config.weight_delay * d3
            for hmask, harea, hdelay, htree, hscl in order[gi + 1:]:
                if head + hscl >= cap:
                    break
                if hmask == mask:
                    continue
                masks = (mask, gmask, hmask)
                carea = area + garea + harea + a3
                cdelay = max(delay, gdelay, hdelay) + d3
                for op in ops3:
                    offer(_apply_op(op, 3, masks, full), carea, cdelay,
                          LutTree.node(3, op, (tree, gtree, htree)))
    return settled


class ImplTable:
    """Optimal trees for every function of up to n inputs (n in 2..4).

    Entries are stored for canonical NPN representatives of full-support
    functions whose best operator tree beats the naive single LUT; lookup
    canonicalizes the query and rewrites the stored tree through the NPN
    transform.  Everything else falls back to the naive node.
    """

    MAGIC = b"LOFT"
    VERSION = 1

    def __init__(self, n, config, store):
        self.n = n
        self.config = config
        self.store = store

    @classmethod
    def build(cls, n, config=None):
        if not 2 <= n <= 4:
            raise ValueError("table order %d outside 2..4" % n)
        if config is None:
            config = CostConfig()
        store = {}
        for k in range(2, n + 1):
            settled = _reachable(k, config)
            naive = config.scalar(config.lut_area[k - 1], config.lut_delay[k - 1])
            sub = {}
            canon_of = {}
            for mask, (area, delay, tree) in settled.items():
                if _support_size(mask, k) != k:
                    continue
                if config.scalar(area, delay) >= naive:
                    continue
                canon, _tf = npn_canonicalize(TruthTable(k, mask))
                canon_of[mask] = canon.mask
                if canon.mask == mask:
                    sub[mask] = (area, delay, tree)
            for mask, cmask in canon_of.items():
                if cmask not in sub:
                    raise AssertionError("class of %#x reachable but canonical %#x is not"
                                         % (mask, cmask))
            store[k] = sub
        return cls(n, config, store)

    def lookup(self, tt):
        """The stored tree for tt, over tt's own input indices.

        Functions of support below two come back as constants, leaves or a
        single inverting LUT1; wider ones get either the beaten-cost tree
        or the naive single node of their support width.
        """
        shrunk, sup = tt.shrink_to_support()
        s = shrunk.k
        if s == 0:
            return LutTree.const(shrunk.mask & 1)
        if s == 1:
            tree = LutTree.leaf(0)
            if shrunk.mask == 0b01:
                tree = LutTree.node(1, 0b01, (tree,))
            return _relabel(tree, sup)
        if s > self.n:
            raise ValueError("support %d exceeds table order %d" % (s, self.n))
        canon, tf = npn_canonicalize(shrunk)
        ent = self.store[s].get(canon.mask)
        if ent is None:
            tree = LutTree.node(s, shrunk.mask, tuple(LutTree.leaf(v) for v in range(s)))
        else:
            tree = _transform(ent[2], tf)
        return _relabel(tree, sup)

    def save(self, path):
        blob = bytearray()
        blob += struct.pack("<4sBB16s", self.MAGIC, self.VERSION, self.n, self.config.digest())
        for k in range(2, self.n + 1):
            sub = self.store[k]
            blob += struct.pack("<BI", k, len(sub))
            for mask in sorted(sub):
                area, delay, tree = sub[mask]
                blob += struct.pack("<QII", mask, area, delay)
                _pack_tree(blob, tree)
        tmp = "%s.tmp.%d" % (path, os.getpid())
        with open(tmp, "wb") as fh:
            fh.write(bytes(blob))
        os.replace(tmp, path)
        return path

    @classmethod
    def load(cls, path, config):
        """Parse a cache file; None when missing or built for another config."""
        try:
            with open(path, "rb") as fh:
                blob = fh.read()
        except OSError:
            return None
        head = struct.calcsize("<4sBB16s")
        if len(blob) < head:
            return None
        magic, version, n, digest = struct.unpack_from("<4sBB16s", blob, 0)
        if magic != cls.MAGIC or version != cls.VERSION or digest != config.digest():
            return None
        pos = head
        store = {}
        try:
            for k in range(2, n + 1):
                kk, cnt = struct.unpack_from("<BI", blob, pos)
                pos += struct.calcsize("<BI")
                if kk != k:
                    return None
                sub = {}
                for _ in range(cnt):
                    mask, area, delay = struct.unpack_from("<QII", blob, pos)
                    pos += struct.calcsize("<QII")
                    tree, pos = _unpack_tree(blob, pos)
                    sub[mask] = (area, delay, tree)
                store[k] = sub
        except (struct.error, ValueError):
            return None
        if pos != len(blob):
            return None
        return cls(n, config, store)


def _pack_tree(blob, tree):
    if tree.kind == "var":
        blob += struct.pack("<BB", 0, tree.index)
    elif tree.kind == "const":
        blob += struct.pack("<BB", 1, tree.index)
    else:
        blob += struct.pack("<BBQB", 2, tree.k, tree.mask, len(tree.children))
        for child in tree.children:
            _pack_tree(blob, child)


def _unpack_tree(blob, pos):
    tag = blob[pos]
    if tag == 0:
        return LutTree.leaf(blob[pos + 1]), pos + 2
    if tag == 1:
        return LutTree.const(blob[pos + 1]), pos + 2
    if tag != 2:
        raise ValueError("corrupt tree tag %d" % tag)
    _t, k, mask, nchild = struct.unpack_from("<BBQB", blob, pos)
    pos += struct.calcsize("<BBQB")
    kids = []
    for _ in range(nchild):
        child, pos = _unpack_tree(blob, pos)
        kids.append(child)
    return LutTree.node(k, mask, tuple(kids)), pos


def default_cache_dir():
    root = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return os.path.join(root, "lutobf")


def impl_table(n, config=None, cache_dir=None, rebuild=False):
    """Build or load the optimal-tree table, caching per (n, cost config)."""
    if config is None:
        config = CostConfig()
    if cache_dir is None:
        return ImplTable.build(n, config)
    path = os.path.join(cache_dir, "opt_trees_n%d_%s.bin"
                        % (n, config.digest().hex()[:12]))
    if not rebuild:
        table = ImplTable.load(path, config)
        if table is not None and table.n == n:
            return table
    table = ImplTable.build(n, config)
    os.makedirs(cache_dir, exist_ok=True)
    table.save(path)
    return table


def _pool_entry_ok(tree, support):
    # A bare naive node of three or more inputs brings no structure the
    # association could exploit cheaper than the candidate's own naive; only
    # genuinely decomposed entries and the always-minimal 1/2-input ones
    # qualify.
    return support <= 2 or lut_count(tree) > 1


def decompose_function(tt, tables, config=None, _memo=None):
    """Best LUT tree for tt: exact up to the table order, heuristic above.

    The result always simulates tt and never costs more than the naive
    single LUT of tt's support width.
    """
    if config is None:
        config = tables.config
    memo = {} if _memo is None else _memo
    shrunk, sup = tt.shrink_to_support()
    if shrunk.k <= tables.n:
        return tables.lookup(tt)
    key = (shrunk.k, shrunk.mask)
    tree = memo.get(key)
    if tree is None:
        tree = _heur(shrunk, tables, config, memo)
        memo[key] = tree
    return _relabel(tree, sup)


def _heur(F, tables, config, memo):
    """Cofactor heuristic for a full-support function wider than the table.

    The candidate pool holds the variables, every 1- and 2-literal
    cubecofactor that the table can implement, and all two-input functions
    of variable pairs.  Roots are tried as XOR/XNOR probes, AND/OR pair
    covers, their NAND/NOR complements restricted to not-comparable pairs,
    and Shannon splits whose branches recurse.
    """
    s = F.k
    full = _full(s)
    best = LutTree.node(s, F.mask, tuple(LutTree.leaf(v) for v in range(s)))
    best_key = tree_key(best, config)

    def consider(tree):
        nonlocal best, best_key
        cand = tree_key(tree, config)
        if cand < best_key:
            best, best_key = tree, cand

    def sub(g):
        return decompose_function(g, tables, config, _memo=memo)

    pool = {}
    for v in range(s):
        pool[var_table(s, v).mask] = LutTree.leaf(v)
    cubes = []
    for v in range(s):
        cubes.append(Cube(1 << v, 0))
        cubes.append(Cube(0, 1 << v))
    for i in range(s):
        for j in range(i + 1, s):
            for pi in (0, 1):
                for pj in (0, 1):
                    pos = (pi << i) | (pj << j)
                    neg = ((1 - pi) << i) | ((1 - pj) << j)
                    cubes.append(Cube(pos, neg))
    for cube in cubes:
        cf = cube_cofactor(F, cube)
        if cf.is_const() or cf.mask in pool:
            continue
        width = len(cf.support())
        if width > tables.n:
            continue
        impl = tables.lookup(cf)
        if not _pool_entry_ok(impl, width):
            continue
        pool[cf.mask] = impl
    for i in range(s):
        vi = var_table(s, i).mask
        for j in range(i + 1, s):
            vj = var_table(s, j).mask
            for op in OPS2:
                m = _apply2(op, vi, vj, full)
                if m not in pool:
                    pool[m] = LutTree.node(2, op, (LutTree.leaf(i), LutTree.leaf(j)))

    items = list(pool.items())
    budget = config.assoc_cap
    attempts = 0

    for gm, gt in items:
        if attempts >= budget:
            break
        attempts += 1
        hm = F.mask ^ gm
        ht = pool.get(hm)
        if ht is not None and gm < hm:
            consider(LutTree.node(2, _XOR2, (gt, ht)))
        hm ^= full
        ht = pool.get(hm)
        if ht is not None and gm < hm and _not_comparable(gm, hm, full):
            consider(LutTree.node(2, _XNOR2, (gt, ht)))

    def pair_scan(target, is_and, op, need_nc):
        nonlocal attempts
        if is_and:
            picks = [(m, t) for m, t in items if m & target == target and m != target]
        else:
            picks = [(m, t) for m, t in items if m | target == target and m != target]
        for i, (mi, ti) in enumerate(picks):
            for mj, tj in picks[i + 1:]:
                if attempts >= budget:
                    return
                attempts += 1
                if need_nc and not _not_comparable(mi, mj, full):
                    continue
                got = mi & mj if is_and else mi | mj
                if got == target:
                    consider(LutTree.node(2, op, (ti, tj)))

    pair_scan(F.mask, True, _AND2, False)
    pair_scan(F.mask, False, _OR2, False)
    pair_scan(F.mask ^ full, True, _NAND2, True)
    pair_scan(F.mask ^ full, False, _NOR2, True)

    for v in range(s):
        f0 = F.cofactor(v, 0)
        f1 = F.cofactor(v, 1)
        if f0.is_const():
            # F is v AND f1, or NOT v OR f1
            consider(LutTree.node(2, _AND2 if f0.mask == 0 else 13,
                                  (LutTree.leaf(v), sub(f1))))
        elif f1.is_const():
            # F is v OR f0, or NOT v AND f0
            consider(LutTree.node(2, _OR2 if f1.mask else 4,
                                  (LutTree.leaf(v), sub(f0))))
        else:
            consider(LutTree.node(3, _MUX3, (sub(f0), sub(f1), LutTree.leaf(v))))

    return best


def decompose_netlist(netlist, partition, tables, config=None, _memo=None):
    """Replace each reconfigurable LUT with its decomposition tree.

    Static LUTs and non-LUT logic are untouched.  New instances stay
    reconfigurable, so programming chains and bitstreams are rebuilt from
    the result.  A LUT whose best tree is the naive node of its own width
    is left alone; one that only shrinks its support becomes a narrower
    LUT.  Leaves and constants become a LUT1 rather than a wire or tie so
    the programmed function stays hidden in configuration bits.  Callers
    running many netlists against one table can pass a shared _memo dict.
    """
    if config is None:
        config = tables.config
    out = netlist.copy()
    memo = {} if _memo is None else _memo
    by_uid = {i.uid: i for i in out.luts()}
    for uid in sorted(partition.reconf_ids):
        inst = by_uid.get(uid)
        if inst is None:
            raise NetlistError("partition", "reconfigurable uid %s not in netlist" % uid)
        if inst.mask is None:
            raise NetlistError("unprogrammed", "LUT %s has no table to decompose" % inst.name)
        tree = decompose_function(inst.mask, tables, config, _memo=memo)
        if (tree.kind == "lut" and tree.k == len(inst.inputs)
                and all(c.kind == "var" for c in tree.children)):
            continue
        out.remove(uid)
        _instantiate(out, inst, tree)
    out.invalidate()
    return out.validate()


def _instantiate(netlist, inst, tree):
    idx = count()

    def net_of(t):
        if t.kind == "var":
            return inst.inputs[t.index]
        name = "%s__fc%d" % (inst.name, next(idx))
        pins = tuple(net_of(c) for c in t.children)
        netlist.add(Instance(name, "LUT%d" % t.k, pins, name,
                             TruthTable(t.k, t.mask), RECONFIGURABLE))
        return name

    if tree.kind == "var":
        netlist.add(Instance(inst.name, "LUT1", (inst.inputs[tree.index],), inst.output,
                             TruthTable(1, 0b10), RECONFIGURABLE))
    elif tree.kind == "const":
        netlist.add(Instance(inst.name, "LUT1", (inst.inputs[0],), inst.output,
                             TruthTable(1, 0b11 if tree.index else 0b00), RECONFIGURABLE))
    else:
        pins = tuple(net_of(c) for c in tree.children)
        netlist.add(Instance(inst.name, "LUT%d" % tree.k, pins, inst.output,
                             TruthTable(tree.k, tree.mask), RECONFIGURABLE))
