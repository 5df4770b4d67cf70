"""Truth table kernel for functions of up to 6 inputs.

A function is stored as an integer mask of 2^k bits.  Bit i of the mask is
the output for the input vector i, where input I0 is the least significant
bit of the row index.  All operations below stick to that convention; the
parsers and emitters rely on it when they decode INIT strings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

MAX_INPUTS = 6

# cofactor_masks[pol][v] selects the rows of a 6-input table where input v
# equals pol.  Tables of fewer inputs use the same masks truncated.
_COFACTOR_MASKS = [[0] * MAX_INPUTS for _ in range(2)]
for _v in range(MAX_INPUTS):
    _period = 1 << (_v + 1)
    _half = 1 << _v
    _m = 0
    for _row in range(64):
        if _row % _period >= _half:
            _m |= 1 << _row
    _COFACTOR_MASKS[1][_v] = _m
    _COFACTOR_MASKS[0][_v] = ~_m & ((1 << 64) - 1)


def _full(k):
    return (1 << (1 << k)) - 1


@dataclass(frozen=True)
class TruthTable:
    """A k-input boolean function as a 2^k-bit mask."""

    k: int
    mask: int

    def __post_init__(self):
        if not 0 <= self.k <= MAX_INPUTS:
            raise ValueError("table width %d out of range 0..6" % self.k)
        if not 0 <= self.mask <= _full(self.k):
            raise ValueError("mask 0x%x does not fit %d inputs" % (self.mask, self.k))

    def eval(self, assignment):
        """Output bit for one input vector, given as an integer row index."""
        if not 0 <= assignment < (1 << self.k):
            raise ValueError("assignment %d out of range for %d inputs" % (assignment, self.k))
        return (self.mask >> assignment) & 1

    def cofactor(self, var, value):
        """Pin input var to value; result no longer depends on var."""
        if not 0 <= var < self.k:
            raise ValueError("variable %d out of range for %d inputs" % (var, self.k))
        dist = 1 << var
        if value:
            half = self.mask & _COFACTOR_MASKS[1][var]
            half |= half >> dist
        else:
            half = self.mask & _COFACTOR_MASKS[0][var]
            half |= half << dist
        return TruthTable(self.k, half & _full(self.k))

    def is_const(self):
        return self.mask == 0 or self.mask == _full(self.k)

    def depends_on(self, var):
        return self.cofactor(var, 0).mask != self.cofactor(var, 1).mask

    def support(self):
        """Indices of inputs the function actually depends on."""
        return tuple(v for v in range(self.k) if self.depends_on(v))

    def shrink_to_support(self):
        """Re-express over the support only.  Returns (table, support)."""
        sup = self.support()
        if len(sup) == self.k:
            return self, sup
        bits = 0
        for row in range(1 << len(sup)):
            full_row = 0
            for j, v in enumerate(sup):
                if row & (1 << j):
                    full_row |= 1 << v
            if (self.mask >> full_row) & 1:
                bits |= 1 << row
        return TruthTable(len(sup), bits), sup

    def to_str(self):
        """Serialize as <2^k>'h<hex>, zero padded to 2^k bits."""
        nbits = 1 << self.k
        ndigits = max(1, nbits // 4)
        return "%d'h%0*x" % (nbits, ndigits, self.mask)

    def __invert__(self):
        return TruthTable(self.k, self.mask ^ _full(self.k))


_STR_RE = re.compile(r"^(\d+)'[hH]([0-9a-fA-F]+)$")


def table_from_str(text):
    """Parse a <2^k>'h<hex> serialization.  Width must be a power of two."""
    m = _STR_RE.match(text.strip())
    if not m:
        raise ValueError("malformed truth table literal %r" % text)
    nbits = int(m.group(1))
    k = nbits.bit_length() - 1
    if nbits != 1 << k or not 1 <= k <= MAX_INPUTS:
        raise ValueError("table literal %r has unsupported width %d" % (text, nbits))
    value = int(m.group(2), 16)
    if value > _full(k):
        raise ValueError("table literal %r overflows %d bits" % (text, nbits))
    return TruthTable(k, value)


def var_table(k, var):
    """The projection function I<var> over a k-input universe."""
    if not 0 <= var < k:
        raise ValueError("variable %d out of range for %d inputs" % (var, k))
    return TruthTable(k, _COFACTOR_MASKS[1][var] & _full(k))


def const_table(k, value):
    return TruthTable(k, _full(k) if value else 0)


@dataclass(frozen=True)
class Cube:
    """A product term: per-variable literal state, positive or negative.

    pos and neg are bitmasks over variable indices.  A variable absent from
    both masks is unbound.  The empty cube (no literals) is the universal
    cube and is only meaningful inside SOP covers.
    """

    pos: int
    neg: int

    def __post_init__(self):
        if self.pos & self.neg:
            raise ValueError("cube binds a variable both ways")

    def literal_count(self):
        return bin(self.pos | self.neg).count("1")

    def literals(self):
        """(var, polarity) pairs, ascending by variable."""
        out = []
        mask = self.pos | self.neg
        v = 0
        while mask >> v:
            if (mask >> v) & 1:
                out.append((v, 1 if (self.pos >> v) & 1 else 0))
            v += 1
        return tuple(out)


def cube_cofactor(tt, cube):
    """Pin every literal of cube; the cube must bind at least one variable."""
    if cube.literal_count() == 0:
        raise ValueError("cannot cofactor against the universal cube")
    out = tt
    for var, pol in cube.literals():
        if var >= tt.k:
            raise ValueError("cube variable %d out of range for %d inputs" % (var, tt.k))
        out = out.cofactor(var, pol)
    return out


def permute_inputs(tt, perm, flips=0, out_flip=False):
    """Rewire inputs: new input j drives old input perm[j], inverted when
    bit j of flips is set.  The output is inverted when out_flip is set.

    For every assignment a of the result, result(a) == tt(b) with
    bit perm[j] of b equal to (bit j of a) xor (bit j of flips).
    """
    k = tt.k
    if sorted(perm) != list(range(k)):
        raise ValueError("perm %r is not a permutation of 0..%d" % (perm, k - 1))
    bits = 0
    for a in range(1 << k):
        b = 0
        for j in range(k):
            if ((a >> j) & 1) ^ ((flips >> j) & 1):
                b |= 1 << perm[j]
        if (tt.mask >> b) & 1:
            bits |= 1 << a
    if out_flip:
        bits ^= _full(k)
    return TruthTable(k, bits)


@dataclass(frozen=True)
class NpnTransform:
    """An input permutation with polarity flips plus an output flip.

    apply() uses the permute_inputs convention above, so a transform
    composed with its inverse restores the original table bit for bit.
    """

    perm: tuple
    flips: int
    out_flip: bool

    def apply(self, tt):
        return permute_inputs(tt, self.perm, self.flips, self.out_flip)

    def inverse(self):
        k = len(self.perm)
        inv = [0] * k
        for j, p in enumerate(self.perm):
            inv[p] = j
        inv_flips = 0
        for j in range(k):
            if (self.flips >> j) & 1:
                inv_flips |= 1 << self.perm[j]
        return NpnTransform(tuple(inv), inv_flips, self.out_flip)


@lru_cache(maxsize=5)
def _row_remaps(k):
    """For every (perm, flips) pair: the source row feeding each output row."""
    perms = list(permutations(range(k)))
    remaps = []
    for perm in perms:
        for flips in range(1 << k):
            rows = []
            for a in range(1 << k):
                b = 0
                for j in range(k):
                    if ((a >> j) & 1) ^ ((flips >> j) & 1):
                        b |= 1 << perm[j]
                rows.append(b)
            remaps.append((perm, flips, tuple(rows)))
    return remaps


@lru_cache(maxsize=5)
def _canon_table(k):
    """mask -> (canonical mask, transform) for every k-input function.

    Built by one sweep: scanning masks in ascending order, the first unseen
    mask is the minimum of its class; its whole orbit is then enumerated and
    tagged with the transform that produced each member from the canonical
    representative.  Only practical for k <= 4.
    """
    remaps = _row_remaps(k)
    n = 1 << (1 << k)
    full = n - 1
    canon = [-1] * n
    trans = [None] * n
    for mask in range(n):
        if canon[mask] >= 0:
            continue
        for perm, flips, rows in remaps:
            g = 0
            for a, b in enumerate(rows):
                if (mask >> b) & 1:
                    g |= 1 << a
            for out_flip in (False, True):
                gg = g ^ (full if out_flip else 0)
                if canon[gg] < 0:
                    canon[gg] = mask
                    trans[gg] = NpnTransform(perm, flips, out_flip)
    return canon, trans


def _npn_exhaustive(tt):
    """Canonical table lookup for k <= 4 (precomputed exhaustive sweep)."""
    canon, trans = _canon_table(tt.k)
    return TruthTable(tt.k, canon[tt.mask]), trans[tt.mask]


@lru_cache(maxsize=4)
def _npn_perm_rows(k):
    """Row remap tables for every (perm, flips) pair, as a numpy matrix.

    Row t of the result holds, for each output row a, the source row in the
    original table.  Used for the k = 5 and 6 searches where pure python
    enumeration is too slow; the search is still exhaustive.
    """
    import numpy as np

    n = 1 << k
    rows = np.arange(n, dtype=np.uint32)
    bits = np.stack([(rows >> j) & 1 for j in range(k)], axis=0)
    perms = list(permutations(range(k)))
    remap = np.zeros((len(perms) << k, n), dtype=np.uint8 if n <= 256 else np.uint32)
    t = 0
    for perm in perms:
        scattered = np.zeros((1 << k, n), dtype=np.uint32)
        for flips in range(1 << k):
            b = np.zeros(n, dtype=np.uint32)
            for j in range(k):
                b |= (bits[j] ^ ((flips >> j) & 1)) << perm[j]
            scattered[flips] = b
        remap[t:t + (1 << k)] = scattered
        t += 1 << k
    return perms, remap


def _npn_vectorized(tt):
    """Exhaustive NPN search for k in {5, 6} using precomputed row remaps."""
    import numpy as np

    k = tt.k
    n = 1 << k
    perms, remap = _npn_perm_rows(k)
    bits = np.array([(tt.mask >> r) & 1 for r in range(n)], dtype=np.uint64)
    gathered = bits[remap]
    weights = np.uint64(1) << np.arange(n, dtype=np.uint64)
    values = (gathered * weights).sum(axis=1)
    comp = np.uint64(_full(k)) - values
    vmin = int(values.min())
    cmin = int(comp.min())
    if vmin <= cmin:
        t = int(values.argmin())
        out_flip = False
        best = vmin
    else:
        t = int(comp.argmin())
        out_flip = True
        best = cmin
    perm = perms[t >> k]
    flips = t & ((1 << k) - 1)
    return TruthTable(k, best), NpnTransform(tuple(perm), flips, out_flip)


def npn_canonicalize(tt):
    """Canonical representative of the NPN class of tt.

    Returns (canonical, transform) where transform.apply(canonical) == tt.
    The canonical table is the lexicographically smallest mask reachable by
    input permutation, input negation and output negation.
    """
    if tt.k <= 4:
        # table already stores the canon -> tt transform
        return _npn_exhaustive(tt)
    canon, fwd = _npn_vectorized(tt)
    # fwd maps tt onto canon; the published direction is canon -> tt.
    return canon, fwd.inverse()


def apply_operator(op, operands):
    """Compose: result(a) = op(operands[0](a), ..., operands[m-1](a)).

    All operands share one input universe.  Built with whole-mask bitwise
    steps, one per minterm of op, so composing small operators is cheap.
    """
    m = op.k
    if len(operands) != m:
        raise ValueError("operator arity %d, got %d operands" % (m, len(operands)))
    if not operands:
        return op
    k = operands[0].k
    if any(o.k != k for o in operands):
        raise ValueError("operands must share one input universe")
    full = _full(k)
    out = 0
    for row in range(1 << m):
        if not (op.mask >> row) & 1:
            continue
        term = full
        for j, operand in enumerate(operands):
            term &= operand.mask if (row >> j) & 1 else ~operand.mask & full
            if not term:
                break
        out |= term
    return TruthTable(k, out)


def _all_implicant_cubes(tt):
    """Every cube whose minterms all map to 1, largest first."""
    k = tt.k
    full = _full(k)
    implicants = []
    # enumerate all 3^k cubes via per-variable state: 0 neg, 1 pos, 2 absent
    def walk(var, pos, neg, cover):
        if var == k:
            if cover and cover & tt.mask == cover:
                implicants.append((Cube(pos, neg), cover))
            return
        vmask = _COFACTOR_MASKS[1][var] & full
        walk(var + 1, pos | (1 << var), neg, cover & vmask)
        walk(var + 1, pos, neg | (1 << var), cover & ~vmask & full)
        walk(var + 1, pos, neg, cover)

    walk(0, 0, 0, full)
    return implicants


def isop_minimize(tt):
    """Two-level minimization: prime cover, greedily made irredundant.

    Returns a tuple of Cubes whose union of minterms equals the on-set.
    Constant 0 gives an empty cover, constant 1 the single universal cube.
    Primes are exact; cover selection is greedy (essential primes first,
    then largest remaining coverage), then a reverse redundancy sweep.
    """
    k = tt.k
    if tt.mask == 0:
        return ()
    if tt.mask == _full(k):
        return (Cube(0, 0),)
    implicants = _all_implicant_cubes(tt)
    # primes: implicants not contained in a larger implicant
    primes = []
    for cube, cover in implicants:
        prime = True
        for var, _pol in cube.literals():
            wider_pos = cube.pos & ~(1 << var)
            wider_neg = cube.neg & ~(1 << var)
            widened = None
            for c2, cov2 in implicants:
                if c2.pos == wider_pos and c2.neg == wider_neg:
                    widened = cov2
                    break
            if widened is not None:
                prime = False
                break
        if prime:
            primes.append((cube, cover))
    primes.sort(key=lambda pc: (-bin(pc[1]).count("1"), pc[0].pos, pc[0].neg))

    remaining = tt.mask
    chosen = []
    # essential primes: sole cover of some minterm
    for i, (cube, cover) in enumerate(primes):
        others = 0
        for j, (_c2, cov2) in enumerate(primes):
            if j != i:
                others |= cov2
        if cover & ~others & tt.mask:
            chosen.append((cube, cover))
            remaining &= ~cover
    while remaining:
        best = max(primes, key=lambda pc: (bin(pc[1] & remaining).count("1"),
                                           -pc[0].literal_count(), -pc[0].pos, -pc[0].neg))
        if not best[1] & remaining:
            raise AssertionError("prime cover cannot make progress")
        chosen.append(best)
        remaining &= ~best[1]
    # drop cubes whose minterms the rest already cover
    irredundant = list(chosen)
    for cube, cover in list(chosen):
        rest = 0
        for c2, cov2 in irredundant:
            if c2 is not cube:
                rest |= cov2
        if cover & ~rest == 0:
            irredundant = [(c, cv) for c, cv in irredundant if c is not cube]
    return tuple(c for c, _cov in irredundant)


def cover_to_table(k, cubes):
    """Evaluate an SOP cover back into a truth table (test oracle aid)."""
    full = _full(k)
    out = 0
    for cube in cubes:
        cover = full
        for var, pol in cube.literals():
            vmask = _COFACTOR_MASKS[1][var] & full
            cover &= vmask if pol else ~vmask & full
        out |= cover
    return TruthTable(k, out)


def eval_words(k, mask, words, width):
    """Bit-parallel evaluation over integer words of `width` vectors.

    words[j] carries one bit per vector for input j.  Returns the output
    word.  Recurses on the top variable with constant folding, so sparse
    functions cost far fewer than 2^k operations.
    """
    full = (1 << width) - 1

    def rec(kk, m, upto):
        if m == 0:
            return 0
        if m == (1 << (1 << kk)) - 1:
            return full
        half = 1 << (kk - 1)
        lo = m & ((1 << half) - 1)
        hi = m >> half
        if lo == hi:
            return rec(kk - 1, lo, upto - 1)
        s = words[kk - 1]
        if lo == 0:
            return s & rec(kk - 1, hi, upto - 1)
        if hi == 0:
            return ~s & full & rec(kk - 1, lo, upto - 1)
        return (s & rec(kk - 1, hi, upto - 1)) | (~s & full & rec(kk - 1, lo, upto - 1))

    if k == 0:
        return full if mask & 1 else 0
    return rec(k, mask, k)
