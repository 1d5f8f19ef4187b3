"""Arithmetic and enumeration for monic polynomials over small finite fields.

Monic polynomials over F_q are held in a canonical coefficient encoding:
the tuple of the ``degree`` low coefficients in little-endian order, with
the leading coefficient 1 left implicit.  Field elements are integer codes
in ``[0, q)``; for extension fields the code is the base-p digit vector of
the residue polynomial.

The central objects are :class:`IrredTable` (the complete, sorted list of
monic irreducibles up to a degree bound, built by an ascending trial
division sieve) and :class:`FactorSet` (a squarefree monic polynomial
represented by its sorted irreducible factors).  ``enumerate_Pkn`` lists
every squarefree monic polynomial of degree ``n`` with exactly ``k``
distinct irreducible factors, optionally restricted by the maximum factor
degree.
"""

import os
from dataclasses import dataclass
from itertools import combinations, product
from typing import NamedTuple, Optional

import numpy as np

from .errors import ResourceBudgetError, UnsupportedFieldError

__all__ = [
    "FieldSpec",
    "MonicPoly",
    "IrredId",
    "IrredTable",
    "FactorSet",
    "make_field",
    "poly_mul",
    "poly_divmod",
    "irreducible_table",
    "factor_squarefree",
    "enumerate_Pkn",
    "factor_set_product",
    "save_irreducible_table",
    "load_irreducible_table",
    "cached_irreducible_table",
]

MAX_ENUMERATION = 1 << 22  # default budget on q**D for sieve construction
_MAX_PRIME = 101

# Defining polynomials for the supported extension fields, as little-endian
# coefficient tuples over F_p (leading coefficient 1 implicit).
_DEFINING = {
    (2, 2): (1, 1),     # x^2 + x + 1
    (2, 3): (1, 1, 0),  # x^3 + x + 1
    (3, 2): (1, 0),     # x^2 + 1
}

CACHE_MAGIC = "ffrmf-irred v1"


def _is_prime(p):
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


class FieldSpec:
    """A supported finite field F_q with element codes in [0, q).

    Prime fields use modular arithmetic on the codes directly; the
    extension fields F_4, F_8 and F_9 use a fixed defining polynomial and
    base-p digit codes.  Addition/multiplication tables are precomputed,
    both as nested tuples (scalar paths) and as numpy arrays (vectorized
    sieve).  Instances are immutable after construction.
    """

    def __init__(self, p, m, defining):
        self.p = p
        self.m = m
        self.q = p ** m
        self.defining = defining
        q = self.q
        if m == 1:
            add = [[(a + b) % p for b in range(p)] for a in range(p)]
            mul = [[(a * b) % p for b in range(p)] for a in range(p)]
        else:
            add = [[self._ext_add(a, b) for b in range(q)] for a in range(q)]
            mul = [[self._ext_mul(a, b) for b in range(q)] for a in range(q)]
        sub = [[add[b].index(a) for b in range(q)] for a in range(q)]
        self._add = tuple(tuple(r) for r in add)
        self._sub = tuple(tuple(r) for r in sub)
        self._mul = tuple(tuple(r) for r in mul)
        self.add_table = np.array(add, dtype=np.uint8)
        self.sub_table = np.array(sub, dtype=np.uint8)
        self.mul_table = np.array(mul, dtype=np.uint8)

    def _digits(self, code):
        p = self.p
        return [(code // p ** i) % p for i in range(self.m)]

    def _ext_add(self, a, b):
        p = self.p
        da, db = self._digits(a), self._digits(b)
        return sum(((x + y) % p) * p ** i for i, (x, y) in enumerate(zip(da, db)))

    def _ext_mul(self, a, b):
        p, m = self.p, self.m
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * m - 1)
        for i, x in enumerate(da):
            for j, y in enumerate(db):
                prod[i + j] = (prod[i + j] + x * y) % p
        # reduce modulo the defining polynomial (monic of degree m)
        for i in range(2 * m - 2, m - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j, dj in enumerate(self.defining):
                    prod[i - m + j] = (prod[i - m + j] - c * dj) % p
        return sum(prod[i] * p ** i for i in range(m))

    def add(self, a, b):
        return self._add[a][b]

    def sub(self, a, b):
        return self._sub[a][b]

    def mul(self, a, b):
        return self._mul[a][b]

    def __eq__(self, other):
        return (
            isinstance(other, FieldSpec)
            and (self.p, self.m, self.defining) == (other.p, other.m, other.defining)
        )

    def __hash__(self):
        return hash((self.p, self.m, self.defining))

    def __repr__(self):
        return f"FieldSpec(q={self.q}, p={self.p}, m={self.m})"


def make_field(p, m=1):
    """Return the FieldSpec for F_{p^m}.

    Prime fields are supported for p <= 101; extension fields only for
    q in {4, 8, 9}, each with a fixed built-in defining polynomial.
    """
    if not isinstance(p, int) or not _is_prime(p):
        raise ValueError(f"p must be prime, got {p!r}")
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if m == 1:
        if p > _MAX_PRIME:
            raise UnsupportedFieldError(
                f"field unsupported: prime fields limited to p <= {_MAX_PRIME}"
            )
        return FieldSpec(p, 1, None)
    defining = _DEFINING.get((p, m))
    if defining is None:
        raise UnsupportedFieldError(
            f"field unsupported: extension ({p}, {m}); supported q: 4, 8, 9"
        )
    return FieldSpec(p, m, defining)


@dataclass(frozen=True)
class MonicPoly:
    """Monic polynomial: low coefficients little-endian, leading 1 implicit."""

    coeffs: tuple

    @property
    def degree(self):
        return len(self.coeffs)

    def code(self, q):
        """Integer encoding sum(c_i * q^i); orders polynomials of one degree."""
        c = 0
        for d in reversed(self.coeffs):
            c = c * q + d
        return c

    @classmethod
    def from_code(cls, code, degree, q):
        coeffs = []
        for _ in range(degree):
            coeffs.append(code % q)
            code //= q
        return cls(tuple(coeffs))

    def __str__(self):
        if self.degree == 0:
            return "1"
        terms = []
        for i in range(self.degree, -1, -1):
            c = 1 if i == self.degree else self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                t = "t" if i == 1 else f"t^{i}"
                terms.append(t if c == 1 else f"{c}*{t}")
        return "+".join(terms)


ONE = MonicPoly(())


def _full(poly):
    # coefficient list including the leading 1
    return list(poly.coeffs) + [1]


def poly_mul(a, b, field):
    """Product of two monic polynomials; monic of degree deg(a) + deg(b)."""
    fa, fb = _full(a), _full(b)
    mul, add = field.mul, field.add
    out = [0] * (len(fa) + len(fb) - 1)
    for i, x in enumerate(fa):
        if x:
            for j, y in enumerate(fb):
                if y:
                    out[i + j] = add(out[i + j], mul(x, y))
    return MonicPoly(tuple(out[:-1]))


def poly_divmod(a, b, field):
    """Divide monic a by monic b; returns (quotient coeffs incl. lead, remainder list).

    The quotient of two monic polynomials is monic, so no inversions are
    needed.  The remainder is returned as a little-endian coefficient list
    of length deg(b) (zero-padded).
    """
    da, db = a.degree, b.degree
    if da < db:
        return [], list(a.coeffs) + [0] * (db - len(a.coeffs))
    rem = _full(a)
    fb = _full(b)
    sub, mul = field.sub, field.mul
    quot = [0] * (da - db + 1)
    for i in range(da, db - 1, -1):
        c = rem[i]
        quot[i - db] = c
        if c:
            for j in range(db + 1):
                rem[i - db + j] = sub(rem[i - db + j], mul(c, fb[j]))
    return quot, rem[:db]


def poly_divides(b, a, field):
    """True iff monic b divides monic a."""
    _, rem = poly_divmod(a, b, field)
    return not any(rem)


class IrredId(NamedTuple):
    """Identifier of a monic irreducible: (degree, rank within that degree)."""

    degree: int
    index: int


class IrredTable:
    """Complete sorted lists of monic irreducibles up to a degree bound.

    Lists are sorted by the base-q code of the polynomial; the identifier
    of an irreducible is its (degree, index) position.  Instances are
    immutable and safe to share across threads.
    """

    def __init__(self, field, by_degree):
        self.field = field
        self.q = field.q
        self.by_degree = tuple(tuple(lst) for lst in by_degree)
        self.max_degree = len(self.by_degree)
        self._id_of = {}
        for d, lst in enumerate(self.by_degree, start=1):
            for i, poly in enumerate(lst):
                self._id_of[poly] = IrredId(d, i)
        offsets = [0]
        for lst in self.by_degree:
            offsets.append(offsets[-1] + len(lst))
        self._offsets = tuple(offsets)

    def pi(self, d):
        """Number of irreducibles of degree d in the table."""
        return len(self.by_degree[d - 1])

    def irreducible(self, iid):
        return self.by_degree[iid.degree - 1][iid.index]

    def id_of(self, poly):
        return self._id_of.get(poly)

    def rank(self, iid):
        """Global rank in (degree, index) order; dense in [0, count_up_to(D))."""
        return self._offsets[iid.degree - 1] + iid.index

    def count_up_to(self, d):
        """Number of irreducibles of degree <= d."""
        return self._offsets[min(d, self.max_degree)]

    def ids_up_to(self, d):
        for deg in range(1, min(d, self.max_degree) + 1):
            for i in range(len(self.by_degree[deg - 1])):
                yield IrredId(deg, i)

    def __repr__(self):
        sizes = [len(lst) for lst in self.by_degree]
        return f"IrredTable(q={self.q}, max_degree={self.max_degree}, sizes={sizes})"


def _digit_matrix(n_rows, degree, q):
    # rows are coefficient vectors (little-endian) of all monic polynomials
    # of the given degree, in ascending code order; last column is the lead 1
    codes = np.arange(n_rows, dtype=np.int64)
    mat = np.empty((n_rows, degree + 1), dtype=np.uint8)
    for i in range(degree):
        mat[:, i] = (codes // q ** i) % q
    mat[:, degree] = 1
    return mat


def _vector_divisible(cands, divisor_full, field):
    # remainder of every candidate row modulo one monic divisor, vectorized
    d = cands.shape[1] - 1
    e = len(divisor_full) - 1
    rem = cands.copy()
    sub_t, mul_t = field.sub_table, field.mul_table
    bvec = np.asarray(divisor_full[:e], dtype=np.uint8)
    for i in range(d, e - 1, -1):
        c = rem[:, i]
        rem[:, i - e:i] = sub_t[rem[:, i - e:i], mul_t[c[:, None], bvec[None, :]]]
        rem[:, i] = 0
    return ~rem[:, :e].any(axis=1)


def irreducible_table(field, max_degree, *, max_enumeration=MAX_ENUMERATION):
    """Sieve all monic irreducibles over the field up to max_degree.

    A monic polynomial is irreducible iff no irreducible of degree at most
    half its own divides it, so degrees are processed in ascending order
    with trial division against previously found irreducibles.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    q = field.q
    if q ** max_degree > max_enumeration:
        raise ResourceBudgetError(
            f"q**D = {q}**{max_degree} exceeds enumeration budget {max_enumeration}"
        )
    by_degree = []
    for d in range(1, max_degree + 1):
        n_rows = q ** d
        mat = _digit_matrix(n_rows, d, q)
        composite = np.zeros(n_rows, dtype=bool)
        for e in range(1, d // 2 + 1):
            for irred in by_degree[e - 1]:
                composite |= _vector_divisible(mat, _full(irred), field)
        polys = [
            MonicPoly(tuple(int(c) for c in mat[r, :d]))
            for r in np.flatnonzero(~composite)
        ]
        by_degree.append(polys)
    return IrredTable(field, by_degree)


class FactorSet:
    """A squarefree monic polynomial as its strictly sorted factor ids."""

    __slots__ = ("factors", "deg", "omega", "pmax")

    def __init__(self, factors):
        factors = tuple(factors)
        if any(factors[i] >= factors[i + 1] for i in range(len(factors) - 1)):
            raise ValueError("factors must be strictly increasing")
        self.factors = factors
        self.deg = sum(f.degree for f in factors)
        self.omega = len(factors)
        self.pmax = max((f.degree for f in factors), default=0)

    def __eq__(self, other):
        return isinstance(other, FactorSet) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def __repr__(self):
        return f"FactorSet({list(self.factors)})"


def factor_squarefree(poly, table):
    """Factor a squarefree monic polynomial into its FactorSet.

    Returns None when the polynomial is not squarefree.  The table must be
    at least as deep as deg(poly).
    """
    if poly.degree > table.max_degree:
        raise ValueError(
            f"insufficient table depth: need {poly.degree}, have {table.max_degree}"
        )
    field = table.field
    factors = []
    rem = poly
    half = poly.degree // 2
    for d in range(1, half + 1):
        if d > rem.degree:
            break
        for idx, cand in enumerate(table.by_degree[d - 1]):
            if cand.degree > rem.degree:
                break
            quot, r = poly_divmod(rem, cand, field)
            if any(r):
                continue
            rem = MonicPoly(tuple(quot[:-1]))
            if rem.degree >= cand.degree:
                _, r2 = poly_divmod(rem, cand, field)
                if not any(r2):
                    return None  # repeated factor
            factors.append(IrredId(d, idx))
    if rem.degree > 0:
        iid = table.id_of(rem)
        if iid is None:
            raise ValueError("insufficient table depth for remaining factor")
        factors.append(iid)
    return FactorSet(factors)


def factor_set_product(fs, table):
    """Multiply out a FactorSet back into its MonicPoly."""
    out = ONE
    for iid in fs.factors:
        out = poly_mul(out, table.irreducible(iid), table.field)
    return out


def _degree_partitions(total, parts, lo, hi):
    # nondecreasing part tuples, lexicographically ascending
    if parts == 1:
        if lo <= total <= hi:
            yield (total,)
        return
    first_max = min(hi, total - (parts - 1))
    for first in range(lo, first_max + 1):
        for rest in _degree_partitions(total - first, parts - 1, first, hi):
            yield (first,) + rest


def enumerate_Pkn(k, n, table, max_degree_cap=None):
    """List all squarefree monics of degree n with exactly k irreducible factors.

    With max_degree_cap the factors are additionally restricted to degree
    at most the cap.  Output order is deterministic: lexicographic by the
    nondecreasing degree multiset, then by factor index tuples.
    """
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    cap = n if max_degree_cap is None else min(max_degree_cap, n)
    largest_part = n - (k - 1)
    needed = min(cap, largest_part)
    if k > n:
        return []
    if needed > table.max_degree:
        raise ValueError(
            f"insufficient table depth: need {needed}, have {table.max_degree}"
        )
    out = []
    for part in _degree_partitions(n, k, 1, cap):
        groups = []
        d0 = None
        for d in part:
            if d == d0:
                groups[-1][1] += 1
            else:
                groups.append([d, 1])
                d0 = d
        per_degree = []
        ok = True
        for d, mult in groups:
            pi_d = table.pi(d)
            if pi_d < mult:
                ok = False
                break
            per_degree.append(
                [tuple(IrredId(d, i) for i in combo)
                 for combo in combinations(range(pi_d), mult)]
            )
        if not ok:
            continue
        for choice in product(*per_degree):
            factors = []
            for grp in choice:
                factors.extend(grp)
            out.append(FactorSet(factors))
    return out


def _format_digits(poly, q):
    if q <= 10:
        return "".join(str(c) for c in poly.coeffs)
    return ",".join(str(c) for c in poly.coeffs)


def _parse_digits(line, q):
    if q <= 10:
        coeffs = tuple(int(ch) for ch in line)
    else:
        coeffs = tuple(int(part) for part in line.split(","))
    if any(c >= q for c in coeffs):
        raise ValueError(f"digit out of range in cache line {line!r}")
    return MonicPoly(coeffs)


def save_irreducible_table(table, path):
    """Write the table cache: header line, then one polynomial per line.

    Lines hold the little-endian base-q coefficient digits of each
    irreducible (leading 1 implicit), ascending by degree then code.
    """
    with open(path, "w") as fh:
        fh.write(f"{CACHE_MAGIC} q={table.q} D={table.max_degree}\n")
        for lst in table.by_degree:
            for poly in lst:
                fh.write(_format_digits(poly, table.q) + "\n")


def load_irreducible_table(field, path):
    """Load a cache written by save_irreducible_table; validates the header."""
    with open(path) as fh:
        header = fh.readline().strip()
        parts = header.split()
        if (
            len(parts) != 4
            or " ".join(parts[:2]) != CACHE_MAGIC
            or not parts[2].startswith("q=")
            or not parts[3].startswith("D=")
        ):
            raise ValueError(f"bad cache header: {header!r}")
        q = int(parts[2][2:])
        max_degree = int(parts[3][2:])
        if q != field.q:
            raise ValueError(f"cache is for q={q}, field has q={field.q}")
        by_degree = [[] for _ in range(max_degree)]
        for line in fh:
            line = line.strip()
            if not line:
                continue
            poly = _parse_digits(line, q)
            if not 1 <= poly.degree <= max_degree:
                raise ValueError(f"cache polynomial degree out of range: {line!r}")
            by_degree[poly.degree - 1].append(poly)
    for lst in by_degree:
        codes = [p.code(q) for p in lst]
        if any(codes[i] >= codes[i + 1] for i in range(len(codes) - 1)):
            raise ValueError("cache lists not strictly sorted")
    return IrredTable(field, by_degree)


def cached_irreducible_table(field, max_degree, cache_dir=None, **kwargs):
    """Build the table, reusing an on-disk cache keyed by (q, D) when given."""
    if cache_dir is None:
        return irreducible_table(field, max_degree, **kwargs)
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"irred-q{field.q}-D{max_degree}.txt")
    if os.path.exists(path):
        return load_irreducible_table(field, path)
    table = irreducible_table(field, max_degree, **kwargs)
    save_irreducible_table(table, path)
    return table
