"""Monotone combinatorial valuations stored as exact 2^n tables.

A `Valuation` maps every subset of n items (n <= 20) to an exact rational
value, with v(empty) = 0 and monotonicity enforced at construction. Items are
0-indexed and subsets are bitmasks (item i <-> bit i).

Family constructors build the standard benchmark valuations: perfect
substitutes, perfect complements, XOS from explicit clause lists, budgeted
additive, symmetric from a size profile, coverage, and harmonic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .bitsets import items_of, popcount
from .errors import (
    MalformedFamily,
    NonMonotone,
    NonZeroEmptySet,
    OverlappingSets,
    SizeLimit,
)
from .rational import as_value, harmonic_number

MAX_ITEMS = 20  # 2^20-entry tables keep exhaustive subset scans desk-scale

_I64_HEADROOM = 1 << 61


@dataclass(frozen=True)
class Valuation:
    """Exact value table over all 2^n subsets."""

    n: int
    table: tuple[Fraction, ...]
    label: str = ""

    def __call__(self, mask: int) -> Fraction:
        return self.table[mask]

    def value(self, mask: int) -> Fraction:
        return self.table[mask]

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def marginal(self, add: int, base: int) -> Fraction:
        """v(add | base) = v(base | add) - v(base); `add` and `base` disjoint."""
        if add & base:
            raise OverlappingSets(f"sets {add:#x} and {base:#x} overlap")
        return self.table[base | add] - self.table[base]

    def scaled_ints(self) -> Optional[tuple[np.ndarray, int]]:
        """Table as (int64 array, denominator q) with table = array/q, or None
        if the scaled magnitudes would not fit comfortably in int64."""
        if "_scaled" in self.__dict__:
            return self.__dict__["_scaled"]
        q = 1
        for x in self.table:
            q = lcm(q, x.denominator)
        vmax = max(self.table)
        if q * vmax.numerator // vmax.denominator >= _I64_HEADROOM // (self.n + 2):
            result = None
        else:
            arr = np.fromiter(
                (int(x * q) for x in self.table), dtype=np.int64, count=len(self.table)
            )
            result = (arr, q)
        object.__setattr__(self, "_scaled", result)
        return result


def make_table(n: int, values: Sequence, label: str = "") -> Valuation:
    """Validate and freeze a full table of 2^n values.

    Raises SizeLimit, NonZeroEmptySet, or NonMonotone (with a witness pair
    S < T, v(S) > v(T)).
    """
    if not 1 <= n <= MAX_ITEMS:
        raise SizeLimit(f"need 1 <= n <= {MAX_ITEMS}, got {n}")
    if len(values) != 1 << n:
        raise MalformedFamily(f"table for n={n} needs {1 << n} values, got {len(values)}")
    table = tuple(as_value(x) for x in values)
    if table[0] != 0:
        raise NonZeroEmptySet(f"v(empty) must be 0, got {table[0]}")
    for t in range(1, 1 << n):
        vt = table[t]
        if vt < 0:
            raise MalformedFamily(f"negative value {vt} at {t:#x}")
        m = t
        while m:
            bit = m & -m
            if table[t ^ bit] > vt:
                raise NonMonotone(t ^ bit, t, table[t ^ bit], vt)
            m ^= bit
    return Valuation(n=n, table=table, label=label)


def marginal(v: Valuation, add: int, base: int) -> Fraction:
    """Marginal value of `add` on top of `base` (disjoint bitmasks)."""
    return v.marginal(add, base)


# ---------------------------------------------------------------------------
# family constructors
# ---------------------------------------------------------------------------


def bertrand(n: int, c) -> Valuation:
    """Perfect substitutes: v(S) = c for every nonempty S."""
    c = as_value(c)
    if c <= 0:
        raise MalformedFamily("bertrand needs c > 0")
    zero = Fraction(0)
    return make_table(n, [zero] + [c] * ((1 << n) - 1), label=f"bertrand(n={n},c={c})")


def all_or_nothing(n: int, c) -> Valuation:
    """Perfect complements: only the full set has value."""
    c = as_value(c)
    if c <= 0:
        raise MalformedFamily("all_or_nothing needs c > 0")
    zero = Fraction(0)
    table = [zero] * (1 << n)
    table[(1 << n) - 1] = c
    return make_table(n, table, label=f"all_or_nothing(n={n},c={c})")


def additive(weights: Sequence) -> Valuation:
    """v(S) = sum of per-item weights."""
    w = [as_value(x) for x in weights]
    n = len(w)
    table = [sum((w[i] for i in items_of(s)), Fraction(0)) for s in range(1 << n)]
    return make_table(n, table, label=f"additive({','.join(map(str, w))})")


def xos(clauses: Sequence[Sequence]) -> Valuation:
    """v(S) = max over clauses t of sum_{i in S} w_it, weights >= 0."""
    if not clauses:
        raise MalformedFamily("xos needs at least one clause")
    ws = [[as_value(x) for x in clause] for clause in clauses]
    n = len(ws[0])
    if any(len(row) != n for row in ws):
        raise MalformedFamily("xos clauses must all have the same length")
    if any(x < 0 for row in ws for x in row):
        raise MalformedFamily("xos weights must be >= 0")
    table = []
    for s in range(1 << n):
        items = items_of(s)
        table.append(max(sum((row[i] for i in items), Fraction(0)) for row in ws))
    return make_table(n, table, label=f"xos({len(ws)} clauses)")


def budgeted_additive(weights: Sequence, cap) -> Valuation:
    """v(S) = min(cap, sum of weights over S)."""
    w = [as_value(x) for x in weights]
    cap = as_value(cap)
    if cap < 0 or any(x < 0 for x in w):
        raise MalformedFamily("budgeted_additive needs cap >= 0 and weights >= 0")
    n = len(w)
    table = [
        min(cap, sum((w[i] for i in items_of(s)), Fraction(0))) for s in range(1 << n)
    ]
    return make_table(n, table, label=f"budgeted_additive(cap={cap})")


def symmetric_from_sizes(sizes: Sequence) -> Valuation:
    """v(S) = sizes[|S|]; the profile must start at 0 and be nondecreasing."""
    prof = [as_value(x) for x in sizes]
    n = len(prof) - 1
    if n < 1:
        raise MalformedFamily("symmetric profile needs entries for sizes 0..n, n >= 1")
    if prof[0] != 0:
        raise MalformedFamily("symmetric profile must have value 0 at size 0")
    if any(prof[k] > prof[k + 1] for k in range(n)):
        raise MalformedFamily("decreasing symmetric profile would be non-monotone")
    table = [prof[popcount(s)] for s in range(1 << n)]
    return make_table(n, table, label=f"symmetric({','.join(map(str, prof))})")


def coverage(covers: Sequence[Iterable]) -> Valuation:
    """v(S) = size of the union of the covered ground sets."""
    sets = [frozenset(c) for c in covers]
    n = len(sets)
    if n < 1:
        raise MalformedFamily("coverage needs at least one set")
    table = []
    for s in range(1 << n):
        union: set = set()
        for i in items_of(s):
            union |= sets[i]
        table.append(Fraction(len(union)))
    return make_table(n, table, label=f"coverage(n={n})")


def harmonic(n: int, eps=0) -> Valuation:
    """v(S) = 1 + eps for singletons, H_|S| for |S| >= 2."""
    eps = as_value(eps)
    if eps < 0:
        raise MalformedFamily("harmonic needs eps >= 0")
    if n >= 2 and 1 + eps > harmonic_number(2):
        raise MalformedFamily("harmonic needs 1 + eps <= H_2 to stay monotone")
    table = []
    for s in range(1 << n):
        k = popcount(s)
        if k == 0:
            table.append(Fraction(0))
        elif k == 1:
            table.append(1 + eps)
        else:
            table.append(harmonic_number(k))
    return make_table(n, table, label=f"harmonic(n={n},eps={eps})")


_FAMILY_KEYS = {
    "bertrand",
    "all_or_nothing",
    "xos",
    "budgeted_additive",
    "additive",
    "symmetric",
    "coverage",
    "harmonic",
    "table",
}


def build_family(spec: Mapping) -> Valuation:
    """Build a valuation from a deserialized family spec: {"type": ..., params}."""
    kind = spec.get("type")
    if kind not in _FAMILY_KEYS:
        raise MalformedFamily(f"unknown family type {kind!r}")
    try:
        if kind == "bertrand":
            return bertrand(int(spec["n"]), spec["c"])
        if kind == "all_or_nothing":
            return all_or_nothing(int(spec["n"]), spec["c"])
        if kind == "xos":
            return xos(spec["clauses"])
        if kind == "budgeted_additive":
            return budgeted_additive(spec["weights"], spec["cap"])
        if kind == "additive":
            return additive(spec["weights"])
        if kind == "symmetric":
            return symmetric_from_sizes(spec["sizes"])
        if kind == "coverage":
            return coverage(spec["sets"])
        if kind == "harmonic":
            return harmonic(int(spec["n"]), spec.get("eps", 0))
        return make_table(int(spec["n"]), spec["values"], label=spec.get("label", ""))
    except KeyError as exc:
        raise MalformedFamily(f"family {kind!r} missing parameter {exc}") from exc


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassReport:
    """Membership flags for the valuation hierarchy, most general first.

    Flags are computed so the chain GS => submodular => subadditive =>
    monotone always holds. `witnesses` carries one violating configuration
    per failed class.
    """

    monotone: bool
    subadditive: bool
    submodular: bool
    gross_substitutes: bool
    witnesses: Mapping[str, tuple] = field(default_factory=dict)


def is_submodular(v: Valuation) -> bool:
    return _submodular_witness(v) is None


def _submodular_witness(v: Valuation) -> Optional[tuple[int, int]]:
    """Pairwise local check: v(S+i) + v(S+j) >= v(S+i+j) + v(S).

    Returns a definitional witness pair (S+i, S+j) on failure.
    """
    n, t = v.n, v.table
    for s in range(1 << n):
        rest = items_of(v.full_mask ^ s)
        for a in range(len(rest)):
            i = rest[a]
            si = s | (1 << i)
            for b in range(a + 1, len(rest)):
                j = rest[b]
                sj = s | (1 << j)
                if t[si] + t[sj] < t[si | sj] + t[s]:
                    return (si, sj)
    return None


def _subadditive_witness(v: Valuation) -> Optional[tuple[int, int]]:
    """Check v(S u T) <= v(S) + v(T) over disjoint pairs (sufficient by
    monotonicity)."""
    n, t = v.n, v.table
    full = v.full_mask
    for s in range(1, 1 << n):
        rest = full ^ s
        u = rest
        while u:
            if t[s | u] > t[s] + t[u]:
                return (s, u)
            u = (u - 1) & rest
    return None


def _gs_triple_witness(v: Valuation) -> Optional[tuple[int, int, int, int]]:
    """Triple-exchange test on top of submodularity.

    For all S and distinct i,j,k outside S:
        v(S+ij) + v(S+k) <= max(v(S+ik) + v(S+j), v(S+jk) + v(S+i))
    Returns (S, i, j, k) on failure.
    """
    n, t = v.n, v.table
    for s in range(1 << n):
        rest = items_of(v.full_mask ^ s)
        if len(rest) < 3:
            continue
        for i in rest:
            bi = 1 << i
            for j in rest:
                if j == i:
                    continue
                bj = 1 << j
                lhs_ij = t[s | bi | bj]
                for k in rest:
                    if k == i or k == j:
                        continue
                    bk = 1 << k
                    lhs = lhs_ij + t[s | bk]
                    if lhs > max(
                        t[s | bi | bk] + t[s | bj], t[s | bj | bk] + t[s | bi]
                    ):
                        return (s, i, j, k)
    return None


def classify(v: Valuation) -> ClassReport:
    """Exhaustive membership checks; exponential in n, meant for desk scale.

    Gross substitutes is decided by the local triple-exchange condition (an
    equivalent finite characterization), since the demand-based definition
    quantifies over all price vectors.
    """
    witnesses: dict[str, tuple] = {}
    # construction enforces monotonicity, so this only fires on hand-built tables
    monotone = True
    for t in range(1, 1 << v.n):
        bit = t & -t
        if v.table[t ^ bit] > v.table[t]:
            monotone = False
            witnesses["monotone"] = (t ^ bit, t)
            break
    sub_w = _subadditive_witness(v) if monotone else None
    subadditive = monotone and sub_w is None
    if sub_w is not None:
        witnesses["subadditive"] = sub_w
    sm_w = _submodular_witness(v) if subadditive else None
    submodular = subadditive and sm_w is None
    if sm_w is not None:
        witnesses["submodular"] = sm_w
    gs = False
    if submodular:
        gs_w = _gs_triple_witness(v)
        gs = gs_w is None
        if gs_w is not None:
            witnesses["gross_substitutes"] = gs_w
    return ClassReport(
        monotone=monotone,
        subadditive=subadditive,
        submodular=submodular,
        gross_substitutes=gs,
        witnesses=witnesses,
    )
