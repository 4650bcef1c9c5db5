"""Quotients, compatible partitions, sound quotients, restriction,
subNmatrix tests, products, ultrafilters, and ultraproducts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .core import CapExceeded, Nmatrix, NmatrixError, Sequent
from .semantics import RulesetReport, ruleset_sound

__all__ = [
    "Partition",
    "RestrictionError",
    "Ultrafilter",
    "quotient",
    "quotient_block_name",
    "is_compatible",
    "enumerate_compatible_partitions",
    "sound_compatible_quotients",
    "restriction",
    "is_subnmatrix",
    "product",
    "product_value_name",
    "ultrafilters",
    "ultraproduct",
    "DEFAULT_PRODUCT_CAP",
    "DEFAULT_PARTITION_CAP",
]

DEFAULT_PRODUCT_CAP = 4096
DEFAULT_PARTITION_CAP = 100_000


class RestrictionError(NmatrixError):
    """The chosen value subset is not closed under the tables."""


@dataclass(frozen=True)
class Partition:
    """Pairwise-disjoint nonempty blocks exactly covering a carrier.

    Blocks are kept in canonical order: by the position of each block's
    least element in the carrier order used at construction."""

    blocks: tuple[frozenset[str], ...]

    @classmethod
    def of(cls, blocks: Iterable[Iterable[str]], carrier: Sequence[str] | None = None) -> "Partition":
        bs = [frozenset(b) for b in blocks]
        if any(not b for b in bs):
            raise NmatrixError("partition blocks must be nonempty")
        union: set[str] = set()
        total = 0
        for b in bs:
            union |= b
            total += len(b)
        if total != len(union):
            raise NmatrixError("partition blocks must be pairwise disjoint")
        if carrier is not None:
            extra = union - set(carrier)
            if extra:
                raise NmatrixError(
                    f"partition mentions values outside the carrier: {sorted(extra)}"
                )
            if union != set(carrier):
                raise NmatrixError("partition does not cover the carrier")
            rank = {v: i for i, v in enumerate(carrier)}
            key = lambda b: min(rank[v] for v in b)
        else:
            key = lambda b: min(b)
        return cls(tuple(sorted(bs, key=key)))

    @classmethod
    def discrete(cls, carrier: Sequence[str]) -> "Partition":
        return cls.of([{v} for v in carrier], carrier)

    def block_of(self, value: str) -> frozenset[str]:
        for b in self.blocks:
            if value in b:
                return b
        raise KeyError(value)

    def is_discrete(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def carrier_set(self) -> frozenset[str]:
        return frozenset().union(*self.blocks) if self.blocks else frozenset()

    def __len__(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return " | ".join(" ".join(sorted(b)) for b in self.blocks)


def quotient_block_name(block: frozenset[str], carrier: Sequence[str]) -> str:
    rank = {v: i for i, v in enumerate(carrier)}
    return "[" + "+".join(sorted(block, key=rank.__getitem__)) + "]"


def is_compatible(p: Partition, m: Nmatrix) -> bool:
    """No block mixes designated and undesignated values."""
    _require_partitions(p, m)
    return all(b <= m.designated or not (b & m.designated) for b in p.blocks)


def _require_partitions(p: Partition, m: Nmatrix) -> None:
    if p.carrier_set() != frozenset(m.carrier):
        raise NmatrixError("partition does not partition the carrier")


def quotient(m: Nmatrix, p: Partition) -> Nmatrix:
    """Collapse the carrier by a partition; table cells collect outputs
    over all block representatives.  Incompatible partitions are allowed;
    a block is designated when it meets the designated set."""
    _require_partitions(p, m)
    p = Partition.of(p.blocks, m.carrier)
    names = {b: quotient_block_name(b, m.carrier) for b in p.blocks}
    block_of = {v: b for b in p.blocks for v in b}
    carrier = tuple(names[b] for b in p.blocks)
    designated = frozenset(names[b] for b in p.blocks if b & m.designated)
    cells: dict[str, dict[tuple[str, ...], set[str]]] = {}
    for conn, k in m.signature.connectives:
        table: dict[tuple[str, ...], set[str]] = {
            tuple(names[b] for b in blocks): set()
            for blocks in itertools.product(p.blocks, repeat=k)
        }
        for args, out in m.cells(conn):
            key = tuple(names[block_of[a]] for a in args)
            table[key].update(names[block_of[y]] for y in out)
        cells[conn] = table
    return Nmatrix.from_cells(m.signature, carrier, designated, cells)


def _set_partitions(items: Sequence[str]) -> Iterator[list[list[str]]]:
    """All set partitions, in a deterministic refinement order."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in _set_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1 :]
        yield [[first]] + sub


def enumerate_compatible_partitions(
    m: Nmatrix, cap: int = DEFAULT_PARTITION_CAP
) -> Iterator[Partition]:
    """All partitions refining the designated/undesignated split
    (count = Bell(|D|) * Bell(|A minus D|))."""
    des = [v for v in m.carrier if v in m.designated]
    undes = [v for v in m.carrier if v not in m.designated]
    count = 0
    for dpart in _set_partitions(des):
        for upart in _set_partitions(undes):
            count += 1
            if count > cap:
                raise CapExceeded(
                    f"more than {cap} compatible partitions; raise the cap explicitly"
                )
            yield Partition.of(dpart + upart, m.carrier)


def sound_compatible_quotients(
    m: Nmatrix, rs: Iterable[Sequent], cap: int = DEFAULT_PARTITION_CAP
) -> list[tuple[Partition, Nmatrix]]:
    """Compatible partitions whose quotients satisfy every rule."""
    rules = list(rs)
    out = []
    for p in enumerate_compatible_partitions(m, cap):
        q = quotient(m, p)
        if ruleset_sound(q, rules).ok:
            out.append((p, q))
    return out


def restriction(m: Nmatrix, values: Iterable[str]) -> Nmatrix:
    """Restrict to a table-closed nonempty subset of the carrier."""
    b = frozenset(values)
    if not b:
        raise RestrictionError("restriction to the empty set is not an Nmatrix")
    extra = b - set(m.carrier)
    if extra:
        raise NmatrixError(f"values not in carrier: {sorted(extra)}")
    carrier = tuple(v for v in m.carrier if v in b)
    cells: dict[str, dict[tuple[str, ...], frozenset[str]]] = {}
    for conn, k in m.signature.connectives:
        table = {}
        for args in itertools.product(carrier, repeat=k):
            out = m.cell(conn, *args)
            if not out <= b:
                raise RestrictionError(
                    f"cell {conn}({','.join(args)}) = "
                    f"{{{', '.join(sorted(out))}}} is not contained in the subset"
                )
            table[args] = out
        cells[conn] = table
    return Nmatrix.from_cells(m.signature, carrier, m.designated & b, cells)


def is_subnmatrix(a: Nmatrix, b: Nmatrix) -> bool:
    """Carrier inclusion, cellwise output inclusion, and inherited
    designation (D_a = D_b intersected with a's carrier)."""
    if a.signature != b.signature:
        return False
    if not set(a.carrier) <= set(b.carrier):
        return False
    if a.designated != b.designated & frozenset(a.carrier):
        return False
    for conn, _ in a.signature.connectives:
        for args, out in a.cells(conn):
            if not out <= b.cell(conn, *args):
                return False
    return True


def product_value_name(parts: Sequence[str]) -> str:
    return "*".join(parts)


def product(ms: Sequence[Nmatrix], cap: int = DEFAULT_PRODUCT_CAP) -> Nmatrix:
    """Componentwise product; values are tuples named by joining the
    factor value names with '*'."""
    if not ms:
        raise NmatrixError("product requires at least one factor")
    sig = ms[0].signature
    for m in ms[1:]:
        if m.signature != sig:
            raise NmatrixError("product requires a shared signature")
    size = 1
    for m in ms:
        size *= len(m.carrier)
    if size > cap:
        raise CapExceeded(f"product carrier of {size} values exceeds cap of {cap}")
    tuples = list(itertools.product(*(m.carrier for m in ms)))
    names = {t: product_value_name(t) for t in tuples}
    carrier = tuple(names[t] for t in tuples)
    designated = frozenset(
        names[t] for t in tuples if all(v in m.designated for v, m in zip(t, ms))
    )
    cells: dict[str, dict[tuple[str, ...], set[str]]] = {}
    for conn, k in sig.connectives:
        table = {}
        for args in itertools.product(tuples, repeat=k):
            outs = [
                ms[i].cell(conn, *(a[i] for a in args)) for i in range(len(ms))
            ]
            table[tuple(names[a] for a in args)] = {
                names[t] for t in itertools.product(*outs)
            }
        cells[conn] = table
    return Nmatrix.from_cells(sig, carrier, designated, cells)


@dataclass(frozen=True)
class Ultrafilter:
    """An ultrafilter on the finite index set {0..n-1}.

    Every ultrafilter on a finite set is principal, so the normal form is
    just the generating index; explicit families are validated and
    normalized by :meth:`from_family`."""

    n: int
    index: int

    def __post_init__(self):
        if not (0 <= self.index < self.n):
            raise NmatrixError("principal index out of range")

    @classmethod
    def principal(cls, n: int, i: int) -> "Ultrafilter":
        return cls(n, i)

    @classmethod
    def from_family(cls, n: int, family: Iterable[Iterable[int]]) -> "Ultrafilter":
        fam = {frozenset(x) for x in family}
        universe = frozenset(range(n))
        if any(not x <= universe for x in fam):
            raise NmatrixError("family member outside the index set")
        if frozenset() in fam:
            raise NmatrixError("not proper: contains the empty set")
        if universe not in fam:
            raise NmatrixError("not a filter: missing the full index set")
        for x in fam:
            for y in fam:
                if x & y not in fam:
                    raise NmatrixError("not a filter: not closed under intersection")
            for sup in map(frozenset, _supersets(x, universe)):
                if sup not in fam:
                    raise NmatrixError("not a filter: not upward closed")
        for x in map(frozenset, _all_subsets(universe)):
            if x not in fam and (universe - x) not in fam:
                raise NmatrixError("not an ultrafilter: misses a set and its complement")
        core = frozenset.intersection(*fam)
        if len(core) != 1:
            raise NmatrixError("not an ultrafilter on a finite set")
        return cls(n, next(iter(core)))

    def contains(self, subset: Iterable[int]) -> bool:
        return self.index in set(subset)


def _all_subsets(universe: frozenset[int]) -> Iterator[set[int]]:
    items = sorted(universe)
    for r in range(len(items) + 1):
        for combo in itertools.combinations(items, r):
            yield set(combo)


def _supersets(x: frozenset[int], universe: frozenset[int]) -> Iterator[set[int]]:
    rest = sorted(universe - x)
    for r in range(len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            yield set(x) | set(combo)


def ultrafilters(n: int) -> list[Ultrafilter]:
    """All ultrafilters on {0..n-1} — the n principal ones."""
    if n < 1:
        raise NmatrixError("index set must be nonempty")
    return [Ultrafilter.principal(n, i) for i in range(n)]


def ultraproduct(
    ms: Sequence[Nmatrix], u: Ultrafilter, cap: int = DEFAULT_PRODUCT_CAP
) -> Nmatrix:
    """Quotient of the product identifying tuples that agree on an
    ultrafilter-large set of coordinates.

    A class is designated when its members are designated on a large set
    of coordinates (this differs from the plain quotient rule exactly
    when some factor has an empty designated set).  Each constructed
    table cell is verified against the coordinatewise large-set
    membership criterion."""
    if len(ms) != u.n:
        raise NmatrixError("ultrafilter index-set size must match the factor count")
    prod = product(ms, cap)
    i = u.index
    fi = ms[i]
    tuples = list(itertools.product(*(m.carrier for m in ms)))
    names = {t: product_value_name(t) for t in tuples}
    # Tuples are equivalent iff they agree on a large coordinate set;
    # for the principal ultrafilter at i that is agreement at i.
    blocks: dict[str, list[str]] = {a: [] for a in fi.carrier}
    for t in tuples:
        blocks[t[i]].append(names[t])
    p = Partition.of(blocks.values(), prod.carrier)
    q = quotient(prod, p)
    block_name = {a: quotient_block_name(frozenset(blocks[a]), prod.carrier) for a in fi.carrier}
    designated = frozenset(block_name[a] for a in fi.carrier if a in fi.designated)
    result = Nmatrix(q.signature, q.carrier, designated, q.tables)
    # Cross-check every cell against the membership criterion evaluated on
    # canonical representatives.
    for conn, k in result.signature.connectives:
        for args in itertools.product(fi.carrier, repeat=k):
            got = result.cell(conn, *(block_name[a] for a in args))
            expected = frozenset(block_name[y] for y in fi.cell(conn, *args))
            if got != expected:
                raise NmatrixError(
                    f"ultraproduct cell {conn}({','.join(args)}) disagrees with "
                    "the coordinatewise criterion"
                )
    return result
