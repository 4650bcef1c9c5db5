"""Homomorphisms between finite Nmatrices: predicates (hom, strict,
embedding, covering), image construction, kernel partitions, and
exhaustive searches for strict homs and isomorphisms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

from .constructions import Partition, is_subnmatrix
from .core import Nmatrix, NmatrixError

__all__ = [
    "HomMap",
    "is_hom",
    "is_strict",
    "image",
    "is_covering",
    "is_embedding",
    "kernel_partition",
    "find_strict_hom",
    "find_isomorphism",
    "strict_homs",
    "compose",
    "identity_hom",
]


@dataclass(frozen=True)
class HomMap:
    """A total map between the carriers of two Nmatrices."""

    source: Nmatrix
    target: Nmatrix
    map: tuple[tuple[str, str], ...]

    @classmethod
    def of(cls, source: Nmatrix, target: Nmatrix, mapping: Mapping[str, str]) -> "HomMap":
        missing = set(source.carrier) - set(mapping)
        if missing:
            raise NmatrixError(f"map not total: missing {sorted(missing)}")
        extra = set(mapping) - set(source.carrier)
        if extra:
            raise NmatrixError(f"map domain outside source carrier: {sorted(extra)}")
        bad = {v for v in mapping.values() if v not in set(target.carrier)}
        if bad:
            raise NmatrixError(f"map values outside target carrier: {sorted(bad)}")
        items = tuple((v, mapping[v]) for v in source.carrier)
        return cls(source, target, items)

    def __call__(self, value: str) -> str:
        for k, v in self.map:
            if k == value:
                return v
        raise KeyError(value)

    def as_dict(self) -> dict[str, str]:
        return dict(self.map)

    def is_injective(self) -> bool:
        vals = [v for _, v in self.map]
        return len(set(vals)) == len(vals)

    def is_surjective(self) -> bool:
        return {v for _, v in self.map} == set(self.target.carrier)

    def __str__(self) -> str:
        return ", ".join(f"{k}->{v}" for k, v in self.map)


def identity_hom(m: Nmatrix) -> HomMap:
    return HomMap.of(m, m, {v: v for v in m.carrier})


def compose(h2: HomMap, h1: HomMap) -> HomMap:
    """h2 after h1."""
    if h1.target != h2.source:
        raise NmatrixError("composition mismatch: h1's target is not h2's source")
    return HomMap.of(h1.source, h2.target, {v: h2(h1(v)) for v in h1.source.carrier})


def is_hom(h: HomMap) -> bool:
    """Multialgebra condition h[cell(args)] within cell(h(args)) plus
    preservation of designation."""
    src, tgt = h.source, h.target
    if src.signature != tgt.signature:
        return False
    hmap = h.as_dict()
    if not all(hmap[v] in tgt.designated for v in src.designated):
        return False
    for conn, _ in src.signature.connectives:
        for args, out in src.cells(conn):
            timg = tgt.cell(conn, *(hmap[a] for a in args))
            if not {hmap[y] for y in out} <= timg:
                return False
    return True


def is_strict(h: HomMap) -> bool:
    """Hom whose preimage of the target designated set is exactly the
    source designated set."""
    if not is_hom(h):
        return False
    hmap = h.as_dict()
    pre = {v for v in h.source.carrier if hmap[v] in h.target.designated}
    return pre == set(h.source.designated)


def kernel_partition(h: HomMap) -> Partition:
    """Fibers of the map over the source carrier."""
    fibers: dict[str, list[str]] = {}
    for v in h.source.carrier:
        fibers.setdefault(h(v), []).append(v)
    return Partition.of(fibers.values(), h.source.carrier)


def image(h: HomMap) -> Nmatrix:
    """The image Nmatrix: carrier h[A], designated h[D], and each cell
    collecting h of every source output over all preimage argument
    tuples.  Defined for strict homs; the result is a subNmatrix of the
    target."""
    if not is_strict(h):
        raise NmatrixError("image is only defined for strict homomorphisms")
    src, tgt = h.source, h.target
    hmap = h.as_dict()
    img_values = {hmap[v] for v in src.carrier}
    carrier = tuple(v for v in tgt.carrier if v in img_values)
    designated = frozenset(hmap[v] for v in src.designated)
    preimages = {x: [v for v in src.carrier if hmap[v] == x] for x in carrier}
    cells: dict[str, dict[tuple[str, ...], set[str]]] = {}
    for conn, k in src.signature.connectives:
        table: dict[tuple[str, ...], set[str]] = {}
        for args in itertools.product(carrier, repeat=k):
            out: set[str] = set()
            for pre_args in itertools.product(*(preimages[a] for a in args)):
                out.update(hmap[y] for y in src.cell(conn, *pre_args))
            table[args] = out
        cells[conn] = table
    result = Nmatrix.from_cells(src.signature, carrier, designated, cells)
    if not is_subnmatrix(result, tgt):
        raise NmatrixError("internal error: image is not a subNmatrix of the target")
    return result


def is_covering(h: HomMap) -> bool:
    """True when the image equals the whole target — same carrier, same
    designated set, and every table cell equal (not merely included)."""
    if not is_strict(h):
        return False
    img = image(h)
    return (
        set(img.carrier) == set(h.target.carrier)
        and img.designated == h.target.designated
        and all(
            img.cell(conn, *args) == h.target.cell(conn, *args)
            for conn, _ in h.target.signature.connectives
            for args, _ in h.target.cells(conn)
        )
    )


def is_embedding(h: HomMap) -> bool:
    return h.is_injective() and is_strict(h)


# ---------------------------------------------------------------------------
# Searches
# ---------------------------------------------------------------------------


def _partial_ok(src: Nmatrix, tgt: Nmatrix, hmap: dict[str, str]) -> bool:
    """Check the multialgebra condition on all cells whose inputs and
    outputs are fully assigned so far."""
    for conn, _ in src.signature.connectives:
        for args, out in src.cells(conn):
            if any(a not in hmap for a in args):
                continue
            timg = tgt.cell(conn, *(hmap[a] for a in args))
            for y in out:
                if y in hmap and hmap[y] not in timg:
                    return False
    return True


def _strict_hom_search(
    src: Nmatrix, tgt: Nmatrix, injective: bool
) -> Iterator[HomMap]:
    """Backtracking over source values; strictness restricts candidates
    to the matching designation class up front.  Source values are
    ordered by descending table-constraint degree."""
    if src.signature != tgt.signature:
        return
    degree = {v: 0 for v in src.carrier}
    for conn, _ in src.signature.connectives:
        for args, out in src.cells(conn):
            for a in args:
                degree[a] += 1
            for y in out:
                degree[y] += 1
    order = sorted(src.carrier, key=lambda v: (-degree[v], src.index(v)))
    tgt_des = [v for v in tgt.carrier if v in tgt.designated]
    tgt_undes = [v for v in tgt.carrier if v not in tgt.designated]

    hmap: dict[str, str] = {}

    def extend(i: int) -> Iterator[HomMap]:
        if i == len(order):
            h = HomMap.of(src, tgt, hmap)
            if is_strict(h):
                yield h
            return
        v = order[i]
        candidates = tgt_des if v in src.designated else tgt_undes
        for c in candidates:
            if injective and c in hmap.values():
                continue
            hmap[v] = c
            if _partial_ok(src, tgt, hmap):
                yield from extend(i + 1)
            del hmap[v]

    yield from extend(0)


def strict_homs(src: Nmatrix, tgt: Nmatrix, injective: bool = False) -> Iterator[HomMap]:
    """Exhaustive stream of all strict homomorphisms."""
    return _strict_hom_search(src, tgt, injective)


def find_strict_hom(
    src: Nmatrix,
    tgt: Nmatrix,
    covering: bool = False,
    injective: bool = False,
) -> Optional[HomMap]:
    """First strict hom satisfying the requested flags, or None.  The
    search is exhaustive, so None means none exists."""
    for h in _strict_hom_search(src, tgt, injective):
        if covering and not is_covering(h):
            continue
        return h
    return None


def _iso_invariant(m: Nmatrix, v: str) -> tuple:
    """Cheap isomorphism invariant of a value: designation class plus
    sorted profiles of cell sizes and membership counts."""
    sizes = []
    member = 0
    for conn, _ in m.signature.connectives:
        for args, out in m.cells(conn):
            if v in args:
                sizes.append((conn, args.count(v), len(out)))
            if v in out:
                member += 1
    return (v in m.designated, member, tuple(sorted(sizes)))


def find_isomorphism(a: Nmatrix, b: Nmatrix) -> Optional[HomMap]:
    """A bijection with cellwise table equality h[cell_a(args)] =
    cell_b(h(args)) and exact designation correspondence, or None."""
    if a.signature != b.signature or len(a.carrier) != len(b.carrier):
        return None
    if len(a.designated) != len(b.designated):
        return None
    inv_a = {v: _iso_invariant(a, v) for v in a.carrier}
    inv_b = {v: _iso_invariant(b, v) for v in b.carrier}
    if sorted(inv_a.values()) != sorted(inv_b.values()):
        return None

    hmap: dict[str, str] = {}

    def cells_ok(full: bool) -> bool:
        # h is injective, so once every value is mapped, size equality
        # plus inclusion forces cellwise set equality.
        for conn, _ in a.signature.connectives:
            for args, out in a.cells(conn):
                if any(x not in hmap for x in args):
                    continue
                bcell = b.cell(conn, *(hmap[x] for x in args))
                if len(out) != len(bcell):
                    return False
                mapped = {hmap[y] for y in out if y in hmap}
                if not mapped <= bcell:
                    return False
                if full and mapped != bcell:
                    return False
        return True

    order = sorted(a.carrier, key=lambda v: a.index(v))

    def extend(i: int) -> Optional[HomMap]:
        if i == len(order):
            if cells_ok(full=True):
                return HomMap.of(a, b, hmap)
            return None
        v = order[i]
        for c in b.carrier:
            if c in hmap.values() or inv_a[v] != inv_b[c]:
                continue
            hmap[v] = c
            if cells_ok(full=False):
                found = extend(i + 1)
                if found is not None:
                    return found
            del hmap[v]
        return None

    return extend(0)
