"""Bounded comparison of the logics induced by two finite Nmatrices,
distinguishing-sequent extraction, and pair-matrix witness chains."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .core import (
    Formula,
    Nmatrix,
    NmatrixError,
    Sequent,
    formula_key,
    formulas_up_to,
)
from .morphisms import HomMap, find_strict_hom, is_covering, is_strict
from .semantics import entails, realized_patterns, ruleset_sound

__all__ = [
    "ComparisonReport",
    "bounded_leq",
    "distinguishing_sequent",
    "bounded_equivalent",
    "witness_chain",
    "pair_value_name",
    "DEFAULT_NVARS",
    "DEFAULT_MAXDEPTH",
    "EQUIVALENCE_CAVEAT",
]

DEFAULT_NVARS = 2
DEFAULT_MAXDEPTH = 2

EQUIVALENCE_CAVEAT = (
    "equivalent over the bounded universe; this does not decide equality "
    "of the full logics"
)


def bounded_leq(m1: Nmatrix, m2: Nmatrix, theta: Iterable[Formula]) -> bool:
    """Does every sequent over Θ that holds in m1 also hold in m2?

    Equivalent formulation used here: every designation pattern realized
    in m2 over Θ is also realized in m1 (a pattern realized only in m2
    is exactly a countermodel in m2 to a sequent m1 satisfies)."""
    theta = frozenset(theta)
    return realized_patterns(m2, theta).patterns <= realized_patterns(m1, theta).patterns


def distinguishing_sequent(
    m1: Nmatrix, m2: Nmatrix, theta: Iterable[Formula]
) -> Optional[Sequent]:
    """A sequent over Θ holding in m1 and failing in m2, or None when
    every m1-valid sequent over Θ is m2-valid.  Built as ⟨Ω, Θ∖Ω⟩ from a
    pattern Ω realized in m2 but not in m1, then re-verified."""
    theta = frozenset(theta)
    extra = (
        realized_patterns(m2, theta).patterns
        - realized_patterns(m1, theta).patterns
    )
    if not extra:
        return None
    # Prefer the largest pattern: it yields the most premise-rich (and
    # typically most readable) sequent, e.g. "p |- ->(p,p)" rather than
    # the empty-premise variant when both distinguish.
    omega = max(
        extra, key=lambda p: (len(p), sorted(formula_key(f) for f in p))
    )
    s = Sequent.of(omega, theta - omega)
    if not entails(m1, s).holds or entails(m2, s).holds:
        raise NmatrixError(
            "internal error: distinguishing sequent failed re-verification"
        )
    return s


@dataclass(frozen=True)
class ComparisonReport:
    """Two-way bounded comparison over a common formula universe."""

    universe: frozenset[Formula]
    leq_12: bool
    leq_21: bool
    witness_12: Optional[Sequent]  # holds in m1, fails in m2
    witness_21: Optional[Sequent]  # holds in m2, fails in m1
    patterns_1: int
    patterns_2: int

    @property
    def equivalent(self) -> bool:
        return self.leq_12 and self.leq_21


def bounded_equivalent(
    m1: Nmatrix,
    m2: Nmatrix,
    nvars: int = DEFAULT_NVARS,
    maxdepth: int = DEFAULT_MAXDEPTH,
    cap: int | None = None,
) -> ComparisonReport:
    """Compare the two induced logics over all sequents from the bounded
    universe of nvars variables and depth maxdepth."""
    if m1.signature != m2.signature:
        raise NmatrixError("bounded comparison requires a shared signature")
    kwargs = {} if cap is None else {"cap": cap}
    theta = formulas_up_to(m1.signature, nvars, maxdepth, **kwargs)
    leq_12 = bounded_leq(m1, m2, theta)
    leq_21 = bounded_leq(m2, m1, theta)
    return ComparisonReport(
        universe=theta,
        leq_12=leq_12,
        leq_21=leq_21,
        witness_12=None if leq_12 else distinguishing_sequent(m1, m2, theta),
        witness_21=None if leq_21 else distinguishing_sequent(m2, m1, theta),
        patterns_1=len(realized_patterns(m1, theta)),
        patterns_2=len(realized_patterns(m2, theta)),
    )


# ---------------------------------------------------------------------------
# Pair-matrix witness chains
# ---------------------------------------------------------------------------


def pair_value_name(x: str, y: str) -> str:
    return f"{x}.{y}"


def _pair_matrix(m: Nmatrix, mode: str) -> Optional[Nmatrix]:
    """Pair-carrier Nmatrix over m.

    look-behind: values (x, y) with x reachable from y by one unary step;
    a unary cell replaces the history with the current value.
    look-ahead: values (x, y) with y reachable from x; a unary cell
    advances to the promised value and promises a next one.
    Signatures without unary connectives fall back to all pairs; k-ary
    cells collect every admissible pair whose current value is a possible
    output.  Returns None when some cell comes out empty."""
    sig = m.signature
    unaries = [c for c, k in sig.connectives if k == 1]

    def steps(v: str) -> set[str]:
        if not unaries:
            return set(m.carrier)
        out: set[str] = set()
        for c in unaries:
            out |= m.cell(c, v)
        return out

    pairs: list[tuple[str, str]] = []
    for x in m.carrier:
        for y in m.carrier:
            ok = (x in steps(y)) if mode == "look-behind" else (y in steps(x))
            if ok:
                pairs.append((x, y))
    if not pairs:
        return None
    pair_set = set(pairs)
    names = {p: pair_value_name(*p) for p in pairs}
    carrier = tuple(names[p] for p in pairs)
    designated = frozenset(names[p] for p in pairs if p[0] in m.designated)

    cells: dict[str, dict[tuple[str, ...], set[str]]] = {}
    for conn, k in sig.connectives:
        table: dict[tuple[str, ...], set[str]] = {}
        for args in itertools.product(pairs, repeat=k):
            if k == 1:
                (x, y) = args[0]
                if mode == "look-behind":
                    out = {(z, x) for z in m.cell(conn, x)}
                else:
                    out = {(y, w) for w in m.cell(conn, y)}
                out &= pair_set
            else:
                current = m.cell(conn, *(a[0] for a in args))
                out = {p for p in pairs if p[0] in current}
            if not out:
                return None
            table[tuple(names[a] for a in args)] = {names[p] for p in out}
        cells[conn] = table
    return Nmatrix.from_cells(sig, carrier, designated, cells)


def witness_chain(
    m1: Nmatrix,
    m2: Nmatrix,
    rs: Iterable[Sequent],
    pair_mode: str = "look-behind",
) -> Optional[tuple[Nmatrix, HomMap, HomMap]]:
    """Best-effort mediating chain: a pair-carrier Nmatrix built over m2
    with covering strict homs onto m2 (first projection) and onto m1
    (searched exhaustively), with the rule set verified sound for m1.
    Returns (mediator, hom_onto_m2, hom_onto_m1), or None when the
    construction or either check fails."""
    if pair_mode not in ("look-behind", "look-ahead"):
        raise NmatrixError("pair_mode must be 'look-behind' or 'look-ahead'")
    if m1.signature != m2.signature:
        raise NmatrixError("witness_chain requires a shared signature")
    if not ruleset_sound(m1, rs).ok:
        return None
    mediator = _pair_matrix(m2, pair_mode)
    if mediator is None:
        return None
    proj = HomMap.of(
        mediator,
        m2,
        {pair_value_name(x, y): x
         for x in m2.carrier for y in m2.carrier
         if pair_value_name(x, y) in set(mediator.carrier)},
    )
    if not (is_strict(proj) and is_covering(proj)):
        return None
    onto_m1 = find_strict_hom(mediator, m1, covering=True)
    if onto_m1 is None:
        return None
    return mediator, proj, onto_m1
