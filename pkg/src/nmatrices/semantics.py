"""Entailment engine: constrained assignment enumeration, sequent
entailment, rule soundness, and realized designation patterns."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

import numpy as np

from . import kernels
from .core import (
    CapExceeded,
    Formula,
    Nmatrix,
    NmatrixError,
    Sequent,
    Substitution,
    apply_substitution,
    format_formula,
    formula_key,
    is_subformula_closed,
    subformula_closure,
    variables,
)

__all__ = [
    "Assignment",
    "Constraint",
    "Verdict",
    "RulesetReport",
    "PatternFamily",
    "SubstitutionReport",
    "enumerate_assignments",
    "count_assignments",
    "entails",
    "entails_class",
    "rule_sound",
    "ruleset_sound",
    "realized_patterns",
    "check_rule_under_all_substitutions",
    "PATTERN_UNIVERSE_CAP",
]

# Realized-pattern collection uses a 2**|Θ| occurrence table.
PATTERN_UNIVERSE_CAP = 24


@dataclass(frozen=True)
class Assignment:
    """A table-compatible map from a subformula-closed set into a carrier."""

    domain: frozenset[Formula]
    map: tuple[tuple[Formula, str], ...]

    @classmethod
    def of(cls, mapping: Mapping[Formula, str]) -> "Assignment":
        items = tuple(sorted(mapping.items(), key=lambda kv: formula_key(kv[0])))
        return cls(frozenset(mapping), items)

    def __getitem__(self, f: Formula) -> str:
        for g, v in self.map:
            if g == f:
                return v
        raise KeyError(f)

    def as_dict(self) -> dict[Formula, str]:
        return dict(self.map)

    def designated_part(self, m: Nmatrix) -> frozenset[Formula]:
        return frozenset(f for f, v in self.map if v in m.designated)

    def __str__(self) -> str:
        return ", ".join(f"{format_formula(f)}={v}" for f, v in self.map)


@dataclass(frozen=True)
class Constraint:
    """Side conditions on an enumeration: formulas forced (un)designated
    and formulas pinned to specific values."""

    must_designate: frozenset[Formula] = frozenset()
    must_undesignate: frozenset[Formula] = frozenset()
    pinned: tuple[tuple[Formula, str], ...] = ()

    @classmethod
    def of(
        cls,
        must_designate: Iterable[Formula] = (),
        must_undesignate: Iterable[Formula] = (),
        pinned: Mapping[Formula, str] | None = None,
    ) -> "Constraint":
        items = tuple(sorted((pinned or {}).items(), key=lambda kv: formula_key(kv[0])))
        return cls(frozenset(must_designate), frozenset(must_undesignate), items)

    def formulas(self) -> frozenset[Formula]:
        return (
            self.must_designate
            | self.must_undesignate
            | frozenset(f for f, _ in self.pinned)
        )


@dataclass(frozen=True)
class Verdict:
    """Outcome of an entailment query; the witness (present exactly when
    the query fails) designates every premise and no conclusion."""

    holds: bool
    witness: Optional[Assignment] = None
    failing_index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class RulesetReport:
    """Soundness of a rule set, with the first failing rule if any."""

    ok: bool
    failing_rule: Optional[Sequent] = None
    witness: Optional[Assignment] = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class PatternFamily:
    """The designation subsets of a universe Θ realized by assignments."""

    universe: tuple[Formula, ...]
    patterns: frozenset[frozenset[Formula]]

    def __contains__(self, pattern: Iterable[Formula]) -> bool:
        return frozenset(pattern) in self.patterns

    def __len__(self) -> int:
        return len(self.patterns)


# ---------------------------------------------------------------------------
# Plan compilation
# ---------------------------------------------------------------------------


@dataclass
class _Plan:
    order: list[Formula]
    kind: np.ndarray
    arity: np.ndarray
    argidx: np.ndarray
    tabflat: np.ndarray
    taboff: np.ndarray
    allowed: np.ndarray
    n_values: int


def _compile_plan(m: Nmatrix, theta: Iterable[Formula], c: Constraint) -> _Plan:
    theta = frozenset(theta)
    if not is_subformula_closed(theta):
        raise NmatrixError("enumeration universe is not subformula-closed")
    missing = c.formulas() - theta
    if missing:
        raise NmatrixError(
            "constraint mentions formulas outside the universe: "
            + ", ".join(sorted(map(format_formula, missing)))
        )
    n = len(m.carrier)
    if n > 62:
        raise CapExceeded("carriers above 62 values are not supported")
    order = sorted(theta, key=formula_key)
    pos = {f: i for i, f in enumerate(order)}
    conn_ids = {name: i for i, (name, _) in enumerate(m.signature.connectives)}

    n_f = len(order)
    max_arity = max((k for _, k in m.signature.connectives), default=0)
    kind = np.full(n_f, -1, dtype=np.int64)
    arity = np.zeros(n_f, dtype=np.int64)
    argidx = np.zeros((n_f, max(max_arity, 1)), dtype=np.int64)
    for i, f in enumerate(order):
        if f.is_app:
            kind[i] = conn_ids[f.head]
            arity[i] = len(f.args)
            for j, a in enumerate(f.args):
                argidx[i, j] = pos[a]

    taboff = np.zeros(len(conn_ids), dtype=np.int64)
    chunks = []
    off = 0
    for name, _ in m.signature.connectives:
        flat = m.tables[name].ravel()
        taboff[conn_ids[name]] = off
        chunks.append(flat)
        off += flat.size
    tabflat = (
        np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    ).astype(np.int64)

    full = m.full_mask
    des = m.designated_mask
    allowed = np.full(n_f, full, dtype=np.int64)
    for f in c.must_designate:
        allowed[pos[f]] &= des
    for f in c.must_undesignate:
        allowed[pos[f]] &= full & ~des
    for f, v in c.pinned:
        allowed[pos[f]] &= 1 << m.index(v)
    return _Plan(order, kind, arity, argidx, tabflat, taboff, allowed, n)


def _rows_to_assignments(m: Nmatrix, plan: _Plan, rows: np.ndarray) -> Iterator[Assignment]:
    for row in rows:
        mapping = {f: m.carrier[int(v)] for f, v in zip(plan.order, row)}
        yield Assignment.of(mapping)


def _raw_enumerate(m: Nmatrix, theta, c: Constraint, max_results: int) -> tuple[_Plan, np.ndarray]:
    plan = _compile_plan(m, theta, c)
    if not plan.order:
        # The empty assignment is the unique assignment on the empty
        # universe; it vacuously satisfies every constraint.
        return plan, np.zeros((1, 0), dtype=np.int64)
    rows = kernels.enumerate_assignments_raw(
        plan.kind,
        plan.arity,
        plan.argidx,
        plan.tabflat,
        plan.taboff,
        plan.allowed,
        plan.n_values,
        max_results,
    )
    return plan, rows


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def enumerate_assignments(
    m: Nmatrix, theta: Iterable[Formula], c: Constraint | None = None
) -> Iterator[Assignment]:
    """Yield every assignment on the subformula-closed set ``theta``
    compatible with the tables and the constraint, in canonical order."""
    plan, rows = _raw_enumerate(m, theta, c or Constraint(), -1)
    return _rows_to_assignments(m, plan, rows)


def count_assignments(m: Nmatrix, theta: Iterable[Formula], c: Constraint | None = None) -> int:
    _, rows = _raw_enumerate(m, theta, c or Constraint(), -1)
    return rows.shape[0]


def entails(m: Nmatrix, s: Sequent) -> Verdict:
    """Does every assignment designating all premises designate some
    conclusion?  A failing verdict carries the first counter-assignment."""
    theta = subformula_closure(s.all_formulas())
    c = Constraint.of(must_designate=s.premises, must_undesignate=s.conclusions)
    plan, rows = _raw_enumerate(m, theta, c, 1)
    if rows.shape[0]:
        witness = next(_rows_to_assignments(m, plan, rows))
        return Verdict(False, witness)
    return Verdict(True)


def rule_sound(m: Nmatrix, r: Sequent) -> Verdict:
    """A schematic rule is sound exactly when its sequent of schematic
    variables holds, since variables range freely over values."""
    return entails(m, r)


def ruleset_sound(m: Nmatrix, rs: Iterable[Sequent]) -> RulesetReport:
    for r in sorted(rs, key=str):
        v = rule_sound(m, r)
        if not v.holds:
            return RulesetReport(False, r, v.witness)
    return RulesetReport(True)


def entails_class(ms: list[Nmatrix], s: Sequent) -> Verdict:
    """Entailment in the intersection logic of a nonempty class."""
    if not ms:
        raise NmatrixError("entails_class requires a nonempty class of Nmatrices")
    sig = ms[0].signature
    for m in ms[1:]:
        if m.signature != sig:
            raise NmatrixError("entails_class requires a shared signature")
    for i, m in enumerate(ms):
        v = entails(m, s)
        if not v.holds:
            return Verdict(False, v.witness, failing_index=i)
    return Verdict(True)


def realized_patterns(m: Nmatrix, theta: Iterable[Formula]) -> PatternFamily:
    """The family of sets {φ ∈ Θ : w(φ) designated} over assignments w."""
    theta = frozenset(theta)
    if len(theta) > PATTERN_UNIVERSE_CAP:
        raise CapExceeded(
            f"pattern universe of {len(theta)} formulas exceeds cap of "
            f"{PATTERN_UNIVERSE_CAP}"
        )
    plan = _compile_plan(m, theta, Constraint())
    if not plan.order:
        return PatternFamily((), frozenset({frozenset()}))
    masks = kernels.realized_masks_raw(
        plan.kind,
        plan.arity,
        plan.argidx,
        plan.tabflat,
        plan.taboff,
        plan.allowed,
        plan.n_values,
        m.designated_mask,
    )
    universe = tuple(plan.order)
    patterns = frozenset(
        frozenset(f for i, f in enumerate(universe) if (int(mask) >> i) & 1)
        for mask in masks
    )
    return PatternFamily(universe, patterns)


@dataclass(frozen=True)
class SubstitutionReport:
    """Per-substitution verdicts for a rule, plus the rule's own verdict.

    ``determinedness_gap`` is true when the rule itself fails while every
    variable-substitution instance holds — the rule is invisible to any
    check that only looks at instances over the given variables."""

    rule: Sequent
    rule_verdict: Verdict
    instances: tuple[tuple[Substitution, Verdict], ...]

    @property
    def all_instances_hold(self) -> bool:
        return all(v.holds for _, v in self.instances)

    @property
    def determinedness_gap(self) -> bool:
        return self.all_instances_hold and not self.rule_verdict.holds


def check_rule_under_all_substitutions(
    m: Nmatrix, r: Sequent, nvars: int, cap: int = 10_000
) -> SubstitutionReport:
    """Evaluate the rule and all its instances under substitutions of the
    rule's variables into {p0..p(nvars-1)}."""
    if nvars < 1:
        raise NmatrixError("nvars must be at least 1")
    rule_vars = sorted(set().union(*(variables(f) for f in r.all_formulas())) or set())
    targets = [Formula(f"p{i}") for i in range(nvars)]
    total = len(targets) ** len(rule_vars)
    if total > cap:
        raise CapExceeded(
            f"{total} substitutions exceed the cap of {cap}"
        )
    instances = []
    for combo in itertools.product(targets, repeat=len(rule_vars)):
        sub = Substitution.of(dict(zip(rule_vars, combo)))
        inst = Sequent.of(
            (apply_substitution(f, sub) for f in r.premises),
            (apply_substitution(f, sub) for f in r.conclusions),
        )
        instances.append((sub, entails(m, inst)))
    return SubstitutionReport(r, entails(m, r), tuple(instances))
