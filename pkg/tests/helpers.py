"""Shared test helpers: an independent brute-force oracle, seeded random
generators for Nmatrices/formulas/sequents, and fixture matrices used
across the suite.

The oracle enumerates raw value tuples with itertools and checks table
membership through the frozenset cell API, sharing no code with the
bit-vector search path under test.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Iterator, Optional

from nmatrices.core import (
    Formula,
    Nmatrix,
    Sequent,
    Signature,
    builtin_family,
    formula_key,
    formulas_up_to,
    parse_formula,
    subformula_closure,
)

# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def oracle_assignments(
    m: Nmatrix,
    theta: Iterable[Formula],
    must_des: Iterable[Formula] = (),
    must_undes: Iterable[Formula] = (),
) -> Iterator[dict[Formula, str]]:
    order = sorted(theta, key=formula_key)
    must_des, must_undes = list(must_des), list(must_undes)
    for values in itertools.product(m.carrier, repeat=len(order)):
        val = dict(zip(order, values))
        if any(
            f.is_app and val[f] not in m.cell(f.head, *(val[a] for a in f.args))
            for f in order
        ):
            continue
        if any(val[f] not in m.designated for f in must_des):
            continue
        if any(val[f] in m.designated for f in must_undes):
            continue
        yield val


def oracle_entails(m: Nmatrix, s: Sequent) -> bool:
    theta = subformula_closure(s.all_formulas())
    counter = next(
        oracle_assignments(m, theta, s.premises, s.conclusions), None
    )
    return counter is None


def oracle_patterns(m: Nmatrix, theta: Iterable[Formula]) -> frozenset[frozenset[Formula]]:
    theta = frozenset(theta)
    return frozenset(
        frozenset(f for f in theta if val[f] in m.designated)
        for val in oracle_assignments(m, theta)
    )


# ---------------------------------------------------------------------------
# Seeded random generators (acceptance bounds: carrier <= 5, <= 2
# connectives of arity <= 2, universes with nvars <= 2, depth <= 2)
# ---------------------------------------------------------------------------


def rand_signature(rng: random.Random) -> Signature:
    n_conns = rng.randint(1, 2)
    names = ["f", "g"][:n_conns]
    return Signature.of([(name, rng.randint(0, 2)) for name in names])


def rand_nmatrix(
    rng: random.Random,
    sig: Signature | None = None,
    max_size: int = 5,
    deterministic: bool = False,
) -> Nmatrix:
    if sig is None:
        sig = rand_signature(rng)
    size = rng.randint(1, max_size)
    carrier = tuple(f"v{i}" for i in range(size))
    designated = frozenset(v for v in carrier if rng.random() < 0.5)
    cells = {}
    for conn, k in sig.connectives:
        table = {}
        for args in itertools.product(carrier, repeat=k):
            if deterministic:
                out = {rng.choice(carrier)}
            else:
                out = {v for v in carrier if rng.random() < 0.5}
                if not out:
                    out = {rng.choice(carrier)}
            table[args] = out
        cells[conn] = table
    return Nmatrix.from_cells(sig, carrier, designated, cells)


def rand_theta(rng: random.Random, sig: Signature, n_formulas: int = 3) -> frozenset[Formula]:
    pool = sorted(formulas_up_to(sig, 2, 2), key=formula_key)
    picked = rng.sample(pool, min(n_formulas, len(pool)))
    return subformula_closure(picked)


def rand_sequent(
    rng: random.Random, sig: Signature, single_conclusion: bool = False
) -> Sequent:
    pool = sorted(formulas_up_to(sig, 2, 2), key=formula_key)
    n_prem = rng.randint(0, 3)
    n_conc = 1 if single_conclusion else rng.randint(0, 3)
    return Sequent.of(rng.sample(pool, min(n_prem, len(pool))),
                      rng.sample(pool, min(n_conc, len(pool))))


def rand_partition(rng: random.Random, m: Nmatrix, compatible: bool = True):
    from nmatrices.constructions import Partition

    groups: dict[tuple, list[str]] = {}
    if compatible:
        for v in m.carrier:
            key = (v in m.designated, rng.randrange(len(m.carrier)))
            groups.setdefault(key, []).append(v)
    else:
        for v in m.carrier:
            groups.setdefault((rng.randrange(len(m.carrier)),), []).append(v)
    return Partition.of(groups.values(), m.carrier)


# ---------------------------------------------------------------------------
# Fixture matrices
# ---------------------------------------------------------------------------

NEG_SIG = Signature.of({"neg": 1})
ARROW_SIG = Signature.of({"->": 2})


def neg_matrix(cells: dict[str, set[str]], carrier=("bot0", "top0", "top1"),
               designated=("top0", "top1")) -> Nmatrix:
    return Nmatrix.from_cells(
        NEG_SIG, carrier, designated, {"neg": {(k,): v for k, v in cells.items()}}
    )


def ex_m1() -> Nmatrix:
    return neg_matrix(
        {"bot0": {"top0"}, "top0": {"bot0"}, "top1": {"bot0", "top1"}}
    )


def ex_m2() -> Nmatrix:
    return neg_matrix(
        {"bot0": {"top0"}, "top0": {"bot0"}, "top1": {"top0", "top1"}}
    )


def ex_m3() -> Nmatrix:
    return neg_matrix(
        {"bot0": {"top0"}, "top0": {"bot0"}, "top1": {"bot0", "top0", "top1"}}
    )


def ex_m4() -> Nmatrix:
    return neg_matrix(
        {
            "bot0": {"top0"},
            "top0": {"bot0"},
            "top1": {"bot0", "top1"},
            "top2": {"top0", "top1"},
        },
        carrier=("bot0", "top0", "top1", "top2"),
        designated=("top0", "top1", "top2"),
    )


def neg_rules() -> list[Sequent]:
    p = parse_formula("p", NEG_SIG)
    np_ = parse_formula("neg(p)", NEG_SIG)
    nnp = parse_formula("neg(neg(p))", NEG_SIG)
    return [Sequent.of([], [p, np_]), Sequent.of([nnp], [p])]


def refined_d13() -> Nmatrix:
    """D_{1,3} with the four off-diagonal designated-pair cells tightened
    to the designated set."""
    carrier = ("bot0", "top0", "top1", "top2")
    tops = {"top0", "top1", "top2"}
    everything = set(carrier)
    table = {
        (x, y): (tops if x == y else set(everything))
        for x in carrier
        for y in carrier
    }
    for pair in (("top0", "top1"), ("top1", "top0"), ("top1", "top2"), ("top2", "top1")):
        table[pair] = set(tops)
    return Nmatrix.from_cells(ARROW_SIG, carrier, tops, {"->": table})


def smash_hom(n: int, m: int):
    """The designation-collapse map from D_{n,m} onto U_{1,1}."""
    from nmatrices.morphisms import HomMap

    src = builtin_family("D", n, m)
    tgt = builtin_family("U", 1, 1)
    mapping = {v: ("top0" if v in src.designated else "bot0") for v in src.carrier}
    return HomMap.of(src, tgt, mapping)


def arrow_formula(text: str) -> Formula:
    return parse_formula(text, ARROW_SIG)
