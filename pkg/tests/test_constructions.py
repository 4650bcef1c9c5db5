import random

import pytest

from nmatrices.core import (
    CapExceeded,
    NmatrixError,
    Sequent,
    builtin_family,
    is_deterministic,
    parse_formula,
    subformula_closure,
)
from nmatrices.constructions import (
    Partition,
    RestrictionError,
    Ultrafilter,
    enumerate_compatible_partitions,
    is_compatible,
    is_subnmatrix,
    product,
    quotient,
    restriction,
    sound_compatible_quotients,
    ultrafilters,
    ultraproduct,
)
from nmatrices.morphisms import find_isomorphism
from nmatrices.semantics import (
    entails,
    entails_class,
    enumerate_assignments,
    realized_patterns,
)

from helpers import (
    ARROW_SIG,
    rand_nmatrix,
    rand_partition,
    rand_sequent,
    refined_d13,
)

U11 = builtin_family("U", 1, 1)
MP11 = builtin_family("MP", 1, 1)
D12 = builtin_family("D", 1, 2)
U22 = builtin_family("U", 2, 2)


def fml(text):
    return parse_formula(text, ARROW_SIG)


ID_AXIOM = Sequent.of([], [fml("->(p,p)")])


class TestPartition:
    def test_canonical_order(self):
        p = Partition.of([{"top0", "top1"}, {"bot0"}], D12.carrier)
        assert p.blocks[0] == frozenset({"bot0"})

    def test_rejects_overlap(self):
        with pytest.raises(NmatrixError):
            Partition.of([{"a", "b"}, {"b"}])

    def test_rejects_non_cover(self):
        with pytest.raises(NmatrixError):
            Partition.of([{"bot0"}], D12.carrier)


class TestQuotient:
    def test_smash_d12_table(self):
        q = quotient(D12, Partition.of([{"bot0"}, {"top0", "top1"}], D12.carrier))
        b, t = "[bot0]", "[top0+top1]"
        assert q.designated == {t}
        assert q.cell("->", b, b) == {t}
        assert q.cell("->", b, t) == {b, t}
        assert q.cell("->", t, b) == {b, t}
        assert q.cell("->", t, t) == {b, t}

    def test_discrete_isomorphic(self):
        q = quotient(MP11, Partition.discrete(MP11.carrier))
        assert find_isomorphism(q, MP11) is not None

    def test_exquo_triple_merge_admits_bottom(self):
        m = refined_d13()
        q = quotient(m, Partition.of([{"bot0"}, {"top0", "top1", "top2"}], m.carrier))
        t = "[top0+top1+top2]"
        assert "[bot0]" in q.cell("->", t, t)

    def test_incompatible_designated_rule(self):
        q = quotient(U11, Partition.of([{"bot0", "top0"}], U11.carrier))
        assert q.designated == {"[bot0+top0]"}


class TestCompatibility:
    def test_examples(self):
        assert is_compatible(
            Partition.of([{"bot0"}, {"top0", "top1"}], D12.carrier), D12
        )
        assert not is_compatible(
            Partition.of([{"bot0", "top0"}], U11.carrier), U11
        )
        assert is_compatible(Partition.discrete(U11.carrier), U11)

    def test_enumeration_counts(self):
        assert len(list(enumerate_compatible_partitions(U11))) == 1
        assert len(list(enumerate_compatible_partitions(D12))) == 2
        assert len(list(enumerate_compatible_partitions(builtin_family("D", 1, 3)))) == 5
        # Bell(2) * Bell(2) = 4
        assert len(list(enumerate_compatible_partitions(U22))) == 4

    def test_all_enumerated_are_compatible(self):
        rng = random.Random(53)
        for _ in range(10):
            m = rand_nmatrix(rng, max_size=4)
            parts = list(enumerate_compatible_partitions(m))
            assert all(is_compatible(p, m) for p in parts)
            assert len({str(p) for p in parts}) == len(parts)

    def test_cap(self):
        with pytest.raises(CapExceeded):
            list(enumerate_compatible_partitions(U22, cap=2))


class TestSoundQuotients:
    def test_exquo(self):
        got = {
            str(p): q for p, q in sound_compatible_quotients(refined_d13(), [ID_AXIOM])
        }
        assert "bot0 | top0 top1 | top2" in got
        assert "bot0 | top0 | top1 top2" in got
        assert "bot0 | top0 top1 top2" not in got

    def test_empty_ruleset_vacuous(self):
        m = refined_d13()
        assert len(sound_compatible_quotients(m, [])) == len(
            list(enumerate_compatible_partitions(m))
        )

    def test_u11_mp_excludes_identity(self):
        got = sound_compatible_quotients(U11, [Sequent.of([fml("p"), fml("->(p,q)")], [fml("q")])])
        assert got == []


class TestRestriction:
    def test_full_carrier(self):
        assert restriction(MP11, MP11.carrier) == MP11

    def test_u22_not_closed(self):
        with pytest.raises(RestrictionError):
            restriction(U22, {"bot0", "top0"})

    def test_mp11_bottom_not_closed(self):
        with pytest.raises(RestrictionError, match="->"):
            restriction(MP11, {"bot0"})

    def test_closed_subset(self):
        from helpers import ex_m1, ex_m3

        # In the three-valued negation matrices {bot0, top0} is closed.
        sub = restriction(ex_m1(), {"bot0", "top0"})
        assert set(sub.carrier) == {"bot0", "top0"}
        assert is_subnmatrix(sub, ex_m1())


class TestSubnmatrix:
    def test_family_inclusions(self):
        assert is_subnmatrix(U11, U22)
        assert is_subnmatrix(MP11, U11)
        assert not is_subnmatrix(U11, MP11)

    def test_refinement_entailment_monotone(self):
        # Assignments of a subNmatrix are assignments of the larger one.
        rng = random.Random(59)
        checked = 0
        while checked < 20:
            big = rand_nmatrix(rng, max_size=4)
            small = _random_refinement(rng, big)
            s = rand_sequent(rng, big.signature)
            if len(subformula_closure(s.all_formulas())) > 7:
                continue
            if entails(big, s).holds:
                assert entails(small, s).holds
            checked += 1


def _random_refinement(rng, m):
    from nmatrices.core import Nmatrix

    cells = {}
    for conn, _ in m.signature.connectives:
        table = {}
        for args, out in m.cells(conn):
            keep = {v for v in out if rng.random() < 0.7}
            table[args] = keep or {sorted(out)[0]}
        cells[conn] = table
    return Nmatrix.from_cells(m.signature, m.carrier, m.designated, cells)


class TestProduct:
    def test_unary(self):
        assert find_isomorphism(product([MP11]), MP11) is not None

    def test_u11_squared(self):
        pr = product([U11, U11])
        assert len(pr.carrier) == 4
        assert pr.designated == {"top0*top0"}
        assert all(len(out) == 4 for _, out in pr.cells("->"))

    def test_deterministic_closed(self):
        rng = random.Random(61)
        for _ in range(10):
            a = rand_nmatrix(rng, max_size=3, deterministic=True)
            b = rand_nmatrix(rng, sig=a.signature, max_size=3, deterministic=True)
            assert is_deterministic(product([a, b]))

    def test_cap(self):
        with pytest.raises(CapExceeded):
            product([U22, U22, U22, U22, U22, U22], cap=1000)

    def test_valuation_decomposition(self):
        # Assignments on the product correspond exactly to tuples of
        # factor assignments.
        rng = random.Random(67)
        checked = 0
        while checked < 10:
            a = rand_nmatrix(rng, max_size=3)
            b = rand_nmatrix(rng, sig=a.signature, max_size=3)
            theta = subformula_closure(rand_sequent(rng, a.signature).all_formulas())
            if not theta or len(theta) > 5:
                continue
            pr = product([a, b])
            count_prod = sum(1 for _ in enumerate_assignments(pr, theta))
            count_a = sum(1 for _ in enumerate_assignments(a, theta))
            count_b = sum(1 for _ in enumerate_assignments(b, theta))
            assert count_prod == count_a * count_b
            checked += 1

    def test_single_conclusion_lemma(self):
        # Closing a class under products leaves its single-conclusion
        # entailment unchanged: a product countermodel projects onto a
        # factor countermodel.  (Entailment in the product alone can be
        # strictly larger when some factor cannot designate the
        # premises, so only the class-level equality is a theorem.)
        rng = random.Random(71)
        checked = 0
        while checked < 25:
            a = rand_nmatrix(rng, max_size=3)
            b = rand_nmatrix(rng, sig=a.signature, max_size=3)
            s = rand_sequent(rng, a.signature, single_conclusion=True)
            if len(subformula_closure(s.all_formulas())) > 6:
                continue
            pr = product([a, b])
            class_verdict = entails_class([a, b], s).holds
            assert class_verdict == entails_class([a, b, pr], s).holds
            if class_verdict:
                assert entails(pr, s).holds
            checked += 1

    def test_multiple_conclusion_companion_via_chosen_products(self):
        # When each conclusion has its own refuting factor, the product
        # of those chosen factors refutes the whole sequent.
        rng = random.Random(72)
        checked = 0
        while checked < 15:
            ms = [rand_nmatrix(rng, max_size=3)]
            ms.append(rand_nmatrix(rng, sig=ms[0].signature, max_size=3))
            s = rand_sequent(rng, ms[0].signature)
            if not s.conclusions or len(subformula_closure(s.all_formulas())) > 5:
                continue
            chosen = []
            for phi in s.conclusions:
                single = Sequent.of(s.premises, [phi])
                refuter = next(
                    (m for m in ms if not entails(m, single).holds), None
                )
                if refuter is None:
                    break
                chosen.append(refuter)
            else:
                assert not entails(product(chosen), s).holds
                checked += 1
                continue
            checked += 1


class TestUltrafilters:
    def test_counts(self):
        assert len(ultrafilters(1)) == 1
        assert len(ultrafilters(3)) == 3

    def test_explicit_family_normalizes(self):
        fam = [{1}, {0, 1}]
        u = Ultrafilter.from_family(2, fam)
        assert u.index == 1

    def test_invalid_families(self):
        with pytest.raises(NmatrixError):
            Ultrafilter.from_family(2, [set(), {0, 1}])
        with pytest.raises(NmatrixError):
            Ultrafilter.from_family(2, [{0, 1}])  # misses {0} vs {1} decision


class TestUltraproduct:
    def test_principal_collapse(self):
        ms = [U11, MP11, D12]
        up = ultraproduct(ms, Ultrafilter.principal(3, 1))
        assert find_isomorphism(up, MP11) is not None

    def test_singleton(self):
        up = ultraproduct([D12], Ultrafilter.principal(1, 0))
        assert find_isomorphism(up, D12) is not None

    def test_preserves_determinism(self):
        rng = random.Random(73)
        for _ in range(10):
            a = rand_nmatrix(rng, max_size=3, deterministic=True)
            b = rand_nmatrix(rng, sig=a.signature, max_size=3, deterministic=True)
            i = rng.randrange(2)
            assert is_deterministic(ultraproduct([a, b], Ultrafilter.principal(2, i)))

    def test_empty_designated_factor(self):
        # A factor with no designated values must not disturb the
        # designated set selected by the ultrafilter coordinate.
        from nmatrices.core import Nmatrix

        nodes = Nmatrix.from_cells(
            ARROW_SIG,
            ("a",),
            (),
            {"->": {("a", "a"): {"a"}}},
        )
        up = ultraproduct([nodes, U11], Ultrafilter.principal(2, 1))
        assert find_isomorphism(up, U11) is not None

    def test_unique_assembled_assignment(self):
        # Through a principal ultrafilter, factor assignments assemble
        # into exactly one class-valued assignment.
        rng = random.Random(79)
        checked = 0
        while checked < 5:
            a = rand_nmatrix(rng, max_size=2)
            b = rand_nmatrix(rng, sig=a.signature, max_size=2)
            theta = subformula_closure(rand_sequent(rng, a.signature).all_formulas())
            if not theta or len(theta) > 4:
                continue
            up = ultraproduct([a, b], Ultrafilter.principal(2, 0))
            count_up = sum(1 for _ in enumerate_assignments(up, theta))
            count_a = sum(1 for _ in enumerate_assignments(a, theta))
            assert count_up == count_a
            checked += 1


class TestQuotientPatternMonotonicity:
    def test_compatible_quotient_grows_patterns(self):
        rng = random.Random(83)
        checked = 0
        while checked < 20:
            m = rand_nmatrix(rng, max_size=4)
            p = rand_partition(rng, m, compatible=True)
            theta = subformula_closure(rand_sequent(rng, m.signature).all_formulas())
            if len(theta) > 6:
                continue
            q = quotient(m, p)
            assert (
                realized_patterns(m, theta).patterns
                <= realized_patterns(q, theta).patterns
            )
            checked += 1
