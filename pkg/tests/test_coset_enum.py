"""Todd-Coxeter enumeration: small-group oracle corpus, table invariants,
overflow contract, relator recovery."""

import pytest

from moebius_arith.congruence import ResidueMatrix, subgroup_closure
from moebius_arith.coset_enum import (
    EnumerationLimits,
    find_relator,
    todd_coxeter,
    word_stabilizes_one,
)
from moebius_arith.exact import (
    GroupWord,
    UniModularMatrix,
    evaluate_word,
    parse_word,
)
from moebius_arith.modular_words import decompose_st
from moebius_arith.presentation import Presentation, _schreier_pairs, build_presentation

IDENT = UniModularMatrix.identity()


def perm_mul(p, q):
    return tuple(q[i] for i in p)


def perm_pow(p, k):
    n = len(p)
    out = tuple(range(n))
    base = p if k >= 0 else tuple(sorted(range(n), key=lambda i: p[i]))
    for _ in range(abs(k)):
        out = perm_mul(out, base)
    return out


def perm_closure(gens):
    n = len(gens[0])
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = perm_mul(p, g)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return seen


def perm_of_word(w: GroupWord, asg):
    n = len(next(iter(asg.values())))
    out = tuple(range(n))
    for sym, exp in w.syllables:
        out = perm_mul(out, perm_pow(asg[sym], exp))
    return out


def cyc(n, *cycles):
    p = list(range(n))
    for c in cycles:
        for i in range(len(c)):
            p[c[i]] = c[(i + 1) % len(c)]
    return tuple(p)


def fake_presentation(gens, relator_strs):
    """Presentation without a matrix assignment (enumeration only)."""
    return Presentation(
        generators=tuple(gens),
        relators=tuple(parse_word(r) for r in relator_strs),
        assignment={g: IDENT for g in gens},
    )


# (name, generators, relators, subgroup words, permutation realization)
CORPUS = [
    ("C4", ["g"], ["g^4"], [], {"g": cyc(4, (0, 1, 2, 3))}),
    ("C4/C2", ["g"], ["g^4"], ["g^2"], {"g": cyc(4, (0, 1, 2, 3))}),
    ("C7", ["g"], ["g^7"], [], {"g": cyc(7, (0, 1, 2, 3, 4, 5, 6))}),
    ("C12/C4", ["g"], ["g^12"], ["g^3"],
     {"g": cyc(12, tuple(range(12)))}),
    ("C2xC2", ["a", "b"], ["a^2", "b^2", "a b a^-1 b^-1"], [],
     {"a": cyc(4, (0, 1), (2, 3)), "b": cyc(4, (0, 2), (1, 3))}),
    ("S3", ["a", "b"], ["a^3", "b^2", "a b a b"], [],
     {"a": cyc(3, (0, 1, 2)), "b": cyc(3, (0, 1))}),
    ("S3/C2", ["a", "b"], ["a^3", "b^2", "a b a b"], ["b"],
     {"a": cyc(3, (0, 1, 2)), "b": cyc(3, (0, 1))}),
    ("D4", ["r", "f"], ["r^4", "f^2", "r f r f"], [],
     {"r": cyc(4, (0, 1, 2, 3)), "f": cyc(4, (1, 3))}),
    ("D4/<f>", ["r", "f"], ["r^4", "f^2", "r f r f"], ["f"],
     {"r": cyc(4, (0, 1, 2, 3)), "f": cyc(4, (1, 3))}),
    ("D6", ["r", "f"], ["r^6", "f^2", "r f r f"], [],
     {"r": cyc(6, tuple(range(6))), "f": cyc(6, (1, 5), (2, 4))}),
    ("A4/C3", ["a", "b"], ["a^2", "b^3", "a b a b a b"], ["b"],
     {"a": cyc(4, (0, 1), (2, 3)), "b": cyc(4, (1, 2, 3))}),
    ("S4", ["a", "b"], ["a^2", "b^3", "(a b)"*0 + "a b a b a b a b"], [],
     {"a": cyc(4, (0, 1)), "b": cyc(4, (1, 2, 3))}),
    ("Q8", ["a", "b"], ["a^4", "a^2 b^-2", "b^-1 a b a"], [],
     None),  # matrix realization below
    ("A5/C5", ["a", "b"], ["a^2", "b^3", "a b a b a b a b a b"],
     ["a b^-1 a b^-1"],
     {"a": cyc(5, (0, 1), (2, 3)), "b": cyc(5, (1, 2, 4))}),
]


def residue_closure_order(gens3):
    img = subgroup_closure(gens3, gens3[0].n, cap=10_000)
    return img.order


def oracle_index(entry):
    name, gens, rels, subs, realization = entry
    if realization is None:   # Q8 inside SL(2, 3)
        i = ResidueMatrix(3, 0, 2, 1, 0)
        j = ResidueMatrix(3, 1, 1, 1, 2)
        asg = {"a": i, "b": j}
        # the realization must satisfy the relators
        for r in rels:
            m = ResidueMatrix.identity(3)
            for sym, exp in parse_word(r).syllables:
                g = asg[sym]
                step = g if exp > 0 else ResidueMatrix(3, g.d, (-g.b) % 3,
                                                       (-g.c) % 3, g.a)
                for _ in range(abs(exp)):
                    m = m * step
            assert m == ResidueMatrix.identity(3), (name, r)
        order = residue_closure_order(list(asg.values()))
        assert order == 8
        sub_order = 1
        return order // sub_order
    asg = realization
    for r in rels:
        assert perm_of_word(parse_word(r), asg) == \
            tuple(range(len(next(iter(asg.values()))))), (name, r)
    order = len(perm_closure(list(asg.values())))
    if not subs:
        return order
    sub_perms = [perm_of_word(parse_word(s), asg) for s in subs]
    sub_order = len(perm_closure(sub_perms))
    return order // sub_order


class TestOracleCorpus:
    @pytest.mark.parametrize("entry", CORPUS, ids=[e[0] for e in CORPUS])
    def test_index_matches_oracle_both_strategies(self, entry):
        name, gens, rels, subs, _ = entry
        pres = fake_presentation(gens, rels)
        sub_words = [parse_word(s) for s in subs]
        expm = oracle_index(entry)
        for strategy in ("hlt", "felsch"):
            out = todd_coxeter(pres, sub_words,
                               EnumerationLimits(strategy=strategy))
            assert out.completed, (name, strategy)
            assert out.index == expm, (name, strategy)

    def test_sl2_quotient_presentations(self):
        # adding t^p = 1 to the s,t presentation of SL(2,Z) gives SL(2,Z_p)
        from moebius_arith.congruence import sl2_order
        for p in (3, 5):
            pres = fake_presentation(
                ["s", "t"], ["s^4", "s t s t s t s^-2", f"t^{p}"])
            for strategy in ("hlt", "felsch"):
                out = todd_coxeter(pres, [], EnumerationLimits(strategy=strategy))
                assert out.index == sl2_order(p)


class TestGamma0Indices:
    @pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
    def test_index_p_plus_one(self, p):
        pres = fake_presentation(["s", "t"], ["s^4", "s t s t s t s^-2"])
        subs = [decompose_st(mat) for _, mat in _schreier_pairs(p)]
        out = todd_coxeter(pres, subs, EnumerationLimits())
        assert out.completed and out.index == p + 1


class TestTableInvariants:
    def _table(self):
        pres = fake_presentation(["r", "f"], ["r^6", "f^2", "r f r f"])
        out = todd_coxeter(pres, [parse_word("f")], EnumerationLimits())
        return pres, out.table

    def test_columns_are_permutations(self):
        _, table = self._table()
        for sym in table.generators:
            perm = table.generator_permutation(sym)
            assert sorted(perm) == list(range(table.n))

    def test_relators_close_everywhere(self):
        pres, table = self._table()
        for rel in pres.relators:
            for i in range(table.n):
                assert table.trace(i, rel) == i

    def test_word_stabilizes_one(self):
        _, table = self._table()
        assert word_stabilizes_one(table, GroupWord())
        assert word_stabilizes_one(table, parse_word("f"))
        assert word_stabilizes_one(table, parse_word("r^6 f"))
        assert not word_stabilizes_one(table, parse_word("r"))

    def test_trace_rejects_unknown_generator(self):
        _, table = self._table()
        with pytest.raises(ValueError):
            table.trace(0, parse_word("z"))

    def test_dump_format(self):
        _, table = self._table()
        text = table.dump_text()
        lines = text.strip().splitlines()
        assert len(lines) == table.n
        assert all(len(l.split("\t")) == table.width for l in lines)

    def test_progress_hook(self):
        pres = fake_presentation(["s", "t"], ["s^4", "s t s t s t s^-2",
                                              "t^5"])
        calls = []
        todd_coxeter(pres, [], EnumerationLimits(),
                     progress=lambda d, l: calls.append((d, l)),
                     progress_every=10)
        assert calls and all(d % 10 == 0 for d, _ in calls)


class TestOverflow:
    def test_free_group_overflows(self):
        pres = fake_presentation(["a", "b"], [])
        out = todd_coxeter(pres, [parse_word("a")],
                           EnumerationLimits(max_cosets=500))
        assert not out.completed
        assert out.reason == "max_cosets"
        assert out.peak_cosets >= 500
        assert out.table is None and out.index is None

    def test_time_limit(self):
        pres = fake_presentation(["a", "b"], [])
        out = todd_coxeter(pres, [],
                           EnumerationLimits(max_cosets=50_000_000,
                                             time_limit_s=0.2))
        assert not out.completed
        assert out.reason == "time_limit"

    def test_limits_validation(self):
        with pytest.raises(ValueError):
            EnumerationLimits(max_cosets=0)
        with pytest.raises(ValueError):
            EnumerationLimits(strategy="magic")

    def test_malformed_subgroup_word(self):
        pres = fake_presentation(["a"], ["a^2"])
        with pytest.raises(ValueError):
            todd_coxeter(pres, [parse_word("z^2")], EnumerationLimits())


class TestStrategyEquivalence:
    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_gamma0(self, p):
        pres = fake_presentation(["s", "t"], ["s^4", "s t s t s t s^-2"])
        subs = [decompose_st(mat) for _, mat in _schreier_pairs(p)]
        hlt = todd_coxeter(pres, subs, EnumerationLimits(strategy="hlt"))
        fel = todd_coxeter(pres, subs, EnumerationLimits(strategy="felsch"))
        assert hlt.index == fel.index == p + 1

    def test_moebius_small(self):
        from moebius_arith.certifier import MoebiusSpec, express_generators
        spec = MoebiusSpec(3, 2)
        pres = build_presentation(2)
        wa, wb = express_generators(spec, pres)
        hlt = todd_coxeter(pres, [wa, wb], EnumerationLimits(strategy="hlt"))
        fel = todd_coxeter(pres, [wa, wb], EnumerationLimits(strategy="felsch"))
        assert hlt.index == fel.index == 72


class TestFindRelator:
    def _setup(self, a, b):
        from moebius_arith.certifier import MoebiusSpec, express_generators
        spec = MoebiusSpec(a, b)
        pres = build_presentation(b)
        wa, wb = express_generators(spec, pres)
        out = todd_coxeter(pres, [wa, wb], EnumerationLimits())
        return pres, wa, wb, out.table

    def test_trivial_bound_finds_nothing(self):
        pres, wa, wb, table = self._setup(1, 2)
        assert find_relator(pres, wa, wb, table, bound=1) is None

    def test_one_half(self):
        pres, wa, wb, table = self._setup(1, 2)
        rel = find_relator(pres, wa, wb, table, bound=300)
        assert rel is not None and not rel.is_empty()
        a, b = UniModularMatrix.identity(), None
        from moebius_arith.exact import make_moebius_generators
        ma, mb = make_moebius_generators(1, 2)
        assert evaluate_word(rel, {"A": ma, "B": mb}) == IDENT
        # Newman form: alternating with all exponents nonzero
        syms = [s for s, _ in rel.syllables]
        assert all(syms[i] != syms[i + 1] for i in range(len(syms) - 1))
        assert rel.weight <= 300

    def test_known_identity_validates(self):
        # (A^2 B^-2 A^2)^4 evaluates to a fourth power of an order-4 element
        from moebius_arith.exact import make_moebius_generators
        ma, mb = make_moebius_generators(1, 2)
        w = parse_word("A^2 B^-2 A^2") ** 4
        assert evaluate_word(w, {"A": ma, "B": mb}) == IDENT

    def test_four_elevenths(self):
        pres, wa, wb, table = self._setup(4, 11)
        rel = find_relator(pres, wa, wb, table, bound=300)
        assert rel is not None
        from moebius_arith.exact import make_moebius_generators
        ma, mb = make_moebius_generators(4, 11)
        assert evaluate_word(rel, {"A": ma, "B": mb}) == IDENT
        assert 0 < rel.weight <= 300

    def test_requires_complete_table(self):
        pres, wa, wb, table = self._setup(1, 2)
        table.status = "partial"
        with pytest.raises(ValueError):
            find_relator(pres, wa, wb, table)
        with pytest.raises(ValueError):
            word_stabilizes_one(table, GroupWord())
