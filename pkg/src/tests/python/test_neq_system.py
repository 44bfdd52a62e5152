"""
Pytest test suite for neq_system.py

Tests core functionality including:
- Checking skeletons with explicit subtyping proofs
- Elaboration of solved skeletons and flattening back
- The size measure
- The head-form transformation and its size bound

Run with: pytest test_neq_system.py -v
"""

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

# Add parent directory to path to import the module
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "bin"))

from core_syntax import Abs, Arrow, Forall, TVar, TypeEnv, Var, env_equal, term_alpha_eq, type_eq
from corpus import corpus, decorated_corpus, polymorphic_corpus
from fs_errors import BadSubProof, DomainMismatch, NotSolved
from neq_system import (
    EnvSub,
    NAbs,
    NApp,
    NEVar,
    NForall,
    NSub,
    NVar,
    NWeak,
    check_neq,
    envs_alpha_equal,
    from_neq,
    ftv_neq,
    rename_term_var_neq,
    retype_var,
    subst_tvar_neq,
    subtype_chain,
    sz,
    term_vars_neq,
    to_neq,
    transform_T,
)
from solvedness import solved
from strategies import f_types, neq_skeletons
from subtyping_proofs import DummyElim, DummyIn, FunCong, Inst, QuantComm, check_chain
from surface import parse_skeleton, parse_type
from typing_engine import check_skeleton

DEMO_DATA = Path(__file__).parent.parent.parent.parent / "demo" / "data"

a, b = TVar("a"), TVar("b")


def same_judgement(n1, n2) -> bool:
    """Judgements agree on term, environment and type."""
    j1, j2 = check_neq(n1), check_neq(n2)
    return (
        term_alpha_eq(j1.term, j2.term)
        and env_equal(j1.env, j2.env)
        and type_eq(j1.rtype, j2.rtype)
    )


# ============================================================================
# Fixtures
# ============================================================================


@pytest.fixture
def poly_identity():
    """∀a. λy.y instantiated at b with an explicit proof."""
    tau = parse_type("all a. (a -> a)")
    body = NForall("a", NAbs("y", NVar("y", TypeEnv((("y", a),)))))
    return NSub(body, Inst(tau, b))


@pytest.fixture
def solved_skeletons():
    """Every solved skeleton of the reduction corpus, plain and decorated."""
    return corpus() + list(polymorphic_corpus().values()) + decorated_corpus()


# ============================================================================
# Test check_neq()
# ============================================================================


class TestCheckNeq:
    """Test suite for check_neq() function."""

    def test_instantiation(self, poly_identity):
        """Test a subtyping node carrying an instantiation."""
        j = check_neq(poly_identity)
        assert j.term == Abs("y", Var("y"))
        assert j.rtype == Arrow(b, b)

    def test_types_compared_strictly(self):
        """Test that equal but not α-equivalent types do not meet."""
        f = NVar("f", TypeEnv((("f", Arrow(a, b)), ("y", Forall("c", a)))))
        y = NVar("y", TypeEnv((("f", Arrow(a, b)), ("y", Forall("c", a)))))
        with pytest.raises(DomainMismatch):
            check_neq(NApp(f, y))
        fixed = NApp(f, NSub(y, DummyElim(a, "c")))
        assert check_neq(fixed).rtype == b

    def test_proof_source_must_match(self):
        """Test a proof that does not start at the skeleton type."""
        with pytest.raises(BadSubProof):
            check_neq(NSub(NVar("x", TypeEnv((("x", a),))), Inst(parse_type("all c. c"), b)))

    def test_env_sub(self):
        """Test rewriting an environment entry along an equality proof."""
        q = EnvSub(NVar("x", TypeEnv((("x", Forall("c", a)),))), "x", DummyIn(a, "c"))
        j = check_neq(q)
        assert j.env == TypeEnv((("x", a),))
        assert j.rtype == Forall("c", a)

    def test_env_sub_needs_equality(self):
        """Test that an instantiation cannot rewrite the environment."""
        q = EnvSub(NVar("x", TypeEnv((("x", b),))), "x", Inst(parse_type("all c. c"), b))
        with pytest.raises(BadSubProof):
            check_neq(q)

    def test_envs_alpha_equal(self):
        """Test strict environment comparison."""
        e1 = TypeEnv((("x", parse_type("all a. a")), ("y", b)))
        e2 = TypeEnv((("y", b), ("x", parse_type("all c. c"))))
        assert envs_alpha_equal(e1, e2)
        assert not envs_alpha_equal(e1, TypeEnv((("x", parse_type("all a. all d. a")), ("y", b))))


# ============================================================================
# Test to_neq() and from_neq()
# ============================================================================


class TestElaboration:
    """Test suite for elaboration into explicit proofs and back."""

    def test_self_application(self):
        """Test elaborating the self-application skeleton."""
        q = parse_skeleton((DEMO_DATA / "self_app.fs").read_text(encoding="utf-8"))
        n = to_neq(q)
        assert isinstance(n, NAbs)
        assert isinstance(n.body.fun, NSub)
        assert isinstance(n.body.fun.proof, Inst)
        back = check_skeleton(from_neq(n))
        assert type_eq(back.rtype, check_skeleton(q).rtype)
        assert solved(back.constraint)

    def test_unsolved_rejected(self):
        """Test that an unsolved skeleton cannot be elaborated."""
        with pytest.raises(NotSolved):
            to_neq(parse_skeleton("x<x: a> |> b"))

    def test_subtype_chain(self):
        """Test the proof chain for an instantiation up to reordering."""
        source = parse_type("all b. all a. (a -> b)")
        target = parse_type("all b. (c -> b)")
        end = check_chain(subtype_chain(source, target), source)
        assert type_eq(end, target)

    def test_subtype_chain_unsolved(self):
        """Test an atom that does not hold."""
        with pytest.raises(NotSolved):
            subtype_chain(a, b)

    def test_retype_var(self):
        """Test retyping a free variable throughout a skeleton."""
        q = retype_var(parse_skeleton(r"(\x. y<x: a, y: b>) + {z: a}"), "y", a)
        assert env_equal(check_skeleton(q).env, TypeEnv((("y", a), ("z", a))))

    def test_from_neq_env_sub(self):
        """Test that an environment rewrite becomes a retyped environment."""
        q = EnvSub(NVar("x", TypeEnv((("x", Forall("c", a)),))), "x", DummyIn(a, "c"))
        assert from_neq(q) == parse_skeleton("x<x: a>")

    def test_round_trip_on_corpus(self, solved_skeletons):
        """Test that elaboration keeps the judgement and solvedness on the corpus."""
        for q in solved_skeletons:
            n = to_neq(q)
            j_n = check_neq(n)
            j_q = check_skeleton(q)
            assert term_alpha_eq(j_n.term, j_q.term)
            assert env_equal(j_n.env, j_q.env)
            assert type_eq(j_n.rtype, j_q.rtype)
            back = check_skeleton(from_neq(n))
            assert env_equal(back.env, j_q.env)
            assert type_eq(back.rtype, j_q.rtype)
            assert solved(back.constraint)


# ============================================================================
# Test sz() and the helpers
# ============================================================================


class TestSize:
    """Test suite for the size measure."""

    def test_base_cases(self, poly_identity):
        """Test sizes of abstractions, variables and applications."""
        x = NVar("x", TypeEnv((("x", a),)))
        assert sz(NAbs("x", x)) == 1
        assert sz(x) == 2
        assert sz(poly_identity) == 3

    def test_dummy_introduction_counts_twice(self):
        """Test that introducing a dummy costs an extra unit."""
        x = NAbs("x", NVar("x", TypeEnv((("x", a),))))
        assert sz(NSub(x, DummyIn(Arrow(a, a), "c"))) == 3

    def test_evar_node(self):
        """Test that E-variable nodes add one."""
        x = NVar("x", TypeEnv((("x", a),)))
        assert sz(NEVar("s", frozenset({"a"}), x)) == 3

    @given(neq_skeletons())
    @settings(deadline=None, suppress_health_check=[HealthCheck.too_slow])
    def test_one_iff_abstraction(self, n):
        """Test sz ≥ 1, with equality exactly on abstractions."""
        assert sz(n) >= 1
        assert (sz(n) == 1) == isinstance(n, NAbs)

    @given(neq_skeletons(), f_types(2))
    @settings(deadline=None, suppress_health_check=[HealthCheck.too_slow])
    def test_invariant_under_type_substitution(self, n, w):
        """Test that substituting a type variable keeps the size."""
        assert sz(subst_tvar_neq(n, "a", w)) == sz(n)

    def test_free_type_variables(self, poly_identity):
        """Test free type variables of skeletons and proofs."""
        assert ftv_neq(poly_identity) == {"b"}
        assert ftv_neq(QuantComm("a", "b", Arrow(a, TVar("c")))) == {"c"}

    def test_rename_term_var(self):
        """Test renaming a term variable through environment rewrites."""
        q = EnvSub(NVar("x", TypeEnv((("x", Forall("c", a)),))), "x", DummyIn(a, "c"))
        renamed = rename_term_var_neq(q, "x", "z")
        assert check_neq(renamed).env == TypeEnv((("z", a),))
        assert term_vars_neq(renamed) == {"z"}


# ============================================================================
# Test transform_T()
# ============================================================================


class TestTransform:
    """Test suite for the head-form transformation."""

    def test_instantiation_reaches_abstraction(self, poly_identity):
        """Test that an instantiated polymorphic abstraction becomes an abstraction."""
        t = transform_T(poly_identity)
        assert isinstance(t, NAbs)
        assert check_neq(t).rtype == Arrow(b, b)

    def test_dummy_becomes_quantifier(self):
        """Test that a dummy introduction becomes a quantifier node."""
        x = NAbs("x", NVar("x", TypeEnv((("x", a),))))
        assert transform_T(NSub(x, DummyIn(Arrow(a, a), "c"))) == NForall("c", x)

    def test_quantifier_swap(self):
        """Test that swapping quantifiers swaps the nodes."""
        core = NAbs("x", NVar("x", TypeEnv((("x", Arrow(a, b)),))))
        q = NSub(NForall("a", NForall("b", core)), QuantComm("a", "b", Arrow(Arrow(a, b), Arrow(a, b))))
        assert transform_T(q) == NForall("b", NForall("a", core))

    def test_arrow_congruence_enters_abstraction(self):
        """Test that an arrow proof moves into the abstraction body."""
        x = NAbs("x", NVar("x", TypeEnv((("x", a),))))
        q = NSub(x, FunCong(DummyElim(a, "c"), DummyIn(a, "c")))
        t = transform_T(q)
        assert isinstance(t, NAbs)
        assert same_judgement(t, q)

    def test_weakening_pushed_under_abstraction(self):
        """Test that weakening moves under an abstraction, renaming a clash."""
        x = NAbs("x", NVar("x", TypeEnv((("x", a),))))
        t = transform_T(NWeak(x, TypeEnv((("x", b),))))
        assert isinstance(t, NAbs)
        assert t.binder != "x"
        assert env_equal(check_neq(t).env, TypeEnv((("x", b),)))

    def test_corpus_size_bound(self, solved_skeletons):
        """Test the size bound and judgement preservation on the corpus."""
        for q in solved_skeletons:
            n = to_neq(q)
            t = transform_T(n)
            assert sz(t) <= sz(n)
            assert same_judgement(t, n)

    @given(neq_skeletons())
    @settings(
        max_examples=10_000, deadline=None, suppress_health_check=[HealthCheck.too_slow]
    )
    def test_size_bound_generated(self, n):
        """Test the size bound and judgement preservation on generated skeletons."""
        t = transform_T(n)
        assert sz(t) <= sz(n)
        assert same_judgement(t, n)

    @given(neq_skeletons(), st.integers(1, 4))
    @settings(deadline=None, suppress_health_check=[HealthCheck.too_slow])
    def test_repeated_transform(self, n, rounds):
        """Test that repeating the transformation never grows the skeleton."""
        for _ in range(rounds):
            t = transform_T(n)
            assert sz(t) <= sz(n)
            n = t
