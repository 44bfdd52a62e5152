"""
Pytest test suite for typing_engine.py

Tests core functionality including:
- The judgement encoded by each skeleton rule
- Rejection of invalid skeletons, one error class per rule
- Relevance, renaming and strengthening

Run with: pytest test_typing_engine.py -v
"""

import sys
from pathlib import Path

import pytest

# Add parent directory to path to import the module
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "bin"))

from core_syntax import (
    Abs,
    And,
    App,
    Arrow,
    Atomic,
    EGuard,
    EVarApp,
    Exists,
    Forall,
    Omega,
    QVar,
    TVar,
    TypeEnv,
    Var,
    constraint_eq,
    env_equal,
    type_eq,
)
from fs_errors import (
    DomainMismatch,
    EnvironmentMismatch,
    EscapingVariable,
    ForbiddenSetTooSmall,
    MalformedEnv,
    NotAnArrow,
    SupportOverlap,
    UnboundVariable,
)
from surface import parse_constraint, parse_skeleton, parse_type
from typing_engine import (
    check_skeleton,
    constraint_of,
    is_valid,
    relevant,
    rename_term_var,
    rtype,
    strengthen,
    tenv,
    term_of,
)

DEMO_DATA = Path(__file__).parent.parent.parent.parent / "demo" / "data"

a, b = TVar("a"), TVar("b")


# ============================================================================
# Fixtures
# ============================================================================


@pytest.fixture
def self_application():
    """The self-application skeleton from the demo data."""
    return parse_skeleton((DEMO_DATA / "self_app.fs").read_text(encoding="utf-8"))


@pytest.fixture
def identity():
    """A variable skeleton for the identity at type a."""
    return parse_skeleton(r"\x. x<x: a>")


# ============================================================================
# Test check_skeleton()
# ============================================================================


class TestCheckSkeleton:
    """Test suite for check_skeleton() function."""

    def test_variable(self):
        """Test the variable rule."""
        j = check_skeleton(parse_skeleton("x<x: a, y: b>"))
        assert j.term == Var("x")
        assert j.rtype == a
        assert j.constraint == Omega()

    def test_abstraction_removes_binder(self, identity):
        """Test that an abstraction moves its binder into the arrow."""
        j = check_skeleton(identity)
        assert j.term == Abs("x", Var("x"))
        assert len(j.env) == 0
        assert j.rtype == Arrow(a, a)

    def test_unused_binder(self):
        """Test \\x. y<x: a, y: b>, which types as {y: b} ⊢ a -> b."""
        j = check_skeleton(parse_skeleton(r"\x. y<x: a, y: b>"))
        assert env_equal(j.env, TypeEnv((("y", b),)))
        assert j.rtype == Arrow(a, b)

    def test_self_application(self, self_application):
        """Test the self-application skeleton and its single constraint."""
        j = check_skeleton(self_application)
        assert j.term == Abs("x", App(Var("x"), Var("x")))
        assert type_eq(j.rtype, parse_type("(all a. a) -> b"))
        assert constraint_eq(j.constraint, parse_constraint("(all a. a) <= (all a. a) -> b"))

    def test_application_sees_through_equalities(self):
        """Test that the function type only needs to be equal to an arrow."""
        q = parse_skeleton("f<f: all c. (a -> b), y: a> @ y<f: all c. (a -> b), y: a>")
        assert rtype(q) == b

    def test_forall(self):
        """Test quantifier introduction and its existential."""
        j = check_skeleton(parse_skeleton(r"all a. \y. y<y: a>"))
        assert j.rtype == Forall("a", Arrow(a, a))
        assert j.constraint == Exists("a", Omega())

    def test_evar(self):
        """Test E-variable introduction and its guard."""
        j = check_skeleton(parse_skeleton("s^{a} x<x: a>"))
        assert j.rtype == EVarApp("s", frozenset({"a"}), a)
        assert j.constraint == EGuard("s", frozenset({"a"}), a, Omega())

    def test_subtyping(self):
        """Test that a subtyping step adds one atom."""
        j = check_skeleton(parse_skeleton("x<x: a> |> b"))
        assert j.rtype == b
        assert j.constraint == And(Omega(), Atomic(a, b))

    def test_weakening(self):
        """Test that weakening appends to the environment."""
        q = parse_skeleton(r"(\x. x<x: a>) + {y: b}")
        assert tenv(q).support() == ["y"]
        assert constraint_of(q) == Omega()


# ============================================================================
# Test rejection of invalid skeletons
# ============================================================================


class TestInvalidSkeletons:
    """Test suite for the error raised by each rule."""

    def test_unbound_variable(self):
        """Test a variable missing from its environment."""
        with pytest.raises(UnboundVariable):
            check_skeleton(QVar("x", TypeEnv((("y", a),))))

    def test_malformed_env(self):
        """Test a duplicate environment entry."""
        with pytest.raises(MalformedEnv):
            check_skeleton(parse_skeleton("x<x: a, x: b>"))

    def test_unbound_binder(self):
        """Test an abstraction whose binder is not in the body environment."""
        with pytest.raises(UnboundVariable):
            check_skeleton(parse_skeleton(r"\z. x<x: a>"))

    def test_not_an_arrow(self):
        """Test applying a variable-typed function."""
        with pytest.raises(NotAnArrow):
            check_skeleton(parse_skeleton("x<x: a> @ x<x: a>"))

    def test_domain_mismatch(self):
        """Test an argument of the wrong type."""
        with pytest.raises(DomainMismatch):
            check_skeleton(parse_skeleton("f<f: a -> b, y: b> @ y<f: a -> b, y: b>"))

    def test_environment_mismatch(self):
        """Test application branches with different environments."""
        with pytest.raises(EnvironmentMismatch):
            check_skeleton(parse_skeleton("f<f: a -> b> @ y<y: a>"))

    def test_escaping_variable(self):
        """Test generalising a variable free in the environment."""
        with pytest.raises(EscapingVariable):
            check_skeleton(parse_skeleton("all a. x<x: a>"))

    def test_forbidden_set_too_small(self):
        """Test an E-variable that does not forbid the environment."""
        with pytest.raises(ForbiddenSetTooSmall):
            check_skeleton(parse_skeleton("s^{} x<x: a>"))

    def test_support_overlap(self):
        """Test weakening with a variable already present."""
        with pytest.raises(SupportOverlap):
            check_skeleton(parse_skeleton("x<x: a> + {x: b}"))

    def test_is_valid(self):
        """Test the boolean wrapper."""
        assert is_valid(parse_skeleton("x<x: a>"))
        assert not is_valid(parse_skeleton("all a. x<x: a>"))

    def test_is_valid_rejects_non_skeletons(self):
        """Test that a wrong argument type is not reported as an invalid skeleton."""
        with pytest.raises(TypeError):
            is_valid(Var("x"))


# ============================================================================
# Test relevant(), term_of(), rename_term_var() and strengthen()
# ============================================================================


class TestSkeletonSurgery:
    """Test suite for the skeleton helpers."""

    def test_relevant(self, identity):
        """Test relevance with and without unused entries."""
        assert relevant(identity)
        assert not relevant(parse_skeleton("x<x: a, y: b>"))

    def test_term_of(self, self_application):
        """Test reading the term without checking."""
        assert term_of(self_application) == check_skeleton(self_application).term

    def test_rename_free_variable(self):
        """Test renaming a free variable in every environment."""
        q = rename_term_var(parse_skeleton(r"\x. y<x: a, y: b>"), "y", "z")
        j = check_skeleton(q)
        assert j.term == Abs("x", Var("z"))
        assert env_equal(j.env, TypeEnv((("z", b),)))

    def test_rename_stops_at_binder(self, identity):
        """Test that a bound occurrence is left alone."""
        assert rename_term_var(identity, "x", "z") == identity

    def test_strengthen(self):
        """Test dropping an unused variable."""
        q = strengthen(parse_skeleton("x<x: a, y: b>"), {"y"})
        assert tenv(q).support() == ["x"]

    def test_strengthen_removes_empty_weakening(self):
        """Test that a weakening left empty disappears."""
        q = strengthen(parse_skeleton("x<x: a> + {y: b}"), {"y"})
        assert q == parse_skeleton("x<x: a>")

    def test_strengthen_used_variable(self):
        """Test that a used variable cannot be dropped."""
        with pytest.raises(UnboundVariable):
            strengthen(parse_skeleton("x<x: a, y: b>"), {"x"})
