"""expansion_subst.py.

Expansion application and substitution application.

An expansion `I` applied under a forbidden set Δ rebuilds a derivation
position: `all a. I` introduces a quantifier unless `a` is forbidden,
`s^{Δ'} I` keeps an E-variable around the result, `I |> τ` adds a
subtyping step and `id` does nothing. A substitution maps type variables to
types and E-variables to expansions; on `s^Δ τ` it applies the expansion
bound to `s` under the image of Δ.

The two soundness properties (expansion application commutes with typing,
substitution application commutes with typing) are exposed as functions so
test suites can run them on generated inputs.

To use as a module, call

```python
from expansion_subst import apply_subst
from surface import parse_skeleton, parse_subst

apply_subst(parse_subst("[a := a1 -> a2, s := all b. id]"), parse_skeleton(text))
```
"""

from core_syntax import (
    EMPTY,
    And,
    Arrow,
    Atomic,
    Constraint,
    EGuard,
    EVarApp,
    EVarIntro,
    Exists,
    Expansion,
    Forall,
    ForallIntro,
    Id,
    Omega,
    QAbs,
    QApp,
    QEVar,
    QForall,
    QSub,
    QVar,
    QWeak,
    Skeleton,
    SubStep,
    Substitution,
    TVar,
    Type,
    TypeBinding,
    TypeEnv,
    constraint_eq,
    env_equal,
    fresh_variant,
    ftv,
    term_alpha_eq,
    type_eq,
)
from fs_errors import PreconditionViolation, SkeletonError
from typing_engine import Judgement, check_skeleton


# --- Expansion application ---
def apply_exp_type(i: Expansion, forbidden: frozenset[str], t: Type) -> Type:
    """Apply expansion `i` to type `t` under the forbidden set.

    Args:
        i (Expansion): The expansion
        forbidden (frozenset[str]): Variables that may not be quantified
        t (Type): The type being rebuilt

    Returns:
        Type: The expanded type
    """
    match i:
        case Id():
            return t
        case EVarIntro(evar, extra, rest):
            return EVarApp(evar, forbidden | extra, apply_exp_type(rest, forbidden, t))
        case ForallIntro(var, rest):
            inner = apply_exp_type(rest, forbidden, t)
            return inner if var in forbidden else Forall(var, inner)
        case SubStep(_, target):
            return target
    raise TypeError(f"not an expansion: {i!r}")


def apply_exp_skel(i: Expansion, forbidden: frozenset[str], q: Skeleton) -> Skeleton:
    match i:
        case Id():
            return q
        case EVarIntro(evar, extra, rest):
            return QEVar(evar, forbidden | extra, apply_exp_skel(rest, forbidden, q))
        case ForallIntro(var, rest):
            inner = apply_exp_skel(rest, forbidden, q)
            return inner if var in forbidden else QForall(var, inner)
        case SubStep(rest, target):
            return QSub(apply_exp_skel(rest, forbidden, q), target)
    raise TypeError(f"not an expansion: {i!r}")


def apply_exp_cons(
    i: Expansion, forbidden: frozenset[str], witness: Type, c: Constraint
) -> Constraint:
    """Apply expansion `i` to constraint `c`; `witness` is the type at the position."""
    match i:
        case Id():
            return c
        case EVarIntro(evar, extra, rest):
            return EGuard(
                evar,
                forbidden | extra,
                apply_exp_type(rest, forbidden, witness),
                apply_exp_cons(rest, forbidden, witness, c),
            )
        case ForallIntro(var, rest):
            inner = apply_exp_cons(rest, forbidden, witness, c)
            return inner if var in forbidden else Exists(var, inner)
        case SubStep(rest, target):
            return And(
                apply_exp_cons(rest, forbidden, witness, c),
                Atomic(apply_exp_type(rest, forbidden, witness), target),
            )
    raise TypeError(f"not an expansion: {i!r}")


# --- Substitution application ---
def apply_subst_tvar(phi: Substitution, a: str) -> Type:
    return phi.lookup_type(a)


def apply_subst_evar(phi: Substitution, s: str) -> Expansion:
    return phi.lookup_evar(s)


def image_ftv(phi: Substitution, forbidden: frozenset[str]) -> frozenset[str]:
    """ftv(φ(Δ)): free variables of the pointwise image of a variable set."""
    return frozenset().union(*(ftv(phi.lookup_type(a)) for a in forbidden))


def _rename_binder(phi: Substitution, binder: str, body) -> tuple[str, Substitution]:
    """Pick the binder name to use under φ and the substitution for the body."""
    if binder not in ftv(phi):
        return binder, phi
    new = fresh_variant(binder, ftv(phi) | ftv(body))
    return new, phi.prepend(TypeBinding(binder, TVar(new)))


def apply_subst(phi: Substitution, subject):
    """Apply `phi` to a type, skeleton, constraint, environment or variable set.

    Quantifier binders caught by φ are renamed to fresh names first.
    Expansion variables are looked up with `apply_subst_evar`, type
    variable names with `apply_subst_tvar`.
    """
    match subject:
        # --- Types ---
        case TVar(name):
            return phi.lookup_type(name)
        case Arrow(dom, cod):
            return Arrow(apply_subst(phi, dom), apply_subst(phi, cod))
        case Forall(binder, body):
            name, inner = _rename_binder(phi, binder, body)
            return Forall(name, apply_subst(inner, body))
        case EVarApp(evar, forbidden, body):
            return apply_exp_type(
                phi.lookup_evar(evar), image_ftv(phi, forbidden), apply_subst(phi, body)
            )

        # --- Skeletons ---
        case QVar(var, env):
            return QVar(var, apply_subst(phi, env))
        case QAbs(binder, body):
            return QAbs(binder, apply_subst(phi, body))
        case QApp(fun, arg):
            return QApp(apply_subst(phi, fun), apply_subst(phi, arg))
        case QForall(binder, body):
            name, inner = _rename_binder(phi, binder, body)
            return QForall(name, apply_subst(inner, body))
        case QEVar(evar, forbidden, body):
            return apply_exp_skel(
                phi.lookup_evar(evar), image_ftv(phi, forbidden), apply_subst(phi, body)
            )
        case QSub(body, target):
            return QSub(apply_subst(phi, body), apply_subst(phi, target))
        case QWeak(body, extra):
            return QWeak(apply_subst(phi, body), apply_subst(phi, extra))

        # --- Constraints ---
        case Omega():
            return subject
        case Atomic(lhs, rhs):
            return Atomic(apply_subst(phi, lhs), apply_subst(phi, rhs))
        case And(left, right):
            return And(apply_subst(phi, left), apply_subst(phi, right))
        case Exists(binder, body):
            name, inner = _rename_binder(phi, binder, body)
            return Exists(name, apply_subst(inner, body))
        case EGuard(evar, forbidden, witness, body):
            return apply_exp_cons(
                phi.lookup_evar(evar),
                image_ftv(phi, forbidden),
                apply_subst(phi, witness),
                apply_subst(phi, body),
            )

        # --- Environments and variable sets ---
        case TypeEnv():
            return subject.map_types(lambda t: apply_subst(phi, t))
        case frozenset() | set():
            return image_ftv(phi, frozenset(subject))
        case str():
            raise TypeError(
                "apply_subst: look bare variable names up with apply_subst_tvar or apply_subst_evar"
            )
    raise TypeError(f"apply_subst: unsupported subject {subject!r}")


def subst_type(t: Type, a: str, w: Type) -> Type:
    """Capture-avoiding `t[a := w]`."""
    return apply_subst(Substitution((TypeBinding(a, w),)), t)


# --- Soundness properties ---
def judgements_agree(j1: Judgement, j2: Judgement) -> bool:
    """Equal up to α on terms, environments as maps, and the equality theories."""
    return (
        term_alpha_eq(j1.term, j2.term)
        and env_equal(j1.env, j2.env)
        and type_eq(j1.rtype, j2.rtype)
        and constraint_eq(j1.constraint, j2.constraint)
    )


def _checked(q: Skeleton) -> Judgement:
    try:
        return check_skeleton(q)
    except SkeletonError as e:
        raise PreconditionViolation(f"input skeleton is invalid: {e.message}", q) from e


def property_expansion_sound(q: Skeleton, i: Expansion, forbidden: frozenset[str] = EMPTY) -> bool:
    """Expanding a skeleton agrees with expanding its judgement.

    Args:
        q (Skeleton): A valid skeleton
        i (Expansion): Any expansion
        forbidden (frozenset[str]): Must contain ftv(tenv(q))

    Returns:
        bool: True when the expanded skeleton checks to the expanded judgement
    """
    j = _checked(q)
    if not ftv(j.env) <= forbidden:
        raise PreconditionViolation("forbidden set misses free variables of the environment", q)
    expected = Judgement(
        j.term,
        j.env,
        apply_exp_type(i, forbidden, j.rtype),
        apply_exp_cons(i, forbidden, j.rtype, j.constraint),
    )
    try:
        actual = check_skeleton(apply_exp_skel(i, forbidden, q))
    except SkeletonError:
        return False
    return judgements_agree(actual, expected)


def property_subst_sound(q: Skeleton, phi: Substitution) -> bool:
    """Substituting into a skeleton agrees with substituting into its judgement."""
    j = _checked(q)
    expected = Judgement(
        j.term,
        apply_subst(phi, j.env),
        apply_subst(phi, j.rtype),
        apply_subst(phi, j.constraint),
    )
    try:
        actual = check_skeleton(apply_subst(phi, q))
    except SkeletonError:
        return False
    return judgements_agree(actual, expected)
