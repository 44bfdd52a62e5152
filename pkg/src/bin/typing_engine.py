"""typing_engine.py.

Skeleton validation for System Fs.

A skeleton is a proof term: walking it bottom-up with the typing rules
(variable, abstraction, application, quantifier introduction, E-variable
introduction, subtyping, weakening) either fails at one node or yields the
unique judgement `M : <Γ ⊢ τ> / C` it encodes.

To use as a module, call

```python
from typing_engine import check_skeleton

judgement = check_skeleton(q)
judgement.term, judgement.env, judgement.rtype, judgement.constraint
```
"""

from dataclasses import dataclass

from core_syntax import (
    Abs,
    And,
    App,
    Arrow,
    Atomic,
    Constraint,
    EGuard,
    EVarApp,
    Exists,
    Forall,
    Omega,
    QAbs,
    QApp,
    QEVar,
    QForall,
    QSub,
    QVar,
    QWeak,
    Skeleton,
    Term,
    Type,
    TypeEnv,
    Var,
    canonical_type,
    env_equal,
    ftv,
    fv,
    type_eq,
)
from fs_errors import (
    DomainMismatch,
    EnvironmentMismatch,
    EscapingVariable,
    ForbiddenSetTooSmall,
    FsError,
    MalformedEnv,
    NotAnArrow,
    SupportOverlap,
    UnboundVariable,
)


@dataclass(frozen=True)
class Judgement:
    term: Term
    env: TypeEnv
    rtype: Type
    constraint: Constraint


def arrow_view(t: Type) -> Arrow | None:
    """`t` itself when it is an arrow, else its canonical form when that is one."""
    if isinstance(t, Arrow):
        return t
    c = canonical_type(t)
    return c if isinstance(c, Arrow) else None


def check_skeleton(q: Skeleton) -> Judgement:
    """Validate `q` and return the judgement it encodes.

    Args:
        q (Skeleton): The skeleton to check

    Returns:
        Judgement: Term, environment, result type and constraint of `q`
    """
    match q:
        case QVar(var, env):
            if not env.is_well_formed():
                raise MalformedEnv(f"variable {var} sits in a malformed environment", q)
            t = env.lookup(var)
            if t is None:
                raise UnboundVariable(f"{var} is not in its environment", q)
            return Judgement(Var(var), env, t, Omega())

        case QAbs(binder, body):
            j = check_skeleton(body)
            t = j.env.lookup(binder)
            if t is None:
                raise UnboundVariable(f"abstraction binder {binder} missing from body environment", q)
            return Judgement(
                Abs(binder, j.term), j.env.without(binder), Arrow(t, j.rtype), j.constraint
            )

        case QApp(fun, arg):
            jf = check_skeleton(fun)
            ja = check_skeleton(arg)
            arrow = arrow_view(jf.rtype)
            if arrow is None:
                raise NotAnArrow("function side of an application has no arrow type", q)
            if not type_eq(arrow.dom, ja.rtype):
                raise DomainMismatch("argument type differs from the function domain", q)
            if not env_equal(jf.env, ja.env):
                raise EnvironmentMismatch("application branches use different environments", q)
            return Judgement(
                App(jf.term, ja.term), jf.env, arrow.cod, And(jf.constraint, ja.constraint)
            )

        case QForall(binder, body):
            j = check_skeleton(body)
            if binder in ftv(j.env):
                raise EscapingVariable(f"{binder} is free in the environment", q)
            return Judgement(j.term, j.env, Forall(binder, j.rtype), Exists(binder, j.constraint))

        case QEVar(evar, forbidden, body):
            j = check_skeleton(body)
            if not ftv(j.env) <= forbidden:
                missing = ", ".join(sorted(ftv(j.env) - forbidden))
                raise ForbiddenSetTooSmall(f"{evar} does not forbid {missing}", q)
            return Judgement(
                j.term,
                j.env,
                EVarApp(evar, forbidden, j.rtype),
                EGuard(evar, forbidden, j.rtype, j.constraint),
            )

        case QSub(body, target):
            j = check_skeleton(body)
            return Judgement(j.term, j.env, target, And(j.constraint, Atomic(j.rtype, target)))

        case QWeak(body, extra):
            j = check_skeleton(body)
            if not extra.is_well_formed():
                raise MalformedEnv("weakening environment is malformed", q)
            overlap = set(j.env.support()) & set(extra.support())
            if overlap:
                raise SupportOverlap(f"weakening repeats {', '.join(sorted(overlap))}", q)
            return Judgement(j.term, j.env.concat(extra), j.rtype, j.constraint)

    raise TypeError(f"not a skeleton: {q!r}")


def rtype(q: Skeleton) -> Type:
    return check_skeleton(q).rtype


def tenv(q: Skeleton) -> TypeEnv:
    return check_skeleton(q).env


def constraint_of(q: Skeleton) -> Constraint:
    return check_skeleton(q).constraint


def is_valid(q: Skeleton) -> bool:
    try:
        check_skeleton(q)
    except FsError:
        return False
    return True


def relevant(q: Skeleton) -> bool:
    """True when the environment holds exactly the free variables of the term."""
    j = check_skeleton(q)
    return fv(j.term) == frozenset(j.env.support())


def term_of(q: Skeleton) -> Term:
    """The term a skeleton types, read off without checking."""
    match q:
        case QVar(var, _):
            return Var(var)
        case QAbs(binder, body):
            return Abs(binder, term_of(body))
        case QApp(fun, arg):
            return App(term_of(fun), term_of(arg))
        case QForall(_, body) | QEVar(_, _, body) | QSub(body, _) | QWeak(body, _):
            return term_of(body)
    raise TypeError(f"not a skeleton: {q!r}")


# --- Skeleton surgery ---
def rename_term_var(q: Skeleton, old: str, new: str) -> Skeleton:
    """Rename the free term variable `old` to `new` throughout `q`.

    Args:
        q (Skeleton): Skeleton in which `new` does not occur
        old (str): Variable to rename
        new (str): Replacement name

    Returns:
        Skeleton: The renamed skeleton
    """
    match q:
        case QVar(var, env):
            return QVar(new if var == old else var, env.rename(old, new))
        case QAbs(binder, body):
            if binder == old:
                return q
            return QAbs(binder, rename_term_var(body, old, new))
        case QApp(fun, arg):
            return QApp(rename_term_var(fun, old, new), rename_term_var(arg, old, new))
        case QForall(binder, body):
            return QForall(binder, rename_term_var(body, old, new))
        case QEVar(evar, forbidden, body):
            return QEVar(evar, forbidden, rename_term_var(body, old, new))
        case QSub(body, target):
            return QSub(rename_term_var(body, old, new), target)
        case QWeak(body, extra):
            return QWeak(rename_term_var(body, old, new), extra.rename(old, new))
    raise TypeError(f"not a skeleton: {q!r}")


def strengthen(q: Skeleton, names: frozenset[str] | set[str]) -> Skeleton:
    """Remove unused term variables from every environment of `q`."""
    names = frozenset(names)
    if not names:
        return q
    match q:
        case QVar(var, env):
            if var in names:
                raise UnboundVariable(f"cannot drop {var}: the skeleton uses it", q)
            return QVar(var, env.without(*names))
        case QAbs(binder, body):
            return QAbs(binder, strengthen(body, names - {binder}))
        case QApp(fun, arg):
            return QApp(strengthen(fun, names), strengthen(arg, names))
        case QForall(binder, body):
            return QForall(binder, strengthen(body, names))
        case QEVar(evar, forbidden, body):
            return QEVar(evar, forbidden, strengthen(body, names))
        case QSub(body, target):
            return QSub(strengthen(body, names), target)
        case QWeak(body, extra):
            inner = strengthen(body, names)
            rest = extra.without(*names)
            return QWeak(inner, rest) if len(rest) else inner
    raise TypeError(f"not a skeleton: {q!r}")
