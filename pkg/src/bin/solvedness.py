"""solvedness.py.

Solved constraints and the subtyping relations they are solved against.

A constraint is solved with respect to a subtyping relation when every
atomic constraint `τ1 <= τ2` in it holds. Two relations ship here:

- `F`: one-step quantifier elimination, `∀a.τ1 <= τ1[a := τ2]`, read up to
  the type equalities (so it is reflexive through dummy quantifiers).
- `EQ`: the equality relation, which coincides with `type_eq`.

The module also holds an independent System F checker for erased skeletons,
used to confirm that solved skeletons are System F derivations.

To use as a module, call

```python
from solvedness import relation_by_name, solved

solved(constraint, relation_by_name("F"))
```
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable

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
    TVar,
    Term,
    Type,
    TypeEnv,
    Var,
    canonical_type,
    ftv,
    normal_type,
    split_quantifiers,
    type_eq,
    wrap_quantifiers,
)
from expansion_subst import subst_type
from fs_errors import SystemFError


# --- Relations ---
@dataclass(frozen=True)
class SubtypingRelation:
    name: str
    decide: Callable[[Type, Type], bool]

    def __call__(self, t1: Type, t2: Type) -> bool:
        return self.decide(t1, t2)


@dataclass(frozen=True)
class Instantiation:
    """How `leq_f` justified `t1 <= t2`.

    `binder` is None when the two sides are equal types. Otherwise
    `Forall(binder, body)` is a rearrangement of `t1` and
    `body[binder := arg]` equals `t2`.
    """

    binder: str | None = None
    body: Type | None = None
    arg: Type | None = None

    @property
    def reflexive(self) -> bool:
        return self.binder is None


def _subterms(t: Type) -> list[Type]:
    match t:
        case TVar():
            return [t]
        case Arrow(dom, cod):
            return [t, *_subterms(dom), *_subterms(cod)]
        case Forall(_, body) | EVarApp(_, _, body):
            return [t, *_subterms(body)]
    raise TypeError(f"not a type: {t!r}")


def _type_over(names: Iterable[str]) -> Type:
    """Some type whose free variables are exactly `names`."""
    ordered = sorted(names)
    if not ordered:
        return Forall("a", TVar("a"))
    t: Type = TVar(ordered[-1])
    for name in reversed(ordered[:-1]):
        t = Arrow(TVar(name), t)
    return t


@dataclass
class _Match:
    """What matching learned about the pattern variable."""

    images: list[Type] = field(default_factory=list)
    # (must appear, may appear) bounds on the free variables of the instance
    bounds: list[tuple[frozenset[str], frozenset[str]]] = field(default_factory=list)

    def instance(self) -> Type | None:
        if self.images:
            return self.images[0]
        lower = frozenset().union(*(low for low, _ in self.bounds))
        if any(not lower <= high for _, high in self.bounds):
            return None
        return _type_over(lower)


def _key(name: str, env: dict) -> tuple:
    return ("bound", env[name]) if name in env else ("free", name)


def _match_forbidden(
    f1: frozenset[str], f2: frozenset[str], a: str, env_p: dict, env_t: dict, m: _Match
) -> bool:
    """Match forbidden sets; `a` in `f1` stands for the free variables of its image."""
    instantiated = a in f1 and a not in env_p
    kept = {_key(n, env_p) for n in f1 if not (instantiated and n == a)}
    have = {_key(n, env_t) for n in f2}
    if not instantiated:
        return kept == have
    if not kept <= have or any(kind == "bound" for kind, _ in have - kept):
        return False
    free = frozenset(n for kind, n in have if kind == "free")
    m.bounds.append((frozenset(n for _, n in have - kept), free))
    return True


def _match(p: Type, t: Type, a: str, env_p: dict, env_t: dict, depth: int, m: _Match) -> bool:
    """Match pattern `p` against `t` modulo α; `a` is the pattern variable."""
    match p, t:
        case TVar(name), _ if name == a and name not in env_p:
            if ftv(t) & set(env_t):
                return False
            m.images.append(t)
            return True
        case TVar(x), TVar(y):
            dx, dy = env_p.get(x), env_t.get(y)
            if dx is not None or dy is not None:
                return dx == dy
            return x == y
        case Arrow(d1, c1), Arrow(d2, c2):
            return _match(d1, d2, a, env_p, env_t, depth, m) and _match(
                c1, c2, a, env_p, env_t, depth, m
            )
        case Forall(x, b1), Forall(y, b2):
            return _match(b1, b2, a, {**env_p, x: depth}, {**env_t, y: depth}, depth + 1, m)
        case EVarApp(s1, f1, b1), EVarApp(s2, f2, b2):
            return (
                s1 == s2
                and _match(b1, b2, a, env_p, env_t, depth, m)
                and _match_forbidden(f1, f2, a, env_p, env_t, m)
            )
    return False


def _blocks(t1: Type) -> list[tuple[str, Type]]:
    """Each binder of the leading block of `t1` paired with the rest of the type."""
    binders, body = split_quantifiers(normal_type(t1))
    return [
        (b, wrap_quantifiers([c for c in binders if c != b], body)) for b in binders
    ]


def leq_f_witness(t1: Type, t2: Type) -> Instantiation | None:
    """Decide `t1 <=F t2`, returning the instantiation that proves it.

    The instance is read off `t2` by matching it against each way of
    writing `t1` as `∀a.τ`.

    Args:
        t1 (Type): Left side
        t2 (Type): Right side

    Returns:
        Instantiation | None: The proof, or None when the relation fails
    """
    if type_eq(t1, t2):
        return Instantiation()
    target = normal_type(t2)
    for binder, rest in _blocks(t1):
        m = _Match()
        if not _match(normal_type(rest), target, binder, {}, {}, 0, m):
            continue
        w = m.instance()
        if w is not None and type_eq(subst_type(rest, binder, w), t2):
            return Instantiation(binder, rest, w)
    return None


def leq_f(t1: Type, t2: Type) -> bool:
    return leq_f_witness(t1, t2) is not None


def leq_f_bruteforce(t1: Type, t2: Type) -> bool:
    """Decide `t1 <=F t2` by trying every instance drawn from `t2`.

    Candidates are the subterms of the canonical form of `t2`. When `t2`
    has E-variable applications, one type over each subset of its free
    variables is added for binders that only sit in forbidden sets.
    """
    goal = canonical_type(t2)
    if canonical_type(t1) == goal:
        return True
    binders, body = split_quantifiers(canonical_type(t1))
    pool = _subterms(goal)
    if any(isinstance(u, EVarApp) for u in pool):
        names = sorted(ftv(t2))
        pool += [
            _type_over(subset)
            for size in range(len(names) + 1)
            for subset in combinations(names, size)
        ]
    for i, binder in enumerate(binders):
        rest = wrap_quantifiers(binders[:i] + binders[i + 1 :], body)
        if any(canonical_type(subst_type(rest, binder, w)) == goal for w in pool):
            return True
    return False


def leq_eq(t1: Type, t2: Type) -> bool:
    return type_eq(t1, t2)


LEQ_F = SubtypingRelation("F", leq_f)
LEQ_EQ = SubtypingRelation("EQ", leq_eq)
RELATIONS: dict[str, SubtypingRelation] = {r.name: r for r in (LEQ_F, LEQ_EQ)}


def relation_by_name(name: str) -> SubtypingRelation:
    try:
        return RELATIONS[name.upper()]
    except KeyError:
        raise ValueError(
            f"unknown subtyping relation {name!r}; choose one of {', '.join(RELATIONS)}"
        ) from None


# --- Solvedness ---
def solved(c: Constraint, rel: SubtypingRelation = LEQ_F) -> bool:
    match c:
        case Omega():
            return True
        case Atomic(lhs, rhs):
            return rel(lhs, rhs)
        case And(left, right):
            return solved(left, rel) and solved(right, rel)
        case Exists(_, body) | EGuard(_, _, _, body):
            return solved(body, rel)
    raise TypeError(f"not a constraint: {c!r}")


def unsolved_atoms(c: Constraint, rel: SubtypingRelation = LEQ_F) -> list[Atomic]:
    match c:
        case Omega():
            return []
        case Atomic(lhs, rhs):
            return [] if rel(lhs, rhs) else [c]
        case And(left, right):
            return unsolved_atoms(left, rel) + unsolved_atoms(right, rel)
        case Exists(_, body) | EGuard(_, _, _, body):
            return unsolved_atoms(body, rel)
    raise TypeError(f"not a constraint: {c!r}")


# --- System F ---
def erase_type(t: Type) -> Type:
    match t:
        case TVar():
            return t
        case Arrow(dom, cod):
            return Arrow(erase_type(dom), erase_type(cod))
        case Forall(binder, body):
            return Forall(binder, erase_type(body))
        case EVarApp(_, _, body):
            return erase_type(body)
    raise TypeError(f"not a type: {t!r}")


def erase_evars(q: Skeleton) -> Skeleton:
    """Remove every E-variable node and every E-variable application."""
    match q:
        case QVar(var, env):
            return QVar(var, env.map_types(erase_type))
        case QAbs(binder, body):
            return QAbs(binder, erase_evars(body))
        case QApp(fun, arg):
            return QApp(erase_evars(fun), erase_evars(arg))
        case QForall(binder, body):
            return QForall(binder, erase_evars(body))
        case QEVar(_, _, body):
            return erase_evars(body)
        case QSub(body, target):
            return QSub(erase_evars(body), erase_type(target))
        case QWeak(body, extra):
            return QWeak(erase_evars(body), extra.map_types(erase_type))
    raise TypeError(f"not a skeleton: {q!r}")


def _no_evars(t: Type, q: Skeleton) -> None:
    match t:
        case EVarApp():
            raise SystemFError("E-variable left in a System F type", q)
        case Arrow(dom, cod):
            _no_evars(dom, q)
            _no_evars(cod, q)
        case Forall(_, body):
            _no_evars(body, q)


def system_f_judgement(q: Skeleton) -> tuple[Term, TypeEnv, Type]:
    """Check an erased skeleton as a System F derivation.

    Instantiation nodes are checked with the brute-force relation.

    Returns:
        tuple: The term, environment and type derived
    """
    match q:
        case QVar(var, env):
            names = env.support()
            if len(names) != len(set(names)):
                raise SystemFError("malformed environment", q)
            for t in env.types():
                _no_evars(t, q)
            t = env.lookup(var)
            if t is None:
                raise SystemFError(f"unbound variable {var}", q)
            return Var(var), env, t
        case QAbs(binder, body):
            m, env, t = system_f_judgement(body)
            dom = env.lookup(binder)
            if dom is None:
                raise SystemFError(f"binder {binder} missing from the environment", q)
            return Abs(binder, m), env.without(binder), Arrow(dom, t)
        case QApp(fun, arg):
            mf, envf, tf = system_f_judgement(fun)
            ma, enva, ta = system_f_judgement(arg)
            arrow = tf if isinstance(tf, Arrow) else canonical_type(tf)
            if not isinstance(arrow, Arrow):
                raise SystemFError("applying a term without arrow type", q)
            if canonical_type(arrow.dom) != canonical_type(ta):
                raise SystemFError("argument type differs from the domain", q)
            if sorted(envf.support()) != sorted(enva.support()) or any(
                canonical_type(t) != canonical_type(enva.lookup(x)) for x, t in envf
            ):
                raise SystemFError("branches use different environments", q)
            return App(mf, ma), envf, arrow.cod
        case QForall(binder, body):
            m, env, t = system_f_judgement(body)
            if binder in ftv(env):
                raise SystemFError(f"generalising {binder}, free in the environment", q)
            return m, env, Forall(binder, t)
        case QSub(body, target):
            m, env, t = system_f_judgement(body)
            _no_evars(target, q)
            if not leq_f_bruteforce(t, target):
                raise SystemFError("subtyping step is not a quantifier instantiation", q)
            return m, env, target
        case QWeak(body, extra):
            m, env, t = system_f_judgement(body)
            if set(env.support()) & set(extra.support()):
                raise SystemFError("weakening repeats a variable", q)
            return m, env.concat(extra), t
        case QEVar():
            raise SystemFError("E-variable node in a System F derivation", q)
    raise TypeError(f"not a skeleton: {q!r}")


def check_system_f(q: Skeleton) -> bool:
    try:
        system_f_judgement(q)
    except SystemFError:
        return False
    return True
