"""initial_skeleton.py.

Initial skeletons and the substitutions that specialise them.

Every term, typable or not, has an initial skeleton: each variable gets a
distinct type variable, every node sits under a fresh E-variable and every
application routes its function side through a subtyping step
`|> (argument type -> a)`. Any other derivation of the term is obtained from
it by a substitution, up to a reflexive remainder in the constraint and a
final weakening. `derive_substitution` computes that substitution by walking
the target derivation.

Numbering is deterministic: variables (binders and free variables) are
numbered in order of first appearance, then application result variables
and E-variables are allocated bottom-up, left to right. For `\\x. x @ x`
this gives `x: a0`, E-variables `s0 .. s3` and result variable `a1`.

To use as a module, call

```python
from initial_skeleton import initial_skeleton, derive_substitution
from surface import parse_term

q, theta, supply = initial_skeleton(parse_term("\\\\x. x @ x"))
phi, extra = derive_substitution(q, target_skeleton)
```
"""

from dataclasses import dataclass, replace

from core_syntax import (
    EMPTY,
    Abs,
    And,
    App,
    Arrow,
    Atomic,
    Constraint,
    EGuard,
    EVarApp,
    EVarIntro,
    Exists,
    Expansion,
    ExpansionBinding,
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
    Term,
    TVar,
    Type,
    TypeBinding,
    TypeEnv,
    Var,
    binder_prefix,
    env_equal,
    ftv,
    fv,
    prefixed_atoms,
    term_alpha_eq,
    type_eq,
)
from expansion_subst import apply_subst
from fs_errors import DerivationError, PreconditionViolation, SkeletonError, TermMismatch
from typing_engine import arrow_view, check_skeleton, rename_term_var, rtype, strengthen, term_of


# --- Fresh names ---
@dataclass(frozen=True)
class FreshSupply:
    """Deterministic source of fresh type variables and E-variables.

    Args:
        next_tvar (int): Next type variable index
        next_evar (int): Next E-variable index
        avoid (frozenset[str]): Names never to emit
        tvar_prefix (str): Prefix of type variable names
        evar_prefix (str): Prefix of E-variable names
    """

    next_tvar: int = 0
    next_evar: int = 0
    avoid: frozenset[str] = EMPTY
    tvar_prefix: str = "a"
    evar_prefix: str = "s"

    def fresh_tvar(self) -> tuple[str, "FreshSupply"]:
        i = self.next_tvar
        while f"{self.tvar_prefix}{i}" in self.avoid:
            i += 1
        return f"{self.tvar_prefix}{i}", replace(self, next_tvar=i + 1)

    def fresh_evar(self) -> tuple[str, "FreshSupply"]:
        i = self.next_evar
        while f"{self.evar_prefix}{i}" in self.avoid:
            i += 1
        return f"{self.evar_prefix}{i}", replace(self, next_evar=i + 1)


def evars(subject) -> frozenset[str]:
    """E-variables occurring anywhere in a type, skeleton, constraint or environment."""
    match subject:
        case TVar():
            return EMPTY
        case Arrow(dom, cod):
            return evars(dom) | evars(cod)
        case Forall(_, body):
            return evars(body)
        case EVarApp(evar, _, body):
            return evars(body) | {evar}
        case TypeEnv():
            return frozenset().union(*(evars(t) for t in subject.types()))
        case QVar(_, env):
            return evars(env)
        case QAbs(_, body) | QForall(_, body):
            return evars(body)
        case QApp(fun, arg):
            return evars(fun) | evars(arg)
        case QEVar(evar, _, body):
            return evars(body) | {evar}
        case QSub(body, target):
            return evars(body) | evars(target)
        case QWeak(body, extra):
            return evars(body) | evars(extra)
        case Omega():
            return EMPTY
        case Atomic(lhs, rhs):
            return evars(lhs) | evars(rhs)
        case And(left, right):
            return evars(left) | evars(right)
        case Exists(_, body):
            return evars(body)
        case EGuard(evar, _, witness, body):
            return evars(witness) | evars(body) | {evar}
    raise TypeError(f"evars: unsupported subject {subject!r}")


def allvar(q: Skeleton) -> frozenset[str]:
    """Free type variables and E-variables of a skeleton."""
    return ftv(q) | evars(q)


# --- Initial skeletons ---
def _number_variables(m: Term, supply: FreshSupply) -> tuple[list[str], TypeEnv, FreshSupply]:
    binders: list[str] = []
    free: list[tuple[str, Type]] = []

    def visit(n: Term, bound: frozenset[str], supply: FreshSupply) -> FreshSupply:
        match n:
            case Var(name):
                if name not in bound and all(name != y for y, _ in free):
                    a, supply = supply.fresh_tvar()
                    free.append((name, TVar(a)))
                return supply
            case Abs(binder, body):
                a, supply = supply.fresh_tvar()
                binders.append(a)
                return visit(body, bound | {binder}, supply)
            case App(fun, arg):
                return visit(arg, bound, visit(fun, bound, supply))
        raise TypeError(f"not a term: {n!r}")

    supply = visit(m, EMPTY, supply)
    return binders, TypeEnv(tuple(free)), supply


def _build(m: Term, theta: TypeEnv, binders, supply: FreshSupply) -> tuple[Skeleton, FreshSupply]:
    forbidden = ftv(theta)
    match m:
        case Var(name):
            s, supply = supply.fresh_evar()
            return QEVar(s, forbidden, QVar(name, theta)), supply
        case Abs(binder, body):
            a = next(binders)
            inner, supply = _build(body, theta.extend(binder, TVar(a)), binders, supply)
            core: Skeleton = QAbs(binder, inner)
            shadowed = theta.lookup(binder)
            if shadowed is not None:
                core = QWeak(core, TypeEnv(((binder, shadowed),)))
            s, supply = supply.fresh_evar()
            return QEVar(s, forbidden, core), supply
        case App(fun, arg):
            q1, supply = _build(fun, theta, binders, supply)
            q2, supply = _build(arg, theta, binders, supply)
            a, supply = supply.fresh_tvar()
            s, supply = supply.fresh_evar()
            core = QApp(QSub(q1, Arrow(rtype(q2), TVar(a))), q2)
            return QEVar(s, forbidden, core), supply
    raise TypeError(f"not a term: {m!r}")


def initial_skeleton(
    m: Term, supply: FreshSupply | None = None
) -> tuple[Skeleton, TypeEnv, FreshSupply]:
    """Build the initial skeleton of `m`.

    Args:
        m (Term): Any term
        supply (FreshSupply): Source of fresh names, defaults to a0.. / s0..

    Returns:
        tuple: The skeleton, the variable environment typing fv(m), and the
            advanced supply
    """
    supply = supply or FreshSupply()
    binders, theta, supply = _number_variables(m, supply)
    q, supply = _build(m, theta, iter(binders), supply)
    return q, theta, supply


# --- Rename-equivalence ---
def _bind(mapping: dict[str, str], key: str, value: str) -> bool:
    if mapping.setdefault(key, value) != value:
        return False
    return True


def _match_types(t2: Type, t1: Type, tmap: dict, emap: dict) -> bool:
    match t2, t1:
        case TVar(a), TVar(b):
            return _bind(tmap, a, b)
        case Arrow(d2, c2), Arrow(d1, c1):
            return _match_types(d2, d1, tmap, emap) and _match_types(c2, c1, tmap, emap)
        case Forall(a, b2), Forall(b, b1):
            return a == b and _match_types(b2, b1, tmap, emap)
        case EVarApp(s2, _, b2), EVarApp(s1, _, b1):
            return _bind(emap, s2, s1) and _match_types(b2, b1, tmap, emap)
    return False


def _match_envs(e2: TypeEnv, e1: TypeEnv, tmap: dict, emap: dict) -> bool:
    if e2.support() != e1.support():
        return False
    return all(_match_types(t2, t1, tmap, emap) for t2, t1 in zip(e2.types(), e1.types()))


def _match_skeletons(q2: Skeleton, q1: Skeleton, tmap: dict, emap: dict) -> bool:
    match q2, q1:
        case QVar(x2, env2), QVar(x1, env1):
            return x2 == x1 and _match_envs(env2, env1, tmap, emap)
        case QAbs(x2, b2), QAbs(x1, b1):
            return x2 == x1 and _match_skeletons(b2, b1, tmap, emap)
        case QApp(f2, a2), QApp(f1, a1):
            return _match_skeletons(f2, f1, tmap, emap) and _match_skeletons(a2, a1, tmap, emap)
        case QForall(a, b2), QForall(b, b1):
            return a == b and _match_skeletons(b2, b1, tmap, emap)
        case QEVar(s2, _, b2), QEVar(s1, _, b1):
            return _bind(emap, s2, s1) and _match_skeletons(b2, b1, tmap, emap)
        case QSub(b2, t2), QSub(b1, t1):
            return _match_skeletons(b2, b1, tmap, emap) and _match_types(t2, t1, tmap, emap)
        case QWeak(b2, x2), QWeak(b1, x1):
            return _match_skeletons(b2, b1, tmap, emap) and _match_envs(x2, x1, tmap, emap)
    return False


def rename_equiv(q1: Skeleton, q2: Skeleton) -> Substitution | None:
    """Find a renaming φ with `apply_subst(φ, q2) == q1`, or None.

    Type variables map to type variables and E-variables to E-expansions
    `s^{} id`.
    """
    tmap: dict[str, str] = {}
    emap: dict[str, str] = {}
    if not _match_skeletons(q2, q1, tmap, emap):
        return None
    if len(set(tmap.values())) != len(tmap) or len(set(emap.values())) != len(emap):
        return None
    phi = Substitution(
        tuple(TypeBinding(a, TVar(b)) for a, b in tmap.items() if a != b)
        + tuple(ExpansionBinding(s, EVarIntro(t, EMPTY, Id())) for s, t in emap.items())
    )
    return phi if apply_subst(phi, q2) == q1 else None


# --- Reflexive constraints ---
def reflexive(c: Constraint) -> bool:
    match c:
        case Omega():
            return True
        case Atomic(lhs, rhs):
            return type_eq(lhs, rhs)
        case And(left, right):
            return reflexive(left) and reflexive(right)
        case Exists(_, body) | EGuard(_, _, _, body):
            return reflexive(body)
    raise TypeError(f"not a constraint: {c!r}")


def constraint_remainder(whole: Constraint, part: Constraint) -> Constraint | None:
    """The prefixed atoms of `whole` missing from `part`, or None when `part` is not included."""
    prefix = binder_prefix(ftv(whole) | ftv(part))
    have = prefixed_atoms(whole, prefix)
    need = prefixed_atoms(part, prefix)
    if any(item not in have for item in need):
        return None
    rest: Constraint = Omega()
    for wrappers, leaf in reversed([item for item in have if item not in need]):
        for w in reversed(wrappers):
            leaf = Exists(w[1], leaf) if w[0] == "ex" else EGuard(w[1], w[2], w[3], leaf)
        rest = leaf if isinstance(rest, Omega) else And(leaf, rest)
    return rest


# --- Deriving substitutions ---
def _peel(q: Skeleton, ambient: TypeEnv) -> tuple[list[Skeleton], Skeleton, TypeEnv]:
    """Split decorations (∀, |>, s^Δ) off `q`; weakenings feed the ambient environment."""
    decorations: list[Skeleton] = []
    while True:
        match q:
            case QForall(_, body) | QSub(body, _) | QEVar(_, _, body):
                decorations.append(q)
                q = body
            case QWeak(body, extra):
                ambient = ambient.concat(extra)
                q = body
            case _:
                return decorations, q, ambient


def _expansion(decorations: list[Skeleton], forbidden: frozenset[str]) -> Expansion:
    exp: Expansion = Id()
    for node in reversed(decorations):
        match node:
            case QForall(binder, _):
                exp = ForallIntro(binder, exp)
            case QSub(_, target):
                exp = SubStep(exp, target)
            case QEVar(evar, extra, _):
                exp = EVarIntro(evar, extra - forbidden, exp)
    return exp


def _visible_env(core: Skeleton, ambient: TypeEnv) -> TypeEnv:
    env = check_skeleton(core).env
    return env.concat(ambient.without(*env.support()))


def _derive(qi: Skeleton, qt: Skeleton, ambient: TypeEnv) -> list:
    if not isinstance(qi, QEVar):
        raise DerivationError("initial skeleton node is not under an E-variable", qi)
    evar, _, core_i = qi.evar, qi.forbidden, qi.body
    decorations, core_t, ambient = _peel(qt, ambient)
    visible = _visible_env(core_t, ambient)
    image = frozenset().union(
        *(ftv(visible.lookup(x)) for x in check_skeleton(core_i).env.support() if x in visible)
    )
    head: list = []
    tail: list = []

    match core_i, core_t:
        case QVar(x, theta), QVar(y, _) if x == y:
            for name, a in theta:
                t = visible.lookup(name)
                if t is not None:
                    head.append(TypeBinding(a.name, t))
        case (QAbs(x, body_i) | QWeak(QAbs(x, body_i), _)), QAbs(y, body_t):
            if y != x:
                body_t = rename_term_var(body_t, y, x)
            head.extend(_derive(body_i, body_t, ambient.without(x)))
            binder_type = check_skeleton(body_t).env.lookup(x)
            a = check_skeleton(body_i).env.lookup(x)
            if binder_type is not None and isinstance(a, TVar):
                head.append(TypeBinding(a.name, binder_type))
        case QApp(QSub(fun_i, Arrow(_, TVar(a))), arg_i), QApp(fun_t, arg_t):
            head.extend(_derive(fun_i, fun_t, ambient))
            head.extend(_derive(arg_i, arg_t, ambient))
            arrow = arrow_view(check_skeleton(fun_t).rtype)
            if arrow is None:
                raise DerivationError("target function side has no arrow type", fun_t)
            tail.append(TypeBinding(a, arrow.cod))
        case _:
            raise DerivationError("target skeleton does not follow the term structure", qt)

    return head + [ExpansionBinding(evar, _expansion(decorations, image))] + tail


def _dedupe(bindings: list) -> Substitution:
    seen: set[tuple[str, str]] = set()
    kept = []
    for b in bindings:
        key = ("t", b.var) if isinstance(b, TypeBinding) else ("e", b.evar)
        if key not in seen:
            seen.add(key)
            kept.append(b)
    return Substitution(tuple(kept))


def derive_substitution(q_init: Skeleton, q_target: Skeleton) -> tuple[Substitution, TypeEnv]:
    """Specialise an initial skeleton to an arbitrary derivation of the same term.

    Args:
        q_init (Skeleton): An initial skeleton of term m
        q_target (Skeleton): Any valid skeleton for m

    Returns:
        tuple: φ and Γ' such that `QWeak(apply_subst(φ, q_init), Γ')` derives
            the target judgement with an extra reflexive constraint
    """
    m = term_of(q_init)
    if not term_alpha_eq(m, term_of(q_target)):
        raise TermMismatch("the two skeletons type different terms", q_target)
    try:
        target_env = check_skeleton(q_target).env
    except SkeletonError as e:
        raise PreconditionViolation(f"target skeleton is invalid: {e.message}", q_target) from e

    unused = [x for x in target_env.support() if x not in fv(m)]
    extra = target_env.restrict(unused)
    target = strengthen(q_target, unused)
    phi = _dedupe(_derive(q_init, target, TypeEnv()))

    result = apply_subst(phi, q_init)
    try:
        got = check_skeleton(result)
    except SkeletonError as e:
        raise DerivationError(f"derived skeleton is invalid: {e.message}", result) from e
    want = check_skeleton(target)
    if not env_equal(got.env, want.env) or not type_eq(got.rtype, want.rtype):
        raise DerivationError("derived judgement differs from the target", result)
    rest = constraint_remainder(got.constraint, want.constraint)
    if rest is None or not reflexive(rest):
        raise DerivationError("derived constraint leaves a non-reflexive remainder", result)
    return phi, extra
