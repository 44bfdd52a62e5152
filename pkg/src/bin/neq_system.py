"""neq_system.py.

Skeletons with explicit subtyping proofs.

In this system every use of subtyping carries a proof term (see
`subtyping_proofs`), types are compared by strict α-equivalence, an
environment entry may be rewritten along an equality proof (`EnvSub`), and
there are no constraints. A valid skeleton of the main system whose
constraint is solved under ≤F elaborates into this system (`to_neq`) and
back (`from_neq`).

The transformation `transform_T` rewrites a skeleton so that subtyping
steps are pushed into its head: a skeleton typing an abstraction at an
arrow type becomes an abstraction skeleton. `sz` is the measure that
decreases under it.
"""

from dataclasses import dataclass

from core_syntax import (
    Abs,
    App,
    Arrow,
    EVarApp,
    Forall,
    QAbs,
    QApp,
    QEVar,
    QForall,
    QSub,
    QVar,
    QWeak,
    Skeleton,
    Substitution,
    Term,
    TVar,
    Type,
    TypeBinding,
    TypeEnv,
    Var,
    alpha_eq,
    canonical_type,
    fresh_variant,
    ftv,
    type_eq,
)
from expansion_subst import image_ftv, subst_type
from fs_errors import (
    BadSubProof,
    DomainMismatch,
    EnvironmentMismatch,
    EscapingVariable,
    ForbiddenSetTooSmall,
    MalformedEnv,
    NotAnArrow,
    NotSolved,
    SupportOverlap,
    UnboundVariable,
)
from solvedness import LEQ_F, leq_f_witness, solved
from subtyping_proofs import (
    DummyElim,
    DummyIn,
    EVarCong,
    FunCong,
    Inst,
    QuantComm,
    QuantCong,
    Relation,
    SubProof,
    check_subproof,
    equality_steps,
    invert_proof,
)
from typing_engine import check_skeleton


# --- Skeletons ---
@dataclass(frozen=True)
class NVar:
    var: str
    env: TypeEnv


@dataclass(frozen=True)
class NAbs:
    binder: str
    body: "NeqSkeleton"


@dataclass(frozen=True)
class NApp:
    fun: "NeqSkeleton"
    arg: "NeqSkeleton"


@dataclass(frozen=True)
class NForall:
    binder: str
    body: "NeqSkeleton"


@dataclass(frozen=True)
class NEVar:
    evar: str
    forbidden: frozenset[str]
    body: "NeqSkeleton"


@dataclass(frozen=True)
class NSub:
    body: "NeqSkeleton"
    proof: SubProof


@dataclass(frozen=True)
class EnvSub:
    """Retype `var` in the environment: the body sees the proof's target type."""

    body: "NeqSkeleton"
    var: str
    proof: SubProof


@dataclass(frozen=True)
class NWeak:
    body: "NeqSkeleton"
    extra: TypeEnv


type NeqSkeleton = NVar | NAbs | NApp | NForall | NEVar | NSub | EnvSub | NWeak


@dataclass(frozen=True)
class NeqJudgement:
    term: Term
    env: TypeEnv
    rtype: Type


def envs_alpha_equal(e1: TypeEnv, e2: TypeEnv) -> bool:
    if sorted(e1.support()) != sorted(e2.support()):
        return False
    return all(alpha_eq(t, e2.lookup(x)) for x, t in e1)


def check_neq(q: NeqSkeleton) -> NeqJudgement:
    """Validate `q` and return its judgement."""
    match q:
        case NVar(var, env):
            if not env.is_well_formed():
                raise MalformedEnv(f"variable {var} sits in a malformed environment", q)
            t = env.lookup(var)
            if t is None:
                raise UnboundVariable(f"{var} is not in its environment", q)
            return NeqJudgement(Var(var), env, t)
        case NAbs(binder, body):
            j = check_neq(body)
            t = j.env.lookup(binder)
            if t is None:
                raise UnboundVariable(f"abstraction binder {binder} missing from body environment", q)
            return NeqJudgement(Abs(binder, j.term), j.env.without(binder), Arrow(t, j.rtype))
        case NApp(fun, arg):
            jf = check_neq(fun)
            ja = check_neq(arg)
            if not isinstance(jf.rtype, Arrow):
                raise NotAnArrow("function side of an application has no arrow type", q)
            if not alpha_eq(jf.rtype.dom, ja.rtype):
                raise DomainMismatch("argument type differs from the function domain", q)
            if not envs_alpha_equal(jf.env, ja.env):
                raise EnvironmentMismatch("application branches use different environments", q)
            return NeqJudgement(App(jf.term, ja.term), jf.env, jf.rtype.cod)
        case NForall(binder, body):
            j = check_neq(body)
            if binder in ftv(j.env):
                raise EscapingVariable(f"{binder} is free in the environment", q)
            return NeqJudgement(j.term, j.env, Forall(binder, j.rtype))
        case NEVar(evar, forbidden, body):
            j = check_neq(body)
            if not ftv(j.env) <= forbidden:
                raise ForbiddenSetTooSmall(f"{evar} does not forbid the environment", q)
            return NeqJudgement(j.term, j.env, EVarApp(evar, forbidden, j.rtype))
        case NSub(body, proof):
            j = check_neq(body)
            source, target, _ = check_subproof(proof)
            if not alpha_eq(source, j.rtype):
                raise BadSubProof("proof source differs from the skeleton type", q)
            return NeqJudgement(j.term, j.env, target)
        case EnvSub(body, var, proof):
            j = check_neq(body)
            source, target, relation = check_subproof(proof)
            if relation is not Relation.EQUALITY:
                raise BadSubProof("environment rewriting needs an equality proof", q)
            current = j.env.lookup(var)
            if current is None or not alpha_eq(current, target):
                raise BadSubProof(f"proof target differs from the type of {var}", q)
            return NeqJudgement(j.term, j.env.replace(var, source), j.rtype)
        case NWeak(body, extra):
            j = check_neq(body)
            if not extra.is_well_formed():
                raise MalformedEnv("weakening environment is malformed", q)
            if set(j.env.support()) & set(extra.support()):
                raise SupportOverlap("weakening repeats a variable", q)
            return NeqJudgement(j.term, j.env.concat(extra), j.rtype)
    raise TypeError(f"not an explicit skeleton: {q!r}")


# --- Elaboration ---
def wrap_chain(q: NeqSkeleton, chain: list[SubProof]) -> NeqSkeleton:
    for p in chain:
        q = NSub(q, p)
    return q


def subtype_chain(source: Type, target: Type) -> list[SubProof]:
    """Proof chain for a solved atom `source <=F target`."""
    if type_eq(source, target):
        return equality_steps(source, target)
    w = leq_f_witness(source, target)
    if w is None:
        raise NotSolved("atomic constraint does not hold under F")
    quantified = Forall(w.binder, w.body)
    return (
        equality_steps(source, quantified)
        + [Inst(quantified, w.arg)]
        + equality_steps(subst_type(w.body, w.binder, w.arg), target)
    )


def _coerce_env(q: NeqSkeleton, have: TypeEnv, want: TypeEnv) -> NeqSkeleton:
    """Rewrite entries of `have` into the α-class of `want` with EnvSub layers."""
    for x, t in have:
        goal = want.lookup(x)
        if goal is None or alpha_eq(t, goal):
            continue
        for step in equality_steps(t, goal):
            q = EnvSub(q, x, invert_proof(step))
    return q


def _elaborate(q: Skeleton) -> NeqSkeleton:
    match q:
        case QVar(var, env):
            return NVar(var, env)
        case QAbs(binder, body):
            return NAbs(binder, _elaborate(body))
        case QForall(binder, body):
            return NForall(binder, _elaborate(body))
        case QEVar(evar, forbidden, body):
            return NEVar(evar, forbidden, _elaborate(body))
        case QWeak(body, extra):
            return NWeak(_elaborate(body), extra)
        case QSub(body, target):
            inner = _elaborate(body)
            return wrap_chain(inner, subtype_chain(check_neq(inner).rtype, target))
        case QApp(fun, arg):
            nf = _elaborate(fun)
            jf = check_neq(nf)
            if not isinstance(jf.rtype, Arrow):
                nf = wrap_chain(nf, equality_steps(jf.rtype, canonical_type(jf.rtype)))
                jf = check_neq(nf)
            na = _elaborate(arg)
            ja = check_neq(na)
            if not alpha_eq(jf.rtype.dom, ja.rtype):
                na = wrap_chain(na, equality_steps(ja.rtype, jf.rtype.dom))
            na = _coerce_env(na, ja.env, jf.env)
            return NApp(nf, na)
    raise TypeError(f"not a skeleton: {q!r}")


def to_neq(q: Skeleton) -> NeqSkeleton:
    """Elaborate a solved skeleton into one with explicit subtyping proofs.

    Args:
        q (Skeleton): A valid skeleton whose constraint is solved under ≤F

    Returns:
        NeqSkeleton: The elaborated skeleton, same term, environment and type
    """
    j = check_skeleton(q)
    if not solved(j.constraint, LEQ_F):
        raise NotSolved("the skeleton's constraint is not solved under F", q)
    return _elaborate(q)


def retype_var(q: Skeleton, var: str, t: Type) -> Skeleton:
    """Give the free term variable `var` the type `t` in every environment of `q`."""
    match q:
        case QVar(x, env):
            return QVar(x, env.replace(var, t))
        case QAbs(binder, body):
            return q if binder == var else QAbs(binder, retype_var(body, var, t))
        case QApp(fun, arg):
            return QApp(retype_var(fun, var, t), retype_var(arg, var, t))
        case QForall(binder, body):
            return QForall(binder, retype_var(body, var, t))
        case QEVar(evar, forbidden, body):
            return QEVar(evar, forbidden, retype_var(body, var, t))
        case QSub(body, target):
            return QSub(retype_var(body, var, t), target)
        case QWeak(body, extra):
            return QWeak(retype_var(body, var, t), extra.replace(var, t))
    raise TypeError(f"not a skeleton: {q!r}")


def from_neq(q: NeqSkeleton) -> Skeleton:
    """Flatten proofs back to subtyping targets; EnvSub becomes retyped environments."""
    match q:
        case NVar(var, env):
            return QVar(var, env)
        case NAbs(binder, body):
            return QAbs(binder, from_neq(body))
        case NApp(fun, arg):
            return QApp(from_neq(fun), from_neq(arg))
        case NForall(binder, body):
            return QForall(binder, from_neq(body))
        case NEVar(evar, forbidden, body):
            return QEVar(evar, forbidden, from_neq(body))
        case NSub(body, proof):
            return QSub(from_neq(body), check_subproof(proof)[1])
        case EnvSub(body, var, proof):
            return retype_var(from_neq(body), var, check_subproof(proof)[0])
        case NWeak(body, extra):
            return QWeak(from_neq(body), extra)
    raise TypeError(f"not an explicit skeleton: {q!r}")


# --- Size ---
def sz(q: NeqSkeleton) -> int:
    match q:
        case NAbs():
            return 1
        case NVar() | NApp():
            return 2
        case NForall(_, body) | NEVar(_, _, body) | EnvSub(body, _, _) | NWeak(body, _):
            return 1 + sz(body)
        case NSub(body, proof):
            match proof:
                case QuantCong(_, inner):
                    return 1 + sz(NSub(body, inner))
                case EVarCong(_, _, inner):
                    return 2 + sz(NSub(body, inner))
                case DummyIn():
                    return 2 + sz(body)
                case _:
                    return 1 + sz(body)
    raise TypeError(f"not an explicit skeleton: {q!r}")


# --- Type substitution ---
def ftv_neq(q) -> frozenset[str]:
    """Free type variables of an explicit skeleton or proof."""
    match q:
        case NVar(_, env):
            return ftv(env)
        case NAbs(_, body):
            return ftv_neq(body)
        case NApp(fun, arg):
            return ftv_neq(fun) | ftv_neq(arg)
        case NForall(binder, body):
            return ftv_neq(body) - {binder}
        case NEVar(_, forbidden, body):
            return forbidden | ftv_neq(body)
        case NSub(body, proof) | EnvSub(body, _, proof):
            return ftv_neq(body) | ftv_neq(proof)
        case NWeak(body, extra):
            return ftv_neq(body) | ftv(extra)
        case Inst(source, arg):
            return ftv(source) | ftv(arg)
        case QuantComm(first, second, body):
            return ftv(body) - {first, second}
        case DummyIn(body, _) | DummyElim(body, _):
            return ftv(body)
        case FunCong(dom, cod):
            return ftv_neq(dom) | ftv_neq(cod)
        case EVarCong(_, forbidden, proof):
            return forbidden | ftv_neq(proof)
        case QuantCong(var, proof):
            return ftv_neq(proof) - {var}
    raise TypeError(f"ftv_neq: unsupported subject {q!r}")


def subst_proof(p: SubProof, a: str, w: Type) -> SubProof:
    """Capture-avoiding `p[a := w]`."""
    free_w = ftv(w)
    match p:
        case Inst(source, arg):
            return Inst(subst_type(source, a, w), subst_type(arg, a, w))
        case QuantComm(first, second, body):
            if a in (first, second):
                return p
            avoid = free_w | ftv(body) | {a}
            if first in free_w:
                new = fresh_variant(first, avoid | {second})
                body, first = subst_type(body, first, TVar(new)), new
            if second in free_w:
                new = fresh_variant(second, avoid | {first})
                body, second = subst_type(body, second, TVar(new)), new
            return QuantComm(first, second, subst_type(body, a, w))
        case DummyIn(body, var) | DummyElim(body, var):
            new_body = subst_type(body, a, w)
            new_var = var if var not in ftv(new_body) else fresh_variant(var, ftv(new_body))
            return type(p)(new_body, new_var)
        case FunCong(dom, cod):
            return FunCong(subst_proof(dom, a, w), subst_proof(cod, a, w))
        case EVarCong(evar, forbidden, proof):
            image = image_ftv(Substitution((TypeBinding(a, w),)), forbidden)
            return EVarCong(evar, image, subst_proof(proof, a, w))
        case QuantCong(var, proof):
            if var == a:
                return p
            if var in free_w:
                new = fresh_variant(var, free_w | ftv_neq(proof) | {a})
                proof, var = subst_proof(proof, var, TVar(new)), new
            return QuantCong(var, subst_proof(proof, a, w))
    raise TypeError(f"not a subtyping proof: {p!r}")


def subst_tvar_neq(q: NeqSkeleton, a: str, w: Type) -> NeqSkeleton:
    """Capture-avoiding type substitution `q[a := w]` over an explicit skeleton."""
    match q:
        case NVar(var, env):
            return NVar(var, env.map_types(lambda t: subst_type(t, a, w)))
        case NAbs(binder, body):
            return NAbs(binder, subst_tvar_neq(body, a, w))
        case NApp(fun, arg):
            return NApp(subst_tvar_neq(fun, a, w), subst_tvar_neq(arg, a, w))
        case NForall(binder, body):
            if binder == a:
                return q
            if binder in ftv(w):
                new = fresh_variant(binder, ftv(w) | ftv_neq(body) | {a})
                body, binder = subst_tvar_neq(body, binder, TVar(new)), new
            return NForall(binder, subst_tvar_neq(body, a, w))
        case NEVar(evar, forbidden, body):
            image = image_ftv(Substitution((TypeBinding(a, w),)), forbidden)
            return NEVar(evar, image, subst_tvar_neq(body, a, w))
        case NSub(body, proof):
            return NSub(subst_tvar_neq(body, a, w), subst_proof(proof, a, w))
        case EnvSub(body, var, proof):
            return EnvSub(subst_tvar_neq(body, a, w), var, subst_proof(proof, a, w))
        case NWeak(body, extra):
            return NWeak(
                subst_tvar_neq(body, a, w), extra.map_types(lambda t: subst_type(t, a, w))
            )
    raise TypeError(f"not an explicit skeleton: {q!r}")


def rename_term_var_neq(q: NeqSkeleton, old: str, new: str) -> NeqSkeleton:
    match q:
        case NVar(var, env):
            return NVar(new if var == old else var, env.rename(old, new))
        case NAbs(binder, body):
            return q if binder == old else NAbs(binder, rename_term_var_neq(body, old, new))
        case NApp(fun, arg):
            return NApp(rename_term_var_neq(fun, old, new), rename_term_var_neq(arg, old, new))
        case NForall(binder, body):
            return NForall(binder, rename_term_var_neq(body, old, new))
        case NEVar(evar, forbidden, body):
            return NEVar(evar, forbidden, rename_term_var_neq(body, old, new))
        case NSub(body, proof):
            return NSub(rename_term_var_neq(body, old, new), proof)
        case EnvSub(body, var, proof):
            return EnvSub(rename_term_var_neq(body, old, new), new if var == old else var, proof)
        case NWeak(body, extra):
            return NWeak(rename_term_var_neq(body, old, new), extra.rename(old, new))
    raise TypeError(f"not an explicit skeleton: {q!r}")


def term_vars_neq(q: NeqSkeleton) -> frozenset[str]:
    """Every term variable mentioned anywhere in `q`."""
    match q:
        case NVar(var, env):
            return frozenset(env.support()) | {var}
        case NAbs(binder, body):
            return term_vars_neq(body) | {binder}
        case NApp(fun, arg):
            return term_vars_neq(fun) | term_vars_neq(arg)
        case NForall(_, body) | NEVar(_, _, body) | NSub(body, _):
            return term_vars_neq(body)
        case EnvSub(body, var, _):
            return term_vars_neq(body) | {var}
        case NWeak(body, extra):
            return term_vars_neq(body) | frozenset(extra.support())
    raise TypeError(f"not an explicit skeleton: {q!r}")


# --- The transformation ---
def _push_env_sub(t: NeqSkeleton, var: str, proof: SubProof) -> NeqSkeleton:
    match t:
        case NAbs(binder, body) if binder != var:
            return NAbs(binder, EnvSub(body, var, proof))
        case NEVar(evar, forbidden, body):
            return NEVar(evar, forbidden, EnvSub(body, var, proof))
        case NForall(binder, body) if binder not in ftv_neq(proof):
            return NForall(binder, EnvSub(body, var, proof))
    return EnvSub(t, var, proof)


def _push_weak(t: NeqSkeleton, extra: TypeEnv) -> NeqSkeleton:
    match t:
        case NAbs(binder, body):
            if binder in extra:
                new = fresh_variant(binder, term_vars_neq(body) | frozenset(extra.support()))
                body, binder = rename_term_var_neq(body, binder, new), new
            return NAbs(binder, NWeak(body, extra))
        case NForall(binder, body):
            if binder in ftv(extra):
                new = fresh_variant(binder, ftv(extra) | ftv_neq(body))
                body, binder = subst_tvar_neq(body, binder, TVar(new)), new
            return NForall(binder, NWeak(body, extra))
        case NEVar(evar, forbidden, body) if ftv(extra) <= forbidden:
            return NEVar(evar, forbidden, NWeak(body, extra))
    return NWeak(t, extra)


def transform_T(q: NeqSkeleton) -> NeqSkeleton:
    """Push subtyping proofs into the head of `q`, keeping its judgement.

    Args:
        q (NeqSkeleton): A valid explicit skeleton

    Returns:
        NeqSkeleton: An equivalent skeleton, no larger under `sz`
    """
    match q:
        case NAbs() | NEVar() | NVar() | NApp():
            return q
        case NForall(binder, body):
            return NForall(binder, transform_T(body))
        case EnvSub(body, var, proof):
            return _push_env_sub(transform_T(body), var, proof)
        case NWeak(body, extra):
            return _push_weak(transform_T(body), extra)
        case NSub(body, proof):
            return _transform_sub(body, proof)
    raise TypeError(f"not an explicit skeleton: {q!r}")


def _transform_sub(body: NeqSkeleton, proof: SubProof) -> NeqSkeleton:
    if isinstance(proof, DummyIn):
        var = proof.var
        env = check_neq(body).env
        if var in ftv(env):
            var = fresh_variant(var, ftv(env) | ftv(proof.body) | ftv_neq(body))
        return NForall(var, body)

    t = transform_T(body)
    match proof, t:
        case Inst(_, arg), NForall(binder, inner):
            return transform_T(subst_tvar_neq(inner, binder, arg))
        case QuantComm(), NForall(first, inner):
            match transform_T(inner):
                case NForall(second, core):
                    return NForall(second, NForall(first, core))
        case FunCong(dom, cod), NAbs(binder, inner):
            return NAbs(binder, EnvSub(NSub(inner, cod), binder, dom))
        case QuantCong(var, inner_proof), NForall(binder, inner):
            if var != binder:
                avoid = (
                    ftv_neq(inner)
                    | ftv_neq(inner_proof)
                    | ftv(check_neq(body).env)
                    | {var, binder}
                )
                fresh = fresh_variant(var, avoid)
                inner = subst_tvar_neq(inner, binder, TVar(fresh))
                inner_proof = subst_proof(inner_proof, var, TVar(fresh))
                binder = fresh
            return NForall(binder, transform_T(NSub(inner, inner_proof)))
        case DummyElim(), NForall(_, inner):
            return transform_T(inner)
        case EVarCong(_, _, inner_proof), NEVar(evar, forbidden, inner):
            return NEVar(evar, forbidden, NSub(inner, inner_proof))
    return NSub(t, proof)
