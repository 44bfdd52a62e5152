"""subject_reduction.py.

Call-by-value reduction and the skeleton transformation that follows it.

`cbv_step` performs one call-by-value step on a term. `preserve` takes a
solved skeleton for `M` and a term `M'` with `M -> M'` and builds a solved
skeleton for `M'` with the same environment and type: the skeleton is
elaborated into explicit subtyping proofs, the redex is rewritten there
(the abstraction side is first put into head form by `transform_T`) and
the result is flattened back.

To use as a module, call

```python
from subject_reduction import preserve, reduce_trace

q2 = preserve(q, cbv_step(term_of(q)))
for term, skeleton in reduce_trace(q, max_steps=10):
    ...
```
"""

from core_syntax import (
    Abs,
    App,
    Skeleton,
    Term,
    TypeEnv,
    Var,
    alpha_eq,
    env_equal,
    fresh_variant,
    fv,
    term_alpha_eq,
    type_eq,
)
from fs_errors import BadSubProof, NotAStep, PreservationError, UnboundVariable
from neq_system import (
    EnvSub,
    NAbs,
    NApp,
    NEVar,
    NForall,
    NSub,
    NVar,
    NWeak,
    NeqSkeleton,
    check_neq,
    from_neq,
    rename_term_var_neq,
    term_vars_neq,
    to_neq,
    transform_T,
)
from solvedness import LEQ_F, solved
from subtyping_proofs import equality_steps, invert_proof
from typing_engine import check_skeleton, term_of


# --- Terms ---
def is_value(m: Term) -> bool:
    return isinstance(m, (Var, Abs))


def _term_names(m: Term) -> frozenset[str]:
    match m:
        case Var(name):
            return frozenset({name})
        case Abs(binder, body):
            return _term_names(body) | {binder}
        case App(fun, arg):
            return _term_names(fun) | _term_names(arg)
    raise TypeError(f"not a term: {m!r}")


def subst_term(m: Term, x: str, v: Term) -> Term:
    """Capture-avoiding `m[x := v]`."""
    match m:
        case Var(name):
            return v if name == x else m
        case App(fun, arg):
            return App(subst_term(fun, x, v), subst_term(arg, x, v))
        case Abs(binder, body):
            if binder == x:
                return m
            if binder in fv(v):
                new = fresh_variant(binder, _term_names(body) | _term_names(v) | {x})
                body, binder = subst_term(body, binder, Var(new)), new
            return Abs(binder, subst_term(body, x, v))
    raise TypeError(f"not a term: {m!r}")


def cbv_step(m: Term) -> Term | None:
    """One call-by-value step, or None when `m` is a value or stuck."""
    match m:
        case App(fun, arg):
            if not is_value(fun):
                reduced = cbv_step(fun)
                return None if reduced is None else App(reduced, arg)
            if not is_value(arg):
                reduced = cbv_step(arg)
                return None if reduced is None else App(fun, reduced)
            if isinstance(fun, Abs):
                return subst_term(fun.body, fun.binder, arg)
    return None


# --- Explicit skeleton surgery ---
def strengthen_neq(q: NeqSkeleton, names: frozenset[str]) -> NeqSkeleton:
    if not names:
        return q
    match q:
        case NVar(var, env):
            if var in names:
                raise UnboundVariable(f"cannot drop {var}: the skeleton uses it")
            return NVar(var, env.without(*names))
        case NAbs(binder, body):
            return NAbs(binder, strengthen_neq(body, names - {binder}))
        case NApp(fun, arg):
            return NApp(strengthen_neq(fun, names), strengthen_neq(arg, names))
        case NForall(binder, body):
            return NForall(binder, strengthen_neq(body, names))
        case NEVar(evar, forbidden, body):
            return NEVar(evar, forbidden, strengthen_neq(body, names))
        case NSub(body, proof):
            return NSub(strengthen_neq(body, names), proof)
        case EnvSub(body, var, proof):
            inner = strengthen_neq(body, names)
            return inner if var in names else EnvSub(inner, var, proof)
        case NWeak(body, extra):
            inner = strengthen_neq(body, names)
            rest = extra.without(*names)
            return NWeak(inner, rest) if len(rest) else inner
    raise TypeError(f"not an explicit skeleton: {q!r}")


def retarget(q: NeqSkeleton, env: TypeEnv) -> NeqSkeleton:
    """Move `q` into environment `env`, which agrees with it up to type equality."""
    j = check_neq(q)
    drop = frozenset(j.env.support()) - frozenset(env.support())
    if drop & fv(j.term):
        raise PreservationError("the argument uses a variable hidden at its new position")
    q = strengthen_neq(q, drop)
    for x, t in j.env:
        goal = env.lookup(x)
        if goal is None or alpha_eq(t, goal):
            continue
        try:
            steps = equality_steps(t, goal)
        except BadSubProof as e:
            raise PreservationError(f"the argument sees {x} at an unrelated type") from e
        for step in steps:
            q = EnvSub(q, x, invert_proof(step))
    missing = [x for x in env.support() if x not in j.env]
    if missing:
        q = NWeak(q, env.restrict(missing))
    return q


def substitute(q: NeqSkeleton, x: str, arg: NeqSkeleton) -> NeqSkeleton:
    """Replace the uses of `x` in `q` by the skeleton `arg`, removing `x` from every environment.

    Args:
        q (NeqSkeleton): Skeleton whose environment holds `x`
        x (str): The variable to eliminate
        arg (NeqSkeleton): Skeleton typed at the type of `x`

    Returns:
        NeqSkeleton: A skeleton for the substituted term
    """
    env = check_neq(q).env
    if x not in env:
        return q
    match q:
        case NVar(var, _) if var == x:
            return retarget(arg, env.without(x))
        case NVar(var, _):
            return NVar(var, env.without(x))
        case NAbs(binder, body):
            arg_j = check_neq(arg)
            if binder in fv(arg_j.term) or binder in arg_j.env:
                avoid = term_vars_neq(body) | term_vars_neq(arg) | {x}
                new = fresh_variant(binder, avoid)
                body, binder = rename_term_var_neq(body, binder, new), new
            return NAbs(binder, substitute(body, x, arg))
        case NApp(fun, right):
            return NApp(substitute(fun, x, arg), substitute(right, x, arg))
        case NForall(binder, body):
            return NForall(binder, substitute(body, x, arg))
        case NEVar(evar, forbidden, body):
            return NEVar(evar, forbidden, substitute(body, x, arg))
        case NSub(body, proof):
            return NSub(substitute(body, x, arg), proof)
        case EnvSub(body, var, proof) if var == x:
            return substitute(body, x, NSub(arg, proof))
        case EnvSub(body, var, proof):
            return EnvSub(substitute(body, x, arg), var, proof)
        case NWeak(body, extra) if x in extra:
            rest = extra.without(x)
            return NWeak(body, rest) if len(rest) else body
        case NWeak(body, extra):
            if set(extra.support()) & fv(check_neq(arg).term):
                raise PreservationError("the argument uses a variable weakened inside the abstraction")
            return NWeak(substitute(body, x, arg), extra)
    raise TypeError(f"not an explicit skeleton: {q!r}")


def _head_abstraction(q: NeqSkeleton) -> NAbs:
    seen = []
    while not isinstance(q, NAbs):
        if q in seen:
            raise PreservationError("the function side has no abstraction head")
        seen.append(q)
        q = transform_T(q)
    return q


def reduce_neq(q: NeqSkeleton) -> NeqSkeleton:
    """Rewrite `q` along the call-by-value step of its term."""
    match q:
        case NForall(binder, body):
            return NForall(binder, reduce_neq(body))
        case NEVar(evar, forbidden, body):
            return NEVar(evar, forbidden, reduce_neq(body))
        case NSub(body, proof):
            return NSub(reduce_neq(body), proof)
        case EnvSub(body, var, proof):
            return EnvSub(reduce_neq(body), var, proof)
        case NWeak(body, extra):
            return NWeak(reduce_neq(body), extra)
        case NApp(fun, arg):
            mf = check_neq(fun).term
            ma = check_neq(arg).term
            if not is_value(mf):
                return NApp(reduce_neq(fun), arg)
            if not is_value(ma):
                return NApp(fun, reduce_neq(arg))
            head = _head_abstraction(fun)
            return substitute(head.body, head.binder, arg)
    raise PreservationError("no redex under this skeleton")


def preserve(q: Skeleton, m_next: Term) -> Skeleton:
    """A solved skeleton for the reduct, with the same environment and type.

    Args:
        q (Skeleton): A valid skeleton whose constraint is solved under ≤F
        m_next (Term): The call-by-value reduct of the term of `q`

    Returns:
        Skeleton: A valid, solved skeleton for `m_next`
    """
    m = term_of(q)
    expected = cbv_step(m)
    if expected is None or not term_alpha_eq(expected, m_next):
        raise NotAStep("the given term is not the call-by-value reduct", q)
    before = check_skeleton(q)
    result = from_neq(reduce_neq(to_neq(q)))
    after = check_skeleton(result)
    if not env_equal(before.env, after.env) or not type_eq(before.rtype, after.rtype):
        raise PreservationError("the reduct skeleton changed the judgement", result)
    if not solved(after.constraint, LEQ_F):
        raise PreservationError("the reduct skeleton is not solved", result)
    return result


def reduce_trace(q: Skeleton, max_steps: int = 50) -> list[tuple[Term, Skeleton]]:
    trace = [(term_of(q), q)]
    for _ in range(max_steps):
        m_next = cbv_step(trace[-1][0])
        if m_next is None:
            break
        trace.append((m_next, preserve(trace[-1][1], m_next)))
    return trace
