"""Solved skeletons for reduction and erasure tests.

`solved_skeleton(m)` specialises the initial skeleton of a closed term to a
simply typed derivation: every E-variable is erased and the atomic
constraints are solved by first-order unification, which leaves only
reflexive atoms. `corpus()` enumerates such skeletons for small
combinations of closed combinators; `polymorphic_corpus()` adds hand-built
skeletons that need genuine instantiation, and `decorated_corpus()` derives
solved skeletons with quantifiers, instantiations and E-variables at inner
nodes.
"""

import sys
from itertools import product
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "bin"))

from core_syntax import (  # noqa: E402
    App,
    Arrow,
    ExpansionBinding,
    Id,
    QAbs,
    QApp,
    QEVar,
    QForall,
    QSub,
    QWeak,
    Skeleton,
    Substitution,
    Term,
    TVar,
    Type,
    TypeBinding,
    constraint_leaves,
    ftv,
    type_eq,
)
from expansion_subst import apply_subst  # noqa: E402
from fs_errors import FsError  # noqa: E402
from initial_skeleton import evars, initial_skeleton  # noqa: E402
from solvedness import LEQ_F, leq_f, solved  # noqa: E402
from surface import parse_skeleton, parse_term, parse_type  # noqa: E402
from typing_engine import check_skeleton, constraint_of, rtype  # noqa: E402

COMBINATORS = {
    "I": r"\x. x",
    "K": r"\x. \y. x",
    "KI": r"\x. \y. y",
    "T": r"\x. \f. f @ x",
    "B": r"\f. \g. \x. f @ (g @ x)",
    "C": r"\f. \x. \y. f @ y @ x",
}

SHADOWING_TERMS = [
    r"(\x. \x. x) @ (\y. y)",
    r"((\x. \x. x) @ (\y. y)) @ (\z. z)",
    r"(\x. (\x. x) @ x) @ (\y. y)",
]

POLYMORPHIC_SKELETONS = {
    "discard": r"(\x. s^{a,b} y<x: a -> a, y: b>) @ (\x. x<x: a, y: b>)",
    "self_app_id": (
        r"(\x. (x<x: all a. (a -> a)> |> ((all a. (a -> a)) -> all a. (a -> a)))"
        r" @ x<x: all a. (a -> a)>) @ (all a. \y. y<y: a>)"
    ),
    "id_at_id": r"((all a. \y. y<y: a>) |> ((b -> b) -> b -> b)) @ (\z. z<z: b>)",
}


def _resolve(t: Type, sub: dict[str, Type]) -> Type:
    match t:
        case TVar(name) if name in sub:
            return _resolve(sub[name], sub)
        case Arrow(dom, cod):
            return Arrow(_resolve(dom, sub), _resolve(cod, sub))
    return t


def _occurs(name: str, t: Type, sub: dict[str, Type]) -> bool:
    t = _resolve(t, sub)
    match t:
        case TVar(other):
            return other == name
        case Arrow(dom, cod):
            return _occurs(name, dom, sub) or _occurs(name, cod, sub)
    return False


def unify(pairs: list[tuple[Type, Type]]) -> dict[str, Type] | None:
    """Most general unifier of simple types, fully resolved, or None."""
    sub: dict[str, Type] = {}
    work = list(pairs)
    while work:
        left, right = work.pop()
        left, right = _resolve(left, sub), _resolve(right, sub)
        match left, right:
            case TVar(a), TVar(b) if a == b:
                continue
            case TVar(a), _:
                if _occurs(a, right, sub):
                    return None
                sub[a] = right
            case _, TVar(b):
                if _occurs(b, left, sub):
                    return None
                sub[b] = left
            case Arrow(d1, c1), Arrow(d2, c2):
                work += [(d1, d2), (c1, c2)]
            case _:
                return None
    return {name: _resolve(t, sub) for name, t in sub.items()}


def solved_skeleton(m: Term):
    """A solved, E-variable free skeleton for `m`, or None when `m` has no simple type."""
    q, _, _ = initial_skeleton(m)
    erase = Substitution(tuple(ExpansionBinding(s, Id()) for s in sorted(evars(q))))
    plain = apply_subst(erase, q)
    atoms = constraint_leaves(constraint_of(plain))
    mgu = unify([(atom.lhs, atom.rhs) for atom in atoms])
    if mgu is None:
        return None
    phi = Substitution(tuple(TypeBinding(a, t) for a, t in sorted(mgu.items())))
    return apply_subst(phi, plain)


def candidate_terms() -> list[Term]:
    base = [parse_term(text) for text in COMBINATORS.values()]
    terms = [App(f, a) for f, a in product(base, repeat=2)]
    terms += [App(App(f, a), b) for f, a, b in product(base, repeat=3)]
    terms += [App(f, App(a, b)) for f, a, b in product(base, repeat=3)]
    return terms


def corpus(limit: int = 60) -> list:
    """Deterministic list of solved skeletons for closed, reducible terms."""
    shadowing = [solved_skeleton(parse_term(text)) for text in SHADOWING_TERMS]
    found = []
    for m in candidate_terms():
        if len(found) + len(shadowing) >= limit:
            break
        q = solved_skeleton(m)
        if q is not None:
            found.append(q)
    return found + shadowing


def polymorphic_corpus() -> dict:
    return {name: parse_skeleton(text) for name, text in POLYMORPHIC_SKELETONS.items()}


# --- Inner decorations ---
POLY_INSTANCES = ["all c. (c -> c)", "all c. c", "d -> d"]


def skeleton_paths(q: Skeleton, prefix: tuple[int, ...] = ()) -> list[tuple[int, ...]]:
    """Positions of every node of `q`; 0 descends into the body or function, 1 into the argument."""
    paths = [prefix]
    match q:
        case QAbs(_, body) | QForall(_, body) | QEVar(_, _, body) | QSub(body, _) | QWeak(body, _):
            paths += skeleton_paths(body, prefix + (0,))
        case QApp(fun, arg):
            paths += skeleton_paths(fun, prefix + (0,)) + skeleton_paths(arg, prefix + (1,))
    return paths


def node_at(q: Skeleton, path: tuple[int, ...]) -> Skeleton:
    for step in path:
        match q:
            case QApp(fun, arg):
                q = arg if step else fun
            case QAbs(_, body) | QForall(_, body) | QEVar(_, _, body) | QSub(body, _) | QWeak(body, _):
                q = body
    return q


def _aim(old: Type, new: Type, target: Type) -> Type:
    if leq_f(new, target):
        return target
    return new if type_eq(old, target) else target


def decorate_at(q: Skeleton, path: tuple[int, ...], make) -> Skeleton:
    """Replace the node at `path` by `make(node)`.

    Subtyping steps above it keep their target while it still holds; a
    reflexive step that no longer holds follows the new type instead.
    """
    if not path:
        return make(q)
    rest = path[1:]
    match q:
        case QAbs(binder, body):
            return QAbs(binder, decorate_at(body, rest, make))
        case QForall(binder, body):
            return QForall(binder, decorate_at(body, rest, make))
        case QEVar(evar, forbidden, body):
            return QEVar(evar, forbidden, decorate_at(body, rest, make))
        case QWeak(body, extra):
            return QWeak(decorate_at(body, rest, make), extra)
        case QSub(body, target):
            new = decorate_at(body, rest, make)
            return QSub(new, _aim(rtype(body), rtype(new), target))
        case QApp(fun, arg) if path[0] == 0:
            return QApp(decorate_at(fun, rest, make), arg)
        case QApp(fun, arg):
            return QApp(fun, decorate_at(arg, rest, make))
    raise TypeError(f"not a skeleton: {q!r}")


def _solved_or_none(q: Skeleton) -> Skeleton | None:
    try:
        j = check_skeleton(q)
    except FsError:
        return None
    return q if solved(j.constraint, LEQ_F) else None


def try_decorate(q: Skeleton, path: tuple[int, ...], make) -> Skeleton | None:
    """`decorate_at`, kept only when the result is valid and solved."""
    try:
        result = decorate_at(q, path, make)
    except FsError:
        return None
    return _solved_or_none(result)


def generalise_at(q: Skeleton, path: tuple[int, ...]) -> Skeleton | None:
    """Quantify the node at `path` over a variable of its type that its environment leaves free."""
    j = check_skeleton(node_at(q, path))
    for name in sorted(ftv(j.rtype) - ftv(j.env)):
        result = try_decorate(q, path, lambda node: QForall(name, node))
        if result is not None:
            return result
    return None


def evar_at(q: Skeleton, path: tuple[int, ...], evar: str = "r") -> Skeleton | None:
    """Put an E-variable on the node at `path`."""
    forbidden = ftv(check_skeleton(node_at(q, path)).env)
    return try_decorate(q, path, lambda node: QEVar(evar, forbidden, node))


def instantiate_free(q: Skeleton, instance: Type) -> Skeleton | None:
    """Substitute `instance` for every free type variable of `q`."""
    names = sorted(ftv(q))
    if not names:
        return None
    phi = Substitution(tuple(TypeBinding(a, instance) for a in names))
    return _solved_or_none(apply_subst(phi, q))


def has_inner_decoration(q: Skeleton) -> bool:
    """True when a quantifier or E-variable node sits below the root."""
    return any(
        isinstance(node_at(q, path), (QForall, QEVar)) for path in skeleton_paths(q)[1:]
    )


def decorated_corpus(limit: int = 20) -> list:
    """Solved skeletons with quantifiers, instantiations and E-variables below the root."""
    found = []
    for q in corpus(limit):
        for path in skeleton_paths(q)[1:]:
            generalised = generalise_at(q, path)
            if generalised is not None:
                found.append(generalised)
                for text in POLY_INSTANCES:
                    instance = instantiate_free(generalised, parse_type(text))
                    if instance is not None:
                        found.append(instance)
                break
        for path in skeleton_paths(q)[1:]:
            with_evar = evar_at(q, path)
            if with_evar is not None:
                found.append(with_evar)
                break
    return [q for q in found if has_inner_decoration(q)]
