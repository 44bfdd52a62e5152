"""Hypothesis strategies shared by the property suites."""

import sys
from functools import cache, partial
from pathlib import Path

from hypothesis import strategies as st
from hypothesis.strategies import DrawFn, composite

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "bin"))

from core_syntax import (  # noqa: E402
    Abs,
    App,
    Arrow,
    EVarApp,
    EVarIntro,
    ExpansionBinding,
    Forall,
    ForallIntro,
    Id,
    QEVar,
    QForall,
    QSub,
    SubStep,
    Substitution,
    Term,
    TVar,
    Type,
    TypeBinding,
    TypeEnv,
    Var,
    fresh_variant,
    ftv,
)
from corpus import (  # noqa: E402
    corpus,
    decorate_at,
    evar_at,
    generalise_at,
    instantiate_free,
    node_at,
    skeleton_paths,
    solved_skeleton,
)
from fs_errors import FsError  # noqa: E402
from initial_skeleton import FreshSupply, evars, initial_skeleton  # noqa: E402
from neq_system import EnvSub, NEVar, NForall, NSub, NWeak, check_neq, to_neq  # noqa: E402
from subtyping_proofs import DummyElim, DummyIn, Inst, QuantComm  # noqa: E402
from typing_engine import check_skeleton  # noqa: E402

TERM_VARS = ["x", "y", "z"]
TYPE_VARS = ["a", "b", "c"]
EVARS = ["r", "t"]


# --- Terms ---
@composite
def terms(draw: DrawFn, depth: int = 3) -> Term:
    if depth == 0:
        return Var(draw(st.sampled_from(TERM_VARS)))
    kind = draw(st.sampled_from(["var", "abs", "app"]))
    if kind == "var":
        return Var(draw(st.sampled_from(TERM_VARS)))
    if kind == "abs":
        return Abs(draw(st.sampled_from(TERM_VARS)), draw(terms(depth - 1)))
    return App(draw(terms(depth - 1)), draw(terms(depth - 1)))


# --- Types ---
@composite
def types(
    draw: DrawFn, depth: int = 3, names: list[str] = TYPE_VARS, with_evars: bool = True
) -> Type:
    if depth == 0:
        return TVar(draw(st.sampled_from(names)))
    kinds = ["var", "arrow", "forall"] + (["evar"] if with_evars else [])
    kind = draw(st.sampled_from(kinds))
    if kind == "var":
        return TVar(draw(st.sampled_from(names)))
    if kind == "arrow":
        dom = draw(types(depth - 1, names, with_evars))
        return Arrow(dom, draw(types(depth - 1, names, with_evars)))
    if kind == "forall":
        return Forall(draw(st.sampled_from(names)), draw(types(depth - 1, names, with_evars)))
    forbidden = frozenset(draw(st.sets(st.sampled_from(names), max_size=2)))
    return EVarApp(draw(st.sampled_from(EVARS)), forbidden, draw(types(depth - 1, names, with_evars)))


@composite
def f_types(draw: DrawFn, depth: int = 3) -> Type:
    """System F types (no E-variables) over the small alphabet."""
    return draw(types(depth, TYPE_VARS, with_evars=False))


# --- Expansions and substitutions ---
@composite
def expansions(draw: DrawFn, depth: int = 2):
    if depth == 0:
        return Id()
    kind = draw(st.sampled_from(["id", "forall", "evar", "sub"]))
    if kind == "id":
        return Id()
    if kind == "forall":
        return ForallIntro(draw(st.sampled_from(TYPE_VARS)), draw(expansions(depth - 1)))
    if kind == "evar":
        extra = frozenset(draw(st.sets(st.sampled_from(TYPE_VARS), max_size=2)))
        return EVarIntro(draw(st.sampled_from(EVARS)), extra, draw(expansions(depth - 1)))
    return SubStep(draw(expansions(depth - 1)), draw(types(2)))


@composite
def substitutions_for(draw: DrawFn, q) -> Substitution:
    """A random substitution over the variables of skeleton `q`."""
    tvars = sorted(ftv(q))
    svars = sorted(evars(q))
    bindings = []
    if tvars:
        for a in draw(st.lists(st.sampled_from(tvars), unique=True)):
            bindings.append(TypeBinding(a, draw(types(2, TYPE_VARS + tvars[:2]))))
    if svars:
        for s in draw(st.lists(st.sampled_from(svars), unique=True)):
            bindings.append(ExpansionBinding(s, draw(expansions())))
    return Substitution(tuple(bindings))


# --- Skeletons ---
@composite
def initial_skeletons(draw: DrawFn, depth: int = 3):
    m = draw(terms(depth))
    q, _, _ = initial_skeleton(m)
    return q


def _sub_to(target: Type, node):
    return QSub(node, target)


@composite
def decorated_skeletons(draw: DrawFn, depth: int = 3):
    """Initial skeletons with random decorations at random nodes, kept while valid."""
    q = draw(initial_skeletons(depth))
    for _ in range(draw(st.integers(0, 4))):
        path = draw(st.sampled_from(skeleton_paths(q)))
        j = check_skeleton(node_at(q, path))
        env_ftv = ftv(j.env)
        kind = draw(st.sampled_from(["forall", "sub", "evar"]))
        if kind == "forall":
            name = draw(st.sampled_from(TYPE_VARS + sorted(ftv(j.rtype))))
            if name in env_ftv:
                continue
            make = partial(QForall, name)
        elif kind == "sub":
            target = j.rtype if path and draw(st.booleans()) else draw(types(2))
            make = partial(_sub_to, target)
        else:
            extra = frozenset(draw(st.sets(st.sampled_from(TYPE_VARS), max_size=2)))
            make = partial(QEVar, draw(st.sampled_from(EVARS)), env_ftv | extra)
        try:
            candidate = decorate_at(q, path, make)
            check_skeleton(candidate)
        except FsError:
            continue
        q = candidate
    return q


@cache
def reducible_skeletons() -> tuple:
    return tuple(corpus(30))


@composite
def solved_decorated_skeletons(draw: DrawFn):
    """Solved skeletons of reducible terms with decorations below the root and a random instance."""
    q = draw(st.sampled_from(reducible_skeletons()))
    for _ in range(draw(st.integers(1, 3))):
        path = draw(st.sampled_from(skeleton_paths(q)[1:]))
        if draw(st.booleans()):
            result = generalise_at(q, path)
        else:
            result = evar_at(q, path, draw(st.sampled_from(EVARS)))
        if result is not None:
            q = result
    if draw(st.booleans()):
        q = instantiate_free(q, draw(f_types(2))) or q
    return q

@composite
def supplies(draw: DrawFn) -> FreshSupply:
    return FreshSupply(
        next_tvar=draw(st.integers(0, 20)),
        next_evar=draw(st.integers(0, 20)),
        tvar_prefix=draw(st.sampled_from(["a", "u", "w"])),
        evar_prefix=draw(st.sampled_from(["s", "k", "v"])),
    )


# --- Explicit skeletons ---
@composite
def neq_skeletons(draw: DrawFn, depth: int = 3):
    """Elaborated solved skeletons under a random stack of proof-carrying decorations."""
    if draw(st.booleans()):
        q = draw(solved_decorated_skeletons())
    else:
        q = solved_skeleton(draw(terms(depth))) or solved_skeleton(Var("x"))
    n = to_neq(q)
    for _ in range(draw(st.integers(0, 4))):
        j = check_neq(n)
        kind = draw(st.sampled_from(["forall", "evar", "dummy", "inst", "comm", "weak", "envsub"]))
        if kind == "forall":
            name = draw(st.sampled_from(TYPE_VARS))
            if name not in ftv(j.env):
                n = NForall(name, n)
        elif kind == "evar":
            extra = frozenset(draw(st.sets(st.sampled_from(TYPE_VARS), max_size=2)))
            n = NEVar(draw(st.sampled_from(EVARS)), ftv(j.env) | extra, n)
        elif kind == "dummy":
            n = NSub(n, DummyIn(j.rtype, fresh_variant("d", ftv(j.rtype))))
        elif kind == "inst" and isinstance(j.rtype, Forall):
            n = NSub(n, Inst(j.rtype, draw(f_types(1))))
        elif kind == "comm" and isinstance(j.rtype, Forall) and isinstance(j.rtype.body, Forall):
            n = NSub(n, QuantComm(j.rtype.binder, j.rtype.body.binder, j.rtype.body.body))
        elif kind == "weak" and "w" not in j.env:
            n = NWeak(n, TypeEnv((("w", draw(f_types(1))),)))
        elif kind == "envsub" and len(j.env):
            x = draw(st.sampled_from(j.env.support()))
            t = j.env.lookup(x)
            n = EnvSub(n, x, DummyElim(t, fresh_variant("d", ftv(t))))
    return n
