"""core_syntax.py.

Syntactic categories of System Fs and their equality theories.

Terms are untyped λ-terms. Types extend System F types with E-variable
applications `s^Δ τ`; expansions, substitutions, constraints, type
environments and skeletons (proof terms encoding whole typing derivations)
complete the picture. Every value is an immutable dataclass.

Type equality is α-conversion plus reordering of adjacent quantifiers plus
removal of dummy quantifiers; `canonical_type` decides it. Constraint
equality (distribution of prefixes over conjunction, ACI of conjunction,
unit ω, dummy existentials, α) is decided by `canonical_constraint`.

To use as a module, call

```python
from core_syntax import TVar, Arrow, Forall, type_eq

type_eq(Forall("a", Arrow(TVar("a"), TVar("a"))), Forall("b", Arrow(TVar("b"), TVar("b"))))
```
"""

from dataclasses import dataclass, fields, is_dataclass
from typing import Iterable, Iterator

EMPTY: frozenset[str] = frozenset()


# --- Terms ---
@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Abs:
    binder: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


type Term = Var | Abs | App


# --- Types ---
@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class Forall:
    binder: str
    body: "Type"


@dataclass(frozen=True)
class EVarApp:
    evar: str
    forbidden: frozenset[str]
    body: "Type"


type Type = TVar | Arrow | Forall | EVarApp


# --- Expansions ---
@dataclass(frozen=True)
class Id:
    pass


@dataclass(frozen=True)
class ForallIntro:
    var: str
    rest: "Expansion"


@dataclass(frozen=True)
class EVarIntro:
    evar: str
    forbidden: frozenset[str]
    rest: "Expansion"


@dataclass(frozen=True)
class SubStep:
    rest: "Expansion"
    target: Type


type Expansion = Id | ForallIntro | EVarIntro | SubStep


# --- Substitutions ---
@dataclass(frozen=True)
class TypeBinding:
    var: str
    value: Type


@dataclass(frozen=True)
class ExpansionBinding:
    evar: str
    value: Expansion


@dataclass(frozen=True)
class Substitution:
    """Ordered list of bindings ended by the identity; the first match wins."""

    bindings: tuple[TypeBinding | ExpansionBinding, ...] = ()

    def lookup_type(self, a: str) -> Type:
        for binding in self.bindings:
            if isinstance(binding, TypeBinding) and binding.var == a:
                return binding.value
        return TVar(a)

    def lookup_evar(self, s: str) -> Expansion:
        for binding in self.bindings:
            if isinstance(binding, ExpansionBinding) and binding.evar == s:
                return binding.value
        return EVarIntro(s, EMPTY, Id())

    def prepend(self, *bindings: TypeBinding | ExpansionBinding) -> "Substitution":
        return Substitution(tuple(bindings) + self.bindings)

    def append(self, *bindings: TypeBinding | ExpansionBinding) -> "Substitution":
        return Substitution(self.bindings + tuple(bindings))

    def concat(self, other: "Substitution") -> "Substitution":
        return Substitution(self.bindings + other.bindings)


IDENTITY = Substitution()


# --- Constraints ---
@dataclass(frozen=True)
class Omega:
    pass


@dataclass(frozen=True)
class Atomic:
    lhs: Type
    rhs: Type


@dataclass(frozen=True)
class And:
    left: "Constraint"
    right: "Constraint"


@dataclass(frozen=True)
class Exists:
    binder: str
    body: "Constraint"


@dataclass(frozen=True)
class EGuard:
    evar: str
    forbidden: frozenset[str]
    witness: Type
    body: "Constraint"


type Constraint = Omega | Atomic | And | Exists | EGuard


# --- Type environments ---
@dataclass(frozen=True)
class TypeEnv:
    """Ordered (term variable, type) pairs; lookup is by name."""

    entries: tuple[tuple[str, Type], ...] = ()

    def __iter__(self) -> Iterator[tuple[str, Type]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, x: object) -> bool:
        return any(name == x for name, _ in self.entries)

    def lookup(self, x: str) -> Type | None:
        for name, t in self.entries:
            if name == x:
                return t
        return None

    def support(self) -> list[str]:
        return [name for name, _ in self.entries]

    def types(self) -> list[Type]:
        return [t for _, t in self.entries]

    def is_well_formed(self) -> bool:
        names = self.support()
        return len(names) == len(set(names))

    def without(self, *names: str) -> "TypeEnv":
        return TypeEnv(tuple((n, t) for n, t in self.entries if n not in names))

    def extend(self, x: str, t: Type) -> "TypeEnv":
        """Append `x: t`, dropping an earlier entry for `x`."""
        return TypeEnv(self.without(x).entries + ((x, t),))

    def replace(self, x: str, t: Type) -> "TypeEnv":
        """Change the type of `x` in place."""
        return TypeEnv(tuple((n, t if n == x else u) for n, u in self.entries))

    def concat(self, other: "TypeEnv") -> "TypeEnv":
        return TypeEnv(self.entries + other.entries)

    def map_types(self, f) -> "TypeEnv":
        return TypeEnv(tuple((n, f(t)) for n, t in self.entries))

    def rename(self, old: str, new: str) -> "TypeEnv":
        return TypeEnv(tuple((new if n == old else n, t) for n, t in self.entries))

    def restrict(self, names: Iterable[str]) -> "TypeEnv":
        keep = set(names)
        return TypeEnv(tuple((n, t) for n, t in self.entries if n in keep))


def is_var_env(env: TypeEnv) -> bool:
    """True when the range holds distinct type variables only."""
    if not all(isinstance(t, TVar) for t in env.types()):
        return False
    names = [t.name for t in env.types()]
    return env.is_well_formed() and len(names) == len(set(names))


# --- Skeletons ---
@dataclass(frozen=True)
class QVar:
    var: str
    env: TypeEnv


@dataclass(frozen=True)
class QAbs:
    binder: str
    body: "Skeleton"


@dataclass(frozen=True)
class QApp:
    fun: "Skeleton"
    arg: "Skeleton"


@dataclass(frozen=True)
class QForall:
    binder: str
    body: "Skeleton"


@dataclass(frozen=True)
class QEVar:
    evar: str
    forbidden: frozenset[str]
    body: "Skeleton"


@dataclass(frozen=True)
class QSub:
    body: "Skeleton"
    target: Type


@dataclass(frozen=True)
class QWeak:
    body: "Skeleton"
    extra: TypeEnv


type Skeleton = QVar | QAbs | QApp | QForall | QEVar | QSub | QWeak


# --- Free variables ---
def ftv(subject) -> frozenset[str]:
    """Free type variables of any syntactic category.

    Args:
        subject: A Type, Expansion, Substitution, Constraint, TypeEnv,
            Skeleton, or an iterable of types / type-variable names

    Returns:
        frozenset[str]: The free type variables
    """
    match subject:
        case TVar(name):
            return frozenset({name})
        case Arrow(dom, cod):
            return ftv(dom) | ftv(cod)
        case Forall(binder, body):
            return ftv(body) - {binder}
        case EVarApp(_, forbidden, body):
            return ftv(body) | forbidden
        case Id():
            return EMPTY
        case ForallIntro(var, rest):
            return ftv(rest) | {var}
        case EVarIntro(_, forbidden, rest):
            return ftv(rest) | forbidden
        case SubStep(rest, target):
            return ftv(rest) | ftv(target)
        case TypeBinding(var, value):
            return ftv(value) | {var}
        case ExpansionBinding(_, value):
            return ftv(value)
        case Substitution(bindings):
            return frozenset().union(*(ftv(b) for b in bindings))
        case Omega():
            return EMPTY
        case Atomic(lhs, rhs):
            return ftv(lhs) | ftv(rhs)
        case And(left, right):
            return ftv(left) | ftv(right)
        case Exists(binder, body):
            return ftv(body) - {binder}
        case EGuard(_, forbidden, witness, body):
            return forbidden | ftv(witness) | ftv(body)
        case TypeEnv():
            return frozenset().union(*(ftv(t) for t in subject.types()))
        case QVar(_, env):
            return ftv(env)
        case QAbs(_, body):
            return ftv(body)
        case QApp(fun, arg):
            return ftv(fun) | ftv(arg)
        case QForall(binder, body):
            return ftv(body) - {binder}
        case QEVar(_, forbidden, body):
            return forbidden | ftv(body)
        case QSub(body, target):
            return ftv(body) | ftv(target)
        case QWeak(body, extra):
            return ftv(body) | ftv(extra)
        case str():
            return frozenset({subject})
        case _ if isinstance(subject, Iterable):
            return frozenset().union(*(ftv(x) for x in subject))
    raise TypeError(f"ftv: unsupported subject {subject!r}")


def fv(m: Term) -> frozenset[str]:
    """Free term variables of a term."""
    match m:
        case Var(name):
            return frozenset({name})
        case Abs(binder, body):
            return fv(body) - {binder}
        case App(fun, arg):
            return fv(fun) | fv(arg)
    raise TypeError(f"fv: not a term {m!r}")


def fresh_variant(base: str, avoid: Iterable[str]) -> str:
    """Prime `base` until it leaves `avoid`."""
    taken = set(avoid)
    name = base
    while name in taken:
        name += "'"
    return name


def split_quantifiers(t: Type) -> tuple[list[str], Type]:
    """Split a maximal quantifier block `∀a1...∀an.body` into binders and body."""
    binders = []
    while isinstance(t, Forall):
        binders.append(t.binder)
        t = t.body
    return binders, t


def wrap_quantifiers(binders: Iterable[str], body: Type) -> Type:
    for b in reversed(list(binders)):
        body = Forall(b, body)
    return body


# --- α-equivalence ---
def alpha_eq(t1: Type, t2: Type) -> bool:
    """Strict α-equivalence of types: no reordering, no dummy removal."""
    return _alpha_types(t1, t2, {}, {}, 0)


def _alpha_types(t1: Type, t2: Type, env1: dict, env2: dict, depth: int) -> bool:
    match t1, t2:
        case TVar(a), TVar(b):
            da, db = env1.get(a), env2.get(b)
            if da is not None or db is not None:
                return da == db
            return a == b
        case Arrow(d1, c1), Arrow(d2, c2):
            return _alpha_types(d1, d2, env1, env2, depth) and _alpha_types(
                c1, c2, env1, env2, depth
            )
        case Forall(a, b1), Forall(b, b2):
            return _alpha_types(
                b1, b2, {**env1, a: depth}, {**env2, b: depth}, depth + 1
            )
        case EVarApp(s1, f1, b1), EVarApp(s2, f2, b2):
            if s1 != s2:
                return False
            if {env1.get(a, a) for a in f1} != {env2.get(b, b) for b in f2}:
                return False
            return _alpha_types(b1, b2, env1, env2, depth)
    return False


def term_alpha_eq(m1: Term, m2: Term) -> bool:
    return _alpha_terms(m1, m2, {}, {}, 0)


def _alpha_terms(m1: Term, m2: Term, env1: dict, env2: dict, depth: int) -> bool:
    match m1, m2:
        case Var(x), Var(y):
            dx, dy = env1.get(x), env2.get(y)
            if dx is not None or dy is not None:
                return dx == dy
            return x == y
        case Abs(x, b1), Abs(y, b2):
            return _alpha_terms(b1, b2, {**env1, x: depth}, {**env2, y: depth}, depth + 1)
        case App(f1, a1), App(f2, a2):
            return _alpha_terms(f1, f2, env1, env2, depth) and _alpha_terms(
                a1, a2, env1, env2, depth
            )
    return False


# --- Canonical forms ---
def binder_prefix(free_names: Iterable[str]) -> str:
    """Prefix for canonical binder names that cannot meet a free name."""
    names = list(free_names)
    prefix = "_"
    while any(n.startswith(prefix) and n[len(prefix):].isdigit() for n in names):
        prefix += "_"
    return prefix


def occurrence_order(t: Type) -> list[str]:
    """Free type variables of `t` in order of first occurrence.

    Variables that only sit in forbidden sets come last, ranked by the
    positions of the sets that hold them. Names that tie are interchangeable,
    so the order never depends on how binders are spelled.
    """
    order: list[str] = []
    holders: dict[str, list[int]] = {}
    sets_seen = 0

    def visit(u: Type, bound: frozenset[str]) -> None:
        nonlocal sets_seen
        match u:
            case TVar(name):
                if name not in bound and name not in order:
                    order.append(name)
            case Arrow(dom, cod):
                visit(dom, bound)
                visit(cod, bound)
            case Forall(binder, body):
                visit(body, bound | {binder})
            case EVarApp(_, forbidden, body):
                position = sets_seen
                sets_seen += 1
                for name in forbidden - bound:
                    holders.setdefault(name, []).append(position)
                visit(body, bound)

    visit(t, EMPTY)
    rest = [name for name in holders if name not in order]
    return order + sorted(rest, key=lambda name: (holders[name], name))


def normal_type(t: Type) -> Type:
    """Drop dummy quantifiers and sort each quantifier block, keeping names."""
    match t:
        case TVar():
            return t
        case Arrow(dom, cod):
            return Arrow(normal_type(dom), normal_type(cod))
        case EVarApp(evar, forbidden, body):
            return EVarApp(evar, forbidden, normal_type(body))
        case Forall():
            binders, body = split_quantifiers(t)
            body = normal_type(body)
            free = ftv(body)
            live, seen = [], set()
            for b in reversed(binders):
                if b in seen:
                    continue
                seen.add(b)
                if b in free:
                    live.append(b)
            rank = {name: i for i, name in enumerate(occurrence_order(body))}
            return wrap_quantifiers(sorted(live, key=rank.__getitem__), body)
    raise TypeError(f"normal_type: not a type {t!r}")


def _number_binders(t: Type, prefix: str, depth: int, mapping: dict[str, str]) -> Type:
    match t:
        case TVar(name):
            return TVar(mapping.get(name, name))
        case Arrow(dom, cod):
            return Arrow(
                _number_binders(dom, prefix, depth, mapping),
                _number_binders(cod, prefix, depth, mapping),
            )
        case Forall(binder, body):
            name = f"{prefix}{depth}"
            return Forall(
                name, _number_binders(body, prefix, depth + 1, {**mapping, binder: name})
            )
        case EVarApp(evar, forbidden, body):
            return EVarApp(
                evar,
                frozenset(mapping.get(a, a) for a in forbidden),
                _number_binders(body, prefix, depth, mapping),
            )
    raise TypeError(f"not a type {t!r}")


def canonical_type(t: Type) -> Type:
    """Canonical representative of the equality class of `t`."""
    return _number_binders(normal_type(t), binder_prefix(ftv(t)), 0, {})


def type_eq(t1: Type, t2: Type) -> bool:
    return canonical_type(t1) == canonical_type(t2)


def env_equal(e1: TypeEnv, e2: TypeEnv, eq=type_eq) -> bool:
    """Environments agree as maps (order ignored) under the type equality `eq`."""
    if sorted(e1.support()) != sorted(e2.support()):
        return False
    return all(eq(t, e2.lookup(x)) for x, t in e1)


def sort_key(value) -> tuple:
    """Total, hash-seed independent ordering key for syntax values."""
    if isinstance(value, str):
        return ("str", value)
    if isinstance(value, frozenset | set):
        return ("set", tuple(sorted(value)))
    if isinstance(value, tuple):
        return ("tuple", tuple(sort_key(v) for v in value))
    if is_dataclass(value):
        return (type(value).__name__,) + tuple(
            sort_key(getattr(value, f.name)) for f in fields(value)
        )
    return ("other", repr(value))


def _prefixed_leaves(c: Constraint, wrappers: tuple) -> list[tuple[tuple, Constraint]]:
    match c:
        case Omega() | Atomic():
            return [(wrappers, c)]
        case And(left, right):
            return _prefixed_leaves(left, wrappers) + _prefixed_leaves(right, wrappers)
        case Exists(binder, body):
            return _prefixed_leaves(body, wrappers + (("ex", binder),))
        case EGuard(evar, forbidden, witness, body):
            return _prefixed_leaves(body, wrappers + (("guard", evar, forbidden, witness),))
    raise TypeError(f"not a constraint {c!r}")


def _drop_dummy_exists(wrappers: tuple, leaf: Constraint) -> tuple:
    free = set(ftv(leaf))
    kept = []
    for w in reversed(wrappers):
        if w[0] == "ex":
            if w[1] in free:
                free.discard(w[1])
                kept.append(w)
        else:
            free |= w[2] | ftv(w[3])
            kept.append(w)
    return tuple(reversed(kept))


def _canonical_leaf(wrappers: tuple, leaf: Constraint, prefix: str):
    depth, mapping, out = 0, {}, []
    for w in wrappers:
        if w[0] == "ex":
            name = f"{prefix}{depth}"
            mapping = {**mapping, w[1]: name}
            depth += 1
            out.append(("ex", name))
        else:
            out.append(
                (
                    "guard",
                    w[1],
                    frozenset(mapping.get(a, a) for a in w[2]),
                    _number_binders(normal_type(w[3]), prefix, depth, mapping),
                )
            )
    if isinstance(leaf, Atomic):
        leaf = Atomic(
            _number_binders(normal_type(leaf.lhs), prefix, depth, mapping),
            _number_binders(normal_type(leaf.rhs), prefix, depth, mapping),
        )
    return tuple(out), leaf


def _rewrap(wrappers: tuple, leaf: Constraint) -> Constraint:
    for w in reversed(wrappers):
        if w[0] == "ex":
            leaf = Exists(w[1], leaf)
        else:
            leaf = EGuard(w[1], w[2], w[3], leaf)
    return leaf


def prefixed_atoms(c: Constraint, prefix: str | None = None) -> list[tuple[tuple, Constraint]]:
    """Duplicate-free, sorted prefixed leaves of the canonical form of `c`.

    Pass the same `prefix` when comparing the leaves of two constraints.
    """
    if prefix is None:
        prefix = binder_prefix(ftv(c))
    found: dict[tuple, tuple[tuple, Constraint]] = {}
    for wrappers, leaf in _prefixed_leaves(c, ()):
        wrappers = _drop_dummy_exists(wrappers, leaf)
        if isinstance(leaf, Omega) and not wrappers:
            continue
        item = _canonical_leaf(wrappers, leaf, prefix)
        found.setdefault(sort_key(item), item)
    return [found[k] for k in sorted(found)]


def canonical_constraint(c: Constraint) -> Constraint:
    """Canonical representative of the equality class of `c`."""
    result: Constraint | None = None
    for wrappers, leaf in reversed(prefixed_atoms(c)):
        item = _rewrap(wrappers, leaf)
        result = item if result is None else And(item, result)
    return Omega() if result is None else result


def constraint_eq(c1: Constraint, c2: Constraint) -> bool:
    return canonical_constraint(c1) == canonical_constraint(c2)


def constraint_leaves(c: Constraint) -> list[Constraint]:
    """Atomic constraints of `c`, outermost prefixes ignored."""
    return [leaf for _, leaf in _prefixed_leaves(c, ()) if isinstance(leaf, Atomic)]
