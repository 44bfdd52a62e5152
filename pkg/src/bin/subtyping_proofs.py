"""subtyping_proofs.py.

Explicit subtyping proofs for the equality-subtyping system.

A proof term derives one judgement `τ1 <= τ2`. `Inst` is the only regular
(≤F) rule; the other rules derive equalities (`<==`) and replace the type
equalities that the main system uses silently: swapping adjacent
quantifiers, adding or removing a dummy quantifier, and congruence under
arrows, E-variables and quantifiers.

`equality_steps(t1, t2)` turns a proof that `type_eq(t1, t2)` into a chain
of equality proofs, and `invert_proof` reverses an equality proof.

To use as a module, call

```python
from subtyping_proofs import check_subproof, equality_steps

for p in equality_steps(t1, t2):
    source, target, relation = check_subproof(p)
```
"""

from dataclasses import dataclass
from enum import StrEnum

from core_syntax import (
    Arrow,
    EVarApp,
    Forall,
    TVar,
    Type,
    alpha_eq,
    fresh_variant,
    ftv,
    occurrence_order,
    split_quantifiers,
    wrap_quantifiers,
)
from expansion_subst import subst_type
from fs_errors import BadSubProof


class Relation(StrEnum):
    REGULAR = "regular"
    EQUALITY = "equality"


# --- Proof terms ---
@dataclass(frozen=True)
class Inst:
    source: Type
    arg: Type


@dataclass(frozen=True)
class QuantComm:
    first: str
    second: str
    body: Type


@dataclass(frozen=True)
class DummyIn:
    body: Type
    var: str


@dataclass(frozen=True)
class DummyElim:
    body: Type
    var: str


@dataclass(frozen=True)
class FunCong:
    dom: "SubProof"
    cod: "SubProof"


@dataclass(frozen=True)
class EVarCong:
    evar: str
    forbidden: frozenset[str]
    proof: "SubProof"


@dataclass(frozen=True)
class QuantCong:
    var: str
    proof: "SubProof"


type SubProof = Inst | QuantComm | DummyIn | DummyElim | FunCong | EVarCong | QuantCong


def check_subproof(p: SubProof) -> tuple[Type, Type, Relation]:
    """Return the judgement a proof term derives.

    Args:
        p (SubProof): The proof term

    Returns:
        tuple: Source type, target type and the relation derived
    """
    match p:
        case Inst(source, arg):
            if not isinstance(source, Forall):
                raise BadSubProof("instantiating a type without a leading quantifier", p)
            return source, subst_type(source.body, source.binder, arg), Relation.REGULAR
        case QuantComm(first, second, body):
            return (
                Forall(first, Forall(second, body)),
                Forall(second, Forall(first, body)),
                Relation.EQUALITY,
            )
        case DummyIn(body, var):
            if var in ftv(body):
                raise BadSubProof(f"{var} is not a dummy quantifier", p)
            return body, Forall(var, body), Relation.EQUALITY
        case DummyElim(body, var):
            if var in ftv(body):
                raise BadSubProof(f"{var} is not a dummy quantifier", p)
            return Forall(var, body), body, Relation.EQUALITY
        case FunCong(dom, cod):
            t2, t1, r1 = check_subproof(dom)
            t3, t4, r2 = check_subproof(cod)
            if r1 is not Relation.EQUALITY or r2 is not Relation.EQUALITY:
                raise BadSubProof("arrow congruence needs equality premises", p)
            return Arrow(t1, t3), Arrow(t2, t4), Relation.EQUALITY
        case EVarCong(evar, forbidden, proof):
            t1, t2, r = check_subproof(proof)
            if r is not Relation.EQUALITY:
                raise BadSubProof("E-variable congruence needs an equality premise", p)
            return EVarApp(evar, forbidden, t1), EVarApp(evar, forbidden, t2), Relation.EQUALITY
        case QuantCong(var, proof):
            t1, t2, r = check_subproof(proof)
            return Forall(var, t1), Forall(var, t2), r
    raise TypeError(f"not a subtyping proof: {p!r}")


def invert_proof(p: SubProof) -> SubProof:
    """A proof of `τ2 <== τ1` from a proof of `τ1 <== τ2`."""
    match p:
        case QuantComm(first, second, body):
            return QuantComm(second, first, body)
        case DummyIn(body, var):
            return DummyElim(body, var)
        case DummyElim(body, var):
            return DummyIn(body, var)
        case FunCong(dom, cod):
            return FunCong(invert_proof(dom), invert_proof(cod))
        case EVarCong(evar, forbidden, proof):
            return EVarCong(evar, forbidden, invert_proof(proof))
        case QuantCong(var, proof):
            return QuantCong(var, invert_proof(proof))
        case Inst():
            raise BadSubProof("an instantiation cannot be inverted", p)
    raise TypeError(f"not a subtyping proof: {p!r}")


def check_chain(chain: list[SubProof], start: Type) -> Type:
    """Follow a chain of proofs from `start`; junctions match up to α."""
    current = start
    for p in chain:
        source, target, _ = check_subproof(p)
        if not alpha_eq(source, current):
            raise BadSubProof("proof chain does not connect", p)
        current = target
    return current


# --- Equality chains ---
def _lift(step: SubProof, binders: list[str]) -> SubProof:
    for b in reversed(binders):
        step = QuantCong(b, step)
    return step


def _cycle(t: Type, length: int) -> list[SubProof]:
    """Equality steps from `t` back to `t`; `length` is 0, even, or odd and at least 5."""
    b = fresh_variant("d", ftv(t))
    c = fresh_variant("e", ftv(t) | {b})
    steps: list[SubProof] = []
    if length % 2:
        steps += [
            DummyIn(t, c),
            DummyIn(Forall(c, t), b),
            QuantComm(b, c, t),
            DummyElim(Forall(b, t), c),
            DummyElim(t, b),
        ]
        length -= 5
    for _ in range(length // 2):
        steps += [DummyIn(t, b), DummyElim(t, b)]
    return steps


def _pad_lengths(n1: int, n2: int) -> int:
    goal = max(n1, n2)
    while any((goal - n) % 2 and goal - n < 5 for n in (n1, n2)):
        goal += 2
    return goal


def normalize(t: Type) -> tuple[list[SubProof], Type]:
    """Equality steps from `t` to its normal form (dummies gone, blocks sorted)."""
    match t:
        case TVar():
            return [], t
        case Arrow(dom, cod):
            sd, nd = normalize(dom)
            sc, nc = normalize(cod)
            goal = _pad_lengths(len(sd), len(sc))
            sd = sd + _cycle(nd, goal - len(sd))
            sc = sc + _cycle(nc, goal - len(sc))
            return [FunCong(invert_proof(p), q) for p, q in zip(sd, sc)], Arrow(nd, nc)
        case EVarApp(evar, forbidden, body):
            steps, nb = normalize(body)
            return [EVarCong(evar, forbidden, p) for p in steps], EVarApp(evar, forbidden, nb)
        case Forall():
            binders, body = split_quantifiers(t)
            inner, nb = normalize(body)
            steps = [_lift(p, binders) for p in inner]
            while True:
                dead = next(
                    (
                        i
                        for i, b in enumerate(binders)
                        if b not in ftv(wrap_quantifiers(binders[i + 1 :], nb))
                    ),
                    None,
                )
                if dead is None:
                    break
                rest = wrap_quantifiers(binders[dead + 1 :], nb)
                steps.append(_lift(DummyElim(rest, binders[dead]), binders[:dead]))
                binders = binders[:dead] + binders[dead + 1 :]
            rank = {name: i for i, name in enumerate(occurrence_order(nb))}
            changed = True
            while changed:
                changed = False
                for i in range(len(binders) - 1):
                    a1, a2 = binders[i], binders[i + 1]
                    if rank[a1] > rank[a2]:
                        rest = wrap_quantifiers(binders[i + 2 :], nb)
                        steps.append(_lift(QuantComm(a1, a2, rest), binders[:i]))
                        binders[i], binders[i + 1] = a2, a1
                        changed = True
            return steps, wrap_quantifiers(binders, nb)
    raise TypeError(f"not a type: {t!r}")


def equality_steps(t1: Type, t2: Type) -> list[SubProof]:
    """A chain of equality proofs leading from `t1` to `t2`.

    Args:
        t1 (Type): Source type
        t2 (Type): Target type, equal to `t1` under the type equalities

    Returns:
        list[SubProof]: The chain; empty when the two are α-equivalent normal forms
    """
    s1, n1 = normalize(t1)
    s2, n2 = normalize(t2)
    if not alpha_eq(n1, n2):
        raise BadSubProof("the two types are not equal")
    return s1 + [invert_proof(p) for p in reversed(s2)]
