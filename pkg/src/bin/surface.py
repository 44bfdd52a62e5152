"""surface.py.

Parser and printer for the text syntax of every System Fs category.

    Term        x | \\x. M | M @ N
    Type        a | T -> T | all a. T | s^{a,b} T
    Expansion   id | all a. I | s^{A} I | I |> T
    Subst       [a := T, s := I]
    Constraint  omega | T <= T | C & C | ex a. C | s^{A;T} C
    TypeEnv     {x: T, y: T}
    Skeleton    x<x: T> | \\x. Q | Q @ Q | all a. Q | s^{A} Q | Q |> T | Q + ENV

Binders (`\\x.`, `all a.`, `ex a.`, guards) extend as far right as possible;
`->` is right associative, `@` left associative. The UTF-8 spellings
λ ∀ ∃ ω ⋖ ≤ ∧ → ▷ are accepted as aliases. The printer only emits ASCII and
always parenthesises an arrow under a quantifier, so `all a. (a -> a)` reads
the same whatever precedence convention the reader is used to.

To use as a module, call

```python
from surface import parse_skeleton, print_skeleton

q = parse_skeleton(r"\\x. y<x: a, y: b>")
print(print_skeleton(q))
```
"""

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from core_syntax import (
    Abs,
    And,
    App,
    Arrow,
    Atomic,
    EGuard,
    EVarApp,
    EVarIntro,
    Exists,
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
    SubStep,
    Substitution,
    TVar,
    TypeBinding,
    TypeEnv,
    Var,
)
from fs_errors import FsSyntaxError

GRAMMAR = r"""
    // --- Terms ---
    ?term: tapp
         | tlam
    ?tlam: LAMBDA NAME "." term -> lam
    ?tapp: tapp "@" tatom -> app
         | tapp "@" tlam -> app
         | tatom
    ?tatom: NAME -> var
          | "(" term ")"

    // --- Types ---
    ?type: tbase ARROW type -> arrow
         | FORALL NAME "." type -> forall
         | tbase
    ?tbase: NAME -> tvar
          | NAME "^" fset tbase -> evapp
          | "(" type ")"
    fset: "{" [NAME ("," NAME)*] "}"

    // --- Expansions ---
    ?exp: esub
        | FORALL NAME "." exp -> forallintro
    ?esub: esub _TRIANGLE type -> substep
         | ebase
    ?ebase: ID -> idexp
          | NAME "^" fset ebase -> evarintro
          | "(" exp ")"

    // --- Substitutions ---
    subst: "[" [binding ("," binding)*] "]"
    ?binding: NAME ":=" type -> tbinding
            | NAME ":=" exp -> ebinding

    // --- Constraints ---
    ?cons: cunit AND cons -> cand
         | EXISTS NAME "." cons -> cexists
         | NAME "^" "{" [NAME ("," NAME)*] ";" type "}" cons -> cguard
         | cunit
    ?cunit: OMEGA -> comega
          | type LEQ type -> catomic
          | "(" cons ")"

    // --- Environments ---
    env: "{" [entry ("," entry)*] "}"
    entry: NAME ":" type

    // --- Skeletons ---
    ?skel: sapp
         | slam
    ?slam: LAMBDA NAME "." skel -> qabs
         | FORALL NAME "." skel -> qforall
    ?sapp: sapp "@" spost -> qapp
         | sapp "@" slam -> qapp
         | spost
    ?spost: spost _TRIANGLE type -> qsub
          | spost "+" env -> qweak
          | sbase
    ?sbase: NAME "<" [entry ("," entry)*] ">" -> qvar
          | NAME "<" env ">" -> qvar_braced
          | NAME "^" fset sbase -> qevar
          | "(" skel ")"

    ID.2: /id(?![A-Za-z0-9_'])/
    FORALL.2: /(all(?![A-Za-z0-9_'])|∀)/
    EXISTS.2: /(ex(?![A-Za-z0-9_'])|∃)/
    OMEGA.2: /(omega(?![A-Za-z0-9_'])|ω)/
    LAMBDA: /\\|λ/
    ARROW: /->|→/
    LEQ: /<=|⋖|≤/
    _TRIANGLE: /\|>|▷/
    AND: /&|∧/
    NAME: /[A-Za-z_][A-Za-z0-9_']*/

    %import common.WS
    %ignore WS
"""

START_SYMBOLS = ["term", "type", "exp", "subst", "cons", "env", "skel"]


@v_args(inline=True)
class FsTransformer(Transformer):
    """Builds core_syntax values from the parse tree."""

    # --- Terms ---
    def var(self, name):
        return Var(str(name))

    def lam(self, _lambda, name, body):
        return Abs(str(name), body)

    def app(self, fun, arg):
        return App(fun, arg)

    # --- Types ---
    def tvar(self, name):
        return TVar(str(name))

    def arrow(self, dom, _arrow, cod):
        return Arrow(dom, cod)

    def forall(self, _forall, name, body):
        return Forall(str(name), body)

    def evapp(self, name, forbidden, body):
        return EVarApp(str(name), forbidden, body)

    def fset(self, *names):
        return frozenset(str(n) for n in names if n is not None)

    # --- Expansions ---
    def idexp(self, _id):
        return Id()

    def forallintro(self, _forall, name, rest):
        return ForallIntro(str(name), rest)

    def evarintro(self, name, forbidden, rest):
        return EVarIntro(str(name), forbidden, rest)

    def substep(self, rest, target):
        return SubStep(rest, target)

    # --- Substitutions ---
    def tbinding(self, name, value):
        return TypeBinding(str(name), value)

    def ebinding(self, name, value):
        return ExpansionBinding(str(name), value)

    def subst(self, *bindings):
        return Substitution(tuple(b for b in bindings if b is not None))

    # --- Constraints ---
    def comega(self, _omega):
        return Omega()

    def catomic(self, lhs, _leq, rhs):
        return Atomic(lhs, rhs)

    def cand(self, left, _and, right):
        return And(left, right)

    def cexists(self, _exists, name, body):
        return Exists(str(name), body)

    def cguard(self, name, *rest):
        *names, witness, body = rest
        return EGuard(
            str(name), frozenset(str(n) for n in names if n is not None), witness, body
        )

    # --- Environments and skeletons ---
    def entry(self, name, t):
        return (str(name), t)

    def env(self, *entries):
        return TypeEnv(tuple(e for e in entries if e is not None))

    def qvar(self, name, *entries):
        return QVar(str(name), TypeEnv(tuple(e for e in entries if e is not None)))

    def qvar_braced(self, name, env):
        return QVar(str(name), env)

    def qabs(self, _lambda, name, body):
        return QAbs(str(name), body)

    def qforall(self, _forall, name, body):
        return QForall(str(name), body)

    def qapp(self, fun, arg):
        return QApp(fun, arg)

    def qevar(self, name, forbidden, body):
        return QEVar(str(name), forbidden, body)

    def qsub(self, body, target):
        return QSub(body, target)

    def qweak(self, body, extra):
        return QWeak(body, extra)


_parser = Lark(GRAMMAR, parser="earley", lexer="basic", start=START_SYMBOLS)


def _parse(text: str, start: str):
    try:
        tree = _parser.parse(text, start=start)
        return FsTransformer().transform(tree)
    except UnexpectedInput as e:
        raise FsSyntaxError(
            str(e).strip().splitlines()[0], getattr(e, "line", 0), getattr(e, "column", 0)
        ) from e
    except VisitError as e:
        raise FsSyntaxError(str(e.orig_exc)) from e


def parse_term(text: str):
    return _parse(text, "term")


def parse_type(text: str):
    return _parse(text, "type")


def parse_expansion(text: str):
    return _parse(text, "exp")


def parse_subst(text: str) -> Substitution:
    return _parse(text, "subst")


def parse_constraint(text: str):
    return _parse(text, "cons")


def parse_env(text: str) -> TypeEnv:
    return _parse(text, "env")


def parse_skeleton(text: str):
    return _parse(text, "skel")


def parse_forbidden(text: str) -> frozenset[str]:
    """Parse `a,b` or `{a,b}` into a forbidden set."""
    names = text.strip().strip("{}")
    return frozenset(n.strip() for n in names.split(",") if n.strip())


# --- Printing ---
def print_forbidden(forbidden: frozenset[str]) -> str:
    return "{" + ",".join(sorted(forbidden)) + "}"


def print_term(m) -> str:
    match m:
        case Var(name):
            return name
        case Abs(binder, body):
            return f"\\{binder}. {print_term(body)}"
        case App(fun, arg):
            left = print_term(fun)
            if isinstance(fun, Abs):
                left = f"({left})"
            right = print_term(arg)
            if isinstance(arg, App | Abs):
                right = f"({right})"
            return f"{left} @ {right}"
    raise TypeError(f"not a term: {m!r}")


def print_type(t) -> str:
    match t:
        case TVar(name):
            return name
        case Arrow(dom, cod):
            left = print_type(dom)
            if isinstance(dom, Arrow | Forall):
                left = f"({left})"
            return f"{left} -> {print_type(cod)}"
        case Forall(binder, body):
            inner = print_type(body)
            if isinstance(body, Arrow):
                inner = f"({inner})"
            return f"all {binder}. {inner}"
        case EVarApp(evar, forbidden, body):
            head = f"{evar}^{print_forbidden(forbidden)}"
            if isinstance(body, TVar | EVarApp):
                return f"{head} {print_type(body)}"
            return f"{head}({print_type(body)})"
    raise TypeError(f"not a type: {t!r}")


def _print_target(t) -> str:
    text = print_type(t)
    return f"({text})" if isinstance(t, Arrow | Forall) else text


def print_expansion(i) -> str:
    match i:
        case Id():
            return "id"
        case ForallIntro(var, rest):
            return f"all {var}. {print_expansion(rest)}"
        case EVarIntro(evar, forbidden, rest):
            inner = print_expansion(rest)
            if not isinstance(rest, Id | EVarIntro):
                inner = f"({inner})"
            return f"{evar}^{print_forbidden(forbidden)} {inner}"
        case SubStep(rest, target):
            left = print_expansion(rest)
            if isinstance(rest, ForallIntro):
                left = f"({left})"
            return f"{left} |> {_print_target(target)}"
    raise TypeError(f"not an expansion: {i!r}")


def print_subst(phi: Substitution) -> str:
    parts = []
    for b in phi.bindings:
        if isinstance(b, TypeBinding):
            parts.append(f"{b.var} := {print_type(b.value)}")
        else:
            parts.append(f"{b.evar} := {print_expansion(b.value)}")
    return "[" + ", ".join(parts) + "]"


def print_constraint(c) -> str:
    match c:
        case Omega():
            return "omega"
        case Atomic(lhs, rhs):
            return f"{print_type(lhs)} <= {print_type(rhs)}"
        case And(left, right):
            first = print_constraint(left)
            if not isinstance(left, Omega | Atomic):
                first = f"({first})"
            return f"{first} & {print_constraint(right)}"
        case Exists(binder, body):
            return f"ex {binder}. {print_constraint(body)}"
        case EGuard(evar, forbidden, witness, body):
            names = ",".join(sorted(forbidden))
            return f"{evar}^{{{names};{print_type(witness)}}} {print_constraint(body)}"
    raise TypeError(f"not a constraint: {c!r}")


def _print_entries(env: TypeEnv) -> str:
    return ", ".join(f"{x}: {print_type(t)}" for x, t in env)


def print_env(env: TypeEnv) -> str:
    return "{" + _print_entries(env) + "}"


def print_skeleton(q) -> str:
    match q:
        case QVar(var, env):
            return f"{var}<{_print_entries(env)}>"
        case QAbs(binder, body):
            return f"\\{binder}. {print_skeleton(body)}"
        case QForall(binder, body):
            return f"all {binder}. {print_skeleton(body)}"
        case QApp(fun, arg):
            left = print_skeleton(fun)
            if isinstance(fun, QAbs | QForall):
                left = f"({left})"
            right = print_skeleton(arg)
            if isinstance(arg, QApp | QAbs | QForall):
                right = f"({right})"
            return f"{left} @ {right}"
        case QEVar(evar, forbidden, body):
            inner = print_skeleton(body)
            if not isinstance(body, QVar | QEVar):
                inner = f"({inner})"
            return f"{evar}^{print_forbidden(forbidden)} {inner}"
        case QSub(body, target):
            inner = print_skeleton(body)
            if isinstance(body, QAbs | QForall | QApp):
                inner = f"({inner})"
            return f"{inner} |> {_print_target(target)}"
        case QWeak(body, extra):
            inner = print_skeleton(body)
            if isinstance(body, QAbs | QForall | QApp):
                inner = f"({inner})"
            return f"{inner} + {print_env(extra)}"
    raise TypeError(f"not a skeleton: {q!r}")
