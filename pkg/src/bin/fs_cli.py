"""fs_cli.py.

Command line front end for the System Fs kernel.

Every command reads one UTF-8 file in the surface syntax (`-` reads standard
input) and prints its result to standard output. Diagnostics go to standard
error as `Error: ...` lines.

Exit codes: 0 success, 1 missing file, 2 parse or typing error, 3 valid but
unsolved.

Usage:

$ python fs_cli.py check demo/data/self_app.fs --solved --rel F
$ python fs_cli.py initial demo/data/self_app_term.fs
$ python fs_cli.py subst demo/data/example1.fs "[a := a1 -> a2]"
$ python fs_cli.py expand demo/data/example1.fs "all b. id" --forbidden "a"
$ python fs_cli.py solve demo/data/example2_constraint.fs --rel F
$ python fs_cli.py reduce demo/data/discard.fs --steps 10
$ python fs_cli.py erase-f demo/data/discard.fs
$ python fs_cli.py tree demo/data/self_app.fs --dot
"""

import argparse
import sys
from pathlib import Path

from core_syntax import (
    QAbs,
    QApp,
    QEVar,
    QForall,
    QSub,
    QVar,
    QWeak,
    canonical_constraint,
    normal_type,
)
from expansion_subst import apply_exp_skel, apply_subst
from fs_config import FsSettings, load_settings
from fs_errors import FsError
from initial_skeleton import FreshSupply, initial_skeleton
from neq_system import sz, to_neq, transform_T
from solvedness import (
    erase_evars,
    relation_by_name,
    solved,
    system_f_judgement,
    unsolved_atoms,
)
from subject_reduction import reduce_trace
from surface import (
    parse_constraint,
    parse_expansion,
    parse_forbidden,
    parse_skeleton,
    parse_subst,
    parse_term,
    print_constraint,
    print_env,
    print_skeleton,
    print_term,
    print_type,
)
from typing_engine import Judgement, check_skeleton

EXIT_OK = 0
EXIT_MISSING = 1
EXIT_INVALID = 2
EXIT_UNSOLVED = 3


class MissingInput(Exception):
    pass


# --- Helpers ---
def read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    source = Path(path)
    if not source.exists():
        raise MissingInput(f"File '{path}' not found")
    return source.read_text(encoding="utf-8")


def show_type(t, settings: FsSettings) -> str:
    return print_type(normal_type(t) if settings.output_format == "canonical" else t)


def show_constraint(c, settings: FsSettings) -> str:
    if settings.output_format == "canonical":
        c = canonical_constraint(c)
    return print_constraint(c)


def format_judgement(j: Judgement, settings: FsSettings) -> list[str]:
    """Lines describing a judgement."""
    env = j.env.map_types(normal_type) if settings.output_format == "canonical" else j.env
    return [
        f"term: {print_term(j.term)}",
        f"env: {print_env(env)}",
        f"type: {show_type(j.rtype, settings)}",
        f"constraint: {show_constraint(j.constraint, settings)}",
    ]


def emit(lines: list[str]) -> None:
    for line in lines:
        print(line)


# --- Commands ---
def cmd_check(args, settings: FsSettings) -> int:
    q = parse_skeleton(read_input(args.file))
    j = check_skeleton(q)
    emit(format_judgement(j, settings))
    if not args.solved:
        return EXIT_OK
    rel = relation_by_name(settings.relation)
    if solved(j.constraint, rel):
        print(f"solved ({rel.name}): yes")
        return EXIT_OK
    print(f"solved ({rel.name}): no")
    for atom in unsolved_atoms(j.constraint, rel):
        print(f"  unsolved: {print_constraint(atom)}")
    return EXIT_UNSOLVED


def cmd_initial(args, settings: FsSettings) -> int:
    m = parse_term(read_input(args.file))
    supply = FreshSupply(tvar_prefix=settings.tvar_prefix, evar_prefix=settings.evar_prefix)
    q, _, _ = initial_skeleton(m, supply)
    print(f"skeleton: {print_skeleton(q)}")
    emit(format_judgement(check_skeleton(q), settings))
    return EXIT_OK


def cmd_subst(args, settings: FsSettings) -> int:
    q = parse_skeleton(read_input(args.file))
    check_skeleton(q)
    phi = parse_subst(args.subst)
    result = apply_subst(phi, q)
    print(f"skeleton: {print_skeleton(result)}")
    emit(format_judgement(check_skeleton(result), settings))
    return EXIT_OK


def cmd_expand(args, settings: FsSettings) -> int:
    q = parse_skeleton(read_input(args.file))
    check_skeleton(q)
    expansion = parse_expansion(args.expansion)
    result = apply_exp_skel(expansion, parse_forbidden(args.forbidden), q)
    print(f"skeleton: {print_skeleton(result)}")
    emit(format_judgement(check_skeleton(result), settings))
    return EXIT_OK


def cmd_solve(args, settings: FsSettings) -> int:
    c = parse_constraint(read_input(args.file))
    rel = relation_by_name(settings.relation)
    print(f"constraint: {show_constraint(c, settings)}")
    failures = unsolved_atoms(c, rel)
    if not failures:
        print(f"solved ({rel.name}): yes")
        return EXIT_OK
    print(f"solved ({rel.name}): no")
    for atom in failures:
        print(f"  unsolved: {print_constraint(atom)}")
    return EXIT_UNSOLVED


def cmd_reduce(args, settings: FsSettings) -> int:
    q = parse_skeleton(read_input(args.file))
    rel = relation_by_name(settings.relation)
    j = check_skeleton(q)
    if not solved(j.constraint, rel):
        print("Error: the skeleton's constraint is not solved", file=sys.stderr)
        return EXIT_UNSOLVED
    steps = args.steps if args.steps is not None else settings.max_steps
    trace = reduce_trace(q, steps)
    for i, (m, skeleton) in enumerate(trace):
        j = check_skeleton(skeleton)
        print(f"step {i}: {print_term(m)}")
        print(f"  type: {show_type(j.rtype, settings)}")
        print(f"  solved ({rel.name}): {'yes' if solved(j.constraint, rel) else 'no'}")
        if args.debug:
            print(f"  skeleton: {print_skeleton(skeleton)}")
            n = to_neq(skeleton)
            print(f"  sz: {sz(n)} -> {sz(transform_T(n))}")
    return EXIT_OK


def cmd_erase_f(args, settings: FsSettings) -> int:
    q = parse_skeleton(read_input(args.file))
    j = check_skeleton(q)
    if not solved(j.constraint, relation_by_name("F")):
        print("Error: only skeletons solved under F erase to System F", file=sys.stderr)
        return EXIT_UNSOLVED
    erased = erase_evars(q)
    m, env, t = system_f_judgement(erased)
    print(f"skeleton: {print_skeleton(erased)}")
    print(f"term: {print_term(m)}")
    print(f"env: {print_env(env)}")
    print(f"type: {show_type(t, settings)}")
    return EXIT_OK


# --- Derivation trees ---
def _rule(q) -> str:
    match q:
        case QVar():
            return "var"
        case QAbs(binder, _):
            return f"abs {binder}"
        case QApp():
            return "app"
        case QForall(binder, _):
            return f"all {binder}"
        case QEVar(evar, _, _):
            return f"evar {evar}"
        case QSub():
            return "sub"
        case QWeak():
            return "weak"
    raise TypeError(f"not a skeleton: {q!r}")


def _children(q) -> list:
    match q:
        case QVar():
            return []
        case QApp(fun, arg):
            return [fun, arg]
        case _:
            return [q.body]


def _node_label(q, settings: FsSettings) -> str:
    j = check_skeleton(q)
    env = j.env.map_types(normal_type) if settings.output_format == "canonical" else j.env
    return f"[{_rule(q)}] {print_env(env)} |- {print_term(j.term)} : {show_type(j.rtype, settings)}"


def tree_lines(q, settings: FsSettings, depth: int = 0) -> list[str]:
    lines = ["  " * depth + _node_label(q, settings)]
    for child in _children(q):
        lines += tree_lines(child, settings, depth + 1)
    return lines


def tree_dot(q, settings: FsSettings) -> list[str]:
    lines = ["digraph derivation {", "  node [shape=box];"]
    counter = 0

    def visit(node) -> int:
        nonlocal counter
        me = counter
        counter += 1
        label = _node_label(node, settings).replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  n{me} [label="{label}"];')
        for child in _children(node):
            lines.append(f"  n{me} -> n{visit(child)};")
        return me

    visit(q)
    lines.append("}")
    return lines


def cmd_tree(args, settings: FsSettings) -> int:
    q = parse_skeleton(read_input(args.file))
    check_skeleton(q)
    emit(tree_dot(q, settings) if args.dot else tree_lines(q, settings))
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "initial": cmd_initial,
    "subst": cmd_subst,
    "expand": cmd_expand,
    "solve": cmd_solve,
    "reduce": cmd_reduce,
    "erase-f": cmd_erase_f,
    "tree": cmd_tree,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Check, transform and reduce System Fs skeletons",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s check skeleton.fs --solved     # Print the judgement and decide its constraint
  %(prog)s initial term.fs                # Build the initial skeleton of a term
  %(prog)s reduce skeleton.fs --steps 5   # Follow call-by-value reduction
        """,
    )
    parser.add_argument("--config", help="Configuration file (default: src/config.json)")
    parser.add_argument("--debug", action="store_true", help="Print extra progress output")
    parser.add_argument("--rel", choices=["F", "EQ"], help="Subtyping relation")
    parser.add_argument(
        "--format", dest="output_format", choices=["canonical", "raw"], help="Output format"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="Validate a skeleton and print its judgement")
    check.add_argument("file", help="Skeleton file, or - for standard input")
    check.add_argument("--solved", action="store_true", help="Also decide the constraint")

    initial = sub.add_parser("initial", help="Initial skeleton of a term")
    initial.add_argument("file", help="Term file, or - for standard input")

    subst = sub.add_parser("subst", help="Apply a substitution to a skeleton")
    subst.add_argument("file", help="Skeleton file, or - for standard input")
    subst.add_argument("subst", help="Substitution, e.g. \"[a := b -> b, s := id]\"")

    expand = sub.add_parser("expand", help="Apply an expansion to a skeleton")
    expand.add_argument("file", help="Skeleton file, or - for standard input")
    expand.add_argument("expansion", help="Expansion, e.g. \"all b. id\"")
    expand.add_argument("--forbidden", default="", help="Forbidden set, e.g. \"a,b\"")

    solve = sub.add_parser("solve", help="Decide a constraint")
    solve.add_argument("file", help="Constraint file, or - for standard input")

    reduce = sub.add_parser("reduce", help="Call-by-value reduction with skeletons")
    reduce.add_argument("file", help="Skeleton file, or - for standard input")
    reduce.add_argument("--steps", type=int, help="Maximum number of steps")

    erase = sub.add_parser("erase-f", help="Erase E-variables and check in System F")
    erase.add_argument("file", help="Skeleton file, or - for standard input")

    tree = sub.add_parser("tree", help="Print the derivation tree of a skeleton")
    tree.add_argument("file", help="Skeleton file, or - for standard input")
    tree.add_argument("--dot", action="store_true", help="Emit Graphviz DOT")

    # Global flags are accepted after the subcommand too.
    for p in (check, initial, subst, expand, solve, reduce, erase, tree):
        p.add_argument("--debug", action="store_true", default=argparse.SUPPRESS)
        p.add_argument("--rel", choices=["F", "EQ"], default=argparse.SUPPRESS)
        p.add_argument(
            "--format",
            dest="output_format",
            choices=["canonical", "raw"],
            default=argparse.SUPPRESS,
        )
        p.add_argument("--config", default=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config)
    except FileNotFoundError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_MISSING
    overrides = {}
    if args.rel:
        overrides["relation"] = args.rel
    if args.output_format:
        overrides["output_format"] = args.output_format
    settings = settings.model_copy(update=overrides)
    if args.debug:
        print(f"Settings: {settings.model_dump()}", file=sys.stderr)
    try:
        return COMMANDS[args.command](args, settings)
    except MissingInput as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_MISSING
    except FsError as e:
        print(f"Error: {type(e).__name__}: {e.message}", file=sys.stderr)
        if args.debug and e.node is not None:
            print(f"  at: {e.node!r}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
