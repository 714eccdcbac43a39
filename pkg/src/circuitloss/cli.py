"""Command-line interface.

Subcommands: compile, wmc, entropy, count, grad, loss, gen, check.  All
numeric output is printed with 12 significant digits and identical
invocations produce byte-identical stdout; timing and cache statistics go to
stderr so they cannot break that guarantee.

Exit codes: 0 success, 1 usage error, 2 input parse error, 3 computation
error (zero-probability constraint, exceeded caps, missing structural
properties).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import compiler, constraints, losses
from .circuit import (
    check_decomposable,
    check_deterministic_syntactic,
    check_smooth,
    read_nnf,
    write_nnf,
)
from .errors import CircuitError, ComputeError, LimitError, ParseError, StructureError
from .formula import (
    format_name_table,
    parse_constraint_dsl,
    parse_dimacs,
    to_cnf,
    write_dimacs,
)
from .oracle import check_determinism_exhaustive
from .queries import LiteralWeights, entropy, model_count, parse_weights, wmc
from .queries import entropy_gradient, wmc_gradient


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract reserves 2 for input parse
    # errors, so reroute to exit code 1
    def error(self, message):
        raise _UsageExit(message)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_circuit(path: str):
    return read_nnf(_read_text(path))


def _load_weights(path, circuit, fill_uniform: bool) -> LiteralWeights:
    if path is None:
        if not fill_uniform:
            raise ParseError("no weights given (use -w FILE or --uniform)")
        return LiteralWeights.uniform(circuit.num_vars)
    return parse_weights(_read_text(path), circuit.num_vars, fill_uniform)


def _parse_order(text: str):
    if text in ("most_frequent", "dfs_fixed"):
        return text
    try:
        order = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(
            f"--order must be most_frequent, dfs_fixed, or a comma-separated "
            f"var list, got {text!r}") from None
    if not order:
        raise ParseError("--order var list is empty")
    return order


def _build_parser() -> _Parser:
    p = _Parser(prog="circuitloss",
                description="Compile logical constraints into tractable "
                            "circuits and query them.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    c = sub.add_parser("compile", help="compile CNF or constraint DSL to NNF")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--cnf", metavar="F", help="DIMACS CNF input")
    src.add_argument("--dsl", metavar="F",
                     help="s-expression constraint input (writes OUT.names)")
    c.add_argument("--order", default="most_frequent",
                   help="most_frequent | dfs_fixed | comma-separated var list")
    c.add_argument("--no-smooth", action="store_true",
                   help="skip the smoothing pass")
    c.add_argument("-o", "--out", required=True, metavar="OUT.nnf")

    w = sub.add_parser("wmc", help="weighted model count")
    w.add_argument("-c", "--circuit", required=True, metavar="C.nnf")
    w.add_argument("-w", "--weights", metavar="W.txt")
    w.add_argument("--uniform", action="store_true",
                   help="fill unlisted vars with probability 0.5")
    w.add_argument("--log-space", action="store_true",
                   help="accumulate in log space, print log_wmc")

    e = sub.add_parser("entropy", help="entropy of the conditioned distribution")
    e.add_argument("-c", "--circuit", required=True, metavar="C.nnf")
    e.add_argument("-w", "--weights", metavar="W.txt")
    e.add_argument("--uniform", action="store_true")
    e.add_argument("--log-space", action="store_true")
    e.add_argument("--per-node", action="store_true",
                   help="also print per-node mass and entropy")

    n = sub.add_parser("count", help="exact model count")
    n.add_argument("-c", "--circuit", required=True, metavar="C.nnf")

    g = sub.add_parser("grad", help="gradient of wmc or entropy")
    g.add_argument("-c", "--circuit", required=True, metavar="C.nnf")
    g.add_argument("-w", "--weights", metavar="W.txt")
    g.add_argument("--uniform", action="store_true")
    g.add_argument("--of", required=True, choices=("wmc", "entropy"))

    l = sub.add_parser("loss", help="batched semantic loss + entropy objective")
    l.add_argument("-c", "--circuit", required=True, metavar="C.nnf")
    l.add_argument("--batch", required=True, metavar="B.txt")
    l.add_argument("--w-semantic", type=float, default=1.0)
    l.add_argument("--w-entropy", type=float, default=0.1)
    l.add_argument("--entropy-kind", choices=("nesy", "full"), default="nesy")

    b = sub.add_parser("gen", help="generate a constraint family instance")
    b.add_argument("--kind", required=True,
                   choices=("exactly-one", "total-order", "grid-paths", "ontology"))
    b.add_argument("-n", type=int, metavar="N",
                   help="size for exactly-one / total-order")
    b.add_argument("--rows", type=int)
    b.add_argument("--cols", type=int)
    b.add_argument("--path-cap", type=int, default=1_000_000)
    b.add_argument("--spec", metavar="F", help="ontology schema file")
    b.add_argument("-o", "--out", required=True, metavar="OUT")

    k = sub.add_parser("check", help="report structural properties")
    k.add_argument("-c", "--circuit", required=True, metavar="C.nnf")
    k.add_argument("--exhaustive-determinism", action="store_true",
                   help="verify determinism over all assignments (<= 16 vars)")
    return p


def _cmd_compile(args) -> int:
    names = None
    if args.cnf is not None:
        cnf = parse_dimacs(_read_text(args.cnf))
    else:
        formula, names = parse_constraint_dsl(_read_text(args.dsl))
        cnf = to_cnf(formula)
    options = compiler.CompileOptions(var_order=_parse_order(args.order),
                                      smooth_output=not args.no_smooth)
    circuit = compiler.compile(cnf, options)
    Path(args.out).write_text(write_nnf(circuit))
    if names is not None:
        Path(args.out + ".names").write_text(format_name_table(names))
    s = circuit.stats
    if s is not None:
        print(f"nodes={s.nodes} edges={s.edges} decisions={s.decisions} "
              f"cache_hits={s.cache_hits} time_ms={s.time_ms:.1f}",
              file=sys.stderr)
    return 0


def _cmd_wmc(args) -> int:
    circuit = _load_circuit(args.circuit)
    weights = _load_weights(args.weights, circuit, args.uniform)
    result = wmc(circuit, weights, log_space=args.log_space)
    label = "log_wmc" if args.log_space else "wmc"
    print(f"{label}={_fmt(result.value)}")
    return 0


def _cmd_entropy(args) -> int:
    circuit = _load_circuit(args.circuit)
    weights = _load_weights(args.weights, circuit, args.uniform)
    result = entropy(circuit, weights, log_space=args.log_space,
                     per_node=args.per_node)
    if args.per_node:
        for i, node in enumerate(circuit.nodes):
            mass, h = result.per_node[i]
            print(f"node={i} kind={node.kind} mass={_fmt(mass)} "
                  f"entropy={_fmt(h)}")
    print(f"entropy={_fmt(result.value)}")
    return 0


def _cmd_count(args) -> int:
    print(model_count(_load_circuit(args.circuit)))
    return 0


def _cmd_grad(args) -> int:
    circuit = _load_circuit(args.circuit)
    weights = _load_weights(args.weights, circuit, args.uniform)
    fn = wmc_gradient if args.of == "wmc" else entropy_gradient
    g = fn(circuit, weights)
    print("grad=" + ",".join(_fmt(x) for x in g))
    return 0


def _cmd_loss(args) -> int:
    circuit = _load_circuit(args.circuit)
    rows = losses.parse_batch(_read_text(args.batch))
    if rows.shape[1] != circuit.num_vars:
        raise ParseError(f"batch rows have {rows.shape[1]} vars, "
                         f"circuit has {circuit.num_vars}")
    config = losses.ObjectiveConfig(args.w_semantic, args.w_entropy,
                                    args.entropy_kind)
    for i, bundle in enumerate(losses.combined_objective(circuit, rows, config)):
        if bundle.error is not None:
            print(f"row={i} error={bundle.error}")
        else:
            grad = ",".join(_fmt(x) for x in bundle.grad)
            print(f"row={i} loss={_fmt(bundle.value)} grad={grad}")
    return 0


def _require_arg(value, flag: str):
    if value is None:
        raise _UsageExit(f"gen: missing required flag {flag}")
    return value


def _cmd_gen(args) -> int:
    kind = args.kind
    if kind == "exactly-one":
        circuit = constraints.exactly_one(_require_arg(args.n, "-n"))
        Path(args.out).write_text(write_nnf(circuit))
        print(f"vars={circuit.num_vars} nodes={len(circuit)} "
              f"edges={circuit.edge_count}")
    elif kind == "grid-paths":
        spec = constraints.GridSpec(_require_arg(args.rows, "--rows"),
                                    _require_arg(args.cols, "--cols"))
        circuit = constraints.grid_simple_paths(spec, args.path_cap)
        Path(args.out).write_text(write_nnf(circuit))
        print(f"vars={circuit.num_vars} nodes={len(circuit)} "
              f"edges={circuit.edge_count}")
    elif kind == "total-order":
        cnf = constraints.total_order(_require_arg(args.n, "-n"))
        Path(args.out).write_text(write_dimacs(cnf))
        print(f"vars={cnf.num_vars} clauses={len(cnf.clauses)}")
    else:
        spec = constraints.parse_ontology_spec(_read_text(
            _require_arg(args.spec, "--spec")))
        cnf = constraints.ontology_constraint(spec)
        Path(args.out).write_text(write_dimacs(cnf))
        table = {name: i + 1 for i, name in enumerate(spec.var_names())}
        Path(args.out + ".names").write_text(format_name_table(table))
        print(f"vars={cnf.num_vars} clauses={len(cnf.clauses)}")
    return 0


def _print_report(label: str, report) -> None:
    print(f"{label}={'true' if report.ok else 'false'}")
    if not report.ok:
        shown = ",".join(str(v) for v in report.violations[:10])
        print(f"{label}_violations={shown}")


def _cmd_check(args) -> int:
    circuit = _load_circuit(args.circuit)
    print(f"vars={circuit.num_vars}")
    print(f"nodes={len(circuit)}")
    print(f"edges={circuit.edge_count}")
    _print_report("decomposable", check_decomposable(circuit))
    _print_report("smooth", check_smooth(circuit))
    _print_report("deterministic", check_deterministic_syntactic(circuit))
    if args.exhaustive_determinism:
        report = check_determinism_exhaustive(circuit)
        print(f"deterministic_exhaustive={'true' if report.ok else 'false'}")
        if not report.ok:
            shown = ",".join(f"{o}@{w}" for o, w in report.violations[:10])
            print(f"deterministic_exhaustive_violations={shown}")
    return 0


_COMMANDS = {
    "compile": _cmd_compile,
    "wmc": _cmd_wmc,
    "entropy": _cmd_entropy,
    "count": _cmd_count,
    "grad": _cmd_grad,
    "loss": _cmd_loss,
    "gen": _cmd_gen,
    "check": _cmd_check,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageExit("missing subcommand")
        return _COMMANDS[args.command](args)
    except _UsageExit as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (ComputeError, LimitError, StructureError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 3
    except CircuitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())
