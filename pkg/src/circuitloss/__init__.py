"""circuitloss: compile logical constraints into smooth deterministic
decomposable circuits and query them for exact weighted counts, conditioned
entropies, gradients, and training losses."""

from .circuit import (
    Circuit,
    CircuitBuilder,
    CircuitNode,
    StructureReport,
    check_decomposable,
    check_deterministic_syntactic,
    check_smooth,
    read_nnf,
    smooth,
    write_nnf,
)
from .compiler import CompileOptions, CompileStats, compile
from .constraints import (
    GridSpec,
    OntologySpec,
    exactly_one,
    grid_simple_paths,
    one_hot_blocks,
    ontology_constraint,
    parse_ontology_spec,
    total_order,
)
from .errors import (
    CircuitError,
    ComputeError,
    LimitError,
    ParseError,
    StructureError,
    ZeroWmcError,
)
from .formula import (
    And,
    Atom,
    CnfFormula,
    Const,
    ExactlyOne,
    Implies,
    Not,
    Or,
    Xor,
    eval_formula,
    parse_constraint_dsl,
    parse_dimacs,
    to_cnf,
    write_dimacs,
)
from .losses import (
    LossBundle,
    ObjectiveConfig,
    combined_objective,
    format_batch,
    full_entropy,
    nesy_entropy,
    parse_batch,
    semantic_loss,
)
from .queries import (
    LiteralWeights,
    QueryValue,
    entropy,
    entropy_gradient,
    evaluate,
    model_count,
    parse_weights,
    wmc,
    wmc_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "And", "Atom", "Circuit", "CircuitBuilder", "CircuitError", "CircuitNode",
    "CnfFormula", "CompileOptions", "CompileStats", "ComputeError", "Const",
    "ExactlyOne", "GridSpec", "Implies", "LimitError", "LiteralWeights",
    "LossBundle", "Not", "ObjectiveConfig", "OntologySpec", "Or", "ParseError",
    "QueryValue", "StructureError", "StructureReport", "Xor", "ZeroWmcError",
    "check_decomposable", "check_deterministic_syntactic", "check_smooth",
    "combined_objective", "compile", "entropy", "entropy_gradient",
    "eval_formula", "evaluate", "exactly_one", "format_batch", "full_entropy",
    "grid_simple_paths", "model_count", "nesy_entropy", "one_hot_blocks",
    "ontology_constraint", "parse_batch", "parse_constraint_dsl",
    "parse_dimacs", "parse_ontology_spec", "parse_weights", "read_nnf",
    "semantic_loss", "smooth", "to_cnf", "total_order", "wmc", "wmc_gradient",
    "write_dimacs", "write_nnf",
]
