"""Exception types shared across the package.

The CLI maps these onto exit codes: ParseError -> 2, ComputeError and
LimitError -> 3.  Everything derives from CircuitError so callers can catch
broadly.
"""


class CircuitError(Exception):
    pass


class ParseError(CircuitError):
    """Malformed input text (DIMACS, DSL, NNF, weights, batch, ontology spec)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StructureError(CircuitError):
    """Circuit construction or precondition violation (flags, bad ids, bad literals)."""


class LimitError(CircuitError):
    """A configured resource cap was exceeded (clause cap, cache cap, path cap)."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class ComputeError(CircuitError):
    """A query could not produce a finite result (zero wmc, timeout)."""


class ZeroWmcError(ComputeError):
    """The constraint has probability zero under the given weights."""
