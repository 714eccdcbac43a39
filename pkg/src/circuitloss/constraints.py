"""Constraint family builders.

Three shapes of output: direct circuits with all structural flags holding by
construction (exactly_one, one_hot_blocks, grid_simple_paths), and plain CNF
meant for the compiler (total_order, ontology_constraint).

Grid path constraints follow the indicator layout: the first rows*cols
variables mark the two path endpoints, the remaining ones flag which grid
edges the path uses.  Each admissible assignment sets exactly two endpoint
indicators and the edge set of one simple path between them, so the circuit
is a disjunction of complete terms, one per (endpoint pair, path).  Path
optimality is a labeling concern, not a validity concern: any simple path
satisfies the constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .circuit import Circuit, CircuitBuilder
from .errors import LimitError, ParseError, StructureError
from .formula import CnfFormula


def _one_hot_clauses(block: Sequence[int]) -> List[List[int]]:
    """At-least-one plus pairwise at-most-one over the given vars."""
    out = [list(block)]
    for a in range(len(block)):
        for b in range(a + 1, len(block)):
            out.append([-block[a], -block[b]])
    return out


def _one_hot_terms(b: CircuitBuilder, block: Sequence[int]) -> int:
    """OR of complete terms over block: exactly one var true.  Children are
    mutually exclusive complete terms, so the node is deterministic and
    smooth over the block."""
    terms = []
    for i in block:
        lits = [b.literal(v if v == i else -v) for v in block]
        terms.append(b.conj(lits))
    return b.disj(terms)


def exactly_one(n: int) -> Circuit:
    """Circuit with exactly the n one-hot models over vars 1..n."""
    if n < 1:
        raise StructureError("exactly_one needs n >= 1")
    b = CircuitBuilder(n)
    root = _one_hot_terms(b, list(range(1, n + 1)))
    return b.seal(root, deterministic=True)


def one_hot_blocks(sizes: Sequence[int]) -> Circuit:
    """Conjunction of independent exactly-one blocks over consecutive vars;
    model count is the product of the sizes."""
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise StructureError("one_hot_blocks needs positive block sizes")
    num_vars = sum(sizes)
    b = CircuitBuilder(num_vars)
    parts = []
    start = 1
    for s in sizes:
        parts.append(_one_hot_terms(b, list(range(start, start + s))))
        start += s
    return b.seal(b.conj(parts), deterministic=True)


def total_order_var(n: int, item: int, position: int) -> int:
    """Var for 'item at position', both 1-based."""
    if not (1 <= item <= n and 1 <= position <= n):
        raise StructureError(f"item/position out of range 1..{n}")
    return (item - 1) * n + position


def total_order(n: int) -> CnfFormula:
    """Permutation-matrix CNF over n*n vars: one-hot per item row and per
    position column.  Model count is n factorial."""
    if n < 1:
        raise StructureError("total_order needs n >= 1")
    clauses = []
    for i in range(1, n + 1):
        clauses.extend(_one_hot_clauses([total_order_var(n, i, j)
                                         for j in range(1, n + 1)]))
    for j in range(1, n + 1):
        clauses.extend(_one_hot_clauses([total_order_var(n, i, j)
                                         for i in range(1, n + 1)]))
    return CnfFormula(n * n, clauses)


@dataclass(frozen=True)
class GridSpec:
    """rows x cols grid graph.  Vertices are numbered row-major starting at
    var 1; edge vars follow, ordered per vertex right-neighbor then
    down-neighbor."""
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise StructureError("grid dimensions must be positive")

    @property
    def num_vertices(self) -> int:
        return self.rows * self.cols

    @property
    def num_edges(self) -> int:
        return self.rows * (self.cols - 1) + (self.rows - 1) * self.cols

    @property
    def num_vars(self) -> int:
        return self.num_vertices + self.num_edges

    def vertex(self, r: int, c: int) -> int:
        """Indicator var for grid cell (r, c), 0-based coordinates."""
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise StructureError(f"cell ({r},{c}) outside {self.rows}x{self.cols}")
        return r * self.cols + c + 1

    def edges(self) -> List[Tuple[int, int]]:
        """Edge list as vertex-var pairs (u, v) with u < v."""
        out = []
        for r in range(self.rows):
            for c in range(self.cols):
                if c + 1 < self.cols:
                    out.append((self.vertex(r, c), self.vertex(r, c + 1)))
                if r + 1 < self.rows:
                    out.append((self.vertex(r, c), self.vertex(r + 1, c)))
        return out

    def edge_var(self, index: int) -> int:
        if not 0 <= index < self.num_edges:
            raise StructureError(f"edge index {index} out of range")
        return self.num_vertices + index + 1


def enumerate_simple_paths(spec: GridSpec, cap: int = 1_000_000):
    """All simple paths with distinct endpoints, each unordered pair once
    (listed from its smaller endpoint).  Yields (s, t, edge index set)."""
    adj = {v: [] for v in range(1, spec.num_vertices + 1)}
    for idx, (u, v) in enumerate(spec.edges()):
        adj[u].append((v, idx))
        adj[v].append((u, idx))
    out = []

    def walk(start, here, visited, edges_used):
        for nxt, eidx in adj[here]:
            if nxt in visited:
                continue
            edges_used.append(eidx)
            if nxt > start:
                out.append((start, nxt, frozenset(edges_used)))
                if len(out) > cap:
                    raise LimitError(
                        f"simple path count exceeds cap {cap}",
                        stats={"paths": len(out), "cap": cap})
            visited.add(nxt)
            walk(start, nxt, visited, edges_used)
            visited.remove(nxt)
            edges_used.pop()

    for s in range(1, spec.num_vertices + 1):
        walk(s, s, {s}, [])
    return out


def grid_simple_paths(spec: GridSpec, path_cap: int = 1_000_000) -> Circuit:
    """Disjunction of complete terms, one per (endpoint pair, simple path).

    Terms share sub-conjunctions through the builder's hash-consing; pairwise
    exclusivity of distinct complete terms makes the disjunction
    deterministic, completeness makes it smooth.
    """
    paths = enumerate_simple_paths(spec, path_cap)
    nv, ne = spec.num_vertices, spec.num_edges
    b = CircuitBuilder(spec.num_vars)
    terms = []
    for s, t, edge_set in paths:
        lits = []
        for v in range(1, nv + 1):
            lits.append(b.literal(v if v in (s, t) else -v))
        for idx in range(ne):
            ev = spec.edge_var(idx)
            lits.append(b.literal(ev if idx in edge_set else -ev))
        terms.append(b.conj(lits))
    # a 1x1 grid has no two distinct endpoints: unsatisfiable
    root = b.disj(terms) if terms else b.false()
    return b.seal(root, deterministic=True)


@dataclass(frozen=True)
class OntologySpec:
    """Typed-slot extraction schema: k entity slots each taking one type,
    and chosen slot pairs each taking one relation or the no-relation
    option."""
    entity_types: Tuple[str, ...]
    relations: Tuple[Tuple[str, str, str], ...]  # (name, subject type, object type)
    slots: int
    pairs: Tuple[Tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "entity_types", tuple(self.entity_types))
        object.__setattr__(self, "relations",
                           tuple(tuple(r) for r in self.relations))
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        if not self.entity_types:
            raise StructureError("ontology needs at least one entity type")
        names = list(self.entity_types) + [r[0] for r in self.relations]
        if len(set(names)) != len(names):
            raise StructureError("ontology names must be unique")
        for name, sub, obj in self.relations:
            for t in (sub, obj):
                if t not in self.entity_types:
                    raise StructureError(
                        f"relation {name} references unknown type {t!r}")
        if self.slots < 1:
            raise StructureError("ontology needs at least one slot")
        seen = set()
        for i, j in self.pairs:
            if not (1 <= i <= self.slots and 1 <= j <= self.slots) or i == j:
                raise StructureError(f"bad slot pair ({i},{j})")
            if (i, j) in seen:
                raise StructureError(f"duplicate slot pair ({i},{j})")
            seen.add((i, j))

    @property
    def num_vars(self) -> int:
        return (self.slots * len(self.entity_types)
                + len(self.pairs) * (len(self.relations) + 1))

    def type_var(self, slot: int, type_index: int) -> int:
        """Var for 'slot has entity type', slot 1-based, type 0-based."""
        return (slot - 1) * len(self.entity_types) + type_index + 1

    def relation_var(self, pair_index: int, relation_index: int) -> int:
        """Var for 'pair carries relation'; relation_index len(relations)
        selects the no-relation option.  Both indices 0-based."""
        base = self.slots * len(self.entity_types)
        return base + pair_index * (len(self.relations) + 1) + relation_index + 1

    def var_names(self) -> List[str]:
        names = []
        for s in range(1, self.slots + 1):
            for t in self.entity_types:
                names.append(f"slot{s}.{t}")
        for i, j in self.pairs:
            for name, _, _ in self.relations:
                names.append(f"pair{i}.{j}.{name}")
            names.append(f"pair{i}.{j}.none")
        return names


def ontology_constraint(spec: OntologySpec) -> CnfFormula:
    """CNF enforcing one type per slot, one relation choice per pair, and
    the argument-type requirements of every active relation."""
    clauses = []
    n_types = len(spec.entity_types)
    type_index = {t: k for k, t in enumerate(spec.entity_types)}
    for s in range(1, spec.slots + 1):
        clauses.extend(_one_hot_clauses(
            [spec.type_var(s, k) for k in range(n_types)]))
    for q in range(len(spec.pairs)):
        clauses.extend(_one_hot_clauses(
            [spec.relation_var(q, r) for r in range(len(spec.relations) + 1)]))
    for q, (i, j) in enumerate(spec.pairs):
        for r, (_, sub, obj) in enumerate(spec.relations):
            rv = spec.relation_var(q, r)
            clauses.append([-rv, spec.type_var(i, type_index[sub])])
            clauses.append([-rv, spec.type_var(j, type_index[obj])])
    return CnfFormula(spec.num_vars, clauses)


def parse_ontology_spec(text: str) -> OntologySpec:
    """Parse a schema file with lines 'type <name>',
    'relation <name> <subject-type> <object-type>', 'slots <k>',
    'pair <i> <j>'.  '#' starts a comment."""
    types: List[str] = []
    relations: List[Tuple[str, str, str]] = []
    pairs: List[Tuple[int, int]] = []
    slots = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        if kw == "type" and len(parts) == 2:
            types.append(parts[1])
        elif kw == "relation" and len(parts) == 4:
            relations.append((parts[1], parts[2], parts[3]))
        elif kw == "slots" and len(parts) == 2:
            if slots is not None:
                raise ParseError("slots declared twice", lineno)
            try:
                slots = int(parts[1])
            except ValueError:
                raise ParseError(f"bad slot count {parts[1]!r}", lineno) from None
        elif kw == "pair" and len(parts) == 3:
            try:
                pairs.append((int(parts[1]), int(parts[2])))
            except ValueError:
                raise ParseError(f"bad pair indices in {line!r}", lineno) from None
        else:
            raise ParseError(f"unrecognized line {line!r}", lineno)
    if slots is None:
        raise ParseError("missing 'slots <k>' declaration")
    try:
        return OntologySpec(tuple(types), tuple(relations), slots, tuple(pairs))
    except StructureError as exc:
        raise ParseError(str(exc)) from None
