"""Tractable circuit representation and structural operations.

A circuit is a DAG of literal/AND/OR nodes stored in topological order
(children strictly precede parents; the root is the final node).  Constant
nodes ``true`` and ``false`` round out the vocabulary.

Structural properties tracked per circuit:

- decomposable: the children of every AND mention disjoint variable sets.
- smooth: the children of every OR mention identical variable sets.
- deterministic: the children of every OR are pairwise logically exclusive.
  Determinism has no complete cheap test; the flag is set by constructions
  that guarantee it, and ``check_deterministic_syntactic`` soundly recognizes
  the shapes built here (decision branches with opposing literals, and
  disjunctions of distinct complete terms).

NNF text format (one node per line, ids are 0-based line positions, root is
the last node)::

    nnf <nodes> <edges> <vars>
    L <lit>
    A <count> <ids...>            A 0 is the true node
    O <dvar> <count> <ids...>     O 0 0 is the false node

``<dvar>`` records the decision variable of an OR (0 when unknown).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, StructureError


@dataclass(frozen=True)
class CircuitNode:
    kind: str  # "literal" | "and" | "or" | "true" | "false"
    children: tuple = ()
    literal: int = 0
    decision_var: int = 0


def _iter_bits(mask: int):
    v = 1
    while mask:
        if mask & 1:
            yield v
        mask >>= 1
        v += 1


class Circuit:
    """Sealed circuit: node list, root id, variable universe 1..num_vars."""

    def __init__(self, nodes, root, num_vars, *, decomposable=False, smooth=False,
                 deterministic_by_construction=False):
        self.nodes = nodes
        self.root = root
        self.num_vars = num_vars
        self.decomposable = decomposable
        self.smooth = smooth
        self.deterministic_by_construction = deterministic_by_construction
        self.stats = None  # CompileStats when produced by the compiler
        self._varsets = None
        self._surface = None

    def __len__(self):
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(n.children) for n in self.nodes)

    def varset_bits(self, node_id=None) -> int:
        """Mentioned-variable set as a bitmask (bit v-1 = variable v)."""
        if self._varsets is None:
            sets = [0] * len(self.nodes)
            for i, n in enumerate(self.nodes):
                if n.kind == "literal":
                    sets[i] = 1 << (abs(n.literal) - 1)
                elif n.children:
                    m = 0
                    for c in n.children:
                        m |= sets[c]
                    sets[i] = m
            self._varsets = sets
        return self._varsets[self.root if node_id is None else node_id]

    def variables(self, node_id=None) -> frozenset:
        """Variables mentioned at/below a node; root by default."""
        return frozenset(_iter_bits(self.varset_bits(node_id)))

    def surface_masks(self):
        """Per node, bitmasks of positive/negative literals conjoined at the
        top of the node (unioned through ANDs, cut off at ORs)."""
        if self._surface is None:
            pos = [0] * len(self.nodes)
            neg = [0] * len(self.nodes)
            for i, n in enumerate(self.nodes):
                if n.kind == "literal":
                    b = 1 << (abs(n.literal) - 1)
                    if n.literal > 0:
                        pos[i] = b
                    else:
                        neg[i] = b
                elif n.kind == "and":
                    p = q = 0
                    for c in n.children:
                        p |= pos[c]
                        q |= neg[c]
                    pos[i], neg[i] = p, q
            self._surface = (pos, neg)
        return self._surface


class CircuitBuilder:
    """Bottom-up constructor with hash-consing.

    Structurally identical nodes get one id.  ``conj`` binarizes into nested
    binary ANDs and folds constants; ``disj`` drops false children and
    collapses single-child disjunctions.
    """

    def __init__(self, num_vars: int):
        if num_vars < 0:
            raise StructureError("num_vars must be >= 0")
        self.num_vars = num_vars
        self._nodes = []
        self._index = {}

    def _intern(self, key, node) -> int:
        hit = self._index.get(key)
        if hit is not None:
            return hit
        self._nodes.append(node)
        nid = len(self._nodes) - 1
        self._index[key] = nid
        return nid

    def _check_child(self, cid) -> None:
        if not isinstance(cid, int) or not 0 <= cid < len(self._nodes):
            raise StructureError(f"child id {cid!r} is not a defined node")

    def true(self) -> int:
        return self._intern(("true",), CircuitNode("true"))

    def false(self) -> int:
        return self._intern(("false",), CircuitNode("false"))

    def literal(self, lit: int) -> int:
        if lit == 0 or abs(lit) > self.num_vars:
            raise StructureError(f"literal {lit} out of range 1..{self.num_vars}")
        return self._intern(("lit", lit), CircuitNode("literal", literal=lit))

    def conj(self, ids) -> int:
        kept, seen = [], set()
        for cid in ids:
            self._check_child(cid)
            kind = self._nodes[cid].kind
            if kind == "true":
                continue
            if kind == "false":
                return self.false()
            if cid not in seen:
                seen.add(cid)
                kept.append(cid)
        if not kept:
            return self.true()
        acc = kept[-1]
        for cid in reversed(kept[:-1]):
            acc = self._intern(("and", cid, acc), CircuitNode("and", (cid, acc)))
        return acc

    def disj(self, ids, decision_var: int = 0) -> int:
        ids = list(ids)
        if not ids:
            raise StructureError("or() needs at least one child")
        kept, seen = [], set()
        for cid in ids:
            self._check_child(cid)
            kind = self._nodes[cid].kind
            if kind == "false":
                continue
            if kind == "true":
                return self.true()
            if cid not in seen:
                seen.add(cid)
                kept.append(cid)
        if not kept:
            return self.false()
        if len(kept) == 1:
            return kept[0]
        key = ("or", tuple(kept))
        return self._intern(key, CircuitNode("or", tuple(kept), decision_var=decision_var))

    def seal(self, root: int, *, deterministic: bool = False) -> Circuit:
        """Freeze into a Circuit.  Unreachable nodes are dropped (ids are
        renumbered in order), so the root ends up last.  The decomposable and
        smooth flags are computed honestly; determinism is caller-asserted."""
        self._check_child(root)
        nodes, new_root = _garbage_collect(self._nodes, root)
        c = Circuit(nodes, new_root, self.num_vars,
                    deterministic_by_construction=deterministic)
        c.decomposable = check_decomposable(c).ok
        c.smooth = check_smooth(c).ok
        return c


def _garbage_collect(nodes, root):
    reachable = set()
    stack = [root]
    while stack:
        nid = stack.pop()
        if nid in reachable:
            continue
        reachable.add(nid)
        stack.extend(nodes[nid].children)
    order = sorted(reachable)
    remap = {old: new for new, old in enumerate(order)}
    out = []
    for old in order:
        n = nodes[old]
        if n.children:
            n = CircuitNode(n.kind, tuple(remap[c] for c in n.children),
                            n.literal, n.decision_var)
        out.append(n)
    return out, remap[root]


@dataclass
class StructureReport:
    ok: bool
    violations: list  # offending node ids


def check_decomposable(circuit: Circuit) -> StructureReport:
    circuit.varset_bits()
    sets = circuit._varsets
    bad = []
    for i, n in enumerate(circuit.nodes):
        if n.kind != "and":
            continue
        acc = 0
        for c in n.children:
            if acc & sets[c]:
                bad.append(i)
                break
            acc |= sets[c]
    return StructureReport(not bad, bad)


def check_smooth(circuit: Circuit) -> StructureReport:
    circuit.varset_bits()
    sets = circuit._varsets
    bad = []
    for i, n in enumerate(circuit.nodes):
        if n.kind != "or" or len(n.children) <= 1:
            continue
        first = sets[n.children[0]]
        if any(sets[c] != first for c in n.children[1:]):
            bad.append(i)
    return StructureReport(not bad, bad)


_PAIRWISE_CAP = 2000


def check_deterministic_syntactic(circuit: Circuit) -> StructureReport:
    """Sound but incomplete determinism test.

    An OR passes if its children are distinct complete terms over the OR's
    variable set (one polarity per variable each), or if every pair of
    children conjoins some opposing literal (decision branches).  Circuits
    failing this may still be deterministic; the exhaustive oracle decides.
    """
    pos, neg = circuit.surface_masks()
    circuit.varset_bits()
    sets = circuit._varsets
    bad = []
    for i, n in enumerate(circuit.nodes):
        if n.kind != "or" or len(n.children) <= 1:
            continue
        universe = sets[i]
        masks = set()
        complete = True
        for c in n.children:
            if pos[c] & neg[c] or (pos[c] | neg[c]) != universe:
                complete = False
                break
            masks.add(pos[c])
        if complete and len(masks) == len(n.children):
            continue
        ch = n.children
        if len(ch) > _PAIRWISE_CAP:
            bad.append(i)
            continue
        ok = True
        for x in range(len(ch)):
            a = ch[x]
            for y in range(x + 1, len(ch)):
                b = ch[y]
                if not ((pos[a] & neg[b]) | (neg[a] & pos[b])):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            bad.append(i)
    return StructureReport(not bad, bad)


def smooth(circuit: Circuit) -> Circuit:
    """Equivalent smooth circuit.

    Each OR child missing a variable relative to its siblings is conjoined
    with a shared (v or not v) gadget, and the root is topped up to mention
    all of num_vars so counts range over the full variable universe.
    Determinism is preserved: gadgets are tautologies over variables the
    child did not mention.  Smoothing a smooth circuit is a node-identical
    no-op.
    """
    if not circuit.decomposable:
        raise StructureError("smooth() requires a decomposable circuit")
    circuit.varset_bits()
    old_sets = circuit._varsets
    b = CircuitBuilder(circuit.num_vars)
    gadgets = {}

    def gadget(v):
        g = gadgets.get(v)
        if g is None:
            g = b.disj([b.literal(v), b.literal(-v)], decision_var=v)
            gadgets[v] = g
        return g

    def pad(cid, missing_bits):
        if not missing_bits or b._nodes[cid].kind == "false":
            return cid
        return b.conj([cid] + [gadget(v) for v in _iter_bits(missing_bits)])

    mapping = []
    for i, n in enumerate(circuit.nodes):
        if n.kind == "true":
            mapping.append(b.true())
        elif n.kind == "false":
            mapping.append(b.false())
        elif n.kind == "literal":
            mapping.append(b.literal(n.literal))
        elif n.kind == "and":
            mapping.append(b.conj([mapping[c] for c in n.children]))
        else:
            kids = [pad(mapping[c], old_sets[i] & ~old_sets[c]) for c in n.children]
            mapping.append(b.disj(kids, decision_var=n.decision_var))
    full = (1 << circuit.num_vars) - 1
    root = pad(mapping[circuit.root], full & ~old_sets[circuit.root])
    return b.seal(root, deterministic=circuit.deterministic_by_construction)


# ---------------------------------------------------------------------------
# NNF file I/O


def write_nnf(circuit: Circuit) -> str:
    if circuit.root != len(circuit.nodes) - 1:
        raise StructureError("write_nnf expects the root to be the final node")
    lines = [f"nnf {len(circuit.nodes)} {circuit.edge_count} {circuit.num_vars}"]
    for n in circuit.nodes:
        if n.kind == "literal":
            lines.append(f"L {n.literal}")
        elif n.kind == "true":
            lines.append("A 0")
        elif n.kind == "false":
            lines.append("O 0 0")
        elif n.kind == "and":
            lines.append("A " + " ".join(str(x) for x in (len(n.children),) + n.children))
        else:
            head = (n.decision_var, len(n.children)) + n.children
            lines.append("O " + " ".join(str(x) for x in head))
    return "\n".join(lines) + "\n"


def read_nnf(text: str) -> Circuit:
    """Parse the NNF format verbatim (no simplification), validate counts and
    references, and derive the structural flags."""
    lines = text.splitlines()
    header = None
    nodes = []
    edges = 0
    header_line = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "nnf" or len(parts) != 4:
                raise ParseError("expected header 'nnf <nodes> <edges> <vars>'", lineno)
            try:
                header = tuple(int(x) for x in parts[1:])
            except ValueError:
                raise ParseError("non-integer header counts", lineno) from None
            header_line = lineno
            continue
        kind = parts[0]
        try:
            args = [int(x) for x in parts[1:]]
        except ValueError:
            raise ParseError(f"non-integer field in node line {line!r}", lineno) from None
        if kind == "L":
            if len(args) != 1 or args[0] == 0:
                raise ParseError("literal line must be 'L <nonzero lit>'", lineno)
            if abs(args[0]) > header[2]:
                raise ParseError(f"literal {args[0]} out of range 1..{header[2]}", lineno)
            nodes.append(CircuitNode("literal", literal=args[0]))
        elif kind == "A":
            if not args or args[0] != len(args) - 1:
                raise ParseError("AND child count mismatch", lineno)
            if args[0] == 0:
                nodes.append(CircuitNode("true"))
            else:
                children = tuple(args[1:])
                _check_refs(children, len(nodes), lineno)
                nodes.append(CircuitNode("and", children))
                edges += len(children)
        elif kind == "O":
            if len(args) < 2 or args[1] != len(args) - 2:
                raise ParseError("OR child count mismatch", lineno)
            if args[1] == 0:
                nodes.append(CircuitNode("false"))
            else:
                children = tuple(args[2:])
                _check_refs(children, len(nodes), lineno)
                nodes.append(CircuitNode("or", children, decision_var=max(args[0], 0)))
                edges += len(children)
        else:
            raise ParseError(f"unknown node line {line!r}", lineno)
    if header is None:
        raise ParseError("missing 'nnf' header", 1)
    n_nodes, n_edges, n_vars = header
    if len(nodes) != n_nodes:
        raise ParseError(f"header declares {n_nodes} nodes, found {len(nodes)}", header_line)
    if edges != n_edges:
        raise ParseError(f"header declares {n_edges} edges, found {edges}", header_line)
    if not nodes:
        raise ParseError("empty circuit", header_line)
    c = Circuit(nodes, len(nodes) - 1, n_vars)
    c.decomposable = check_decomposable(c).ok
    c.smooth = check_smooth(c).ok
    c.deterministic_by_construction = check_deterministic_syntactic(c).ok
    return c


def _check_refs(children, defined, lineno):
    for cid in children:
        if cid < 0 or cid >= defined:
            raise ParseError(f"child id {cid} not yet defined (forward reference)", lineno)
