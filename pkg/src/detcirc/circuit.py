"""Immutable DAG representation of algebraic circuits over the integers.

A circuit is a list of nodes with dense ids 0..size-1 in topological order
(every non-leaf node's children have strictly smaller ids), plus one or more
output ids.  Node kinds:

  ('var', j)      -- input variable x_j
  ('const', v)    -- integer constant (arbitrary precision)
  ('add', l, r)   -- binary addition
  ('mul', l, r)   -- binary multiplication
  ('inv', u)      -- division gate, computes the reciprocal of u

There is no dedicated minus node; negation is Mul(Const -1, .).  Circuits are
never deduplicated on construction: structurally equal subcircuits may be
distinct nodes, because proof witnesses depend on explicit node identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

VAR = "var"
CONST = "const"
ADD = "add"
MUL = "mul"
INV = "inv"

Node = tuple

# Syntactic degrees saturate here; the determinant pipeline contains circuits
# of exponential syntactic degree that must never be computed exactly.
DEGREE_CAP = 2**62


class CircuitError(ValueError):
    pass


class CircuitFormatError(CircuitError):
    """Malformed canonical circuit text; carries the failing byte offset."""

    def __init__(self, message: str, line: int, offset: int):
        super().__init__(f"line {line}, byte offset {offset}: {message}")
        self.line = line
        self.offset = offset


@dataclass(frozen=True)
class Circuit:
    """An immutable algebraic circuit.

    Treat ``nodes`` and ``outputs`` as read-only; all operations in this
    package return new circuits.  Circuits sharing a node tuple (e.g. the
    numerator/denominator pair of a division normalization) are cheap views.
    """

    nodes: tuple
    outputs: tuple
    var_count: int

    def __post_init__(self):
        if not self.outputs:
            raise CircuitError("circuit must have at least one output")
        n = len(self.nodes)
        for i, node in enumerate(self.nodes):
            kind = node[0]
            if kind == VAR:
                if not (0 <= node[1] < self.var_count):
                    raise CircuitError(f"node {i}: var index {node[1]} out of range")
            elif kind == CONST:
                pass
            elif kind in (ADD, MUL):
                if not (node[1] < i and node[2] < i and node[1] >= 0 and node[2] >= 0):
                    raise CircuitError(f"node {i}: children must have smaller ids")
            elif kind == INV:
                if not (0 <= node[1] < i):
                    raise CircuitError(f"node {i}: child must have a smaller id")
            else:
                raise CircuitError(f"node {i}: unknown kind {kind!r}")
        for out in self.outputs:
            if not (0 <= out < n):
                raise CircuitError(f"output id {out} out of range")

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def output(self) -> int:
        if len(self.outputs) != 1:
            raise CircuitError("circuit is not single-output")
        return self.outputs[0]

    def is_division_free(self) -> bool:
        return all(node[0] != INV for node in self.nodes)

    def inv_count(self) -> int:
        return sum(1 for node in self.nodes if node[0] == INV)

    def with_outputs(self, outputs: Sequence[int]) -> "Circuit":
        """Cheap view over the same node pool with different outputs."""
        return Circuit(self.nodes, tuple(outputs), self.var_count)

    def reachable(self, roots: Optional[Iterable[int]] = None) -> list:
        """Boolean mark per node: reachable from the given roots (default: outputs)."""
        mark = [False] * len(self.nodes)
        for r in self.outputs if roots is None else roots:
            mark[r] = True
        for i in range(len(self.nodes) - 1, -1, -1):
            if not mark[i]:
                continue
            node = self.nodes[i]
            kind = node[0]
            if kind in (ADD, MUL):
                mark[node[1]] = True
                mark[node[2]] = True
            elif kind == INV:
                mark[node[1]] = True
        return mark


class CircuitBuilder:
    """Append-only constructor enforcing topological numbering."""

    def __init__(self, var_count: int = 0):
        self.nodes = []
        self.var_count = var_count

    def _push(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def var(self, j: int) -> int:
        if j < 0:
            raise CircuitError("negative variable index")
        if j >= self.var_count:
            self.var_count = j + 1
        return self._push((VAR, j))

    def const(self, v: int) -> int:
        return self._push((CONST, int(v)))

    def add(self, l: int, r: int) -> int:
        self._check(l), self._check(r)
        return self._push((ADD, l, r))

    def mul(self, l: int, r: int) -> int:
        self._check(l), self._check(r)
        return self._push((MUL, l, r))

    def inv(self, u: int) -> int:
        self._check(u)
        return self._push((INV, u))

    def neg(self, u: int) -> int:
        return self.mul(self.const(-1), u)

    def sub(self, l: int, r: int) -> int:
        return self.add(l, self.neg(r))

    def _check(self, i: int):
        if not (0 <= i < len(self.nodes)):
            raise CircuitError(f"child id {i} not yet constructed")

    def add_tree(self, terms: Sequence[int]) -> int:
        """Balanced sum over existing node ids; empty sum is Const 0."""
        if not terms:
            return self.const(0)
        layer = list(terms)
        while len(layer) > 1:
            nxt = [self.add(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer[0]

    def mul_tree(self, factors: Sequence[int]) -> int:
        """Balanced product over existing node ids; empty product is Const 1."""
        if not factors:
            return self.const(1)
        layer = list(factors)
        while len(layer) > 1:
            nxt = [self.mul(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer[0]

    def power(self, u: int, k: int) -> int:
        """u^k as a balanced product tree over k shared references to u."""
        if k == 0:
            return self.const(1)
        return self.mul_tree([u] * k) if k > 1 else u

    def import_circuit(self, c: Circuit, only_reachable: bool = True) -> dict:
        """Deep-copy c's nodes into this builder; returns the old->new id map."""
        self.var_count = max(self.var_count, c.var_count)
        keep = c.reachable() if only_reachable else [True] * c.size
        remap = {}
        for i, node in enumerate(c.nodes):
            if not keep[i]:
                continue
            kind = node[0]
            if kind in (VAR, CONST):
                remap[i] = self._push(node)
            elif kind == INV:
                remap[i] = self._push((INV, remap[node[1]]))
            else:
                remap[i] = self._push((kind, remap[node[1]], remap[node[2]]))
        return remap

    def finish(self, outputs: Sequence[int], var_count: Optional[int] = None) -> Circuit:
        return Circuit(tuple(self.nodes), tuple(outputs), self.var_count if var_count is None else var_count)


@dataclass
class DegreeAnnotation:
    """Per-node syntactic-degree data.

    mode 'exact': exact syntactic degrees (constants count 0), saturating at
    DEGREE_CAP with the overflow flag set.  Modes 'degub'/'degubPrime': declared
    upper bounds produced by the homogenizer ([v,i] slots); degubPrime counts
    constant leaves as degree 1.
    """

    mode: str
    degree: dict = field(default_factory=dict)
    overflow: bool = False

    def bound(self, node: int) -> int:
        return self.degree[node]


def node_depths(c: Circuit) -> list:
    depths = [0] * c.size
    for i, node in enumerate(c.nodes):
        kind = node[0]
        if kind in (ADD, MUL):
            depths[i] = 1 + max(depths[node[1]], depths[node[2]])
        elif kind == INV:
            depths[i] = 1 + depths[node[1]]
    return depths


def depth(c: Circuit) -> int:
    """Max edge count over root-to-leaf directed paths (0 for a single leaf)."""
    depths = node_depths(c)
    return max(depths[o] for o in c.outputs)


def exact_degrees(c: Circuit) -> DegreeAnnotation:
    """Exact syntactic degrees, bottom-up, saturating at DEGREE_CAP."""
    deg = {}
    overflow = False
    for i, node in enumerate(c.nodes):
        kind = node[0]
        if kind == VAR:
            deg[i] = 1
        elif kind == CONST:
            deg[i] = 0
        elif kind == ADD:
            deg[i] = max(deg[node[1]], deg[node[2]])
        elif kind == MUL:
            d = deg[node[1]] + deg[node[2]]
            if d > DEGREE_CAP:
                d = DEGREE_CAP
                overflow = True
            deg[i] = d
        else:
            raise CircuitError("exact syntactic degree is defined for division-free circuits only")
    return DegreeAnnotation("exact", deg, overflow)


def disjoint_combine(f: Circuit, g: Circuit, op: str):
    """The unique circuit f OP g whose two root subgraphs are node-disjoint copies.

    Returns (circuit, (map_f, map_g)) where the maps send old ids to new ids;
    they are the witnesses used by the C1/C2 proof axioms.
    """
    if op not in (ADD, MUL):
        raise CircuitError("op must be 'add' or 'mul'")
    b = CircuitBuilder()
    map_f = b.import_circuit(f)
    map_g = b.import_circuit(g)
    root = b._push((op, map_f[f.output], map_g[g.output]))
    return b.finish([root]), (map_f, map_g)


def substitute(c: Circuit, sub: Mapping[int, Circuit]):
    """Replace each Var leaf with a mapped index by a fresh copy of its image.

    Returns (circuit, node_map); node_map records the renumbering of c's
    non-substituted nodes.  Unmapped variables are preserved.
    """
    images = {}
    for j, img in sub.items():
        if len(img.outputs) != 1:
            raise CircuitError("substitution images must be single-output")
        images[j] = img
    b = CircuitBuilder(var_count=c.var_count)
    for img in images.values():
        b.var_count = max(b.var_count, img.var_count)
    keep = c.reachable()
    remap = {}
    for i, node in enumerate(c.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind == VAR and node[1] in images:
            img = images[node[1]]
            imap = b.import_circuit(img)
            remap[i] = imap[img.output]
        elif kind in (VAR, CONST):
            remap[i] = b._push(node)
        elif kind == INV:
            remap[i] = b._push((INV, remap[node[1]]))
        else:
            remap[i] = b._push((kind, remap[node[1]], remap[node[2]]))
    out = b.finish([remap[o] for o in c.outputs])
    return out, remap


def power_chain(f: Circuit, k: int) -> Circuit:
    """f^k as a balanced binary product tree over k shared references to f's root.

    k = 0 returns Const 1 by convention; depth grows by at most ceil(log2 k).
    """
    root = f.output
    if k == 0:
        b = CircuitBuilder(var_count=f.var_count)
        return b.finish([b.const(1)])
    if k == 1:
        return f
    b = CircuitBuilder()
    remap = b.import_circuit(f)
    top = b.mul_tree([remap[root]] * k)
    return b.finish([top])


def structural_key(c: Circuit):
    """Canonical form of the part of c reachable from its outputs.

    Two circuits have equal keys iff they are isomorphic as labeled DAGs with
    corresponding outputs (sharing patterns included).  Used by the proof
    checker; construction never deduplicates.
    """
    order = {}
    nodes = []
    # iterative DFS to avoid recursion limits on deep circuits
    for out in c.outputs:
        stack = [(out, False)]
        while stack:
            i, expanded = stack.pop()
            if i in order:
                continue
            node = c.nodes[i]
            kind = node[0]
            if kind in (VAR, CONST):
                order[i] = len(nodes)
                nodes.append(node)
            elif not expanded:
                stack.append((i, True))
                if kind == INV:
                    stack.append((node[1], False))
                else:
                    stack.append((node[2], False))
                    stack.append((node[1], False))
            else:
                if kind == INV:
                    order[i] = len(nodes)
                    nodes.append((INV, order[node[1]]))
                else:
                    order[i] = len(nodes)
                    nodes.append((kind, order[node[1]], order[node[2]]))
    return tuple(nodes), tuple(order[o] for o in c.outputs), c.var_count


def structurally_equal(a: Circuit, b: Circuit) -> bool:
    return structural_key(a) == structural_key(b)


FORMAT_VERSION = 1


def encode(c: Circuit) -> bytes:
    """Canonical line-oriented text form; deterministic for equal circuits."""
    lines = [f"circuit {FORMAT_VERSION}", f"vars {c.var_count}",
             "outputs " + " ".join(str(o) for o in c.outputs),
             f"nodes {c.size}"]
    for i, node in enumerate(c.nodes):
        kind = node[0]
        if kind in (VAR, CONST, INV):
            lines.append(f"{i} {kind} {node[1]}")
        else:
            lines.append(f"{i} {kind} {node[1]} {node[2]}")
    return ("\n".join(lines) + "\n").encode("ascii")


def decode(data: bytes) -> Circuit:
    text = data.decode("ascii", errors="replace")
    offset = 0
    parsed = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        parsed.append((lineno, offset, raw))
        offset += len(raw.encode("ascii", errors="replace")) + 1

    def fail(msg, entry):
        raise CircuitFormatError(msg, entry[0], entry[1])

    rows = [p for p in parsed if p[2].strip()]
    if len(rows) < 4:
        raise CircuitFormatError("truncated header", 1, 0)
    head, vars_row, out_row, count_row = rows[0], rows[1], rows[2], rows[3]
    parts = head[2].split()
    if parts[:1] != ["circuit"] or len(parts) != 2 or parts[1] != str(FORMAT_VERSION):
        fail("expected 'circuit 1' header", head)
    parts = vars_row[2].split()
    if parts[:1] != ["vars"] or len(parts) != 2 or not parts[1].isdigit():
        fail("expected 'vars <n>'", vars_row)
    var_count = int(parts[1])
    parts = out_row[2].split()
    if parts[:1] != ["outputs"] or len(parts) < 2:
        fail("expected 'outputs <id>...'", out_row)
    try:
        outputs = [int(p) for p in parts[1:]]
    except ValueError:
        fail("bad output id", out_row)
    parts = count_row[2].split()
    if parts[:1] != ["nodes"] or len(parts) != 2 or not parts[1].isdigit():
        fail("expected 'nodes <n>'", count_row)
    n = int(parts[1])
    body = rows[4:]
    if len(body) != n:
        raise CircuitFormatError(f"expected {n} node records, found {len(body)}",
                                 body[-1][0] if body else count_row[0],
                                 body[-1][1] if body else count_row[1])
    nodes = []
    for want_id, entry in enumerate(body):
        parts = entry[2].split()
        if len(parts) < 3:
            fail("node record needs 'id kind payload'", entry)
        try:
            nid = int(parts[0])
        except ValueError:
            fail("bad node id", entry)
        if nid != want_id:
            fail(f"node ids must be dense ascending (expected {want_id})", entry)
        kind = parts[1]
        try:
            if kind == VAR:
                if len(parts) != 3:
                    fail("var takes one payload field", entry)
                nodes.append((VAR, int(parts[2])))
            elif kind == CONST:
                if len(parts) != 3:
                    fail("const takes one payload field", entry)
                nodes.append((CONST, int(parts[2])))
            elif kind == INV:
                if len(parts) != 3:
                    fail("inv takes one child id", entry)
                child = int(parts[2])
                if child >= nid:
                    fail("forward-referencing child id", entry)
                nodes.append((INV, child))
            elif kind in (ADD, MUL):
                if len(parts) != 4:
                    fail(f"{kind} takes two child ids", entry)
                l, r = int(parts[2]), int(parts[3])
                if l >= nid or r >= nid:
                    fail("forward-referencing child id", entry)
                nodes.append((kind, l, r))
            else:
                fail(f"unknown op tag {kind!r}", entry)
        except ValueError:
            fail("bad integer payload", entry)
    try:
        return Circuit(tuple(nodes), tuple(outputs), var_count)
    except CircuitError as e:
        raise CircuitFormatError(str(e), count_row[0], count_row[1]) from e


def to_dot(c: Circuit) -> str:
    """Best-effort GraphViz export (non-canonical)."""
    lines = ["digraph circuit {", "  rankdir=BT;"]
    for i, node in enumerate(c.nodes):
        kind = node[0]
        if kind == VAR:
            label = f"x{node[1]}"
        elif kind == CONST:
            label = str(node[1])
        elif kind == ADD:
            label = "+"
        elif kind == MUL:
            label = "*"
        else:
            label = "inv"
        shape = "box" if kind in (VAR, CONST) else "ellipse"
        lines.append(f'  n{i} [label="{label}", shape={shape}];')
        if kind in (ADD, MUL):
            lines.append(f"  n{node[1]} -> n{i};")
            lines.append(f"  n{node[2]} -> n{i};")
        elif kind == INV:
            lines.append(f"  n{node[1]} -> n{i};")
    for o in c.outputs:
        lines.append(f'  out{o} [label="out", shape=plaintext];')
        lines.append(f"  n{o} -> out{o};")
    lines.append("}")
    return "\n".join(lines) + "\n"
