"""Strassen homogenization into syntactic-homogeneous components.

Every node v of the input is duplicated into slots [v,0]..[v,d]; slot i of a
product is the convolution sum over its children's slots, slot i of a sum
adds the children's slot-i copies.  Slots known to be zero point at shared
per-degree Const-0 nodes so that the duplication map stays total.  The
declared bound of [v,i] is i, which makes every + gate in the output
syntactically homogeneous by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .circuit import (ADD, CONST, VAR, Circuit, CircuitBuilder,
                      CircuitError, DegreeAnnotation, exact_degrees)

# Frozen multiplier for the size bound size(decomposition) <= K * d^2 * size(base),
# measured over the acceptance corpus with d >= 1.
SIZE_BOUND_K = 8


@dataclass
class HomogeneousDecomposition:
    """d+1 component circuits sharing one node pool.

    circuit has outputs C^(0)..C^(d); annotation carries the declared bound of
    every pool node; dup_map sends (base node, slot) to the pool node.
    """

    base: Circuit
    circuit: Circuit
    annotation: DegreeAnnotation
    dup_map: dict
    d: int

    def component(self, i: int) -> Circuit:
        return self.circuit.with_outputs([self.circuit.outputs[i]])

    @property
    def components(self) -> list:
        return [self.component(i) for i in range(self.d + 1)]

    @property
    def size(self) -> int:
        return self.circuit.size


def exact_degree_witness(f: Circuit) -> DegreeAnnotation:
    """Bottom-up exact syntactic degrees with overflow flag at the cap."""
    return exact_degrees(f)


def homogenize(f: Circuit, d: int, witness: Optional[DegreeAnnotation] = None,
               only_i: Optional[int] = None, constants_as_degree_one: bool = False,
               declared: Optional[DegreeAnnotation] = None):
    """Split f into syntactic-homogeneous components C^(0)..C^(d).

    d is the caller's upper bound and is not verified; a wrong bound silently
    truncates.  With a witness (exact degrees), slots above a node's degree are
    zeroed.  constants_as_degree_one selects the degubPrime variant in which
    constant leaves carry bound 1.  With `declared`, the input is taken to be
    already a sum of syntactic-homogeneous circuits with the given per-node
    bounds, and is returned unchanged apart from zero padding.  With only_i,
    the single component C^(only_i) is returned as a Circuit.
    """
    if len(f.outputs) != 1:
        raise CircuitError("homogenize expects a single-output circuit")
    mode = "degubPrime" if constants_as_degree_one else "degub"
    if declared is not None:
        dec = _declared_decomposition(f, d, declared, mode)
    else:
        dec = _homogenize_fresh(f, d, witness, mode)
    if only_i is not None:
        return dec.component(only_i)
    return dec


def _declared_decomposition(f: Circuit, d: int, declared: DegreeAnnotation,
                            mode: str) -> HomogeneousDecomposition:
    root = f.output
    root_deg = declared.degree[root]
    if root_deg > d:
        raise CircuitError(f"declared degree {root_deg} exceeds bound {d}")
    b = CircuitBuilder(var_count=f.var_count)
    remap = b.import_circuit(f)
    zeros = [b.const(0) for _ in range(d + 1)]
    ann = {remap[i]: declared.degree[i] for i in remap}
    for i, z in enumerate(zeros):
        ann[z] = i
    dup = {(i, declared.degree[i]): remap[i] for i in remap}
    for i in remap:
        for t in range(d + 1):
            dup.setdefault((i, t), zeros[t])
    outputs = [remap[root] if t == root_deg else zeros[t] for t in range(d + 1)]
    circ = b.finish(outputs)
    return HomogeneousDecomposition(f, circ, DegreeAnnotation(mode, ann), dup, d)


def _homogenize_fresh(f: Circuit, d: int, witness: Optional[DegreeAnnotation],
                      mode: str) -> HomogeneousDecomposition:
    root = f.output
    keep = f.reachable()
    b = CircuitBuilder(var_count=f.var_count)
    zeros = [b.const(0) for _ in range(d + 1)]
    ann = {z: i for i, z in enumerate(zeros)}
    slot = {}
    const_slot = 1 if mode == "degubPrime" else 0

    def cap(i: int) -> int:
        if witness is None:
            return d
        return min(d, witness.degree[i])

    for i, node in enumerate(f.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        row = [zeros[t] for t in range(d + 1)]
        if kind == CONST:
            if const_slot <= d:
                nid = b._push(node)
                ann[nid] = const_slot
                row[const_slot] = nid
        elif kind == VAR:
            if 1 <= d:
                nid = b._push(node)
                ann[nid] = 1
                row[1] = nid
        elif kind == ADD:
            l, r = node[1], node[2]
            for t in range(cap(i) + 1):
                nid = b.add(slot[l][t], slot[r][t])
                ann[nid] = t
                row[t] = nid
        else:
            l, r = node[1], node[2]
            for t in range(cap(i) + 1):
                first = len(b.nodes)
                terms = [b.mul(slot[l][j], slot[r][t - j]) for j in range(t + 1)]
                tree = b.add_tree(terms)
                for nid in range(first, len(b.nodes)):
                    ann[nid] = t
                row[t] = tree
        slot[i] = row
    dup = {(i, t): slot[i][t] for i in slot for t in range(d + 1)}
    circ = b.finish(slot[root])
    return HomogeneousDecomposition(f, circ, DegreeAnnotation(mode, ann), dup, d)


def sum_components(dec: HomogeneousDecomposition) -> Circuit:
    """Balanced Add tree over the components; polynomial-equal to the base."""
    b = CircuitBuilder(var_count=dec.circuit.var_count)
    remap = b.import_circuit(dec.circuit, only_reachable=False)
    top = b.add_tree([remap[o] for o in dec.circuit.outputs])
    return b.finish([top])
