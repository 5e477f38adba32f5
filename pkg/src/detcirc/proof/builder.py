"""Proof construction helpers.

Generators work with *terms*: plain nested tuples ("var", j), ("const", v),
("add", a, b), ("mul", a, b), ("inv", a).  Terms are emitted into circuits
with value-level sharing inside each justification slot, so equal subterms
become one node per slot and emissions of the same term are isomorphic DAGs.
Witnesses are then computed automatically by walking the two isomorphic
emissions in lockstep, using the same shape derivation as the checker.
"""

from __future__ import annotations

from typing import Optional, Sequence

from ..circuit import ADD, CONST, INV, MUL, VAR, Circuit, CircuitBuilder
from ..terms import (circuit_of, circuit_to_term, emit_term, replace_subterm,
                     subterm, tadd, tconst, tinv, tinv_k, tmul, tmul_tree,
                     tneg, tprod, tsub, tsum, tvar)
from .checker import _Fail, _expected_maps
from .model import Justification, Proof, ProofLine, SubMap, resolve_ref


def iso_pairs(src: Circuit, src_root: int, dst: Circuit, dst_root: int) -> tuple:
    """Node pairs of the unique structure-preserving correspondence between two
    identically-shared emissions of one term.  Raises on mismatch."""
    mapping = {}
    stack = [(src_root, dst_root)]
    while stack:
        a, b = stack.pop()
        got = mapping.get(a)
        if got is not None:
            if got != b:
                raise ValueError(f"subcircuits are not isomorphic: node {a} maps to both {got} and {b}")
            continue
        na, nb = src.nodes[a], dst.nodes[b]
        if na[0] != nb[0]:
            raise ValueError(f"subcircuits differ at nodes {a}/{b}: {na[0]} vs {nb[0]}")
        kind = na[0]
        if kind in (VAR, CONST):
            if na[1] != nb[1]:
                raise ValueError(f"leaf labels differ at nodes {a}/{b}")
        elif kind == INV:
            stack.append((na[1], nb[1]))
        else:
            stack.append((na[1], nb[1]))
            stack.append((na[2], nb[2]))
        mapping[a] = b
    return tuple(sorted(mapping.items()))


class ProofBuilder:
    """Emits proof lines with automatically computed witnesses.

    Axiom helpers take terms; rule helpers take previous line indices and
    derive their conclusion terms from the stored premise terms.  Every line
    side is the canonical value-shared emission of its term, so emissions of
    equal terms are isomorphic wherever they appear and witnesses can be
    computed by lockstep traversal.
    """

    def __init__(self, system: str = "PC", k: Optional[int] = None):
        self.proof = Proof([], system, k)
        self.terms = []  # (lhs_term, rhs_term) per line, None if circuit-level

    # -- internals ---------------------------------------------------------

    def _line_from_terms(self, lhs_term: tuple, rhs_term: tuple,
                         just: Justification) -> int:
        idx = self.proof.add(ProofLine(circuit_of(lhs_term), circuit_of(rhs_term), just))
        self.terms.append((lhs_term, rhs_term))
        self._auto_witness(idx)
        return idx

    def _add_line(self, lhs: Circuit, rhs: Circuit, just: Justification,
                  terms=None) -> int:
        idx = self.proof.add(ProofLine(lhs, rhs, just))
        self.terms.append(terms)
        self._auto_witness(idx)
        return idx

    def _auto_witness(self, idx: int):
        line = self.proof.lines[idx]
        try:
            wanted = _expected_maps(self.proof, idx)
        except _Fail as e:
            raise ValueError(f"generated line {idx} is malformed: {e.reason}")
        maps = []
        for (src_ref, src_root, dst_ref, dst_root) in wanted:
            src = resolve_ref(self.proof, idx, src_ref)
            dst = resolve_ref(self.proof, idx, dst_ref)
            pairs = iso_pairs(src, src_root, dst, dst_root)
            maps.append(SubMap(src_ref, src_root, dst_ref, dst_root, pairs))
        line.witness = tuple(maps)

    def term_of(self, idx: int, side: str = "rhs") -> tuple:
        stored = self.terms[idx]
        if stored is not None:
            return stored[1] if side == "rhs" else stored[0]
        line = self.proof.lines[idx]
        return circuit_to_term(line.rhs if side == "rhs" else line.lhs)

    # -- axioms ------------------------------------------------------------

    def refl(self, t: tuple) -> int:
        return self._line_from_terms(t, t, Justification("A1"))

    def comm_add(self, f: tuple, g: tuple) -> int:
        return self._line_from_terms(tadd(f, g), tadd(g, f), Justification("A2"))

    def assoc_add(self, f: tuple, g: tuple, h: tuple) -> int:
        """F + (G + H) = (F + G) + H"""
        return self._line_from_terms(tadd(f, tadd(g, h)), tadd(tadd(f, g), h),
                                     Justification("A3"))

    def comm_mul(self, f: tuple, g: tuple) -> int:
        return self._line_from_terms(tmul(f, g), tmul(g, f), Justification("A4"))

    def assoc_mul(self, f: tuple, g: tuple, h: tuple) -> int:
        """F * (G * H) = (F * G) * H"""
        return self._line_from_terms(tmul(f, tmul(g, h)), tmul(tmul(f, g), h),
                                     Justification("A5"))

    def distrib(self, f: tuple, g: tuple, h: tuple) -> int:
        """F * (G + H) = F*G + F*H"""
        return self._line_from_terms(tmul(f, tadd(g, h)),
                                     tadd(tmul(f, g), tmul(f, h)),
                                     Justification("A6"))

    def plus_zero(self, f: tuple) -> int:
        return self._line_from_terms(tadd(f, tconst(0)), f, Justification("A7"))

    def times_zero(self, f: tuple) -> int:
        return self._line_from_terms(tmul(f, tconst(0)), tconst(0), Justification("A8"))

    def times_one(self, f: tuple) -> int:
        return self._line_from_terms(tmul(f, tconst(1)), f, Justification("A9"))

    def scalar_add(self, x: int, y: int) -> int:
        return self._line_from_terms(tadd(tconst(x), tconst(y)), tconst(x + y),
                                     Justification("A10"))

    def scalar_mul(self, x: int, y: int) -> int:
        return self._line_from_terms(tmul(tconst(x), tconst(y)), tconst(x * y),
                                     Justification("A10"))

    def share_add(self, shared: Circuit) -> int:
        """C1: F (+) G = F + G, from a shared circuit to disjoint copies."""
        return self._share(shared, ADD, "C1")

    def share_mul(self, shared: Circuit) -> int:
        return self._share(shared, MUL, "C2")

    def _share(self, shared: Circuit, kind: str, name: str) -> int:
        node = shared.nodes[shared.output]
        if node[0] != kind:
            raise ValueError(f"{name} needs a {kind} root")
        b = CircuitBuilder()
        m1 = {}
        r1 = self._import_sub(b, shared, node[1], m1)
        m2 = {}
        r2 = self._import_sub(b, shared, node[2], m2)
        rhs = b.finish([b._push((kind, r1, r2))])
        lhs = Circuit(shared.nodes, (shared.output,), shared.var_count)
        return self._add_line(lhs, rhs, Justification(name))

    @staticmethod
    def _import_sub(b: CircuitBuilder, c: Circuit, root: int, remap: dict) -> int:
        order = sorted(_collect(c, root))
        for i in order:
            node = c.nodes[i]
            kind = node[0]
            if kind in (VAR, CONST):
                remap[i] = b._push(node)
            elif kind == INV:
                remap[i] = b.inv(remap[node[1]])
            else:
                remap[i] = b._push((kind, remap[node[1]], remap[node[2]]))
        b.var_count = max(b.var_count, c.var_count)
        return remap[root]

    def div_axiom(self, f: tuple) -> int:
        """D: F * F^-1 = 1 (PIdiv only; well-definedness is never checked)."""
        return self._line_from_terms(tmul(f, tinv(f)), tconst(1), Justification("D"))

    # -- rules -------------------------------------------------------------

    def sym(self, i: int) -> int:
        return self._line_from_terms(self.term_of(i, "rhs"), self.term_of(i, "lhs"),
                                     Justification("R1", (i,)))

    def trans(self, i: int, j: int) -> int:
        return self._line_from_terms(self.term_of(i, "lhs"), self.term_of(j, "rhs"),
                                     Justification("R2", (i, j)))

    def trans_chain(self, idxs: Sequence[int]) -> int:
        cur = idxs[0]
        for nxt in idxs[1:]:
            cur = self.trans(cur, nxt)
        return cur

    def rule_add(self, i: int, j: int) -> int:
        return self._rule2(i, j, tadd, "R3")

    def rule_mul(self, i: int, j: int) -> int:
        return self._rule2(i, j, tmul, "R4")

    def _rule2(self, i: int, j: int, combine, name: str) -> int:
        lhs_t = combine(self.term_of(i, "lhs"), self.term_of(j, "lhs"))
        rhs_t = combine(self.term_of(i, "rhs"), self.term_of(j, "rhs"))
        return self._line_from_terms(lhs_t, rhs_t, Justification(name, (i, j)))

    # -- derived -----------------------------------------------------------

    def rewrite(self, target: tuple, path: Sequence[int], line_idx: int,
                reverse: bool = False) -> int:
        """Congruence: target = target[path := other side of line_idx].

        The subterm of target at path must match the line's lhs (rhs when
        reverse).  Returns the index of the derived line.
        """
        cur = self.sym(line_idx) if reverse else line_idx
        for depth in range(len(path) - 1, -1, -1):
            prefix = path[:depth]
            ctx = subterm(target, prefix)
            op = ctx[0]
            side = path[depth]
            sibling = ctx[2] if side == 0 else ctx[1]
            sib = self.refl(sibling)
            pair = (cur, sib) if side == 0 else (sib, cur)
            cur = self.rule_add(*pair) if op == ADD else self.rule_mul(*pair)
        return cur

    def rewrite_all(self, target: tuple, steps: Sequence) -> int:
        """Sequential rewrites [(path, line_idx, reverse), ...]; returns the
        line proving target = fully-rewritten target."""
        acc = None
        cur_term = target
        for (path, line_idx, reverse) in steps:
            ln = self.rewrite(cur_term, path, line_idx, reverse)
            new_sub = self.term_of(line_idx, "lhs" if reverse else "rhs")
            cur_term = replace_subterm(cur_term, path, new_sub)
            acc = ln if acc is None else self.trans(acc, ln)
        if acc is None:
            acc = self.refl(target)
        return acc


def _collect(c: Circuit, root: int) -> set:
    seen = {root}
    stack = [root]
    while stack:
        i = stack.pop()
        node = c.nodes[i]
        if node[0] in (ADD, MUL):
            children = (node[1], node[2])
        elif node[0] == INV:
            children = (node[1],)
        else:
            children = ()
        for ch in children:
            if ch not in seen:
                seen.add(ch)
                stack.append(ch)
    return seen


def _copy_circuit(c: Circuit) -> Circuit:
    b = CircuitBuilder(var_count=c.var_count)
    m = b.import_circuit(c)
    return b.finish([m[o] for o in c.outputs])
