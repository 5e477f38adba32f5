"""Balancing proofs: from a proof of F = G to a proof of [F] = [G].

For every line the balanced versions of the two sides are related through
simulation equations mirroring the balancing recursion:

    [F_v]    = [F_v1] o [F_v2]
    [dw f_v] = [dw f_v1] + [dw f_v2]     (v = v1 + v2)
    [dw f_v] = [dw f_v1] * [F_v2]        (v = v1 * v2, w under the high side)

The base cases are linear-form coefficient identities (pure ring plus A10);
the recursive cases rewrite the frontier sums with the stage-(i) equations
and rearrange, exactly the scheme of the stage libraries.  Because the
balanced subcircuit below a node depends only on that node's subcircuit, a
premise's balanced sides reappear verbatim inside the conclusions, so rules
transfer directly.
"""

from __future__ import annotations

from typing import Optional

from ..balance import _Balancer, exact_degub_prime
from ..circuit import ADD, MUL, VAR, Circuit, DegreeAnnotation
from ..terms import circuit_to_term, replace_subterm, tadd, tmul
from .builder import ProofBuilder
from .checker import check
from .model import PC, Proof
from .ring import RingProver
from .transforms import TransformError, _find_path


class _SideBalancer:
    """Balances one circuit and proves the simulation equations over it."""

    def __init__(self, pb: ProofBuilder, c: Circuit, ann: Optional[DegreeAnnotation]):
        self.pb = pb
        self.bal = _Balancer(c, ann or exact_degub_prime(c))
        self.bal.run([("F", self.bal.c.output)])
        self.out = self.bal.out.finish([self.bal.Fv[self.bal.c.output]])
        self._term_memo: dict = {}
        self._simF: dict = {}
        self._simD: dict = {}

    def node_term(self, out_node: int) -> tuple:
        got = self._term_memo.get(out_node)
        if got is None:
            got = self._term_memo[out_node] = circuit_to_term(self.out, out_node)
        return got

    def F_term(self, v: int) -> tuple:
        self.bal.run([("F", v)])
        self.out = self.bal.out.finish([self.bal.Fv[self.bal.c.output]])
        return self.node_term(self.bal.Fv[v])

    def D_term(self, w: int, v: int) -> tuple:
        self.bal.run([("D", w, v)])
        self.out = self.bal.out.finish([self.bal.Fv[self.bal.c.output]])
        return self.node_term(self.bal.Dwv[(w, v)])

    def _atoms(self, *terms) -> set:
        return {t for t in terms if t[0] in (ADD, MUL, VAR)}

    # -- simulation equations ------------------------------------------------

    def sim_F(self, v: int) -> int:
        """Line: [F_v] = [F_v1] o [F_v2] for a non-leaf v."""
        got = self._simF.get(v)
        if got is not None:
            return got
        bal, pb = self.bal, self.pb
        node = bal.c.nodes[v]
        kind = node[0]
        if kind not in (ADD, MUL):
            raise TransformError("sim_F needs an internal node")
        v1, v2 = node[1], node[2]
        lhs = self.F_term(v)
        t1, t2 = self.F_term(v1), self.F_term(v2)
        target = tadd(t1, t2) if kind == ADD else tmul(t1, t2)
        if v in bal.boundary:
            line = pb.refl(lhs)  # emitted literally as [F_v1] + [F_v2]
        elif bal.ann[v] <= 1:
            # linear forms: coefficient arithmetic only
            line = RingProver(pb).prove_equal(lhs, target)
        elif kind == ADD:
            m = bal._scale(bal.ann[v])
            line = self._case_sum(v, v1, v2, m, lhs, target)
        else:
            line = self._case_prod(v, v1, v2, lhs, target)
        self._simF[v] = line
        return line

    def _frontier_rewrites(self, lhs: tuple, frontier, eq_of) -> tuple:
        """Rewrite every [dt f_v]-style factor in the frontier sum."""
        pb = self.pb
        cur = lhs
        acc = None
        for t in frontier:
            needle, line = eq_of(t)
            if needle is None:
                continue
            path = _find_path(cur, needle)
            if path is None:
                raise TransformError("frontier factor not found in the balanced sum")
            ln = pb.rewrite(cur, path, line)
            cur = replace_subterm(cur, path, pb.term_of(line, "rhs"))
            acc = ln if acc is None else pb.trans(acc, ln)
        if acc is None:
            acc = pb.refl(lhs)
        return acc, cur

    def _case_sum(self, v, v1, v2, m, lhs, target) -> int:
        """[F_v] = [F_v1] + [F_v2] through the frontier of scale m."""
        bal, pb = self.bal, self.pb
        frontier = bal.frontier_of(v, m)

        def eq_of(t):
            # [dt f_(v1+v2)] = [dt f_v1] + [dt f_v2]
            return self.D_term(t, v), self.sim_D_sum(t, v)

        acc, cur = self._frontier_rewrites(lhs, frontier, eq_of)
        atoms = set()
        for t in frontier:
            t1, t2 = bal._split(t)
            atoms |= self._atoms(self.F_term(t1), self.F_term(t2),
                                 self.D_term(t, v1), self.D_term(t, v2))
        ring = RingProver(pb, atoms).prove_equal(cur, target)
        return pb.trans(acc, ring)

    def _case_prod(self, v, v1, v2, lhs, target) -> int:
        bal, pb = self.bal, self.pb
        m = bal._scale(bal.ann[v])
        frontier = bal.frontier_of(v, m)
        if frontier == (v,):
            # B_m(F_v) = {v}: the sum is [dv f_v] * [F_v1] * [F_v2] with dv = 1
            return RingProver(pb, self._atoms(self.F_term(v1), self.F_term(v2))
                              ).prove_equal(lhs, target)
        high, low = bal._split(v)

        def eq_of(t):
            # [dt f_(v1*v2)] = [dt f_high] * [F_low]
            return self.D_term(t, v), self.sim_D_prod(t, v)

        acc, cur = self._frontier_rewrites(lhs, frontier, eq_of)
        atoms = self._atoms(self.F_term(low))
        for t in frontier:
            t1, t2 = bal._split(t)
            atoms |= self._atoms(self.F_term(t1), self.F_term(t2), self.D_term(t, high))
        ring = RingProver(pb, atoms).prove_equal(cur, target)
        return pb.trans(acc, ring)

    # w-against-children equations; these are the stage-library lines

    def sim_D_sum(self, w, v) -> int:
        """[dw f_v] = [dw f_v1] + [dw f_v2] for v = v1 + v2."""
        key = ("sum", w, v)
        got = self._simD.get(key)
        if got is None:
            got = self._simD[key] = self._sim_D(w, v, ADD)
        return got

    def sim_D_prod(self, w, v) -> int:
        """[dw f_v] = [dw f_high] * [F_low] for v = v1 * v2."""
        key = ("prod", w, v)
        got = self._simD.get(key)
        if got is None:
            got = self._simD[key] = self._sim_D(w, v, MUL)
        return got

    def _sim_D(self, w, v, kind) -> int:
        bal, pb = self.bal, self.pb
        if w == v:
            raise TransformError("sim_D needs w below v")
        node = bal.c.nodes[v]
        v1, v2 = node[1], node[2]
        lhs = self.D_term(w, v)
        if kind == ADD:
            target = tadd(self.D_term(w, v1), self.D_term(w, v2))
        else:
            high, low = bal._split(v)
            target = tmul(self.D_term(w, high), self.F_term(low))
        gap = bal.ann[v] - bal.ann[w]
        if gap <= 1:
            # both sides are built from linear forms
            return RingProver(pb).prove_equal(lhs, target)
        m = bal._scale(gap) + bal.ann[w]
        frontier = bal.frontier_of(v, m)
        if kind == MUL and frontier == (v,):
            atoms = self._atoms(self.D_term(w, high), self.F_term(low))
            return RingProver(pb, atoms).prove_equal(lhs, target)

        def eq_of(t):
            if kind == ADD:
                return self.D_term(t, v), self.sim_D_sum(t, v)
            return self.D_term(t, v), self.sim_D_prod(t, v)

        acc, cur = self._frontier_rewrites(lhs, frontier, eq_of)
        atoms = set()
        if kind == MUL:
            atoms |= self._atoms(self.F_term(low))
        for t in frontier:
            t1, t2 = bal._split(t)
            atoms |= self._atoms(self.F_term(t2), self.D_term(w, t1))
            if kind == ADD:
                atoms |= self._atoms(self.D_term(t, v1), self.D_term(t, v2))
            else:
                atoms |= self._atoms(self.D_term(t, high))
        ring = RingProver(pb, atoms).prove_equal(cur, target)
        return pb.trans(acc, ring)


def balance_proof(p: Proof, annotations: Optional[dict] = None) -> Proof:
    """Proof of [F] = [G] for every line F = G of a PC proof over sums of
    syntactic-homogeneous circuits.

    annotations: optional map line index -> (lhs DegreeAnnotation, rhs
    DegreeAnnotation); exact degubPrime bounds are used when omitted.
    """
    v = check(p, "syntactic")
    if not v.ok:
        raise TransformError(f"input proof fails at line {v.line}: {v.reason}")
    if p.system != PC:
        raise TransformError("balance_proof takes division-free PC proofs")
    pb = ProofBuilder(system=PC)
    sides: dict = {}

    def side(idx: int, which: str) -> "_SideBalancer":
        key = (idx, which)
        got = sides.get(key)
        if got is None:
            line = p.lines[idx]
            c = line.lhs if which == "lhs" else line.rhs
            ann = None
            if annotations and idx in annotations:
                ann = annotations[idx][0 if which == "lhs" else 1]
            got = sides[key] = _SideBalancer(pb, c, ann)
        return got

    out_line: dict = {}
    for idx, line in enumerate(p.lines):
        name = line.just.name
        prem = line.just.premises
        sl = side(idx, "lhs")
        sr = side(idx, "rhs")
        bl = sl.F_term(sl.bal.c.output)
        br = sr.F_term(sr.bal.c.output)
        if bl == br:
            out_line[idx] = pb.refl(bl)
            continue
        if name == "R1":
            out_line[idx] = pb.sym(out_line[prem[0]])
        elif name == "R2":
            out_line[idx] = pb.trans(out_line[prem[0]], out_line[prem[1]])
        elif name in ("R3", "R4"):
            combine = pb.rule_add if name == "R3" else pb.rule_mul
            a = sl.sim_F(sl.bal.c.output)
            b = combine(out_line[prem[0]], out_line[prem[1]])
            c = pb.sym(sr.sim_F(sr.bal.c.output))
            out_line[idx] = pb.trans_chain([a, b, c])
        else:
            out_line[idx] = _axiom_balanced(pb, sl, sr, name)
    out = pb.proof
    out.conclusions = [out_line[i] for i in (p.conclusions or [len(p.lines) - 1])]
    return out


def _unfold(pb: ProofBuilder, sb: _SideBalancer, v: int, depth: int):
    """Line [F_v] = shallow op term over balanced operand terms, plus the
    operand node list, unfolding `depth` levels of the input circuit."""
    bal = sb.bal
    node = bal.c.nodes[v]
    if depth == 0 or node[0] not in (ADD, MUL):
        return (pb.refl(sb.F_term(v)), sb.F_term(v), [v])
    line = sb.sim_F(v)
    term = pb.term_of(line, "rhs")
    ops = []
    sub_ls = []
    for pos, ch in enumerate((node[1], node[2])):
        sub_line, sub_term, sub_ops = _unfold(pb, sb, ch, depth - 1)
        chterm = sb.F_term(ch)
        if sub_term != chterm:
            path = (pos,)
            ln = pb.rewrite(term, path, sub_line)
            term = replace_subterm(term, path, sub_term)
            line = pb.trans(line, ln)
        ops.extend(sub_ops)
    return (line, term, ops)


def _axiom_balanced(pb: ProofBuilder, sl: _SideBalancer, sr: _SideBalancer,
                    name: str) -> int:
    """[lhs] = [rhs] for an axiom line: unfold both sides to op terms over the
    balanced operands, bridge with ring reasoning."""
    la, ta, ops_a = _unfold(pb, sl, sl.bal.c.output, 2)
    lb, tb, ops_b = _unfold(pb, sr, sr.bal.c.output, 2)
    atoms = set()
    for sb, ops in ((sl, ops_a), (sr, ops_b)):
        for v in ops:
            t = sb.F_term(v)
            if t[0] in (ADD, MUL, VAR):
                atoms.add(t)
    mid = RingProver(pb, atoms).prove_equal(ta, tb)
    return pb.trans_chain([la, mid, pb.sym(lb)])
