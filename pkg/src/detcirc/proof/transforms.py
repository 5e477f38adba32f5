"""Proof-level counterparts of the circuit passes.

normalize_proof rewrites every line F = G into Num(F)*Den(F)^-1 =
Num(G)*Den(G)^-1, deriving each transformed line from the transformed
premises with fraction-arithmetic lemmas whose only non-ring ingredients are
instances of the division axiom.

eliminate_division_proof applies the identity-matrix shift r -> rho(r) - w,
replaces every division gate u^-1 by Inv_k(u), and re-justifies: division
axioms become correct-up-to-degree-k lines.  Every division gate must fold to
1 at the shift origin, which is verified by generating and checking the
auxiliary proofs that its shifted degree-0 component equals 1.

homogenize_proof splits a PC (or correct-up-to-degree-k) proof of F = G into
proofs of F^(i) = G^(i); division lines are discharged through the truncated
inverse lemma: F * Inv_k(F) = 1 - (1-F)^(k+1), whose homogeneous components
vanish because (1-F) has no constant term.

coef_transport is the same slot construction with coefficient-of-z^k slots.
"""

from __future__ import annotations

from typing import Callable, Optional

from ..circuit import ADD, CONST, INV, MUL, VAR, Circuit
from ..terms import (circuit_of, circuit_to_term, replace_subterm, subterm,
                     tadd, tconst, tinv, tinv_k, tmul, tmul_tree, tneg,
                     tsub, tsum, tvar, term_contains)
from .builder import ProofBuilder, iso_pairs
from .checker import _Fail, _expected_maps, check
from .model import PC, PCK, PIDIV, Justification, Proof, ProofLine, SubMap, resolve_ref
from .ring import RingMismatch, RingProver


class TransformError(ValueError):
    pass


class GateNotProvablyGood(TransformError):
    def __init__(self, gate_term):
        super().__init__("division gate is not provably good under the assignment: "
                         f"{gate_term!r}")
        self.gate = gate_term


def rebuild_witnesses(proof: Proof):
    """Recompute all witnesses from the justification shapes; raises if a
    line is malformed."""
    for idx, line in enumerate(proof.lines):
        try:
            wanted = _expected_maps(proof, idx)
        except _Fail as e:
            raise TransformError(f"line {idx} is malformed after transformation: {e.reason}")
        maps = []
        for (src_ref, src_root, dst_ref, dst_root) in wanted:
            src = resolve_ref(proof, idx, src_ref)
            dst = resolve_ref(proof, idx, dst_ref)
            maps.append(SubMap(src_ref, src_root, dst_ref, dst_root,
                               iso_pairs(src, src_root, dst, dst_root)))
        line.witness = tuple(maps)


def _remap_ref(ref: tuple, offset: int) -> tuple:
    if ref[0] == "prem":
        return ("prem", ref[1] + offset, ref[2])
    return ref


def inline_proof(pb: ProofBuilder, proof: Proof) -> list:
    """Append all lines of an externally built proof; returns the index map."""
    offset = len(pb.proof.lines)
    idx_map = []
    for line in proof.lines:
        prem = tuple(p + offset for p in line.just.premises)
        witness = tuple(SubMap(_remap_ref(m.src_ref, offset), m.src_root,
                               _remap_ref(m.dst_ref, offset), m.dst_root, m.pairs)
                        for m in line.witness)
        new = ProofLine(line.lhs, line.rhs, Justification(line.just.name, prem),
                        witness)
        pb.proof.lines.append(new)
        pb.terms.append(None)
        idx_map.append(len(pb.proof.lines) - 1)
    return idx_map


# ---------------------------------------------------------------------------
# Num/Den on terms
# ---------------------------------------------------------------------------

def num_den_terms(t: tuple, memo: dict):
    got = memo.get(t)
    if got is not None:
        return got
    kind = t[0]
    if kind in (VAR, CONST):
        res = (t, tconst(1))
    elif kind == INV:
        n, d = num_den_terms(t[1], memo)
        res = (d, n)
    elif kind == MUL:
        n1, d1 = num_den_terms(t[1], memo)
        n2, d2 = num_den_terms(t[2], memo)
        res = (tmul(n1, n2), tmul(d1, d2))
    else:
        n1, d1 = num_den_terms(t[1], memo)
        n2, d2 = num_den_terms(t[2], memo)
        res = (tadd(tmul(n1, d2), tmul(n2, d1)), tmul(d1, d2))
    memo[t] = res
    return res


def _frac(n: tuple, d: tuple) -> tuple:
    return tmul(n, tinv(d))


class _Normalizer:
    def __init__(self, pb: ProofBuilder):
        self.pb = pb
        self.nd_memo = {}
        self._inv_mul_memo = {}
        self._frac_equal_memo = {}
        self._frac_split_memo = {}
        self._frac_mul_memo = {}
        self._div_ax_memo = {}
        # one engine: normal forms of recurring Num/Den terms are shared
        self.rp = RingProver(pb)

    def nd(self, t: tuple):
        return num_den_terms(t, self.nd_memo)

    def ring(self) -> RingProver:
        return self.rp

    def div_axiom(self, t: tuple) -> int:
        got = self._div_ax_memo.get(t)
        if got is None:
            got = self._div_ax_memo[t] = self.pb.div_axiom(t)
        return got

    def frac_equal(self, n1, d1, n2, d2, cross: Optional[int] = None) -> int:
        """n1*d1^-1 = n2*d2^-1 from the cross identity n1*d2 = n2*d1.

        The cross identity is proved by the ring engine when not supplied.
        """
        key = (n1, d1, n2, d2, cross)
        got = self._frac_equal_memo.get(key)
        if got is not None:
            return got
        pb = self.pb
        if cross is None:
            cross = self.ring().prove_equal(tmul(n1, d2), tmul(n2, d1))
        lhs = _frac(n1, d1)
        l1 = pb.sym(pb.times_one(lhs))                        # L = L*1
        l2 = pb.rewrite(tmul(lhs, tconst(1)), (1,), self.div_axiom(d2), reverse=True)
        t = tmul(lhs, tmul(d2, tinv(d2)))
        mid = tmul(tmul(n1, d2), tmul(tinv(d1), tinv(d2)))
        l3 = self.ring().prove_equal(t, mid)
        l4 = pb.rewrite(mid, (0,), cross)
        t = tmul(tmul(n2, d1), tmul(tinv(d1), tinv(d2)))
        mid2 = tmul(_frac(n2, d2), tmul(d1, tinv(d1)))
        l5 = self.ring().prove_equal(t, mid2)
        l6 = pb.rewrite(mid2, (1,), self.div_axiom(d1))
        l7 = pb.times_one(_frac(n2, d2))
        res = pb.trans_chain([l1, l2, l3, l4, l5, l6, l7])
        self._frac_equal_memo[key] = res
        return res

    def frac_cancel(self, n, d, extra) -> int:
        """(n*extra)*(d*extra)^-1 = n*d^-1."""
        return self.frac_equal(tmul(n, extra), tmul(d, extra), n, d)

    def frac_split(self, n1, d1, n2, d2) -> int:
        """(n1*d2 + n2*d1)*(d1*d2)^-1 = n1*d1^-1 + n2*d2^-1."""
        key = (n1, d1, n2, d2)
        got = self._frac_split_memo.get(key)
        if got is not None:
            return got
        pb = self.pb
        num = tadd(tmul(n1, d2), tmul(n2, d1))
        den = tmul(d1, d2)
        lhs = _frac(num, den)
        split = tadd(tmul(tmul(n1, d2), tinv(den)), tmul(tmul(n2, d1), tinv(den)))
        l1 = self.ring().prove_equal(lhs, split)
        s1 = self.frac_equal(tmul(n1, d2), den, n1, d1)
        s2 = self.frac_equal(tmul(n2, d1), den, n2, d2)
        l2 = pb.rule_add(s1, s2)
        res = pb.trans(l1, l2)
        self._frac_split_memo[key] = res
        return res

    def inv_unique(self, a, x, y, fact_ax: int, fact_ay: int) -> int:
        """x = y from a*x = 1 and a*y = 1."""
        pb = self.pb
        l1 = pb.sym(pb.times_one(x))
        l2 = pb.rewrite(tmul(x, tconst(1)), (1,), fact_ay, reverse=True)
        l3 = self.ring().prove_equal(tmul(x, tmul(a, y)), tmul(tmul(a, x), y))
        l4 = pb.rewrite(tmul(tmul(a, x), y), (0,), fact_ax)
        l5a = pb.comm_mul(tconst(1), y)
        l5b = pb.times_one(y)
        return pb.trans_chain([l1, l2, l3, l4, l5a, l5b])

    def inv_mul(self, u, v) -> int:
        """(u*v)^-1 = u^-1 * v^-1."""
        key = (u, v)
        got = self._inv_mul_memo.get(key)
        if got is not None:
            return got
        pb = self.pb
        uv = tmul(u, v)
        y = tmul(tinv(u), tinv(v))
        fact_ax = self.div_axiom(uv)
        l1 = self.ring().prove_equal(tmul(uv, y), tmul(tmul(u, tinv(u)), tmul(v, tinv(v))))
        l2 = pb.rewrite_all(tmul(tmul(u, tinv(u)), tmul(v, tinv(v))),
                            [((0,), self.div_axiom(u), False),
                             ((1,), self.div_axiom(v), False)])
        l3 = pb.scalar_mul(1, 1)
        fact_ay = pb.trans_chain([l1, l2, l3])
        res = self.inv_unique(uv, tinv(uv), y, fact_ax, fact_ay)
        self._inv_mul_memo[key] = res
        return res

    def frac_mul_split(self, n1, d1, n2, d2) -> int:
        """(n1*n2)*(d1*d2)^-1 = (n1*d1^-1)*(n2*d2^-1)."""
        key = (n1, d1, n2, d2)
        got = self._frac_mul_memo.get(key)
        if got is not None:
            return got
        pb = self.pb
        lhs = _frac(tmul(n1, n2), tmul(d1, d2))
        l1 = pb.rewrite(lhs, (1,), self.inv_mul(d1, d2))
        t = tmul(tmul(n1, n2), tmul(tinv(d1), tinv(d2)))
        l2 = self.ring().prove_equal(t, tmul(_frac(n1, d1), _frac(n2, d2)))
        res = pb.trans(l1, l2)
        self._frac_mul_memo[key] = res
        return res


def normalize_proof(p: Proof) -> Proof:
    """Division-to-top normalization of a PIdiv proof.

    Every line F = G becomes Num(F)*Den(F)^-1 = Num(G)*Den(G)^-1; the
    connecting fraction arithmetic introduces division gates only with
    division-free arguments.
    """
    v = check(p, "syntactic")
    if not v.ok:
        raise TransformError(f"input proof fails at line {v.line}: {v.reason}")
    pb = ProofBuilder(system=PIDIV)
    nm = _Normalizer(pb)
    out_line = {}
    for idx, line in enumerate(p.lines):
        lt = circuit_to_term(line.lhs)
        rt = circuit_to_term(line.rhs)
        nl, dl = nm.nd(lt)
        nr, dr = nm.nd(rt)
        name = line.just.name
        prem = line.just.premises
        if lt == rt:
            out_line[idx] = pb.refl(_frac(nl, dl))
        elif name == "R1":
            out_line[idx] = pb.sym(out_line[prem[0]])
        elif name == "R2":
            out_line[idx] = pb.trans(out_line[prem[0]], out_line[prem[1]])
        elif name == "R3":
            n1, d1 = nm.nd(lt[1])
            n2, d2 = nm.nd(lt[2])
            m1, e1 = nm.nd(rt[1])
            m2, e2 = nm.nd(rt[2])
            s1 = nm.frac_split(n1, d1, n2, d2)
            s2 = pb.rule_add(out_line[prem[0]], out_line[prem[1]])
            s3 = pb.sym(nm.frac_split(m1, e1, m2, e2))
            out_line[idx] = pb.trans_chain([s1, s2, s3])
        elif name == "R4":
            n1, d1 = nm.nd(lt[1])
            n2, d2 = nm.nd(lt[2])
            m1, e1 = nm.nd(rt[1])
            m2, e2 = nm.nd(rt[2])
            s1 = nm.frac_mul_split(n1, d1, n2, d2)
            s2 = pb.rule_mul(out_line[prem[0]], out_line[prem[1]])
            s3 = pb.sym(nm.frac_mul_split(m1, e1, m2, e2))
            out_line[idx] = pb.trans_chain([s1, s2, s3])
        else:
            # any axiom: cross-multiplied instances are ring identities
            out_line[idx] = nm.frac_equal(nl, dl, nr, dr)
    out = pb.proof
    out.conclusions = [out_line[i] for i in (p.conclusions or [len(p.lines) - 1])]
    return out


# ---------------------------------------------------------------------------
# Division elimination
# ---------------------------------------------------------------------------

def _shift_term(t: tuple, rho, w_base: int, memo: dict) -> tuple:
    got = memo.get(t)
    if got is not None:
        return got
    kind = t[0]
    if kind == VAR:
        j = t[1]
        if j not in rho:
            raise TransformError(f"assignment is missing variable {j}")
        res = tsub(tconst(int(rho[j])), tvar(w_base + j))
    elif kind == CONST:
        res = t
    elif kind == INV:
        res = tinv(_shift_term(t[1], rho, w_base, memo))
    else:
        res = (kind, _shift_term(t[1], rho, w_base, memo),
               _shift_term(t[2], rho, w_base, memo))
    memo[t] = res
    return res


def _replace_inv(t: tuple, k: int, memo: dict) -> tuple:
    got = memo.get(t)
    if got is not None:
        return got
    kind = t[0]
    if kind in (VAR, CONST):
        res = t
    elif kind == INV:
        res = tinv_k(_replace_inv(t[1], k, memo), k)
    else:
        res = (kind, _replace_inv(t[1], k, memo), _replace_inv(t[2], k, memo))
    memo[t] = res
    return res


def _collect_inv_args(t: tuple, out: set, seen: set):
    if t in seen:
        return
    seen.add(t)
    kind = t[0]
    if kind == INV:
        out.add(t[1])
        _collect_inv_args(t[1], out, seen)
    elif kind in (ADD, MUL):
        _collect_inv_args(t[1], out, seen)
        _collect_inv_args(t[2], out, seen)


def const_fold_eta(pb: ProofBuilder, f_term: tuple) -> int:
    """PC proof that the degree-0 slot of f equals 1; f's slot 0 must fold to
    the constant 1."""
    slot0 = hom_slot(f_term, 0, {})
    try:
        return RingProver(pb).prove_equal(slot0, tconst(1))
    except RingMismatch:
        raise GateNotProvablyGood(f_term)


def eliminate_division_proof(p: Proof, rho, k: int) -> Proof:
    """Shift by rho, replace division gates by Inv_k, re-justify as a
    correct-up-to-degree-k proof.

    The endpoint equations stay over the shifted variables w_j = W + j (W the
    largest input var index bound); composing w_j := rho(j) - x_j recovers the
    original statements.  For every division gate argument u, a PC proof of
    (u sigma)^(0) = 1 is generated and checked (attached as aux_etas); a gate
    whose shifted constant term does not fold to 1 is rejected.
    """
    v = check(p, "syntactic")
    if not v.ok:
        raise TransformError(f"input proof fails at line {v.line}: {v.reason}")
    w_base = max(max(l.lhs.var_count, l.rhs.var_count) for l in p.lines)
    smemo: dict = {}
    rmemo: dict = {}
    out = Proof([], PCK, k)
    gates: set = set()
    seen: set = set()
    for line in p.lines:
        lt = _shift_term(circuit_to_term(line.lhs), rho, w_base, smemo)
        rt = _shift_term(circuit_to_term(line.rhs), rho, w_base, smemo)
        _collect_inv_args(lt, gates, seen)
        _collect_inv_args(rt, gates, seen)
        lt2 = _replace_inv(lt, k, rmemo)
        rt2 = _replace_inv(rt, k, rmemo)
        out.lines.append(ProofLine(circuit_of(lt2), circuit_of(rt2), line.just))
    rebuild_witnesses(out)
    out.conclusions = list(p.conclusions or [len(p.lines) - 1])
    # provably-good check: eta proofs for every (division-free image of a) gate
    etas = {}
    eta_pb = ProofBuilder(system=PC)
    eta_lines = {}
    for g in sorted(gates, key=repr):
        g2 = _replace_inv(g, k, rmemo)
        eta_lines[g2] = const_fold_eta(eta_pb, g2)
    ev = check(eta_pb.proof, "syntactic")
    if not ev.ok:
        raise TransformError(f"auxiliary proof fails at line {ev.line}: {ev.reason}")
    eta_pb.proof.conclusions = sorted(eta_lines.values())
    out.aux_etas = (eta_pb.proof, eta_lines)
    return out


# ---------------------------------------------------------------------------
# Homogenization of proofs
# ---------------------------------------------------------------------------

def hom_slot(t: tuple, i: int, memo: dict) -> tuple:
    """Degree-i syntactic-homogeneous slot of a division-free term."""
    key = (t, i)
    got = memo.get(key)
    if got is not None:
        return got
    kind = t[0]
    if kind == CONST:
        res = t if i == 0 else tconst(0)
    elif kind == VAR:
        res = t if i == 1 else tconst(0)
    elif kind == ADD:
        res = tadd(hom_slot(t[1], i, memo), hom_slot(t[2], i, memo))
    elif kind == MUL:
        res = tsum([tmul(hom_slot(t[1], j, memo), hom_slot(t[2], i - j, memo))
                    for j in range(i + 1)])
    else:
        raise TransformError("homogenization requires division-free circuits")
    memo[key] = res
    return res


def coef_slot(t: tuple, i: int, z: int, memo: dict) -> tuple:
    """Coefficient-of-z^i slot; z-free subterms pass through whole at slot 0."""
    key = (t, i)
    got = memo.get(key)
    if got is not None:
        return got
    if not term_contains(t, tvar(z)):
        res = t if i == 0 else tconst(0)
    elif t == tvar(z):
        res = tconst(1) if i == 1 else tconst(0)
    elif t[0] == ADD:
        res = tadd(coef_slot(t[1], i, z, memo), coef_slot(t[2], i, z, memo))
    elif t[0] == MUL:
        res = tsum([tmul(coef_slot(t[1], j, z, memo), coef_slot(t[2], i - j, z, memo))
                    for j in range(i + 1)])
    else:
        raise TransformError("coefficient transport requires z outside division gates")
    memo[key] = res
    return res


class _SlotTransform:
    """Shared machinery for homogenize_proof and coef_transport."""

    def __init__(self, pb: ProofBuilder, slot_of: Callable[[tuple, int], tuple],
                 d: int, eta_provider=None, k_div: Optional[int] = None):
        self.pb = pb
        self.slot = slot_of
        self.d = d
        self.eta_provider = eta_provider
        self.k_div = k_div
        self._zero_pow = {}
        self._eta = {}
        self._div_memo = {}
        self._axiom_memo = {}
        self._provers = {}

    def prover(self, opaque: set) -> RingProver:
        key = frozenset(opaque)
        got = self._provers.get(key)
        if got is None:
            got = self._provers[key] = RingProver(self.pb, opaque)
        return got

    def atoms_of(self, operands, upto: int) -> set:
        # slot identities are parametric in the axiom's operands, so their
        # slots are the atoms; constant-only slots stay foldable, and an atom
        # containing another atom would shadow it (one operand can literally
        # be a compound of the others), so only minimal atoms are kept
        out = set()
        for sub in operands:
            for i in range(upto + 1):
                s = self.slot(sub, i)
                if _has_var(s):
                    out.add(s)
        minimal = set()
        for s in out:
            if not any(o != s and term_contains(s, o) for o in out):
                minimal.add(s)
        return minimal

    def line_slots(self, lt: tuple, rt: tuple, just: Justification,
                   prem_slots, k_total: Optional[int] = None) -> dict:
        """Slot lines for one input line; prem_slots maps premise position to
        its slot table."""
        pb = self.pb
        name = just.name
        upto = self.d if k_total is None else k_total
        if name == "D":
            got = self._div_memo.get((lt, upto))
            if got is None:
                got = self._div_memo[(lt, upto)] = self.div_line_slots(lt, upto)
            return got
        if not just.premises:
            got = self._axiom_memo.get((name, lt, rt, upto))
            if got is not None:
                return got
        res = {}
        for i in range(upto + 1):
            ls, rs = self.slot(lt, i), self.slot(rt, i)
            if name == "A1" or (name in ("C1", "C2") and lt == rt):
                res[i] = pb.refl(ls)
            elif name == "R1":
                res[i] = pb.sym(prem_slots[0][i])
            elif name == "R2":
                res[i] = pb.trans(prem_slots[0][i], prem_slots[1][i])
            elif name == "R3":
                res[i] = pb.rule_add(prem_slots[0][i], prem_slots[1][i])
            elif name == "R4":
                parts = [pb.rule_mul(prem_slots[0][j], prem_slots[1][i - j])
                         for j in range(i + 1)]
                acc = parts[0]
                for part in parts[1:]:
                    acc = pb.rule_add(acc, part)
                res[i] = acc
            elif name == "A2":
                res[i] = pb.comm_add(self.slot(lt[1], i), self.slot(lt[2], i))
            elif name == "A3":
                res[i] = pb.assoc_add(self.slot(lt[1], i), self.slot(lt[2][1], i),
                                      self.slot(lt[2][2], i))
            elif name == "A7":
                res[i] = pb.plus_zero(self.slot(lt[1], i))
            elif name == "A10" and i == 0 and lt[0] in (ADD, MUL):
                res[i] = (pb.scalar_add if lt[0] == ADD else pb.scalar_mul)(lt[1][1], lt[2][1])
            else:
                # remaining axioms are ring identities over the operand slots
                opaque = self.atoms_of(_axiom_operands(name, lt), i)
                res[i] = self.prover(opaque).prove_equal(ls, rs)
        if not just.premises:
            self._axiom_memo[(name, lt, rt, upto)] = res
        return res

    # -- division lines ------------------------------------------------------

    def div_line_slots(self, lt: tuple, upto: int) -> dict:
        """Slots of F * Inv_k(F) = 1 via the cancellation identity."""
        pb = self.pb
        k = self.k_div
        f = lt[1]
        g = tadd(tconst(1), tneg(f))
        powk1 = tmul_tree([g] * (k + 1))
        cancel_rhs = tsub(tconst(1), powk1)
        # the cancellation identity as a small PC subproof, then slot-split it
        sub_pb = ProofBuilder(system=PC)
        f_opaque = {f} if _has_var(f) else set()
        cancel = RingProver(sub_pb, f_opaque).prove_equal(lt, cancel_rhs)
        sub = _SlotTransform(pb, self.slot, upto)
        sub_tables = _transform_lines(sub, sub_pb.proof, upto)
        cancel_slots = sub_tables[cancel]
        eta = self._eta.get(f)
        if eta is None:
            eta = self.eta_provider(pb, f)
            self._eta[f] = eta
        res = {}
        for i in range(upto + 1):
            zline = self._power_zero(f, g, powk1, i, eta)
            rhs_i = self.slot(cancel_rhs, i)
            # rhs_i = [1]_i + (-1 * [pow]_i + 0-terms); rewrite [pow]_i -> 0, fold
            opaque = {s for j in range(i + 1)
                      for s in (self.slot(powk1, j), self.slot(f, j)) if _has_var(s)}
            target = tconst(1) if i == 0 else tconst(0)
            path = _find_path(rhs_i, self.slot(powk1, i))
            r1 = pb.rewrite(rhs_i, path, zline)
            folded = replace_subterm(rhs_i, path, tconst(0))
            r2 = self.prover(opaque).prove_equal(folded, target)
            res[i] = pb.trans_chain([cancel_slots[i], r1, r2])
        return res

    def _power_zero(self, f: tuple, g: tuple, p: tuple, i: int, eta: int) -> int:
        """Line proving [p]_i = 0 where p is a product tree of m > i copies of
        g = 1 - f and f has provable constant term 1."""
        key = (p, i)
        got = self._zero_pow.get(key)
        if got is not None:
            return got
        pb = self.pb
        if p == g:
            # [g]_0 = 1 + (-1 * [f]_0): rewrite [f]_0 -> 1 and fold
            assert i == 0
            s = self.slot(g, 0)
            if not _has_var(s):
                line = RingProver(pb).prove_equal(s, tconst(0))
            else:
                path = _find_path(s, self.slot(f, 0))
                r1 = pb.rewrite(s, path, eta)
                folded = replace_subterm(s, path, tconst(1))
                r2 = RingProver(pb).prove_equal(folded, tconst(0))
                line = pb.trans(r1, r2)
        else:
            pa, pb_ = p[1], p[2]
            na, nb = _g_count(pa, g), _g_count(pb_, g)
            s = self.slot(p, i)
            # every convolution term [pa]_j * [pb]_(i-j) has a zero factor
            steps = []
            cur = s
            for j in range(i + 1):
                if j < na:
                    zl = self._power_zero(f, g, pa, j, eta)
                    needle = self.slot(pa, j)
                    side = 0
                else:
                    zl = self._power_zero(f, g, pb_, i - j, eta)
                    needle = self.slot(pb_, i - j)
                    side = 1
                base = _sum_path(i + 1, j)
                path = base + (side,)
                if subterm(cur, path) != needle:
                    raise TransformError("internal: slot shape mismatch")
                steps.append((path, zl, False))
            r1 = pb.rewrite_all(s, steps)
            folded = s
            for (path, _, _) in steps:
                folded = replace_subterm(folded, path, tconst(0))
            opaque = {t for j in range(i + 1)
                      for t in (self.slot(pa, j), self.slot(pb_, j)) if _has_var(t)}
            r2 = self.prover(opaque).prove_equal(folded, tconst(0))
            line = pb.trans(r1, r2)
        self._zero_pow[key] = line
        return line


def _has_var(t: tuple) -> bool:
    if t[0] == VAR:
        return True
    if t[0] in (ADD, MUL):
        return _has_var(t[1]) or _has_var(t[2])
    if t[0] == INV:
        return _has_var(t[1])
    return False


def _g_count(p: tuple, g: tuple) -> int:
    if p == g:
        return 1
    return _g_count(p[1], g) + _g_count(p[2], g)


def _sum_path(length: int, idx: int) -> tuple:
    path = []
    while length > 1 and idx < length - 1:
        path.append(0)
        length -= 1
    if length > 1:
        path.append(1)
    return tuple(path)


def _find_path(t: tuple, needle: tuple, prefix=()):
    if t == needle:
        return prefix
    if t[0] in (ADD, MUL):
        got = _find_path(t[1], needle, prefix + (0,))
        if got is not None:
            return got
        return _find_path(t[2], needle, prefix + (1,))
    return None


def _axiom_operands(name: str, lt: tuple) -> list:
    """The parametric operands F, G, H of the axiom instance, read off the
    lhs shape; the slot identity is a ring identity in their slots."""
    if name in ("A2", "A4"):
        return [lt[1], lt[2]]
    if name in ("A3", "A5", "A6"):
        return [lt[1], lt[2][1], lt[2][2]]
    if name in ("A8", "A9"):
        return [lt[1]]
    return []


def _transform_lines(st: _SlotTransform, p: Proof, upto: int) -> list:
    tables = []
    for line in p.lines:
        lt = circuit_to_term(line.lhs)
        rt = circuit_to_term(line.rhs)
        prem_slots = [tables[q] for q in line.just.premises]
        tables.append(st.line_slots(lt, rt, line.just, prem_slots, upto))
    return tables


def homogenize_proof(p: Proof, d: int, eta_provider=None) -> list:
    """Proofs of F^(i) = G^(i), i = 0..d, for a PC or correct-up-to-degree-k
    proof of F = G.

    Returns d+1 Proof views sharing one line list; view i's conclusion states
    the degree-i component equation.  Division lines need an eta provider
    (defaults to constant folding of the shifted gates).
    """
    v = check(p, "syntactic")
    if not v.ok:
        raise TransformError(f"input proof fails at line {v.line}: {v.reason}")
    if p.system == PIDIV:
        raise TransformError("homogenize_proof needs a division-free proof system")
    memo: dict = {}
    pb = ProofBuilder(system=PC)
    eta = eta_provider or const_fold_eta
    st = _SlotTransform(pb, lambda t, i: hom_slot(t, i, memo), d,
                        eta_provider=eta, k_div=p.k)
    tables = _transform_lines(st, p, d)
    out = pb.proof
    proofs = []
    targets = p.conclusions or [len(p.lines) - 1]
    for i in range(d + 1):
        view = Proof(out.lines, PC, None, [tables[t][i] for t in targets])
        proofs.append(view)
    return proofs


def coef_transport(p: Proof, k: int, z: int) -> Proof:
    """Proof of Coef_{z^k}(F) = Coef_{z^k}(G) from a proof of F = G.

    Requires z to stay outside division gates in every line (PC input or
    PIdiv lines whose division gates are z-free)."""
    v = check(p, "syntactic")
    if not v.ok:
        raise TransformError(f"input proof fails at line {v.line}: {v.reason}")
    memo: dict = {}
    pb = ProofBuilder(system=p.system, k=p.k)
    st = _SlotTransform(pb, lambda t, i: coef_slot(t, i, z, memo), k, k_div=p.k)
    tables = _transform_lines(st, p, k)
    out = pb.proof
    targets = p.conclusions or [len(p.lines) - 1]
    out.conclusions = [tables[t][k] for t in targets]
    return out


def coef_sum_lemma(coeffs: list, j: int, z: int) -> Proof:
    """Proof of Coef_{z^j}(sum_i F_i * z^i) = F_j for z-free terms F_i."""
    pb = ProofBuilder(system=PC)
    memo: dict = {}
    zt = tvar(z)
    terms = [tmul(f, tmul_tree([zt] * i)) if i >= 1 else f
             for i, f in enumerate(coeffs)]
    total = tsum(terms)
    target = coef_slot(total, j, z, memo)
    # the z-power slots are constant trees; everything folds in one ring pass
    opaque = set(coeffs)
    line = RingProver(pb, opaque).prove_equal(target, coeffs[j] if j < len(coeffs) else tconst(0))
    out = pb.proof
    out.conclusions = [line]
    return out


def prove_inv_lemma(f: Circuit, k: int, eta: Proof) -> list:
    """Proofs of (f * Inv_k(f))^(0) = 1 and (f * Inv_k(f))^(i) = 0, 1 <= i <= k.

    eta must be a checking PC proof whose conclusion is f^(0) = 1 (hom_slot
    form); it is inlined into the output.  Returns k+1 Proof views sharing one
    line list, slot i's conclusion in view i."""
    ev = check(eta, "syntactic")
    if not ev.ok:
        raise TransformError(f"eta proof fails at line {ev.line}: {ev.reason}")
    if not f.is_division_free():
        raise TransformError("prove_inv_lemma needs a division-free circuit")
    f_term = circuit_to_term(f)
    memo: dict = {}
    want = hom_slot(f_term, 0, memo)
    eta_concl = eta.lines[(eta.conclusions or [len(eta.lines) - 1])[0]]
    if circuit_to_term(eta_concl.lhs) != want or circuit_to_term(eta_concl.rhs) != tconst(1):
        raise TransformError("eta must prove f^(0) = 1 for the given circuit")
    pb = ProofBuilder(system=PC)
    idx_map = inline_proof(pb, eta)
    eta_line = idx_map[(eta.conclusions or [len(eta.lines) - 1])[0]]

    def provider(_pb, g):
        if g != f_term:
            raise TransformError("eta only covers the given circuit")
        return eta_line

    st = _SlotTransform(pb, lambda t, i: hom_slot(t, i, memo), k,
                        eta_provider=provider, k_div=k)
    lt = tmul(f_term, tinv_k(f_term, k))
    slots = st.div_line_slots(lt, k)
    out = pb.proof
    views = []
    for i in range(k + 1):
        views.append(Proof(out.lines, PC, None, [slots[i]]))
    return views
