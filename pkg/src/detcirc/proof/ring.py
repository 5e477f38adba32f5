"""Ring-rearrangement proof engine.

Proves equalities between circuit terms that hold as polynomial identities
over a chosen set of atoms (variables, inverse gates, and any explicitly
opaque subterms), by deriving, axiom step by axiom step, the normalization of
each side into a canonical sum of monomials:

    canonical poly  =  m_1 + m_2 + ... + m_t   (left-nested, sorted)
    canonical mono  =  Const c                 (no atoms)
                    |  Mul(Const c, a_1 * a_2 * ... * a_r)   (left-nested,
                       atoms sorted, coefficient explicit)

Sums and products of canonical forms are merged with O(t log t) many
re-association steps; like monomials are combined through distributivity and
the scalar axiom A10.  Integer arithmetic therefore happens only inside A10
instances, which the checker re-verifies.
"""

from __future__ import annotations

from typing import Sequence

from ..circuit import ADD, CONST, INV, MUL, VAR
from .builder import ProofBuilder, tadd, tconst, tmul, tprod, tsum


class RingMismatch(ValueError):
    pass


def _akey(atom: tuple) -> str:
    return repr(atom)


def _mkey(atoms: tuple) -> tuple:
    # grade-lex: shorter monomials first, then by atom keys
    return (len(atoms), tuple(_akey(a) for a in atoms))


def mono_term(c: int, atoms: tuple) -> tuple:
    if not atoms:
        return tconst(c)
    if c == 1:
        return tprod(list(atoms))
    return tmul(tconst(c), tprod(list(atoms)))


def monos_term(monos: Sequence) -> tuple:
    return tsum([mono_term(c, atoms) for (c, atoms) in monos])


def monos_poly(monos: Sequence) -> dict:
    return {atoms: c for (c, atoms) in monos}


class RingProver:
    """Emits normalization proofs into a ProofBuilder.

    opaque: subterms to treat as atoms regardless of their structure.
    """

    def __init__(self, pb: ProofBuilder, opaque=()):
        self.pb = pb
        self.opaque = set(opaque)
        self._norm_memo = {}

    # -- public ------------------------------------------------------------

    def normalize(self, term: tuple):
        """Line proving term = canonical(term); returns (line, monos)."""
        got = self._norm_memo.get(term)
        if got is not None:
            return got
        kind = term[0]
        if term in self.opaque or kind == INV:
            res = self._atom(term)
        elif kind == VAR:
            res = self._atom(term)
        elif kind == CONST:
            monos = [(term[1], ())] if term[1] else []
            res = (self.pb.refl(term), monos)
        elif kind == ADD:
            l1, m1 = self.normalize(term[1])
            l2, m2 = self.normalize(term[2])
            lr = self.pb.rule_add(l1, l2)
            lm, monos = self._merge(m1, m2)
            res = (self.pb.trans(lr, lm), monos)
        elif kind == MUL:
            l1, m1 = self.normalize(term[1])
            l2, m2 = self.normalize(term[2])
            lr = self.pb.rule_mul(l1, l2)
            lm, monos = self._expand(m1, m2)
            res = (self.pb.trans(lr, lm), monos)
        else:
            raise RingMismatch(f"cannot normalize a {kind} term")
        self._norm_memo[term] = res
        return res

    def prove_equal(self, t1: tuple, t2: tuple) -> int:
        """Line proving t1 = t2, via the shared canonical form."""
        l1, m1 = self.normalize(t1)
        l2, m2 = self.normalize(t2)
        if m1 != m2:
            raise RingMismatch(
                f"terms are not ring-equal over the chosen atoms:\n  {monos_poly(m1)}\n  {monos_poly(m2)}")
        if t1 == t2:
            return self.pb.refl(t1)
        return self.pb.trans(l1, self.pb.sym(l2))

    def prove_is(self, t: tuple, monos) -> int:
        """Line proving t = the given canonical form."""
        line, got = self.normalize(t)
        if got != list(monos):
            raise RingMismatch(f"normal form is {got}, wanted {list(monos)}")
        return line

    # -- atoms and constants -------------------------------------------------

    def _atom(self, t: tuple):
        # canonical form of an atom is the atom itself (implicit coefficient 1)
        return (self.pb.refl(t), [(1, (t,))])

    # -- additive merge ------------------------------------------------------

    def _merge(self, A: list, B: list):
        """Proves term(A) + term(B) = term(merged); A, B canonical."""
        pb = self.pb
        tA, tB = monos_term(A), monos_term(B)
        if not A:
            l0 = pb.comm_add(tconst(0), tB)      # 0 + tB = tB + 0
            l1 = pb.plus_zero(tB)                # tB + 0 = tB
            return (pb.trans(l0, l1), list(B))
        if not B:
            return (pb.plus_zero(tA), list(A))
        a, b = A[-1], B[-1]
        ka, kb = _mkey(a[1]), _mkey(b[1])
        tb = mono_term(*b)
        if kb > ka:
            if len(B) == 1:
                return (pb.refl(tadd(tA, tB)), list(A) + [b])
            tBp = monos_term(B[:-1])
            l1 = pb.assoc_add(tA, tBp, tb)                 # tA+(tB'+b) = (tA+tB')+b
            sub, M1 = self._merge(A, B[:-1])
            l2 = pb.rule_add(sub, pb.refl(tb))
            return self._drop_zero_head(pb.trans(l1, l2), M1, b)
        if kb < ka:
            l0 = pb.comm_add(tA, tB)
            sub, M = self._merge(B, A)
            return (pb.trans(l0, sub), M)
        # equal keys: peel b, merge the rest, then combine the two heads
        if len(B) == 1:
            sub, M1 = (None, list(A))
        else:
            tBp = monos_term(B[:-1])
            l1 = pb.assoc_add(tA, tBp, tb)
            subm, M1 = self._merge(A, B[:-1])
            sub = pb.trans(l1, pb.rule_add(subm, pb.refl(tb)))
        if not M1:
            # everything in front cancelled; sub proves lhs = 0 + b
            line, M = self._drop_zero_head(sub, M1, b)
            return (line, M)
        lc, M = self._append_combine(M1, b)
        # sub : lhs = term(M1) + b ; lc : term(M1) + b = term(M)
        if sub is None:
            return (lc, M)
        return (pb.trans(sub, lc), M)

    def _drop_zero_head(self, line, M1: list, b):
        """Given line proving lhs = term(M1) + b, normalize the empty-head case."""
        pb = self.pb
        if M1:
            return (line, M1 + [b])
        tb = mono_term(*b)
        l3 = pb.comm_add(tconst(0), tb)
        l4 = pb.plus_zero(tb)
        cleanup = pb.trans(l3, l4)
        return (cleanup if line is None else pb.trans(line, cleanup), [b])

    def _append_combine(self, M1: list, b):
        """term(M1) + b = term(result), where key(b) == key(M1[-1])."""
        pb = self.pb
        a = M1[-1]
        if len(M1) == 1:
            line, res = self._mono_combine(a, b)
            return (line, res)
        tP = monos_term(M1[:-1])
        ta, tb = mono_term(*a), mono_term(*b)
        l1 = pb.sym(pb.assoc_add(tP, ta, tb))     # (tP+a)+b = tP+(a+b)
        lc, combined = self._mono_combine(a, b)
        l2 = pb.rule_add(pb.refl(tP), lc)         # tP+(a+b) = tP+c
        cur = pb.trans(l1, l2)
        if not combined:
            l3 = pb.plus_zero(tP)                 # tP + 0 = tP
            return (pb.trans(cur, l3), M1[:-1])
        return (cur, M1[:-1] + combined)

    def _coeff_form(self, m) -> int:
        """Line: mono(m) = P * c, with the coefficient explicit on the right."""
        pb = self.pb
        (c, atoms) = m
        P = tprod(list(atoms))
        if c == 1:
            return pb.sym(pb.times_one(P))
        return pb.comm_mul(tconst(c), P)

    def _mono_combine(self, m1, m2):
        """mono(m1) + mono(m2) = canonical, for equal atom tuples."""
        pb = self.pb
        (c1, atoms), (c2, _) = m1, m2
        c = c1 + c2
        if not atoms:
            line = pb.scalar_add(c1, c2)
            return (line, [(c, ())] if c else [])
        P = tprod(list(atoms))
        l1 = pb.rule_add(self._coeff_form(m1), self._coeff_form(m2))
        l2 = pb.sym(pb.distrib(P, tconst(c1), tconst(c2)))   # P*c1+P*c2 <- P*(c1+c2)
        l3 = pb.rule_mul(pb.refl(P), pb.scalar_add(c1, c2))  # P*(c1+c2) = P*c
        cur = pb.trans_chain([l1, l2, l3])
        if c == 0:
            l4 = pb.times_zero(P)
            return (pb.trans(cur, l4), [])
        if c == 1:
            l4 = pb.times_one(P)
            return (pb.trans(cur, l4), [(1, atoms)])
        l4 = pb.comm_mul(P, tconst(c))
        return (pb.trans(cur, l4), [(c, atoms)])

    # -- multiplicative expansion --------------------------------------------

    def _expand(self, A: list, B: list):
        """term(A) * term(B) = term(product), both canonical."""
        pb = self.pb
        tA, tB = monos_term(A), monos_term(B)
        if not A:
            l0 = pb.comm_mul(tconst(0), tB)
            l1 = pb.times_zero(tB)
            return (pb.trans(l0, l1), [])
        if not B:
            return (pb.times_zero(tA), [])
        if len(B) == 1:
            return self._cross_single(A, B[0])
        tBp = monos_term(B[:-1])
        b = B[-1]
        l1 = pb.distrib(tA, tBp, mono_term(*b))   # tA*(tB'+b) = tA*tB' + tA*b
        s1, C1 = self._expand(A, B[:-1])
        s2, C2 = self._cross_single(A, b)
        l2 = pb.rule_add(s1, s2)
        lm, M = self._merge(C1, C2)
        return (pb.trans_chain([l1, l2, lm]), M)

    def _cross_single(self, A: list, b):
        """term(A) * mono(b) = canonical."""
        pb = self.pb
        tb = mono_term(*b)
        if len(A) == 1:
            return self._mono_mul(A[0], b)
        tA = monos_term(A)
        tAp = monos_term(A[:-1])
        a = A[-1]
        l0 = pb.comm_mul(tA, tb)                  # tA*b = b*tA
        l1 = pb.distrib(tb, tAp, mono_term(*a))   # b*(tA'+a) = b*tA' + b*a
        s1l = pb.comm_mul(tb, tAp)                # b*tA' = tA'*b
        s1, C1 = self._cross_single(A[:-1], b)
        s1c = pb.trans(s1l, s1)
        s2l = pb.comm_mul(tb, mono_term(*a))      # b*a = a*b
        s2, C2 = self._mono_mul(a, b)
        s2c = pb.trans(s2l, s2)
        l2 = pb.rule_add(s1c, s2c)
        lm, M = self._merge(C1, C2)
        return (pb.trans_chain([l0, l1, l2, lm]), M)

    def _mono_mul(self, m1, m2):
        """mono(m1) * mono(m2) = canonical monomial."""
        pb = self.pb
        (c1, A1), (c2, A2) = m1, m2
        c = c1 * c2
        if not A1 and not A2:
            line = pb.scalar_mul(c1, c2)
            return (line, [(c, ())] if c else [])
        if not A1:
            P2 = tprod(list(A2))
            if c1 == 1:
                l0 = pb.comm_mul(tconst(1), mono_term(*m2))
                l1 = pb.times_one(mono_term(*m2))
                return (pb.trans(l0, l1), [(c2, A2)])
            if c2 == 1:
                return (pb.refl(tmul(tconst(c1), P2)), [(c1, A2)])
            # c1 * (c2*P2) = (c1*c2)*P2 = c*P2
            l1 = pb.assoc_mul(tconst(c1), tconst(c2), P2)
            l2 = pb.rule_mul(pb.scalar_mul(c1, c2), pb.refl(P2))
            cur = pb.trans(l1, l2)
            if c == 1:
                cur = self._drop_unit(cur, P2)
            return (cur, [(c, A2)])
        if not A2:
            l0 = pb.comm_mul(mono_term(*m1), tconst(c2))
            sub, res = self._mono_mul((c2, ()), m1)
            return (pb.trans(l0, sub), res)
        P1, P2 = tprod(list(A1)), tprod(list(A2))
        lf, atoms = self._merge_factors(list(A1), list(A2))
        if c1 == 1 and c2 == 1:
            return (lf, [(1, tuple(atoms))])
        if c2 == 1:
            # (c1*P1)*P2 = c1*(P1*P2) = c1*merged
            l1 = pb.sym(pb.assoc_mul(tconst(c1), P1, P2))
            l2 = pb.rewrite(tmul(tconst(c1), tmul(P1, P2)), (1,), lf)
            return (pb.trans(l1, l2), [(c1, tuple(atoms))])
        if c1 == 1:
            # P1*(c2*P2) = (P1*c2)*P2 = (c2*P1)*P2 = c2*(P1*P2) = c2*merged
            l1 = pb.assoc_mul(P1, tconst(c2), P2)
            t = tmul(tmul(P1, tconst(c2)), P2)
            l2 = pb.rewrite(t, (0,), pb.comm_mul(P1, tconst(c2)))
            l3 = pb.sym(pb.assoc_mul(tconst(c2), P1, P2))
            l4 = pb.rewrite(tmul(tconst(c2), tmul(P1, P2)), (1,), lf)
            return (pb.trans_chain([l1, l2, l3, l4]), [(c2, tuple(atoms))])
        X = tmul(tconst(c1), P1)
        l1 = pb.assoc_mul(X, tconst(c2), P2)                   # X*(c2*P2) = (X*c2)*P2
        t = tmul(tmul(X, tconst(c2)), P2)
        l2 = pb.rewrite(t, (0,), pb.comm_mul(X, tconst(c2)))   # -> (c2*X)*P2
        t = tmul(tmul(tconst(c2), X), P2)
        l3 = pb.rewrite(t, (0,), pb.assoc_mul(tconst(c2), tconst(c1), P1))
        t = tmul(tmul(tmul(tconst(c2), tconst(c1)), P1), P2)
        l4 = pb.sym(pb.assoc_mul(tmul(tconst(c2), tconst(c1)), P1, P2))
        t = tmul(tmul(tconst(c2), tconst(c1)), tmul(P1, P2))
        l5 = pb.rewrite(t, (0,), pb.scalar_mul(c2, c1))
        t = tmul(tconst(c), tmul(P1, P2))
        l6 = pb.rewrite(t, (1,), lf)
        line = pb.trans_chain([l1, l2, l3, l4, l5, l6])
        if c == 1:
            line = self._drop_unit(line, tprod(list(atoms)))
        return (line, [(c, tuple(atoms))])

    def _drop_unit(self, line: int, P: tuple) -> int:
        """Extend a line ending in 1*P to end in P."""
        pb = self.pb
        l1 = pb.comm_mul(tconst(1), P)
        l2 = pb.times_one(P)
        return pb.trans_chain([line, l1, l2])

    def _merge_factors(self, F1: list, F2: list):
        """prod(F1) * prod(F2) = prod(sorted concatenation); no combining."""
        pb = self.pb
        t1, t2 = tprod(F1), tprod(F2)
        a, b = F1[-1], F2[-1]
        if _akey(b) >= _akey(a):
            if len(F2) == 1:
                return (pb.refl(tmul(t1, t2)), F1 + [b])
            t2p = tprod(F2[:-1])
            l1 = pb.assoc_mul(t1, t2p, b)
            sub, M1 = self._merge_factors(F1, F2[:-1])
            l2 = pb.rule_mul(sub, pb.refl(b))
            return (pb.trans(l1, l2), M1 + [b])
        l0 = pb.comm_mul(t1, t2)
        sub, M = self._merge_factors(F2, F1)
        return (pb.trans(l0, sub), M)


def ring_equal(pb: ProofBuilder, t1: tuple, t2: tuple, opaque=()) -> int:
    return RingProver(pb, opaque).prove_equal(t1, t2)
