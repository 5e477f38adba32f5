"""Generators for the determinant proof sequences.

For proof generation the matrix-inverse entries are kept as term trees, one
standalone tree per entry (outputs of the block construction duplicated with
their subcircuits).  Entry identities are derived level by level: at each
dimension d the product entries are ring-rearranged so that the level-(d-1)
entry identities and the division axiom for the Schur complement apply as
literal subterm rewrites.
"""

from __future__ import annotations

from typing import Callable

from .builder import (ProofBuilder, tadd, tconst, tinv, tmul, tneg,
                      tsub, tsum, tvar)
from .model import PIDIV, Proof
from .ring import RingProver


def _inner(xs, ys) -> tuple:
    return tsum([tmul(x, y) for x, y in zip(xs, ys)])


class InverseTerms:
    """Term trees for the block inverse of the leading minors of a matrix."""

    def __init__(self, n: int, leaf: Callable[[int, int], tuple]):
        self.n = n
        self.leaf = leaf
        self.S = {1: [[tinv(leaf(0, 0))]]}
        self.delta = {1: leaf(0, 0)}
        self.w = {}
        self.u = {}
        self.q = {}
        for d in range(2, n + 1):
            m = d - 1
            s = self.S[m]
            v1 = [leaf(l, d - 1) for l in range(m)]
            v2 = [leaf(d - 1, l) for l in range(m)]
            w = [_inner(s[i], v1) for i in range(m)]
            u = [_inner(v2, [s[l][j] for l in range(m)]) for j in range(m)]
            q = _inner(v2, w)
            delta = tsub(leaf(d - 1, d - 1), q)
            ainv = tinv(delta)
            blk = [[None] * d for _ in range(d)]
            for i in range(m):
                for j in range(m):
                    blk[i][j] = tadd(s[i][j], tmul(ainv, tmul(w[i], u[j])))
            for i in range(m):
                blk[i][d - 1] = tneg(tmul(ainv, w[i]))
            for j in range(m):
                blk[d - 1][j] = tneg(tmul(ainv, u[j]))
            blk[d - 1][d - 1] = ainv
            self.S[d] = blk
            self.delta[d] = delta
            self.w[d] = w
            self.u[d] = u
            self.q[d] = q

    def det_term(self, d: int) -> tuple:
        acc = self.delta[1]
        for lvl in range(2, d + 1):
            acc = tmul(acc, self.delta[lvl])
        return acc

    def atoms(self, d: int) -> set:
        """Opaque atoms for level-d reasoning: the level-(d-1) inverse entries
        and the level-d Schur complement inverse."""
        out = set()
        if d >= 2:
            for row in self.S[d - 1]:
                out.update(row)
            out.add(tinv(self.delta[d]))
        return out


def prove_xxinv(n: int) -> Proof:
    """Syntactically correct PIdiv proof of the 2*n^2 entry equations of
    X * X^-1 = I_n and X^-1 * X = I_n, built level by level."""
    if n < 1:
        raise ValueError("invalid dimension")
    pb = ProofBuilder(system=PIDIV)
    leaf = lambda i, j: tvar(i * n + j)
    inv = InverseTerms(n, leaf)

    # P[(i, j)]: sum_k x_ik * S[d][k][j] = delta_ij, and Q for the other order
    P: dict = {}
    Q: dict = {}
    d1 = pb.div_axiom(leaf(0, 0))
    P[(1, 0, 0)] = d1
    c1 = pb.comm_mul(tinv(leaf(0, 0)), leaf(0, 0))
    Q[(1, 0, 0)] = pb.trans(c1, d1)

    for d in range(2, n + 1):
        _prove_level(pb, inv, leaf, d, P, Q)

    proof = pb.proof
    proof.conclusions = ([P[(n, i, j)] for i in range(n) for j in range(n)]
                         + [Q[(n, i, j)] for i in range(n) for j in range(n)])
    return proof


def _prove_level(pb: ProofBuilder, inv: InverseTerms, leaf, d: int, P: dict, Q: dict):
    m = d - 1
    S = inv.S[m]
    w, u, delta = inv.w[d], inv.u[d], inv.delta[d]
    ainv = tinv(delta)
    atoms = inv.atoms(d)
    rp = RingProver(pb, atoms)
    ddax = pb.div_axiom(delta)  # delta * delta^-1 = 1
    one, zero = tconst(1), tconst(0)

    def ident(i, j):
        return tconst(1 if i == j else 0)

    def sum_path(length, idx):
        # path to summand idx of a left-nested length-term sum
        path = []
        while length > 1 and idx < length - 1:
            path.append(0)
            length -= 1
        if length > 1:
            path.append(1)
        return tuple(path)

    # W lemmas: sum_k x_ik w_k = x_im ; U lemmas: sum_k u_k x_kj = x_mj
    LW = {}
    LU = {}
    for i in range(m):
        lhs = tsum([tmul(leaf(i, k), w[k]) for k in range(m)])
        t0 = tsum([tmul(_ih_lhs_P(leaf, S, i, l, m), leaf(l, d - 1)) for l in range(m)])
        a = rp.prove_equal(lhs, t0)
        steps = [(sum_path(m, l) + (0,), P[(m, i, l)], False) for l in range(m)]
        b = pb.rewrite_all(t0, steps)
        t1 = tsum([tmul(ident(i, l), leaf(l, d - 1)) for l in range(m)])
        c = rp.prove_equal(t1, leaf(i, d - 1))
        LW[i] = pb.trans_chain([a, b, c])
    for j in range(m):
        lhs = tsum([tmul(u[k], leaf(k, j)) for k in range(m)])
        t0 = tsum([tmul(leaf(d - 1, l), _ih_lhs_Q(leaf, S, l, j, m)) for l in range(m)])
        a = rp.prove_equal(lhs, t0)
        steps = [(sum_path(m, l) + (1,), Q[(m, l, j)], False) for l in range(m)]
        b = pb.rewrite_all(t0, steps)
        t1 = tsum([tmul(leaf(d - 1, l), ident(l, j)) for l in range(m)])
        c = rp.prove_equal(t1, leaf(d - 1, j))
        LU[j] = pb.trans_chain([a, b, c])

    blk = inv.S[d]

    # X * X^-1 entries
    for i in range(d):
        for j in range(d):
            lhs = tsum([tmul(leaf(i, k), blk[k][j]) for k in range(d)])
            target = ident(i, j)
            if i < m and j < m:
                t0 = tadd(tadd(_ih_lhs_P(leaf, S, i, j, m),
                               tmul(tmul(ainv, u[j]), tsum([tmul(leaf(i, k), w[k]) for k in range(m)]))),
                          tneg(tmul(leaf(i, d - 1), tmul(ainv, u[j]))))
                a = rp.prove_equal(lhs, t0)
                b = pb.rewrite_all(t0, [((0, 0), P[(m, i, j)], False),
                                        ((0, 1, 1), LW[i], False)])
                t1 = tadd(tadd(ident(i, j), tmul(tmul(ainv, u[j]), leaf(i, d - 1))),
                          tneg(tmul(leaf(i, d - 1), tmul(ainv, u[j]))))
                c = rp.prove_equal(t1, target)
                line = pb.trans_chain([a, b, c])
            elif i < m and j == m:
                t0 = tadd(tneg(tmul(ainv, tsum([tmul(leaf(i, k), w[k]) for k in range(m)]))),
                          tmul(leaf(i, d - 1), ainv))
                a = rp.prove_equal(lhs, t0)
                b = pb.rewrite_all(t0, [((0, 1, 1), LW[i], False)])
                t1 = tadd(tneg(tmul(ainv, leaf(i, d - 1))), tmul(leaf(i, d - 1), ainv))
                c = rp.prove_equal(t1, target)
                line = pb.trans_chain([a, b, c])
            elif i == m and j < m:
                t0 = tmul(u[j], tsub(one, tmul(delta, ainv)))
                a = rp.prove_equal(lhs, t0)
                b = pb.rewrite_all(t0, [((1, 1, 1), ddax, False)])
                t1 = tmul(u[j], tsub(one, one))
                c = rp.prove_equal(t1, target)
                line = pb.trans_chain([a, b, c])
            else:
                t0 = tmul(delta, ainv)
                a = rp.prove_equal(lhs, t0)
                line = pb.trans(a, ddax)
            P[(d, i, j)] = line

    # X^-1 * X entries
    for i in range(d):
        for j in range(d):
            lhs = tsum([tmul(blk[i][k], leaf(k, j)) for k in range(d)])
            target = ident(i, j)
            if i < m and j < m:
                t0 = tadd(tadd(_ih_lhs_Q(leaf, S, i, j, m),
                               tmul(tmul(ainv, w[i]), tsum([tmul(u[k], leaf(k, j)) for k in range(m)]))),
                          tneg(tmul(tmul(ainv, w[i]), leaf(d - 1, j))))
                a = rp.prove_equal(lhs, t0)
                b = pb.rewrite_all(t0, [((0, 0), Q[(m, i, j)], False),
                                        ((0, 1, 1), LU[j], False)])
                t1 = tadd(tadd(ident(i, j), tmul(tmul(ainv, w[i]), leaf(d - 1, j))),
                          tneg(tmul(tmul(ainv, w[i]), leaf(d - 1, j))))
                c = rp.prove_equal(t1, target)
                line = pb.trans_chain([a, b, c])
            elif i < m and j == m:
                t0 = tmul(w[i], tsub(one, tmul(delta, ainv)))
                a = rp.prove_equal(lhs, t0)
                b = pb.rewrite_all(t0, [((1, 1, 1), ddax, False)])
                t1 = tmul(w[i], tsub(one, one))
                c = rp.prove_equal(t1, target)
                line = pb.trans_chain([a, b, c])
            elif i == m and j < m:
                t0 = tadd(tneg(tmul(ainv, tsum([tmul(u[k], leaf(k, j)) for k in range(m)]))),
                          tmul(ainv, leaf(d - 1, j)))
                a = rp.prove_equal(lhs, t0)
                b = pb.rewrite_all(t0, [((0, 1, 1), LU[j], False)])
                t1 = tadd(tneg(tmul(ainv, leaf(d - 1, j))), tmul(ainv, leaf(d - 1, j)))
                c = rp.prove_equal(t1, target)
                line = pb.trans_chain([a, b, c])
            else:
                t0 = tmul(delta, ainv)
                a = rp.prove_equal(lhs, t0)
                line = pb.trans(a, ddax)
            Q[(d, i, j)] = line


def _ih_lhs_P(leaf, S, i, j, m) -> tuple:
    return tsum([tmul(leaf(i, k), S[k][j]) for k in range(m)])


def _ih_lhs_Q(leaf, S, i, j, m) -> tuple:
    return tsum([tmul(S[i][k], leaf(k, j)) for k in range(m)])


def triangular_leaf(n: int):
    def leaf(i, j):
        return tvar(i * n + j) if i >= j else tconst(0)
    return leaf


def prove_triangular(n: int) -> Proof:
    """PIdiv proof of DetInv(U) = u_11 * ... * u_nn for the lower-triangular
    symbolic matrix; every division gate argument subtracts a product with
    constant-zero leaves from a diagonal variable."""
    if n < 1:
        raise ValueError("invalid dimension")
    pb = ProofBuilder(system=PIDIV)
    leaf = triangular_leaf(n)
    inv = InverseTerms(n, leaf)
    rp = RingProver(pb, set().union(*[inv.atoms(d) for d in range(2, n + 1)]) if n >= 2 else set())

    fact = pb.refl(leaf(0, 0))
    prod = leaf(0, 0)
    for d in range(2, n + 1):
        delta_eq = rp.prove_equal(inv.delta[d], leaf(d - 1, d - 1))
        cur = tmul(inv.det_term(d - 1), inv.delta[d])
        line = pb.rewrite_all(cur, [((0,), fact, False), ((1,), delta_eq, False)])
        prod = tmul(prod, leaf(d - 1, d - 1))
        fact = line
    proof = pb.proof
    proof.conclusions = [fact]
    return proof
