"""Term trees: the working representation for proof generation.

A term is a nested tuple ("var", j) | ("const", v) | ("add", a, b) |
("mul", a, b) | ("inv", a).  Terms are hashable, so value-level memoization
gives every emission of a term the same sharing structure: equal subterms
become one node.  Emissions of equal terms are therefore isomorphic DAGs
wherever they occur, which is what proof witnesses certify.
"""

from __future__ import annotations

import sys
from typing import Sequence

from .circuit import ADD, CONST, INV, MUL, VAR, Circuit, CircuitBuilder

sys.setrecursionlimit(1_000_000)


def tvar(j: int) -> tuple:
    return (VAR, j)


def tconst(v: int) -> tuple:
    return (CONST, int(v))


def tadd(a: tuple, b: tuple) -> tuple:
    return (ADD, a, b)


def tmul(a: tuple, b: tuple) -> tuple:
    return (MUL, a, b)


def tinv(a: tuple) -> tuple:
    return (INV, a)


def tneg(a: tuple) -> tuple:
    return (MUL, (CONST, -1), a)


def tsub(a: tuple, b: tuple) -> tuple:
    return (ADD, a, tneg(b))


def tsum(terms: Sequence[tuple]) -> tuple:
    """Left-nested sum; the empty sum is Const 0."""
    if not terms:
        return tconst(0)
    acc = terms[0]
    for t in terms[1:]:
        acc = tadd(acc, t)
    return acc


def tprod(terms: Sequence[tuple]) -> tuple:
    """Left-nested product; the empty product is Const 1."""
    if not terms:
        return tconst(1)
    acc = terms[0]
    for t in terms[1:]:
        acc = tmul(acc, t)
    return acc


def tmul_tree(terms: Sequence[tuple]) -> tuple:
    """Balanced product (same layering as CircuitBuilder.mul_tree)."""
    if not terms:
        return tconst(1)
    layer = list(terms)
    while len(layer) > 1:
        nxt = [tmul(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


def tinv_k(f: tuple, k: int) -> tuple:
    """1 + (1-F) + (1-F)^2 + ... + (1-F)^k, matching emit_inv_k's shape."""
    acc = tconst(1)
    if k == 0:
        return acc
    g = tadd(tconst(1), tneg(f))
    for i in range(1, k + 1):
        acc = tadd(acc, tmul_tree([g] * i))
    return acc


def subterm(t: tuple, path: Sequence[int]) -> tuple:
    for step in path:
        t = t[1 + step]
    return t


def replace_subterm(t: tuple, path: Sequence[int], s: tuple) -> tuple:
    if not path:
        return s
    head, rest = path[0], path[1:]
    if head == 0:
        return (t[0], replace_subterm(t[1], rest, s)) + t[2:]
    return (t[0], t[1], replace_subterm(t[2], rest, s))


def term_contains(t: tuple, needle: tuple) -> bool:
    if t == needle:
        return True
    if t[0] in (ADD, MUL):
        return term_contains(t[1], needle) or term_contains(t[2], needle)
    if t[0] == INV:
        return term_contains(t[1], needle)
    return False


def emit_term(b: CircuitBuilder, term: tuple, memo: dict) -> int:
    """Emit with value-level sharing; memo may be pre-seeded with node ids for
    sentinel subterms."""
    got = memo.get(term)
    if got is not None:
        return got
    stack = [term]
    while stack:
        t = stack[-1]
        if t in memo:
            stack.pop()
            continue
        kind = t[0]
        if kind == VAR:
            memo[t] = b.var(t[1])
            stack.pop()
        elif kind == CONST:
            memo[t] = b.const(t[1])
            stack.pop()
        elif kind == INV:
            child = memo.get(t[1])
            if child is None:
                stack.append(t[1])
            else:
                memo[t] = b.inv(child)
                stack.pop()
        else:
            l, r = memo.get(t[1]), memo.get(t[2])
            if l is None or r is None:
                if r is None:
                    stack.append(t[2])
                if l is None:
                    stack.append(t[1])
            else:
                memo[t] = b._push((kind, l, r))
                stack.pop()
    return memo[term]


def circuit_of(term: tuple) -> Circuit:
    b = CircuitBuilder()
    root = emit_term(b, term, {})
    return b.finish([root])


def circuit_to_term(c: Circuit, root=None) -> tuple:
    """Unfold a circuit into a term (exponential on heavily shared DAGs)."""
    memo: dict = {}
    target = c.output if root is None else root
    stack = [target]
    while stack:
        i = stack[-1]
        if i in memo:
            stack.pop()
            continue
        node = c.nodes[i]
        kind = node[0]
        if kind in (VAR, CONST):
            memo[i] = node
            stack.pop()
        elif kind == INV:
            if node[1] in memo:
                memo[i] = (INV, memo[node[1]])
                stack.pop()
            else:
                stack.append(node[1])
        else:
            l, r = memo.get(node[1]), memo.get(node[2])
            if l is None or r is None:
                if r is None:
                    stack.append(node[2])
                if l is None:
                    stack.append(node[1])
            else:
                memo[i] = (kind, l, r)
                stack.pop()
    return memo[target]
