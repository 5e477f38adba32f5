import math
import random

import pytest

from detcirc.balance import (BalanceError, LinearFormOverflow, balance,
                             balance_decomposition, balance_full,
                             build_taydet_sharp_prime, exact_degub_prime,
                             frontier, linear_form, partial_linear,
                             reachability, reaches)
from detcirc.circuit import MUL, VAR, CircuitBuilder, depth
from detcirc.evaluate import bareiss_det, eval_int, expand_single
from detcirc.homogenize import homogenize

from conftest import assignment_of, random_matrix

# frozen multiplicative constants, calibrated once on the seeded corpus
C_DEPTH = 2
C_SIZE = 1


def _circ(build):
    b = CircuitBuilder()
    return b.finish([build(b)])


def test_reachability_examples():
    b = CircuitBuilder()
    x, y = b.var(0), b.var(1)
    root = b.mul(x, y)
    c = b.finish([root])
    table = reachability(c)
    assert reaches(table, x, root)
    assert not reaches(table, x, y)
    # shared node reachable via two paths
    b = CircuitBuilder()
    u = b.add(b.var(0), b.var(1))
    r = b.add(u, u)
    c2 = b.finish([r])
    assert reaches(reachability(c2), 0, r)


def test_linear_form_examples():
    # f_v = x1 + (x1 + x2) -> coefficients (2, 1)
    b = CircuitBuilder()
    inner = b.add(b.var(1), b.var(2))
    v = b.add(b.var(1), inner)
    c = b.finish([v])
    lf = linear_form(c, v)
    assert lf.var_coeffs == {1: 2, 2: 1}
    assert expand_single(lf.circuit) == expand_single(c)

    c5 = _circ(lambda b: b.const(5))
    lf5 = linear_form(c5, c5.output)
    assert lf5.const_coeffs == {5: 1}
    assert eval_int(lf5.circuit, {}) == [5]

    # shared node u = x1+x2, f_v = u + u -> (2, 2)
    b = CircuitBuilder()
    u = b.add(b.var(1), b.var(2))
    v = b.add(u, u)
    c = b.finish([v])
    assert linear_form(c, v).var_coeffs == {1: 2, 2: 2}


def test_linear_form_rejects_mul():
    c = _circ(lambda b: b.mul(b.var(0), b.var(1)))
    with pytest.raises(BalanceError):
        linear_form(c, c.output)


def test_partial_linear_examples():
    b = CircuitBuilder()
    v = b.mul(b.var(1), b.var(2))
    c = b.finish([v])
    x1 = next(i for i, nd in enumerate(c.nodes) if nd == (VAR, 1))
    out = partial_linear(c, x1, v)
    assert expand_single(out).terms == {(0, 0, 1): 1}
    # w = v -> Const 1
    same = partial_linear(c, v, v)
    assert eval_int(same, {0: 0, 1: 0, 2: 0})[0] == 1
    # w outside F_v -> Const 0
    b = CircuitBuilder()
    a = b.var(0)
    lone = b.var(1)
    r = b.add(a, b.const(2))
    c2 = b.finish([r, lone])
    assert eval_int(partial_linear(c2, lone, r), {0: 1, 1: 1})[0] == 0


def test_frontier_examples():
    b = CircuitBuilder()
    xy = b.mul(b.var(0), b.var(1))
    root = b.mul(xy, b.var(2))
    c = b.finish([root])
    assert frontier(c, root, 2) == {root}
    assert frontier(c, root, 1) == {xy}
    leaf = _circ(lambda b: b.var(0))
    assert frontier(leaf, leaf.output, 1) == set()


def test_balance_of_var_is_one_times_x():
    c = _circ(lambda b: b.var(0))
    out = balance(c)
    root = out.nodes[out.output]
    assert root[0] == MUL
    assert out.nodes[root[1]] == ("const", 1)
    assert out.nodes[root[2]] == (VAR, 0)


def test_balance_left_comb_product():
    b = CircuitBuilder()
    acc = b.var(0)
    for _ in range(7):
        acc = b.mul(acc, b.var(0))
    c = b.finish([acc])
    out = balance(c)
    assert eval_int(out, {0: 3}) == [6561]
    s, d = c.size, 8
    ls, ld = math.ceil(math.log2(s)), math.ceil(math.log2(d))
    assert depth(out) <= C_DEPTH * (ls * ld + ld * ld + 1)


def test_balance_eval_preservation(corpus):
    rng = random.Random(53)
    for c in corpus[:15]:
        dp = exact_degub_prime(c)
        dec = homogenize(c, dp.degree[c.output], constants_as_degree_one=True)
        out = balance_decomposition(dec)
        for _ in range(10):
            a = {j: rng.randint(-9, 9) for j in range(c.var_count)}
            assert eval_int(out, a) == eval_int(c, a)


def test_balance_bounds_on_corpus(corpus):
    for c in corpus:
        dp = exact_degub_prime(c)
        dec = homogenize(c, dp.degree[c.output], constants_as_degree_one=True)
        out = balance_decomposition(dec)
        s = dec.size
        d = max(dec.annotation.degree.values())
        ls = max(1, math.ceil(math.log2(s)))
        ld = max(1, math.ceil(math.log2(max(2, d))))
        assert depth(out) <= C_DEPTH * (ls * ld + ld * ld + 1)
        assert out.size <= C_SIZE * s ** 3


def test_balance_requires_annotation_consistency():
    b = CircuitBuilder()
    c = b.finish([b.mul(b.add(b.var(0), b.const(1)), b.var(0))])
    from detcirc.circuit import DegreeAnnotation
    # internal bounds are recomputed from the leaves, but a leaf bound other
    # than degubPrime's is rejected, as is a missing annotation
    bad = DegreeAnnotation("degubPrime", {i: (0 if c.nodes[i][0] == "var" else 1)
                                          for i in range(c.size)})
    with pytest.raises(BalanceError):
        balance(c, bad)
    missing = DegreeAnnotation("degubPrime", {0: 1})
    with pytest.raises(BalanceError):
        balance(c, missing)


def test_balance_stage_correctness_full():
    # after completion, [F_v] exists for every v and the derivative map covers
    # exactly the pairs with 2*degubPrime(w) > degubPrime(v)
    b = CircuitBuilder()
    x, y = b.var(0), b.var(1)
    xy = b.mul(x, y)
    c = b.finish([b.mul(xy, b.add(x, y))])
    ctx = balance_full(c)
    for v in range(ctx.input.size):
        assert v in ctx.fv_node
    ann = ctx.annotation.degree
    for v in range(ctx.input.size):
        for w in range(ctx.input.size):
            if 2 * ann[w] > ann[v]:
                assert (w, v) in ctx.dwfv_node
    # stage grouping covers all nodes
    assert sum(len(g) for g in ctx.stages.values()) == ctx.input.size
    assert eval_int(ctx.output, {0: 2, 1: 5}) == eval_int(c, {0: 2, 1: 5})


def test_partial_degree_bound(corpus):
    # exact degree of derivative circuits <= degubPrime(v) - degubPrime(w)
    for c in corpus[:8]:
        ann = exact_degub_prime(c)
        table = reachability(c)
        checked = 0
        for v in range(c.size):
            if c.nodes[v][0] != MUL:
                continue
            for w in range(v):
                if not reaches(table, w, v):
                    continue
                gap = ann.degree[v] - ann.degree[w]
                if not (0 <= gap <= 1) or 2 * ann.degree[w] <= ann.degree[v]:
                    continue
                try:
                    out = partial_linear(c, w, v, ann)
                except BalanceError:
                    continue
                p = expand_single(out)
                assert p.total_degree() <= gap
                checked += 1
                if checked > 4:
                    break
            if checked > 4:
                break


def test_taydet_sharp_prime_bounds_and_values():
    rng = random.Random(59)
    for n in (1, 2, 3):
        c, ann = build_taydet_sharp_prime(n)
        assert max(ann.degree.values()) <= 3 * n + 2
        for _ in range(10):
            m = random_matrix(rng, n, -9, 9)
            a = assignment_of(m)
            a.setdefault(n * n, 0)
            assert eval_int(c, a)[0] == bareiss_det(m)


def test_det_balanced_small(det_balanced_cache):
    rng = random.Random(61)
    for n in (1, 2):
        out = det_balanced_cache(n)
        for _ in range(20):
            m = random_matrix(rng, n)
            a = assignment_of(m)
            a.setdefault(n * n, 0)
            assert eval_int(out, a)[0] == bareiss_det(m)


def test_det_balanced_depth_bound_n3(det_balanced_cache):
    # measured once and frozen: depth <= C*ceil(log2 s)*ceil(log2 n) + C*ceil(log2 n)^2
    n = 3
    c, ann = build_taydet_sharp_prime(n)
    dec = homogenize(c, ann.degree[c.output], constants_as_degree_one=True)
    out = det_balanced_cache(n)
    s = dec.size
    ls, ln = math.ceil(math.log2(s)), math.ceil(math.log2(n))
    assert depth(out) <= C_DEPTH * ls * ln + C_DEPTH * ln * ln


def test_linear_form_overflow_errors():
    b = CircuitBuilder()
    acc = b.var(0)
    for _ in range(70):
        acc = b.add(acc, acc)
    c = b.finish([acc])
    # 2^70 paths saturate the cap
    with pytest.raises(LinearFormOverflow):
        linear_form(c, c.output)
