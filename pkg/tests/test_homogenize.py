from detcirc.circuit import ADD, CONST, CircuitBuilder, MUL
from detcirc.evaluate import eval_int, expand_single
from detcirc.homogenize import (SIZE_BOUND_K, exact_degree_witness, homogenize,
                                sum_components)


def _circ(build):
    b = CircuitBuilder()
    return b.finish([build(b)])


def test_homogenize_linear():
    c = _circ(lambda b: b.add(b.var(0), b.const(1)))
    dec = homogenize(c, 1)
    assert eval_int(dec.component(0), {0: 99}) == [1]
    assert eval_int(dec.component(1), {0: 5}) == [5]


def test_homogenize_square():
    c = _circ(lambda b: b.mul(b.add(b.var(0), b.const(1)), b.add(b.var(0), b.const(1))))
    dec = homogenize(c, 2)
    vals = [eval_int(dec.component(i), {0: 3})[0] for i in range(3)]
    assert vals == [1, 6, 9]


def test_homogenize_with_witness_zeroes_high_slots():
    # f = x*x + 5: the plus node has exact degree 2, so the degree-1 slot of
    # the product child is the shared zero
    b = CircuitBuilder()
    m = b.mul(b.var(0), b.var(0))
    c = b.finish([b.add(m, b.const(5))])
    w = exact_degree_witness(c)
    dec = homogenize(c, 2, witness=w)
    assert expand_single(dec.component(1)).is_zero()
    # the witness zeroes all slots above a node's exact degree structurally
    const5 = next(i for i, nd in enumerate(c.nodes) if nd == (CONST, 5))
    assert dec.circuit.nodes[dec.dup_map[(const5, 1)]] == (CONST, 0)
    assert dec.circuit.nodes[dec.dup_map[(const5, 2)]] == (CONST, 0)
    assert expand_single(dec.component(0)).terms == {(0,): 5}
    assert expand_single(dec.component(2)).terms == {(2,): 1}


def test_exact_degree_witness_examples():
    b = CircuitBuilder()
    m = b.mul(b.var(0), b.var(0))
    c = b.finish([b.add(m, b.var(0))])
    w = exact_degree_witness(c)
    assert w.degree[c.output] == 2 and w.degree[m] == 2
    c5 = _circ(lambda b: b.const(5))
    assert exact_degree_witness(c5).degree[c5.output] == 0
    b = CircuitBuilder()
    acc = b.var(0)
    for _ in range(64):
        acc = b.mul(acc, acc)
    assert exact_degree_witness(b.finish([acc])).overflow


def test_sum_components_examples():
    c = _circ(lambda b: b.mul(b.add(b.var(0), b.const(1)), b.add(b.var(0), b.const(1))))
    dec = homogenize(c, 2)
    assert eval_int(sum_components(dec), {0: 3}) == [16]
    z = _circ(lambda b: b.const(0))
    assert eval_int(sum_components(homogenize(z, 1)), {}) == [0]
    only1 = homogenize(c, 2, only_i=1)
    assert eval_int(only1, {0: 3}) == [6]


def test_polynomial_preservation_and_purity(corpus):
    for c in corpus[:20]:
        w = exact_degree_witness(c)
        d = max(1, w.degree[c.output])
        dec = homogenize(c, d, witness=w)
        base = expand_single(c)
        total = None
        for i in range(d + 1):
            p = expand_single(dec.component(i))
            assert all(sum(e) == i for e in p.terms)
            total = p if total is None else total + p
        assert total == base


def test_homogenize_size_bound(corpus):
    for c in corpus:
        w = exact_degree_witness(c)
        d = max(1, w.degree[c.output])
        dec = homogenize(c, d, witness=w)
        assert dec.size <= SIZE_BOUND_K * d * d * c.size


def test_declared_idempotence():
    c = _circ(lambda b: b.mul(b.add(b.var(0), b.const(1)), b.add(b.var(0), b.const(1))))
    dec = homogenize(c, 2)
    comp2 = dec.component(2)
    ann2 = _restrict_annotation(dec, comp2)
    redo = homogenize(comp2, 2, declared=ann2)
    # the declared component is returned unchanged plus zero padding
    assert expand_single(redo.component(2)) == expand_single(comp2)
    assert expand_single(redo.component(0)).is_zero()
    assert expand_single(redo.component(1)).is_zero()
    # only_i on a declared homogeneous circuit: zero for mismatched slots
    zero_slot = homogenize(comp2, 2, declared=ann2, only_i=1)
    assert expand_single(zero_slot).is_zero()
    same_slot = homogenize(comp2, 2, declared=ann2, only_i=2)
    assert expand_single(same_slot) == expand_single(comp2)


def _restrict_annotation(dec, comp):
    from detcirc.circuit import DegreeAnnotation
    return DegreeAnnotation(dec.annotation.mode,
                            dict(dec.annotation.degree), dec.annotation.overflow)


def test_degub_prime_mode_constants_carry_one():
    c = _circ(lambda b: b.add(b.mul(b.const(3), b.var(0)), b.const(1)))
    dec = homogenize(c, 3, constants_as_degree_one=True)
    # constants live in slot 1 now: slot 2 holds 3*x, slot 1 holds 1
    assert eval_int(dec.component(2), {0: 5}) == [15]
    assert eval_int(dec.component(1), {0: 5}) == [1]
    # annotation bounds are declared per slot
    for (node, i), nid in dec.dup_map.items():
        assert dec.annotation.degree[nid] <= max(i, dec.annotation.degree[nid])


def test_zero_assignment_kills_positive_components(corpus):
    for c in corpus[:5]:
        w = exact_degree_witness(c)
        d = max(1, w.degree[c.output])
        dec = homogenize(c, d, witness=w)
        zero = {j: 0 for j in range(c.var_count)}
        for i in range(1, d + 1):
            assert eval_int(dec.component(i), zero) == [0]


def test_homogeneity_of_add_gates_by_declaration(corpus):
    for c in corpus[:10]:
        w = exact_degree_witness(c)
        d = max(1, w.degree[c.output])
        dec = homogenize(c, d, witness=w)
        ann = dec.annotation.degree
        for i, node in enumerate(dec.circuit.nodes):
            if node[0] == ADD:
                assert ann[node[1]] == ann[node[2]] == ann[i]
            elif node[0] == MUL:
                assert ann[node[1]] + ann[node[2]] == ann[i]
