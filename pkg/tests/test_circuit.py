import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detcirc.circuit import (Circuit, CircuitBuilder, CircuitError,
                             CircuitFormatError, decode, depth,
                             disjoint_combine, encode, exact_degrees,
                             power_chain, structurally_equal, substitute, to_dot)
from detcirc.evaluate import eval_int

from conftest import random_circuit


def single_var():
    b = CircuitBuilder()
    return b.finish([b.var(0)])


def test_depth_leaf_and_gate():
    assert depth(single_var()) == 0
    b = CircuitBuilder()
    c = b.finish([b.add(b.var(0), b.var(1))])
    assert depth(c) == 1


def test_depth_left_comb_product():
    b = CircuitBuilder()
    acc = b.var(0)
    for j in range(1, 8):
        acc = b.mul(acc, b.var(j))
    assert depth(b.finish([acc])) == 7


def test_topological_numbering_enforced():
    with pytest.raises(CircuitError):
        Circuit((("add", 1, 2), ("var", 0), ("var", 1)), (0,), 2)


def test_disjoint_combine_var_with_itself():
    c, (m1, m2) = disjoint_combine(single_var(), single_var(), "add")
    assert c.size == 3
    assert sum(1 for nd in c.nodes if nd[0] == "var") == 2


def test_disjoint_combine_size_law():
    # (1+x5) x x5: the disjoint version has size(f)+size(g)+1
    b = CircuitBuilder()
    f = b.finish([b.add(b.const(1), b.var(5))])
    g = single_var_idx(5)
    c, (m1, m2) = disjoint_combine(f, g, "mul")
    assert c.size == f.size + g.size + 1
    # a shared construction is smaller
    b2 = CircuitBuilder()
    x5 = b2.var(5)
    shared = b2.finish([b2.mul(b2.add(b2.const(1), x5), x5)])
    assert shared.size <= c.size


def single_var_idx(j):
    b = CircuitBuilder()
    return b.finish([b.var(j)])


def test_disjoint_combine_maps_are_injective_and_label_preserving():
    rng = random.Random(3)
    f = random_circuit(rng)
    g = random_circuit(rng)
    c, (m1, m2) = disjoint_combine(f, g, "add")
    for src, mapping in ((f, m1), (g, m2)):
        assert len(set(mapping.values())) == len(mapping)
        for old, new in mapping.items():
            assert src.nodes[old][0] == c.nodes[new][0]
    assert not set(m1.values()) & set(m2.values())


def test_substitute_const_image():
    b = CircuitBuilder()
    c = b.finish([b.mul(b.var(0), b.var(0))])
    ib = CircuitBuilder(var_count=1)
    image = ib.finish([ib.sub(ib.const(1), ib.var(0))])
    out, _ = substitute(c, {0: image})
    assert eval_int(out, {0: 1}) == [0]


def test_substitute_identity_is_structural_noop():
    rng = random.Random(5)
    c = random_circuit(rng)
    out, remap = substitute(c, {})
    assert structurally_equal(c, out)


def test_substitute_compose_evaluate(corpus):
    # substitute then evaluate = evaluate composed assignments
    rng = random.Random(11)
    for c in corpus[:10]:
        ib = CircuitBuilder(var_count=c.var_count)
        image = ib.finish([ib.add(ib.var(1), ib.const(3))])
        out, _ = substitute(c, {0: image})
        for _ in range(5):
            a = {j: rng.randint(-20, 20) for j in range(c.var_count)}
            composed = dict(a)
            composed[0] = a[1] + 3
            assert eval_int(out, a) == eval_int(c, composed)


def test_power_chain_values_and_depth():
    x = single_var()
    assert eval_int(power_chain(x, 4), {0: 3}) == [81]
    assert structurally_equal(power_chain(x, 1), x)
    assert depth(power_chain(x, 8)) == 3
    # k = 0 convention
    assert eval_int(power_chain(x, 0), {0: 7}) == [1]


def test_encode_decode_roundtrip(corpus):
    for c in corpus[:20]:
        assert decode(encode(c)) == c


def test_encode_deterministic():
    rng = random.Random(7)
    c = random_circuit(rng)
    assert encode(c) == encode(Circuit(c.nodes, c.outputs, c.var_count))


def test_decode_rejects_forward_reference():
    text = b"circuit 1\nvars 1\noutputs 1\nnodes 2\n0 add 1 1\n1 var 0\n"
    with pytest.raises(CircuitFormatError):
        decode(text)


def test_decode_rejects_unknown_tag():
    text = b"circuit 1\nvars 1\noutputs 0\nnodes 1\n0 sub 0\n"
    with pytest.raises(CircuitFormatError) as e:
        decode(text)
    assert e.value.offset > 0


@given(st.integers(min_value=-10**30, max_value=10**30))
@settings(max_examples=30, deadline=None)
def test_encode_roundtrip_bigint_consts(v):
    b = CircuitBuilder()
    c = b.finish([b.add(b.const(v), b.var(0))])
    assert decode(encode(c)) == c


def test_exact_degrees_overflow_flag():
    b = CircuitBuilder()
    acc = b.var(0)
    for _ in range(64):
        acc = b.mul(acc, acc)
    ann = exact_degrees(b.finish([acc]))
    assert ann.overflow


def test_dot_export_smoke():
    out = to_dot(single_var())
    assert out.startswith("digraph")
