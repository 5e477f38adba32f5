import random
from fractions import Fraction

import pytest

from detcirc.circuit import ADD, CONST, INV, MUL, VAR, CircuitError
from detcirc.detbuilder import (build_det_inv, build_inverse,
                                build_product_layout, division_gate_arguments,
                                full_layout, identity_shift_layout,
                                product_layout, triangular_layout)
from detcirc.evaluate import DivisionByZero, bareiss_det, eval_rat

from conftest import assignment_of, random_matrix


def test_inverse_n1_is_single_inv_over_var():
    c = build_inverse(1)
    assert c.outputs == (c.size - 1,)
    root = c.nodes[c.output]
    assert root[0] == INV and c.nodes[root[1]][0] == VAR


def test_inverse_n2_known_value():
    c = build_inverse(2)
    vals = eval_rat(c, assignment_of([[1, 2], [3, 4]]))
    assert vals == [Fraction(-2), Fraction(1), Fraction(3, 2), Fraction(-1, 2)]


def test_inverse_n3_identity():
    c = build_inverse(3)
    ident = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    vals = eval_rat(c, assignment_of(ident))
    want = [Fraction(1 if i == j else 0) for i in range(3) for j in range(3)]
    assert vals == want


def test_inverse_random_against_fraction_solve():
    rng = random.Random(37)
    for n in (2, 3):
        c = build_inverse(n)
        for _ in range(10):
            m = random_matrix(rng, n, -9, 9)
            try:
                vals = eval_rat(c, assignment_of(m))
            except DivisionByZero:
                continue
            # check M * M^-1 = I exactly
            inv = [[vals[i * n + j] for j in range(n)] for i in range(n)]
            for i in range(n):
                for j in range(n):
                    s = sum(Fraction(m[i][k]) * inv[k][j] for k in range(n))
                    assert s == (1 if i == j else 0)


def test_build_det_inv_n1():
    c = build_det_inv(full_layout(1))
    assert c.nodes[c.output][0] == VAR


def test_build_det_inv_values():
    c2 = build_det_inv(full_layout(2))
    assert eval_rat(c2, assignment_of([[1, 2], [3, 4]])) == [Fraction(-2)]
    c3 = build_det_inv(full_layout(3))
    diag = [[2, 0, 0], [0, 3, 0], [0, 0, 5]]
    assert eval_rat(c3, assignment_of(diag)) == [Fraction(30)]


def test_build_det_inv_invalid_dimension():
    with pytest.raises(CircuitError):
        build_det_inv(full_layout(0))
    with pytest.raises(CircuitError):
        build_inverse(0)


def test_det_inv_agrees_with_bareiss_nonsingular_minors():
    rng = random.Random(41)
    for n in range(1, 6):
        c = build_det_inv(full_layout(n))
        done = 0
        while done < 20:
            m = random_matrix(rng, n, -9, 9)
            if any(bareiss_det([row[:k] for row in m[:k]]) == 0 for k in range(1, n)):
                continue
            try:
                v = eval_rat(c, assignment_of(m))
            except DivisionByZero:
                continue
            assert v == [Fraction(bareiss_det(m))]
            done += 1


def test_division_gates_are_schur_complements():
    # every Inv argument is a subtraction whose minuend is a diagonal leaf
    for n in (2, 3, 4):
        c = build_det_inv(full_layout(n))
        args = division_gate_arguments(c)
        assert args
        for a in args:
            node = c.nodes[a]
            if node[0] == VAR:
                assert node[1] == 0  # x_11 at the base level
                continue
            assert node[0] == ADD
            minuend = c.nodes[node[1]]
            assert minuend[0] == VAR and minuend[1] % (n + 1) == 0
            neg = c.nodes[node[2]]
            assert neg[0] == MUL and c.nodes[neg[1]] == (CONST, -1)


def test_division_gates_evaluate_to_one_at_identity():
    for n in (2, 3, 4):
        c = build_det_inv(full_layout(n))
        ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        a = assignment_of(ident)
        views = c.with_outputs(division_gate_arguments(c))
        assert all(v == 1 for v in eval_rat(views, a))


def test_product_layout_entries():
    c1 = build_product_layout(1)
    assert eval_rat(c1, {0: 3, 1: 5}) == [Fraction(15)]
    c2 = build_product_layout(2)
    a = assignment_of([[1, 2], [3, 4]])
    a.update({4 + j: (1 if j in (0, 3) else 0) for j in range(4)})
    assert eval_rat(c2, a)[0] == 1  # entry (1,1) of X*I


def test_det_over_product_layout_multiplicative():
    rng = random.Random(43)
    n = 2
    c = build_det_inv(product_layout(n))
    done = 0
    while done < 20:
        x = random_matrix(rng, n, -9, 9)
        y = random_matrix(rng, n, -9, 9)
        a = assignment_of(x)
        a.update(assignment_of(y, base=n * n))
        try:
            v = eval_rat(c, a)
        except DivisionByZero:
            continue
        assert v == [Fraction(bareiss_det(x) * bareiss_det(y))]
        done += 1


def test_triangular_layout_zeros_above_diagonal():
    c = build_det_inv(triangular_layout(3))
    rng = random.Random(47)
    for _ in range(10):
        m = [[rng.randint(1, 9) if i >= j else 0 for j in range(3)] for i in range(3)]
        assert eval_rat(c, assignment_of(m)) == [Fraction(m[0][0] * m[1][1] * m[2][2])]


def test_identity_shift_layout_scalars_guarded():
    # every scalar leaf is a child of a plus gate whose other child has a variable
    lay = identity_shift_layout(2)
    c = build_det_inv(lay)
    for i, node in enumerate(c.nodes):
        if node[0] != CONST or node[1] == -1:
            continue
        parents = [p for p in range(c.size)
                   if c.nodes[p][0] in (ADD, MUL) and i in (c.nodes[p][1], c.nodes[p][2])]
        assert all(c.nodes[p][0] == ADD for p in parents)
