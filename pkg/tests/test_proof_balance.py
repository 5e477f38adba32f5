from detcirc.circuit import Circuit
from detcirc.evaluate import expand_single
from detcirc.proof.balance import balance_proof
from detcirc.proof.builder import ProofBuilder, tadd, tmul, tvar
from detcirc.proof.checker import check

x, y, z = tvar(0), tvar(1), tvar(2)


def _endpoint_polys(p, nv):
    concl = p.lines[p.conclusions[0]]
    pl = expand_single(Circuit(concl.lhs.nodes, concl.lhs.outputs, nv))
    pr = expand_single(Circuit(concl.rhs.nodes, concl.rhs.outputs, nv))
    return pl, pr


def test_balance_proof_commutativity_fixture():
    pb = ProofBuilder()
    pb.comm_mul(tmul(x, y), tmul(z, z))
    out = balance_proof(pb.proof)
    v = check(out)
    assert v.ok, (v.line, v.reason)
    pl, pr = _endpoint_polys(out, 3)
    assert pl == pr and pl.terms == {(1, 1, 2): 1}
    assert check(out, "semantic", trials=20).ok


def test_balance_proof_rule_fixture():
    pb = ProofBuilder()
    a = pb.comm_mul(x, y)
    b = pb.refl(tmul(z, z))
    pb.rule_add(a, b)
    out = balance_proof(pb.proof)
    assert check(out).ok
    pl, pr = _endpoint_polys(out, 3)
    assert pl == pr
    assert check(out, "semantic", trials=20).ok


def test_balance_proof_distributivity_fixture():
    pb = ProofBuilder()
    pb.distrib(x, tmul(y, z), tmul(z, y))
    out = balance_proof(pb.proof)
    assert check(out).ok
    pl, pr = _endpoint_polys(out, 3)
    assert pl == pr


def test_balance_proof_deeper_product():
    t = x
    for j in (1, 2, 1, 0, 2, 1, 0):
        t = tmul(t, tvar(j))
    pb = ProofBuilder()
    pb.comm_mul(t, tmul(x, x))
    out = balance_proof(pb.proof)
    assert check(out).ok
    assert check(out, "semantic", trials=10).ok


def test_balance_proof_multi_line_chain():
    # a proof with every rule over degubPrime-homogeneous lines
    pb = ProofBuilder()
    a = pb.comm_mul(tmul(x, y), z)        # (xy)z = z(xy)
    b = pb.assoc_mul(z, x, y)             # z(xy) = (zx)y
    c = pb.trans(a, b)                    # (xy)z = (zx)y
    d = pb.sym(c)
    e = pb.rule_mul(c, d)
    out = balance_proof(pb.proof)
    v = check(out)
    assert v.ok, (v.line, v.reason)
    pl, pr = _endpoint_polys(out, 3)
    assert pl == pr
    assert check(out, "semantic", trials=20).ok


def test_balance_proof_requires_homogeneous_lines():
    # mixed-degree sums below a product gate are outside the contract
    import pytest
    from detcirc.balance import BalanceError
    pb = ProofBuilder()
    pb.refl(tmul(tadd(x, tmul(x, y)), y))
    with pytest.raises(BalanceError):
        balance_proof(pb.proof)
