from detcirc.circuit import CircuitBuilder
from detcirc.proof.builder import (ProofBuilder, circuit_of, iso_pairs, tadd,
                                   tconst, tinv, tmul, tvar)
from detcirc.proof.checker import check
from detcirc.proof.model import (PCK, PIDIV, Justification, Proof, ProofLine,
                                 SubMap)
from detcirc.passes import emit_inv_k

x, y, z = tvar(0), tvar(1), tvar(2)


def test_reflexivity_line_checks():
    pb = ProofBuilder()
    pb.refl(x)
    assert check(pb.proof).ok


def test_r3_fixture_checks():
    pb = ProofBuilder()
    a = pb.refl(x)
    b = pb.refl(y)
    pb.rule_add(a, b)
    v = check(pb.proof)
    assert v.ok


def test_r2_middle_mismatch_localized():
    pb = ProofBuilder()
    a = pb.comm_add(x, y)   # x+y = y+x
    b = pb.comm_add(y, z)   # y+z = z+y
    # force an R2 with mismatched middle circuits
    bad = ProofLine(circuit_of(tadd(x, y)), circuit_of(tadd(z, y)),
                    Justification("R2", (a, b)))
    idx = pb.proof.add(bad)
    pb.terms.append(None)
    # hand-build plausible witnesses; the middle map must fail
    l1, l2 = pb.proof.lines[a], pb.proof.lines[b]
    maps = [SubMap(("prem", a, "lhs"), l1.lhs.output, ("line", "lhs"), bad.lhs.output,
                   iso_pairs(l1.lhs, l1.lhs.output, bad.lhs, bad.lhs.output)),
            SubMap(("prem", a, "rhs"), l1.rhs.output, ("prem", b, "lhs"), l2.lhs.output,
                   tuple((i, i) for i in range(l1.rhs.size))),
            SubMap(("prem", b, "rhs"), l2.rhs.output, ("line", "rhs"), bad.rhs.output,
                   iso_pairs(l2.rhs, l2.rhs.output, bad.rhs, bad.rhs.output))]
    bad.witness = tuple(maps)
    v = check(pb.proof)
    assert not v.ok and v.line == idx


def test_all_axiom_helpers_check():
    pb = ProofBuilder(system=PIDIV)
    pb.refl(tmul(x, y))
    pb.comm_add(x, y)
    pb.assoc_add(x, y, z)
    pb.comm_mul(x, y)
    pb.assoc_mul(x, y, z)
    pb.distrib(x, y, z)
    pb.plus_zero(x)
    pb.times_zero(x)
    pb.times_one(x)
    pb.scalar_add(3, -4)
    pb.scalar_mul(-2, 5)
    pb.div_axiom(tadd(x, y))
    assert check(pb.proof).ok


def test_a10_arithmetic_verified():
    lhs = circuit_of(tadd(tconst(2), tconst(2)))
    rhs = circuit_of(tconst(5))
    p = Proof([ProofLine(lhs, rhs, Justification("A10"))])
    v = check(p)
    assert not v.ok and v.line == 0 and "A10" in v.reason


def test_d_axiom_requires_pidiv():
    pb = ProofBuilder(system=PIDIV)
    pb.div_axiom(x)
    p = pb.proof
    p.system = "PC"
    v = check(p)
    assert not v.ok


def test_division_gate_rejected_in_pc():
    pb = ProofBuilder()
    lhs = circuit_of(tinv(x))
    p = Proof([ProofLine(lhs, lhs, Justification("A1"))], "PC")
    v = check(p)
    assert not v.ok and "division" in v.reason


def test_c1_c2_share_axioms():
    b = CircuitBuilder()
    u = b.add(b.var(0), b.var(1))
    shared = b.finish([b.add(u, u)])
    pb = ProofBuilder()
    pb.share_add(shared)
    b2 = CircuitBuilder()
    w = b2.add(b2.var(0), b2.var(1))
    shared2 = b2.finish([b2.mul(w, w)])
    pb.share_mul(shared2)
    assert check(pb.proof).ok
    v = check(pb.proof, "semantic", trials=10)
    assert v.ok


def test_c1_rejects_non_disjoint_rhs():
    b = CircuitBuilder()
    u = b.add(b.var(0), b.var(1))
    shared = b.finish([b.add(u, u)])
    line = ProofLine(shared, shared, Justification("C1"))
    p = Proof([line])
    line.witness = (SubMap(("line", "rhs"), u, ("line", "lhs"), u,
                           iso_pairs(shared, u, shared, u)),) * 2
    v = check(p)
    assert not v.ok and "disjoint" in v.reason


def test_div_k_line_checks():
    f = tadd(tconst(1), tmul(tconst(-1), x))
    b = CircuitBuilder()
    from detcirc.terms import emit_term
    froot = emit_term(b, f, {})
    top = b.mul(froot, emit_inv_k(b, froot, 3))
    lhs = b.finish([top])
    p = Proof([ProofLine(lhs, circuit_of(tconst(1)), Justification("D"))],
              PCK, k=3)
    assert check(p).ok
    # wrong k is rejected
    p.k = 2
    v = check(p)
    assert not v.ok and "D(k)" in v.reason


def test_semantic_mode_catches_false_lines():
    lhs = circuit_of(tadd(x, y))
    rhs = circuit_of(tadd(x, x))
    line = ProofLine(lhs, rhs, Justification("A1"))
    line.witness = (SubMap(("line", "lhs"), lhs.output, ("line", "rhs"), rhs.output,
                           ((0, 0), (1, 1), (2, 2))),)
    p = Proof([line])
    # witness check already refuses: var labels differ
    assert not check(p).ok
