"""Syntactic and semantic checking of PC/PI proofs.

Syntactic mode verifies, line by line, that the circuits are admissible for
the proof system, that the line has the shape its justification demands, and
that every required identity between subcircuits is certified by a witness
map (injective, label- and child-order-preserving).  Nothing semantic is ever
evaluated except the scalar axiom A10, whose arithmetic is checked exactly.

Semantic mode additionally samples every line at random rational points,
resampling when a division gate hits zero.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from ..circuit import ADD, CONST, INV, MUL, VAR, Circuit, structural_key
from ..evaluate import DivisionByZero, eval_rat
from .model import (AXIOMS, PC, PCK, PIDIV, Proof, ProofLine, SubMap, Verdict,
                    resolve_ref)


class _Fail(Exception):
    def __init__(self, reason: str):
        self.reason = reason


def _subcircuit_nodes(c: Circuit, root: int) -> set:
    seen = {root}
    stack = [root]
    while stack:
        i = stack.pop()
        node = c.nodes[i]
        kind = node[0]
        if kind in (ADD, MUL):
            children = (node[1], node[2])
        elif kind == INV:
            children = (node[1],)
        else:
            children = ()
        for ch in children:
            if ch not in seen:
                seen.add(ch)
                stack.append(ch)
    return seen


def _check_submap(proof: Proof, idx: int, m: SubMap):
    try:
        src = resolve_ref(proof, idx, m.src_ref)
        dst = resolve_ref(proof, idx, m.dst_ref)
    except (IndexError, ValueError) as e:
        raise _Fail(f"bad witness reference: {e}")
    if not (0 <= m.src_root < src.size) or not (0 <= m.dst_root < dst.size):
        raise _Fail("witness root out of range")
    mapping = {}
    targets = set()
    for a, b in m.pairs:
        if a in mapping:
            raise _Fail(f"witness maps node {a} twice")
        if b in targets:
            raise _Fail(f"witness target {b} hit twice")
        if not (0 <= a < src.size and 0 <= b < dst.size):
            raise _Fail("witness pair out of range")
        mapping[a] = b
        targets.add(b)
    domain = _subcircuit_nodes(src, m.src_root)
    if set(mapping) != domain:
        raise _Fail("witness domain is not exactly the source subcircuit")
    if mapping[m.src_root] != m.dst_root:
        raise _Fail("witness does not map root to root")
    for a, b in mapping.items():
        na, nb = src.nodes[a], dst.nodes[b]
        if na[0] != nb[0]:
            raise _Fail(f"witness maps {na[0]} node {a} to {nb[0]} node {b}")
        kind = na[0]
        if kind in (VAR, CONST):
            if na[1] != nb[1]:
                raise _Fail(f"witness changes a {kind} label at node {a}")
        elif kind == INV:
            if mapping[na[1]] != nb[1]:
                raise _Fail(f"witness breaks the child of inv node {a}")
        else:
            if mapping[na[1]] != nb[1] or mapping[na[2]] != nb[2]:
                raise _Fail(f"witness breaks the children of node {a}")


def _find_map(line: ProofLine, src_ref, src_root, dst_ref, dst_root) -> SubMap:
    for m in line.witness:
        if (m.src_ref == src_ref and m.src_root == src_root
                and m.dst_ref == dst_ref and m.dst_root == dst_root):
            return m
    raise _Fail(f"missing witness map {src_ref}[{src_root}] -> {dst_ref}[{dst_root}]")


def _root(c: Circuit, kind: str, what: str):
    node = c.nodes[c.output]
    if node[0] != kind:
        raise _Fail(f"{what}: expected a {kind} root, found {node[0]}")
    return node


def _require_const(c: Circuit, nid: int, value: Optional[int], what: str) -> int:
    node = c.nodes[nid]
    if node[0] != CONST:
        raise _Fail(f"{what}: expected a constant node")
    if value is not None and node[1] != value:
        raise _Fail(f"{what}: expected the constant {value}")
    return node[1]


def _disjoint(c: Circuit, a: int, b: int, what: str):
    if _subcircuit_nodes(c, a) & _subcircuit_nodes(c, b):
        raise _Fail(f"{what}: the two subcircuits must be node-disjoint")


def _expected_maps(proof: Proof, idx: int) -> list:
    """Derive the submaps required by the line's justification.

    Returns a list of (src_ref, src_root, dst_ref, dst_root) tuples; shape
    errors raise _Fail.
    """
    line = proof.lines[idx]
    name = line.just.name
    lhs, rhs = line.lhs, line.rhs
    L, R = ("line", "lhs"), ("line", "rhs")

    if name == "A1":
        return [(L, lhs.output, R, rhs.output)]
    if name in ("A2", "A4"):
        kind = ADD if name == "A2" else MUL
        nl = _root(lhs, kind, name)
        nr = _root(rhs, kind, name)
        return [(L, nl[1], R, nr[2]), (L, nl[2], R, nr[1])]
    if name in ("A3", "A5"):
        kind = ADD if name == "A3" else MUL
        nl = _root(lhs, kind, name)
        inner_l = lhs.nodes[nl[2]]
        if inner_l[0] != kind:
            raise _Fail(f"{name}: lhs must be F o (G o H)")
        nr = _root(rhs, kind, name)
        inner_r = rhs.nodes[nr[1]]
        if inner_r[0] != kind:
            raise _Fail(f"{name}: rhs must be (F o G) o H")
        return [(L, nl[1], R, inner_r[1]),
                (L, inner_l[1], R, inner_r[2]),
                (L, inner_l[2], R, nr[2])]
    if name == "A6":
        nl = _root(lhs, MUL, name)
        gh = lhs.nodes[nl[2]]
        if gh[0] != ADD:
            raise _Fail("A6: lhs must be F * (G + H)")
        nr = _root(rhs, ADD, name)
        m1 = rhs.nodes[nr[1]]
        m2 = rhs.nodes[nr[2]]
        if m1[0] != MUL or m2[0] != MUL:
            raise _Fail("A6: rhs must be F*G + F*H")
        return [(L, nl[1], R, m1[1]), (L, nl[1], R, m2[1]),
                (L, gh[1], R, m1[2]), (L, gh[2], R, m2[2])]
    if name == "A7":
        nl = _root(lhs, ADD, name)
        _require_const(lhs, nl[2], 0, "A7")
        return [(L, nl[1], R, rhs.output)]
    if name == "A8":
        nl = _root(lhs, MUL, name)
        _require_const(lhs, nl[2], 0, "A8")
        _require_const(rhs, rhs.output, 0, "A8 rhs")
        return []
    if name == "A9":
        nl = _root(lhs, MUL, name)
        _require_const(lhs, nl[2], 1, "A9")
        return [(L, nl[1], R, rhs.output)]
    if name == "A10":
        compound, scalar = lhs, rhs
        node = compound.nodes[compound.output]
        if node[0] not in (ADD, MUL):
            compound, scalar = rhs, lhs
            node = compound.nodes[compound.output]
        if node[0] not in (ADD, MUL):
            raise _Fail("A10: one side must be a scalar Add/Mul")
        b = _require_const(compound, node[1], None, "A10")
        c = _require_const(compound, node[2], None, "A10")
        a = _require_const(scalar, scalar.output, None, "A10")
        want = b + c if node[0] == ADD else b * c
        if a != want:
            raise _Fail(f"A10: {b} {node[0]} {c} is {want}, not {a}")
        return []
    if name in ("C1", "C2"):
        kind = ADD if name == "C1" else MUL
        nl = _root(lhs, kind, name)
        nr = _root(rhs, kind, name)
        _disjoint(rhs, nr[1], nr[2], name)
        # the disjoint side maps onto the (possibly shared) side
        return [(R, nr[1], L, nl[1]), (R, nr[2], L, nl[2])]
    if name == "D":
        if proof.system == PCK:
            _check_div_k(proof, line)
            return []
        if proof.system != PIDIV:
            raise _Fail("axiom D is only available in PIdiv proofs")
        nl = _root(lhs, MUL, name)
        inv = lhs.nodes[nl[2]]
        if inv[0] != INV:
            raise _Fail("D: lhs must be F * F^-1")
        _require_const(rhs, rhs.output, 1, "D rhs")
        return [(L, nl[1], L, inv[1])]
    if name == "R1":
        if len(line.just.premises) != 1:
            raise _Fail("R1 takes one premise")
        p = line.just.premises[0]
        return [(("prem", p, "rhs"), proof.lines[p].rhs.output, L, lhs.output),
                (("prem", p, "lhs"), proof.lines[p].lhs.output, R, rhs.output)]
    if name == "R2":
        if len(line.just.premises) != 2:
            raise _Fail("R2 takes two premises")
        p, q = line.just.premises
        return [(("prem", p, "lhs"), proof.lines[p].lhs.output, L, lhs.output),
                (("prem", p, "rhs"), proof.lines[p].rhs.output,
                 ("prem", q, "lhs"), proof.lines[q].lhs.output),
                (("prem", q, "rhs"), proof.lines[q].rhs.output, R, rhs.output)]
    if name in ("R3", "R4"):
        if len(line.just.premises) != 2:
            raise _Fail(f"{name} takes two premises")
        kind = ADD if name == "R3" else MUL
        p, q = line.just.premises
        nl = _root(lhs, kind, name)
        nr = _root(rhs, kind, name)
        return [(("prem", p, "lhs"), proof.lines[p].lhs.output, L, nl[1]),
                (("prem", q, "lhs"), proof.lines[q].lhs.output, L, nl[2]),
                (("prem", p, "rhs"), proof.lines[p].rhs.output, R, nr[1]),
                (("prem", q, "rhs"), proof.lines[q].rhs.output, R, nr[2])]
    raise _Fail(f"unknown justification {name!r}")


def _check_div_k(proof: Proof, line: ProofLine):
    """The correct-up-to-degree-k division line: F * Inv_k(F) = 1.

    Compared by tree unfolding, so the sharing pattern of the Inv_k block is
    not constrained."""
    from ..terms import circuit_to_term, tinv_k, tmul

    if proof.k is None:
        raise _Fail("PCk proof without a degree bound")
    lhs = line.lhs
    nl = _root(lhs, MUL, "D(k)")
    _require_const(line.rhs, line.rhs.output, 1, "D(k) rhs")
    f_term = circuit_to_term(lhs, nl[1])
    expected = tmul(f_term, tinv_k(f_term, proof.k))
    if circuit_to_term(lhs) != expected:
        raise _Fail("D(k): lhs is not F * Inv_k(F) for the left factor F")


def _check_line(proof: Proof, idx: int):
    line = proof.lines[idx]
    if proof.system in (PC, PCK):
        if not line.lhs.is_division_free() or not line.rhs.is_division_free():
            raise _Fail("division gate in a division-free system")
    name = line.just.name
    if name not in AXIOMS and name not in ("R1", "R2", "R3", "R4"):
        raise _Fail(f"unknown justification {name!r}")
    if name == "D" and proof.system == PC:
        raise _Fail("axiom D is not available in PC")
    for p in line.just.premises:
        if not (0 <= p < idx):
            raise _Fail(f"premise {p} is not an earlier line")
    expected = _expected_maps(proof, idx)
    for (src_ref, src_root, dst_ref, dst_root) in expected:
        m = _find_map(line, src_ref, src_root, dst_ref, dst_root)
        _check_submap(proof, idx, m)


def check(proof: Proof, mode: str = "syntactic", trials: int = 0,
          rng: Optional[random.Random] = None, sample_range: int = 10**6,
          max_retries: int = 200) -> Verdict:
    """Verdict for a whole proof.

    mode "syntactic": every justification and witness is verified.
    mode "semantic": additionally evaluates each line's two sides at `trials`
    random rational points (resampling blown divisions), which is a
    probabilistic check reported as such.
    """
    for idx in range(len(proof.lines)):
        try:
            _check_line(proof, idx)
        except _Fail as e:
            return Verdict(False, line=idx, reason=e.reason)
    if mode == "syntactic":
        return Verdict(True)
    if mode != "semantic":
        raise ValueError(f"unknown mode {mode!r}")
    rng = rng or random.Random(0)
    nv_all = max((max(l.lhs.var_count, l.rhs.var_count) for l in proof.lines), default=0)
    # one shared point matrix lets structurally equal sides share evaluations
    points = [[rng.randint(-sample_range, sample_range) for _ in range(trials)]
              for _ in range(nv_all)]
    memo = {}

    def eval_vec(c: Circuit):
        key = structural_key(c)
        got = memo.get(key)
        if got is not None:
            return got
        vals = _eval_trials(c, points, trials)
        memo[key] = vals
        return vals

    for idx, line in enumerate(proof.lines):
        va, vb = eval_vec(line.lhs), eval_vec(line.rhs)
        for t in range(trials):
            x, y = va[t], vb[t]
            if x is None or y is None:
                # a division blew up at the shared point: per-line resample
                res = _resample_line(line, rng, sample_range, max_retries)
                if res == "mismatch":
                    return Verdict(False, line=idx, reason="semantic sample mismatch",
                                   trials=trials)
                if res == "exhausted":
                    return Verdict(False, line=idx, trials=trials,
                                   reason="could not find a non-degenerate sample point")
                continue
            if x != y:
                return Verdict(False, line=idx, reason="semantic sample mismatch",
                               trials=trials)
    return Verdict(True, trials=trials)


def _eval_trials(c: Circuit, points, trials: int):
    """Evaluate all trial points in one pass; None marks a blown division."""
    keep = c.reachable()
    val = [None] * c.size
    for i, node in enumerate(c.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind == VAR:
            val[i] = points[node[1]][:trials]
        elif kind == CONST:
            val[i] = [node[1]] * trials
        elif kind == ADD:
            a, b = val[node[1]], val[node[2]]
            val[i] = [None if (x is None or y is None) else x + y for x, y in zip(a, b)]
        elif kind == MUL:
            a, b = val[node[1]], val[node[2]]
            val[i] = [None if (x is None or y is None) else x * y for x, y in zip(a, b)]
        else:
            a = val[node[1]]
            val[i] = [None if (x is None or x == 0) else Fraction(1, 1) / x for x in a]
    return val[c.output]


def _resample_line(line, rng, sample_range: int, max_retries: int) -> str:
    nv = max(line.lhs.var_count, line.rhs.var_count)
    lhs = Circuit(line.lhs.nodes, line.lhs.outputs, nv)
    rhs = Circuit(line.rhs.nodes, line.rhs.outputs, nv)
    for _ in range(max_retries):
        a = {j: Fraction(rng.randint(-sample_range, sample_range)) for j in range(nv)}
        try:
            va, vb = eval_rat(lhs, a), eval_rat(rhs, a)
        except DivisionByZero:
            continue
        return "ok" if va == vb else "mismatch"
    return "exhausted"
