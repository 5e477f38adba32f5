"""Passes on circuits with division.

Num/Den extraction, division-to-top normalization, the truncated inverse
Inv_k, Taylor-coefficient circuits, the determinant-as-polynomial circuits
Taydet and Taydet#, zero simplification with a rewrite trace, and division
elimination via the identity-matrix shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .circuit import (ADD, CONST, INV, MUL, VAR, Circuit, CircuitBuilder,
                      CircuitError, substitute)
from .detbuilder import (SymbolicMatrixLayout, build_det_inv,
                         identity_shift_layout)


class PassError(CircuitError):
    pass


def _num_den_sweep(f: Circuit, b: CircuitBuilder):
    """One parallel-style sweep duplicating each node into Num(v), Den(v)."""
    keep = f.reachable()
    num = {}
    den = {}
    for i, node in enumerate(f.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind in (VAR, CONST):
            num[i] = b._push(node)
            den[i] = b.const(1)
        elif kind == INV:
            num[i] = den[node[1]]
            den[i] = num[node[1]]
        elif kind == MUL:
            l, r = node[1], node[2]
            num[i] = b.mul(num[l], num[r])
            den[i] = b.mul(den[l], den[r])
        else:
            l, r = node[1], node[2]
            num[i] = b.add(b.mul(num[l], den[r]), b.mul(num[r], den[l]))
            den[i] = b.mul(den[l], den[r])
    return num, den


def num_den(f: Circuit):
    """Division-free numerator and denominator circuits of a circuit with division.

    The two returned circuits share one node pool.
    """
    root = f.output
    b = CircuitBuilder(var_count=f.var_count)
    num, den = _num_den_sweep(f, b)
    pool = b.finish([num[root], den[root]])
    return pool.with_outputs([num[root]]), pool.with_outputs([den[root]])


def normalize_division(f: Circuit) -> Circuit:
    """Num(f) * Den(f)^-1: exactly one division gate, a child of the root Mul."""
    root = f.output
    b = CircuitBuilder(var_count=f.var_count)
    num, den = _num_den_sweep(f, b)
    top = b.mul(num[root], b.inv(den[root]))
    return b.finish([top])


_INVK_HOLE = ("hole", 0)


def emit_inv_k(b: CircuitBuilder, f_root: int, k: int) -> int:
    """1 + (1-F) + (1-F)^2 + ... + (1-F)^k over a shared (1-F) node.

    Left-nested sum, powers as balanced product trees, repeated subterms
    shared; this exact shape is what the proof checker recognizes in
    correct-up-to-degree-k division lines.
    """
    from .terms import emit_term, tinv_k
    return emit_term(b, tinv_k(_INVK_HOLE, k), {_INVK_HOLE: f_root})


def inv_k(f: Circuit, k: int) -> Circuit:
    """Truncated inverse of a division-free circuit: f * inv_k(f) = 1 - (1-f)^(k+1)."""
    if not f.is_division_free():
        raise PassError("inv_k requires a division-free circuit")
    b = CircuitBuilder()
    remap = b.import_circuit(f)
    top = emit_inv_k(b, remap[f.output], k)
    return b.finish([top])


def _contains_var(f: Circuit, z: int):
    keep = f.reachable()
    has = [False] * f.size
    for i, node in enumerate(f.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind == VAR:
            has[i] = node[1] == z
        elif kind in (ADD, MUL):
            has[i] = has[node[1]] or has[node[2]]
        elif kind == INV:
            has[i] = has[node[1]]
    return has, keep


def _coef_case1(f: Circuit, k: int, z: int, b: CircuitBuilder):
    """Coefficient slots [v,0..k] for a circuit in which no division gate
    contains z.  Returns (slot table, copy map for z-free nodes)."""
    has_z, keep = _contains_var(f, z)
    zero = b.const(0)
    slot = {}
    copied = {}
    for i, node in enumerate(f.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if not has_z[i]:
            # whole z-free subcircuit is shared at slot 0
            if kind in (VAR, CONST):
                copied[i] = b._push(node)
            elif kind == INV:
                copied[i] = b.inv(copied[node[1]])
            else:
                copied[i] = b._push((kind, copied[node[1]], copied[node[2]]))
            slot[i] = [copied[i]] + [zero] * k
            continue
        if kind == VAR:  # the variable z itself
            row = [zero] * (k + 1)
            if k >= 1:
                row[1] = b.const(1)
            slot[i] = row
        elif kind == ADD:
            l, r = node[1], node[2]
            slot[i] = [b.add(slot[l][t], slot[r][t]) for t in range(k + 1)]
        elif kind == MUL:
            l, r = node[1], node[2]
            slot[i] = [b.add_tree([b.mul(slot[l][j], slot[r][t - j]) for j in range(t + 1)])
                       for t in range(k + 1)]
        else:
            raise PassError("coef: division gate with z in scope (normalize first)")
    return slot, copied


def coef(f: Circuit, k: int, z: int) -> Circuit:
    """Circuit computing the coefficient of z^k in f as a power series at z = 0.

    When z occurs under a division gate, wraps the Num/Den pair with a
    truncated geometric series around F0 = Den(f)(z/0); the result then
    contains exactly one division gate, the inverse of F0.
    """
    root = f.output
    has_z, keep = _contains_var(f, z)
    z_under_div = any(node[0] == INV and has_z[node[1]]
                      for i, node in enumerate(f.nodes) if keep[i])
    if not z_under_div:
        b = CircuitBuilder(var_count=f.var_count)
        slot, _ = _coef_case1(f, k, z, b)
        return b.finish([slot[root][k]])

    b = CircuitBuilder(var_count=f.var_count)
    num, den = _num_den_sweep(f, b)
    pool = b.finish([num[root], den[root]])
    zero_sub = CircuitBuilder(var_count=f.var_count)
    zero_circ = zero_sub.finish([zero_sub.const(0)])
    f0, _ = substitute(pool.with_outputs([den[root]]), {z: zero_circ})

    b2 = CircuitBuilder(var_count=f.var_count)
    m = b2.import_circuit(pool)
    mf0 = b2.import_circuit(f0)
    f0_inv = b2.inv(mf0[f0.output])
    g = b2.add(b2.const(1), b2.neg(b2.mul(f0_inv, m[den[root]])))
    series = b2.const(1)
    for i in range(1, k + 1):
        series = b2.add(series, b2.power(g, i))
    arg = b2.mul(m[num[root]], series)
    inner = b2.finish([arg])

    b3 = CircuitBuilder(var_count=f.var_count)
    slot, copied = _coef_case1(inner, k, z, b3)
    # F0^-1 is z-free, so its shared copy sits in `copied`
    top = b3.mul(copied[f0_inv], slot[arg][k])
    return b3.finish([top])


def build_taydet(n: int, base_layout: Optional[SymbolicMatrixLayout] = None) -> Circuit:
    """Coef_{z^n}(DetInv(I_n + z*M)): the determinant as a polynomial, with
    exactly one division gate.  M defaults to the full symbolic matrix; z is
    the variable with index base.var_count."""
    det, z = _det_identity_shift(n, base_layout)
    return coef(det, n, z)


def _det_identity_shift(n: int, base_layout: Optional[SymbolicMatrixLayout]):
    if base_layout is None:
        layout = identity_shift_layout(n)
        return build_det_inv(layout), layout.z_index
    shifted = _TaylorShift(base_layout)
    return build_det_inv(shifted), shifted.z_index


class _TaylorShift:
    """delta_ij + w * base_ij over an arbitrary base layout (duck-typed)."""

    def __init__(self, base: SymbolicMatrixLayout):
        self.base = base
        self.n = base.n
        self.shape = "taylorShift"
        self.var_count = base.var_count + 1
        self.z_index = base.var_count

    def emit(self, b: CircuitBuilder, i: int, j: int) -> int:
        wm = b.mul(b.var(self.z_index), self.base.emit(b, i, j))
        return b.add(b.const(1 if i == j else 0), wm)


def build_taydet_sharp(n: int, base_layout: Optional[SymbolicMatrixLayout] = None) -> Circuit:
    """Division-free Taydet: the subcircuit Den(DetInv(I+zM))(z/0) is replaced
    by the constant 1, leaving syntactic degree at most n."""
    det, z = _det_identity_shift(n, base_layout)
    root = det.output
    b = CircuitBuilder(var_count=det.var_count)
    num, den = _num_den_sweep(det, b)
    one_for_f0 = b.const(1)
    g = b.add(b.const(1), b.neg(b.mul(one_for_f0, den[root])))
    series = b.const(1)
    for i in range(1, n + 1):
        series = b.add(series, b.power(g, i))
    arg = b.mul(num[root], series)
    inner = b.finish([arg])

    b2 = CircuitBuilder(var_count=det.var_count)
    slot, _ = _coef_case1(inner, n, z, b2)
    top = b2.mul(b2.const(1), slot[arg][n])
    return b2.finish([top])


def build_char_poly(n: int) -> list:
    """Coefficient circuits of the characteristic polynomial det(zI - X).

    Entry i computes Coef_{z^i}(Taydet#(zI_n - X)) over the n^2 matrix
    variables; the z variable has index n*n."""
    from .detbuilder import pencil_layout

    lay = pencil_layout(n)
    sharp = build_taydet_sharp(n, lay)
    return [coef(sharp, i, lay.z_index) for i in range(n + 1)]


RULE_MUL_ZERO_LEFT = "mul-zero-left"
RULE_MUL_ZERO_RIGHT = "mul-zero-right"
RULE_ADD_ZERO_LEFT = "add-zero-left"
RULE_ADD_ZERO_RIGHT = "add-zero-right"
RULE_MUL_ONE_LEFT = "mul-one-left"
RULE_MUL_ONE_RIGHT = "mul-one-right"


@dataclass
class RewriteTrace:
    """Rewrites applied by simplify_zeros, in application order."""

    steps: list = field(default_factory=list)  # (original node id, rule tag)

    def append(self, node: int, rule: str):
        self.steps.append((node, rule))

    def __len__(self):
        return len(self.steps)


def simplify_zeros(f: Circuit):
    """Fixed point of 0*u->0, u*0->0, 0+u->u, u+0->u, 1*u->u, u*1->u.

    Rules fire on constant leaves only; Const-Const gates are never otherwise
    evaluated.  Returns (circuit, trace); the trace records (node, rule) pairs
    usable for proof generation.
    """
    keep = f.reachable()
    b = CircuitBuilder(var_count=f.var_count)
    trace = RewriteTrace()
    repl = {}

    def is_const(nid: int, value: int) -> bool:
        node = b.nodes[nid]
        return node[0] == CONST and node[1] == value

    for i, node in enumerate(f.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind in (VAR, CONST):
            repl[i] = b._push(node)
        elif kind == INV:
            repl[i] = b.inv(repl[node[1]])
        else:
            l, r = repl[node[1]], repl[node[2]]
            if kind == MUL:
                if is_const(l, 0):
                    trace.append(i, RULE_MUL_ZERO_LEFT)
                    repl[i] = l
                elif is_const(r, 0):
                    trace.append(i, RULE_MUL_ZERO_RIGHT)
                    repl[i] = r
                elif is_const(l, 1):
                    trace.append(i, RULE_MUL_ONE_LEFT)
                    repl[i] = r
                elif is_const(r, 1):
                    trace.append(i, RULE_MUL_ONE_RIGHT)
                    repl[i] = l
                else:
                    repl[i] = b.mul(l, r)
            else:
                if is_const(l, 0):
                    trace.append(i, RULE_ADD_ZERO_LEFT)
                    repl[i] = r
                elif is_const(r, 0):
                    trace.append(i, RULE_ADD_ZERO_RIGHT)
                    repl[i] = l
                else:
                    repl[i] = b.add(l, r)
    out = b.finish([repl[o] for o in f.outputs])
    # drop nodes orphaned by the rewrites
    b2 = CircuitBuilder(var_count=f.var_count)
    m = b2.import_circuit(out)
    return b2.finish([m[o] for o in out.outputs]), trace


def shift_vars(f: Circuit, rho: Mapping[int, int]):
    """The sigma shift r_i -> rho(r_i) - w_i with w_i a fresh variable.

    w_i gets the index f.var_count + i.  Only variables reachable from the
    outputs need a rho value.  Returns (shifted circuit, w index map).
    """
    keep = f.reachable()
    used = sorted({node[1] for i, node in enumerate(f.nodes) if keep[i] and node[0] == VAR})
    images = {}
    w_of = {}
    for j in used:
        if j not in rho:
            raise PassError(f"assignment is missing variable {j}")
        w = f.var_count + j
        w_of[j] = w
        ib = CircuitBuilder(var_count=w + 1)
        images[j] = ib.finish([ib.sub(ib.const(int(rho[j])), ib.var(w))])
    shifted, _ = substitute(f, images)
    return shifted, w_of


def _unshift_vars(f: Circuit, rho: Mapping[int, int], w_of: Mapping[int, int],
                  orig_var_count: int) -> Circuit:
    """Replace every (rho(j) - w_j) subtree by the original variable j."""
    back = {w: j for j, w in w_of.items()}
    keep = f.reachable()
    b = CircuitBuilder(var_count=f.var_count)
    repl = {}
    for i, node in enumerate(f.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind == ADD:
            l, r = f.nodes[node[1]], f.nodes[node[2]]
            if (l[0] == CONST and r[0] == MUL
                    and f.nodes[r[1]] == (CONST, -1) and f.nodes[r[2]][0] == VAR
                    and f.nodes[r[2]][1] in back
                    and l[1] == int(rho[back[f.nodes[r[2]][1]]])):
                repl[i] = b.var(back[f.nodes[r[2]][1]])
                continue
            repl[i] = b.add(repl[node[1]], repl[node[2]])
        elif kind == MUL:
            repl[i] = b.mul(repl[node[1]], repl[node[2]])
        elif kind == INV:
            repl[i] = b.inv(repl[node[1]])
        else:
            repl[i] = b._push(node)
    out = b.finish([repl[o] for o in f.outputs])
    b2 = CircuitBuilder()
    m = b2.import_circuit(out)  # the replaced shift trees become unreachable
    return b2.finish([m[o] for o in out.outputs], var_count=orig_var_count)


def eliminate_division(f: Circuit, rho: Mapping[int, int], k: int,
                       back_substitute: bool = True) -> Circuit:
    """Division elimination for a circuit with at most one division gate at top.

    Pipeline: shift every variable by rho (r -> rho(r) - w), replace the
    division gate H^-1 by Inv_k(H), then substitute the original variables
    back.  With back_substitute=False the result is left over the shift
    variables w_j = f.var_count + j.  Division-free input is returned
    unchanged.  The result agrees with f's rational function up to monomials
    of degree > k in the shifted variables, provided every division gate
    evaluates to 1 under rho.
    """
    keep = f.reachable()
    invs = [i for i, node in enumerate(f.nodes) if keep[i] and node[0] == INV]
    if not invs:
        return f
    if len(invs) > 1:
        raise PassError("eliminate_division requires at most one division gate (normalize first)")
    inv_id = invs[0]
    root_node = f.nodes[f.output]
    if not (root_node[0] == MUL and inv_id in (root_node[1], root_node[2])):
        raise PassError("the division gate must be a child of the root Mul (normalize first)")

    shifted, w_of = shift_vars(f, rho)
    keep = shifted.reachable()
    b = CircuitBuilder(var_count=shifted.var_count)
    repl = {}
    for i, node in enumerate(shifted.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind in (VAR, CONST):
            repl[i] = b._push(node)
        elif kind == INV:
            repl[i] = emit_inv_k(b, repl[node[1]], k)
        else:
            repl[i] = b._push((kind, repl[node[1]], repl[node[2]]))
    out = b.finish([repl[o] for o in shifted.outputs])
    if back_substitute:
        out = _unshift_vars(out, rho, w_of, f.var_count)
    return out
