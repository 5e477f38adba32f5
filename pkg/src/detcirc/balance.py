"""Depth reduction of syntactic-homogeneous circuits.

The construction introduces a node [F_v] for every input node v and a node
[dw f_v] for node pairs with 2*degubPrime(w) > degubPrime(v), then ties them
together scale by scale: products crossing a degree threshold m form the
frontier B_m, and

    [F_v]    = sum over t in B_m(F_v) of [dt f_v] * [F_t1] * [F_t2]
    [dw f_v] = sum over t in B_m(F_v) of [dt f_v] * [dw f_t1] * [F_t2]

with m = 2^i (resp. 2^i + degubPrime(w)) chosen from the degree (resp. degree
gap) scale.  Base cases with degree (gap) at most 1 are linear polynomials
whose coefficients are path counts in the DAG.  Output depth is
O(log s * log d + log^2 d) and size poly(s, d).

Nodes are emitted on demand from the root; `balance_full` additionally
materializes the complete node maps of the parallel construction for
inspection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .circuit import (ADD, CONST, DEGREE_CAP, INV, MUL, VAR, Circuit,
                      CircuitBuilder, CircuitError, DegreeAnnotation)
from .homogenize import HomogeneousDecomposition, homogenize
from .passes import simplify_zeros


class BalanceError(CircuitError):
    pass


class LinearFormOverflow(BalanceError):
    def __init__(self, node: int):
        super().__init__(f"path count at node {node} saturated the cap; "
                         "exact counts are required for linear forms")


def reachability(f: Circuit) -> list:
    """Closure table as bitmasks: bit w of table[v] is set iff w is in F_v.

    Every node reaches itself.  Matches nonzero-ness of powers of the
    adjacency-plus-identity matrix.
    """
    masks = [0] * f.size
    for i, node in enumerate(f.nodes):
        m = 1 << i
        kind = node[0]
        if kind in (ADD, MUL):
            m |= masks[node[1]] | masks[node[2]]
        elif kind == INV:
            m |= masks[node[1]]
        masks[i] = m
    return masks


def reaches(table: list, w: int, v: int) -> bool:
    return bool((table[v] >> w) & 1)


def exact_degub_prime(f: Circuit) -> DegreeAnnotation:
    """Exact degubPrime values (constants count as degree 1), saturating."""
    deg = {}
    overflow = False
    for i, node in enumerate(f.nodes):
        kind = node[0]
        if kind in (VAR, CONST):
            deg[i] = 1
        elif kind == ADD:
            deg[i] = max(deg[node[1]], deg[node[2]])
        elif kind == MUL:
            d = deg[node[1]] + deg[node[2]]
            if d > DEGREE_CAP:
                d, overflow = DEGREE_CAP, True
            deg[i] = d
        else:
            raise BalanceError("balancing requires division-free circuits")
    return DegreeAnnotation("degubPrime", deg, overflow)


def _path_counts(f: Circuit, v: int):
    """Number of directed paths from v to each leaf, saturating at the cap."""
    counts = {v: 1}
    order = sorted(_descendants(f, v), reverse=True)
    leaves = {}
    for u in order:
        c = counts.get(u, 0)
        if not c:
            continue
        node = f.nodes[u]
        kind = node[0]
        if kind in (VAR, CONST):
            leaves[u] = c
        elif kind == ADD:
            for ch in (node[1], node[2]):
                s = counts.get(ch, 0) + c
                counts[ch] = min(s, DEGREE_CAP + 1)
            if counts[node[1]] > DEGREE_CAP or counts[node[2]] > DEGREE_CAP:
                raise LinearFormOverflow(u)
        elif kind == MUL:
            raise BalanceError(f"linear form requires a Mul-free subcircuit (node {u})")
        else:
            raise BalanceError("linear form requires a division-free, Mul-free subcircuit")
    return leaves


def _descendants(f: Circuit, v: int) -> set:
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        node = f.nodes[u]
        if node[0] in (ADD, MUL):
            for ch in (node[1], node[2]):
                if ch not in seen:
                    seen.add(ch)
                    stack.append(ch)
        elif node[0] == INV and node[1] not in seen:
            seen.add(node[1])
            stack.append(node[1])
    return seen


def _leaf_coeffs(f: Circuit, leaves: dict):
    var_coeffs = {}
    const_coeffs = {}
    for u, c in leaves.items():
        node = f.nodes[u]
        if node[0] == VAR:
            var_coeffs[node[1]] = var_coeffs.get(node[1], 0) + c
        else:
            const_coeffs[node[1]] = const_coeffs.get(node[1], 0) + c
    return var_coeffs, const_coeffs


def _emit_linear(b: CircuitBuilder, var_coeffs: dict, const_coeffs: dict) -> int:
    terms = []
    for j in sorted(var_coeffs):
        if var_coeffs[j]:
            terms.append(b.mul(b.const(var_coeffs[j]), b.var(j)))
    for val in sorted(const_coeffs):
        if const_coeffs[val]:
            terms.append(b.mul(b.const(const_coeffs[val]), b.const(val)))
    return b.add_tree(terms)


@dataclass
class LinearForm:
    var_coeffs: dict
    const_coeffs: dict
    circuit: Circuit


def linear_form(f: Circuit, v: int) -> LinearForm:
    """Coefficients of the linear polynomial computed by a Mul-free subcircuit.

    Coefficients are v-to-leaf path counts; constant leaves contribute per
    distinct value.  Also returns the canonical shallow circuit.
    """
    leaves = _path_counts(f, v)
    var_coeffs, const_coeffs = _leaf_coeffs(f, leaves)
    b = CircuitBuilder(var_count=f.var_count)
    root = _emit_linear(b, var_coeffs, const_coeffs)
    return LinearForm(var_coeffs, const_coeffs, b.finish([root]))


def frontier(f: Circuit, v: int, m: int, annotation: Optional[DegreeAnnotation] = None) -> set:
    """B_m(F_v): product gates t = t1*t2 in F_v with degubPrime(t) > m and
    both children's bounds at most m."""
    ann = (annotation or exact_degub_prime(f)).degree
    out = set()
    for t in _descendants(f, v):
        node = f.nodes[t]
        if node[0] == MUL and ann[t] > m and ann[node[1]] <= m and ann[node[2]] <= m:
            out.add(t)
    return out


def _partial_coeffs(f: Circuit, ann: dict, desc: list, w: int, v: int):
    """Linear coefficients of dw f_v for 0 <= degubPrime gap <= 1.

    Derivative paths cross at most one product gate; a path contributes the
    linear form of that product's low-degree side, with path-count
    multiplicity, or the constant 1 if it crosses none.
    """
    var_coeffs = {}
    const_coeffs = {}
    sub = [u for u in _descendants(f, v) if reaches(desc, w, u)]
    dp = {v: 1}
    mul_hits = []
    for u in sorted(sub, reverse=True):
        c = dp.get(u, 0)
        if not c or u == w:
            continue
        node = f.nodes[u]
        if node[0] == ADD:
            for ch in (node[1], node[2]):
                if reaches(desc, w, ch):
                    dp[ch] = dp.get(ch, 0) + c
        elif node[0] == MUL:
            mul_hits.append((u, c))
    const_coeffs[1] = dp.get(w, 0)
    for u, c in mul_hits:
        node = f.nodes[u]
        l, r = node[1], node[2]
        t1, t2 = (l, r) if ann[l] >= ann[r] else (r, l)
        if not reaches(desc, w, t1):
            continue  # derivative descends into the high side only
        inner = _add_only_paths(f, ann, desc, t1, w)
        if inner == 0:
            continue
        leaves = _path_counts(f, t2)
        vc, cc = _leaf_coeffs(f, leaves)
        for j, a in vc.items():
            var_coeffs[j] = var_coeffs.get(j, 0) + c * inner * a
        for val, a in cc.items():
            const_coeffs[val] = const_coeffs.get(val, 0) + c * inner * a
    if not const_coeffs.get(1, 0):
        const_coeffs.pop(1, None)
    return var_coeffs, const_coeffs


def _add_only_paths(f: Circuit, ann: dict, desc: list, start: int, w: int) -> int:
    """Count derivative paths start -> w that cross no further product gate."""
    if start == w:
        return 1
    dp = {start: 1}
    total = 0
    order = sorted((u for u in _descendants(f, start) if reaches(desc, w, u)), reverse=True)
    for u in order:
        c = dp.get(u, 0)
        if not c:
            continue
        if u == w:
            total += c
            continue
        node = f.nodes[u]
        if node[0] == ADD:
            for ch in (node[1], node[2]):
                if reaches(desc, w, ch):
                    dp[ch] = dp.get(ch, 0) + c
        elif node[0] == MUL:
            l, r = node[1], node[2]
            high = l if ann[l] >= ann[r] else r
            if reaches(desc, w, high):
                raise BalanceError(f"two product gates on a derivative path (node {u})")
            # w only under the low-degree side: the derivative through here is 0
    return total


def partial_linear(f: Circuit, w: int, v: int,
                   annotation: Optional[DegreeAnnotation] = None) -> Circuit:
    """O(log)-depth circuit for the linear polynomial dw f_v.

    Preconditions: w in F_v and 0 <= degubPrime(v) - degubPrime(w) <= 1
    (w = v and w outside F_v return Const 1 and Const 0 respectively).
    """
    desc = reachability(f)
    b = CircuitBuilder(var_count=f.var_count)
    if w == v:
        return b.finish([b.const(1)])
    if not reaches(desc, w, v):
        return b.finish([b.const(0)])
    ann = (annotation or exact_degub_prime(f)).degree
    gap = ann[v] - ann[w]
    if not (0 <= gap <= 1):
        raise BalanceError(f"partial_linear needs 0 <= degubPrime gap <= 1, got {gap}")
    vc, cc = _partial_coeffs(f, ann, desc, w, v)
    return b.finish([_emit_linear(b, vc, cc)])


@dataclass
class BalanceContext:
    """Materialized node maps of the full parallel construction."""

    input: Circuit
    annotation: DegreeAnnotation
    reach: list
    fv_node: dict = field(default_factory=dict)
    dwfv_node: dict = field(default_factory=dict)
    stages: dict = field(default_factory=dict)
    output: Optional[Circuit] = None


class _Balancer:
    def __init__(self, f: Circuit, ann: DegreeAnnotation):
        if len(f.outputs) != 1:
            raise BalanceError("balance expects a single-output circuit")
        if not f.is_division_free():
            raise BalanceError("balance requires a division-free circuit")
        for i in range(f.size):
            if i not in ann.degree:
                raise BalanceError(f"node {i} is not annotated")
        self.c, self.ann = _strip_declared_zeros(f, ann.degree)
        self._validate()
        self.desc = reachability(self.c)
        self.out = CircuitBuilder(var_count=self.c.var_count)
        self.zero = self.out.const(0)
        self.Fv = {}
        self.Dwv = {}
        self._frontier_memo = {}
        self._products = sorted(
            (i for i, nd in enumerate(self.c.nodes) if nd[0] == MUL),
            key=lambda i: -self.ann[i])

    def _validate(self):
        c, ann = self.c, self.ann
        self.boundary = set()
        for i, node in enumerate(c.nodes):
            kind = node[0]
            if kind == VAR:
                if ann[i] != 1:
                    raise BalanceError(f"variable node {i} must carry bound 1")
            elif kind == CONST:
                if ann[i] != 1 and node[1] != 0:
                    raise BalanceError(f"constant node {i} must carry bound 1 or be zero")
            elif kind == MUL:
                if ann[i] != ann[node[1]] + ann[node[2]]:
                    raise BalanceError(f"product node {i}: bound must add up")
            else:
                # component-combining sums sit above the homogeneous parts;
                # they and all their ancestors are balanced summand-wise
                if (not (ann[node[1]] == ann[node[2]] == ann[i])
                        or node[1] in self.boundary or node[2] in self.boundary):
                    self.boundary.add(i)
        for i, node in enumerate(c.nodes):
            if node[0] == MUL and (node[1] in self.boundary or node[2] in self.boundary):
                raise BalanceError("non-homogeneous sum below a product gate")

    def frontier_of(self, v: int, m: int):
        key = (v, m)
        got = self._frontier_memo.get(key)
        if got is None:
            ann, nodes, mask = self.ann, self.c.nodes, self.desc[v]
            got = []
            for t in self._products:
                if ann[t] <= m:
                    break
                node = nodes[t]
                if (mask >> t) & 1 and ann[node[1]] <= m and ann[node[2]] <= m:
                    got.append(t)
            got = tuple(got)
            self._frontier_memo[key] = got
        return got

    def _split(self, t: int):
        node = self.c.nodes[t]
        l, r = node[1], node[2]
        return (l, r) if self.ann[l] >= self.ann[r] else (r, l)

    @staticmethod
    def _scale(x: int) -> int:
        # m = 2^i with 2^i < x <= 2^(i+1)
        return 1 << ((x - 1).bit_length() - 1)

    def _deps_F(self, v: int):
        node = self.c.nodes[v]
        if node[0] in (VAR, CONST):
            return []
        if v in self.boundary or self.ann[v] <= 1:
            if v in self.boundary:
                return [("F", node[1]), ("F", node[2])]
            return []
        deps = []
        for t in self.frontier_of(v, self._scale(self.ann[v])):
            t1, t2 = self._split(t)
            deps.append(("D", t, v))
            deps.append(("F", t1))
            deps.append(("F", t2))
        return deps

    def _deps_D(self, w: int, v: int):
        if w == v or not reaches(self.desc, w, v):
            return []
        gap = self.ann[v] - self.ann[w]
        if gap <= 1:
            return []
        m = self._scale(gap) + self.ann[w]
        deps = []
        for t in self.frontier_of(v, m):
            t1, t2 = self._split(t)
            deps.append(("D", t, v))
            if reaches(self.desc, w, t1):
                deps.append(("D", w, t1))
                deps.append(("F", t2))
        return deps

    def _emit_F(self, v: int):
        node = self.c.nodes[v]
        kind = node[0]
        b = self.out
        if kind == CONST:
            self.Fv[v] = self.zero if node[1] == 0 else b.const(node[1])
        elif kind == VAR:
            self.Fv[v] = b.mul(b.const(1), b.var(node[1]))
        elif v in self.boundary:
            self.Fv[v] = b.add(self.Fv[node[1]], self.Fv[node[2]])
        elif self.ann[v] <= 1:
            leaves = _path_counts(self.c, v)
            vc, cc = _leaf_coeffs(self.c, leaves)
            self.Fv[v] = _emit_linear(b, vc, cc)
        else:
            terms = []
            for t in self.frontier_of(v, self._scale(self.ann[v])):
                t1, t2 = self._split(t)
                terms.append(b.mul(b.mul(self.Dwv[(t, v)], self.Fv[t1]), self.Fv[t2]))
            self.Fv[v] = b.add_tree(terms) if terms else self.zero

    def _emit_D(self, w: int, v: int):
        b = self.out
        if w == v:
            self.Dwv[(w, v)] = b.const(1)
            return
        if not reaches(self.desc, w, v):
            self.Dwv[(w, v)] = self.zero
            return
        gap = self.ann[v] - self.ann[w]
        if gap <= 1:
            vc, cc = _partial_coeffs(self.c, self.ann, self.desc, w, v)
            self.Dwv[(w, v)] = _emit_linear(b, vc, cc)
            return
        m = self._scale(gap) + self.ann[w]
        terms = []
        for t in self.frontier_of(v, m):
            t1, t2 = self._split(t)
            if not reaches(self.desc, w, t1):
                continue  # [dw f_t1] is 0, the term vanishes
            terms.append(b.mul(b.mul(self.Dwv[(t, v)], self.Dwv[(w, t1)]), self.Fv[t2]))
        self.Dwv[(w, v)] = b.add_tree(terms) if terms else self.zero

    def _done(self, task) -> bool:
        if task[0] == "F":
            return task[1] in self.Fv
        return (task[1], task[2]) in self.Dwv

    def run(self, tasks):
        stack = list(tasks)
        while stack:
            task = stack[-1]
            if self._done(task):
                stack.pop()
                continue
            deps = self._deps_F(task[1]) if task[0] == "F" else self._deps_D(task[1], task[2])
            missing = [t for t in deps if not self._done(t)]
            if missing:
                stack.extend(missing)
                continue
            if task[0] == "F":
                self._emit_F(task[1])
            else:
                self._emit_D(task[1], task[2])
            stack.pop()

    def result(self) -> Circuit:
        root = self.c.output
        out = self.out.finish([self.Fv[root]])
        b = CircuitBuilder(var_count=self.c.var_count)
        m = b.import_circuit(out)
        return b.finish([m[out.output]])


def _strip_declared_zeros(f: Circuit, ann: dict):
    """Remove declared-zero constant slots (0*u -> 0, 0+u -> u), keeping the
    remaining nodes' bounds.  Zero results inherit the rewritten node's bound."""
    keep = f.reachable()
    b = CircuitBuilder(var_count=f.var_count)
    repl = {}
    ann2 = {}

    def is_zero(nid: int) -> bool:
        node = b.nodes[nid]
        return node[0] == CONST and node[1] == 0

    def zero_with(bound: int) -> int:
        nid = b.const(0)
        ann2[nid] = bound
        return nid

    for i, node in enumerate(f.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind in (VAR, CONST):
            repl[i] = b._push(node)
            ann2[repl[i]] = ann[i]
        elif kind == MUL:
            l, r = repl[node[1]], repl[node[2]]
            repl[i] = zero_with(ann[i]) if (is_zero(l) or is_zero(r)) else b.mul(l, r)
            ann2.setdefault(repl[i], ann[i])
        elif kind == ADD:
            l, r = repl[node[1]], repl[node[2]]
            if is_zero(l):
                repl[i] = r
            elif is_zero(r):
                repl[i] = l
            else:
                repl[i] = b.add(l, r)
                ann2[repl[i]] = ann[i]
        else:
            raise BalanceError("balance requires a division-free circuit")
    out = b.finish([repl[o] for o in f.outputs])
    b2 = CircuitBuilder(var_count=f.var_count)
    m = b2.import_circuit(out)
    final = b2.finish([m[o] for o in out.outputs])
    ann3 = {m[nid]: ann2[nid] for nid in m}
    # collapsed zero branches may have carried the max of an add; recompute
    # the internal bounds from the (declared) leaf bounds
    for i, node in enumerate(final.nodes):
        if node[0] == ADD:
            ann3[i] = max(ann3[node[1]], ann3[node[2]])
        elif node[0] == MUL:
            ann3[i] = ann3[node[1]] + ann3[node[2]]
    return final, ann3


def balance(f: Circuit, annotation: Optional[DegreeAnnotation] = None) -> Circuit:
    """Balanced division-free circuit computing the same polynomial.

    The input must be a sum of syntactic-homogeneous circuits with a
    degubPrime annotation (computed bottom-up when omitted, which requires the
    input to already be homogeneous up to component-combining top sums)."""
    ann = annotation or exact_degub_prime(f)
    bal = _Balancer(f, ann)
    bal.run([("F", bal.c.output)])
    return bal.result()


def balance_full(f: Circuit, annotation: Optional[DegreeAnnotation] = None) -> BalanceContext:
    """Like balance, but materializes [F_v] for every node and [dw f_v] for
    every pair with 2*degubPrime(w) > degubPrime(v), as in the parallel
    construction; returns the full context for inspection."""
    ann = annotation or exact_degub_prime(f)
    bal = _Balancer(f, ann)
    tasks = [("F", v) for v in range(bal.c.size)]
    for v in range(bal.c.size):
        for w in range(bal.c.size):
            if 2 * bal.ann[w] > bal.ann[v]:
                tasks.append(("D", w, v))
    bal.run(tasks)
    ctx = BalanceContext(bal.c, DegreeAnnotation("degubPrime", bal.ann), bal.desc,
                         dict(bal.Fv), dict(bal.Dwv))
    for v in range(bal.c.size):
        d = bal.ann[v]
        stage = 0 if d <= 1 else (d - 1).bit_length()
        ctx.stages.setdefault(stage, []).append(v)
    ctx.output = bal.result()
    return ctx


def build_taydet_sharp_prime(n: int, base_layout=None):
    """Taydet# with the zero slots and 1-chains collapsed, plus its exact
    degubPrime annotation; all bounds are O(n) and the circuit is ready for
    balancing.  Returns (circuit, annotation)."""
    from .passes import build_taydet_sharp

    sharp = build_taydet_sharp(n, base_layout)
    simp, _ = simplify_zeros(sharp)
    ann = exact_degub_prime(simp)
    return simp, ann


def build_det_balanced(n: int, base_layout=None) -> Circuit:
    """balance(homogenize(Taydet#')): the O(log^2)-depth determinant circuit.

    Taydet#' carries degubPrime bounds O(n) but is homogeneous only in the
    degub sense, so the degubPrime homogenizer runs for real before balancing.
    """
    c, ann = build_taydet_sharp_prime(n, base_layout)
    dec = homogenize(c, ann.degree[c.output], constants_as_degree_one=True)
    return balance_decomposition(dec)


def balance_outputs(c: Circuit, annotation: DegreeAnnotation) -> Circuit:
    """Balance the sum over a multi-output circuit's outputs (the component
    sum of a decomposition)."""
    if len(c.outputs) == 1:
        return balance(c, annotation)
    b = CircuitBuilder(var_count=c.var_count)
    remap = b.import_circuit(c)
    ann = {remap[i]: annotation.degree[i] for i in remap}
    roots = [remap[o] for o in c.outputs]
    first = len(b.nodes)
    top = b.add_tree(roots)
    for nid in range(first, len(b.nodes)):
        ann[nid] = max(ann[r] for r in roots)
    summed = b.finish([top])
    return balance(summed, DegreeAnnotation(annotation.mode, ann))


def balance_decomposition(dec: HomogeneousDecomposition) -> Circuit:
    """Balance the sum of a decomposition's components."""
    return balance_outputs(dec.circuit, dec.annotation)
