"""Determinant and matrix-inverse circuits with division gates.

The inverse circuit follows the block (Schur complement) recursion: writing
X = [[X1, v1^t], [v2, x_nn]], the level-d construction reuses the level-(d-1)
inverse entries as shared inputs and introduces one division gate per level,
the inverse of d(X) = x_nn - v2 X1^-1 v1^t.  The determinant with division is
the product of the d(X[k]) Schur complements.

Matrix entries come from a layout, so the same recursion serves the plain
symbolic matrix, a lower-triangular matrix, the identity-plus-z*X shift used
for Taylor extraction, a product-of-two-matrices leaf layer, and the z*I - X
pencil used for characteristic polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .circuit import Circuit, CircuitBuilder, CircuitError

FULL = "full"
LOWER_TRIANGULAR = "lowerTriangular"
IDENTITY_SHIFT = "identityShift"
PRODUCT = "product"
PENCIL = "pencil"


@dataclass(frozen=True)
class SymbolicMatrixLayout:
    """Maps matrix positions to leaf subcircuits.

    shape 'full': entry (i,j) is the variable with index i*n+j.
    shape 'lowerTriangular': entries above the diagonal are Const 0.
    shape 'identityShift': entry is delta_ij + z*x_ij with z a dedicated
        variable; every scalar leaf is a child of a plus gate whose other
        child contains a variable, which keeps degubPrime bounds aligned
        with degub downstream.
    shape 'product': entry is the inner product sum_k x_ik*y_kj.
    shape 'pencil': entry is z*delta_ij - x_ij (for zI - X).
    """

    n: int
    shape: str
    var_count: int
    z_index: Optional[int] = None

    def x_var(self, i: int, j: int) -> int:
        return i * self.n + j

    def y_var(self, i: int, j: int) -> int:
        return self.n * self.n + i * self.n + j

    def emit(self, b: CircuitBuilder, i: int, j: int) -> int:
        n = self.n
        if self.shape == FULL:
            return b.var(self.x_var(i, j))
        if self.shape == LOWER_TRIANGULAR:
            return b.var(self.x_var(i, j)) if i >= j else b.const(0)
        if self.shape == IDENTITY_SHIFT:
            zx = b.mul(b.var(self.z_index), b.var(self.x_var(i, j)))
            return b.add(b.const(1 if i == j else 0), zx)
        if self.shape == PRODUCT:
            terms = [b.mul(b.var(self.x_var(i, k)), b.var(self.y_var(k, j))) for k in range(n)]
            return b.add_tree(terms)
        if self.shape == PENCIL:
            zd = b.mul(b.var(self.z_index), b.const(1 if i == j else 0))
            return b.add(zd, b.neg(b.var(self.x_var(i, j))))
        raise CircuitError(f"unknown layout shape {self.shape!r}")


def full_layout(n: int) -> SymbolicMatrixLayout:
    return SymbolicMatrixLayout(n, FULL, n * n)


def triangular_layout(n: int) -> SymbolicMatrixLayout:
    return SymbolicMatrixLayout(n, LOWER_TRIANGULAR, n * n)


def identity_shift_layout(n: int) -> SymbolicMatrixLayout:
    """Leaves delta_ij + z*x_ij; z gets the index n*n."""
    return SymbolicMatrixLayout(n, IDENTITY_SHIFT, n * n + 1, z_index=n * n)


def product_layout(n: int) -> SymbolicMatrixLayout:
    return SymbolicMatrixLayout(n, PRODUCT, 2 * n * n)


def pencil_layout(n: int) -> SymbolicMatrixLayout:
    """Leaves z*delta_ij - x_ij; z gets the index n*n."""
    return SymbolicMatrixLayout(n, PENCIL, n * n + 1, z_index=n * n)


class _LeafCache:
    def __init__(self, b: CircuitBuilder, layout: SymbolicMatrixLayout):
        self.b = b
        self.layout = layout
        self.memo = {}

    def __call__(self, i: int, j: int) -> int:
        key = (i, j)
        if key not in self.memo:
            self.memo[key] = self.layout.emit(self.b, i, j)
        return self.memo[key]


def _inner_product(b: CircuitBuilder, xs, ys) -> int:
    return b.add_tree([b.mul(x, y) for x, y in zip(xs, ys)])


def _emit_levels(b: CircuitBuilder, leaf: _LeafCache, n: int, blocks_up_to: int):
    """Iterative level-by-level construction d = 1..n.

    Returns (inv_blocks, deltas): inv_blocks[d] is the d x d node matrix of
    X[d]^-1 for d <= blocks_up_to, deltas[d] the Schur complement node for
    d >= 2; deltas[1] is the (1,1) leaf itself.
    """
    inv_blocks = {}
    deltas = {1: leaf(0, 0)}
    if blocks_up_to >= 1:
        inv_blocks[1] = [[b.inv(leaf(0, 0))]]
    for d in range(2, n + 1):
        s = inv_blocks[d - 1]
        k = d - 1
        v1 = [leaf(i, d - 1) for i in range(k)]
        v2 = [leaf(d - 1, j) for j in range(k)]
        # w = X1^-1 v1^t, u = v2 X1^-1, reusing the shared level d-1 entries
        w = [_inner_product(b, s[i], v1) for i in range(k)]
        q = _inner_product(b, v2, w)
        delta = b.sub(leaf(d - 1, d - 1), q)
        deltas[d] = delta
        if d > blocks_up_to:
            continue
        u = [_inner_product(b, v2, [s[i][j] for i in range(k)]) for j in range(k)]
        dinv = b.inv(delta)
        blk = [[None] * d for _ in range(d)]
        for i in range(k):
            for j in range(k):
                blk[i][j] = b.add(s[i][j], b.mul(dinv, b.mul(w[i], u[j])))
        for i in range(k):
            blk[i][d - 1] = b.neg(b.mul(dinv, w[i]))
        for j in range(k):
            blk[d - 1][j] = b.neg(b.mul(dinv, u[j]))
        blk[d - 1][d - 1] = dinv
        inv_blocks[d] = blk
    return inv_blocks, deltas


def build_inverse(n: int, layout: Optional[SymbolicMatrixLayout] = None) -> Circuit:
    """Circuit with n*n outputs computing X^-1 (row-major)."""
    if n < 1:
        raise CircuitError("invalid dimension")
    layout = layout or full_layout(n)
    b = CircuitBuilder(var_count=layout.var_count)
    leaf = _LeafCache(b, layout)
    inv_blocks, _ = _emit_levels(b, leaf, n, blocks_up_to=n)
    blk = inv_blocks[n]
    return b.finish([blk[i][j] for i in range(n) for j in range(n)])


def build_det_inv(layout: SymbolicMatrixLayout) -> Circuit:
    """Single-output determinant circuit with division gates over the layout."""
    n = layout.n
    if n < 1:
        raise CircuitError("invalid dimension")
    b = CircuitBuilder(var_count=layout.var_count)
    leaf = _LeafCache(b, layout)
    _, deltas = _emit_levels(b, leaf, n, blocks_up_to=n - 1)
    det = deltas[1]
    for d in range(2, n + 1):
        det = b.mul(det, deltas[d])
    return b.finish([det])


def build_product_layout(n: int) -> Circuit:
    """n*n single-output inner products sum_k x_ik*y_kj as a multi-output circuit.

    The same leaf layer drives build_det_inv(product_layout(n)).
    """
    if n < 1:
        raise CircuitError("invalid dimension")
    layout = product_layout(n)
    b = CircuitBuilder(var_count=layout.var_count)
    leaf = _LeafCache(b, layout)
    return b.finish([leaf(i, j) for i in range(n) for j in range(n)])


def division_gate_arguments(c: Circuit) -> list:
    """Node ids of the arguments of all reachable division gates."""
    keep = c.reachable()
    return [node[1] for i, node in enumerate(c.nodes) if keep[i] and node[0] == "inv"]
