"""Text file formats for matrices, assignments, polynomials, and traces.

Matrix: `matrix <rows> <cols>` then row-major signed decimal entries.
Assignment: `assign <count>` then `<var> <value>` records.
SparsePoly: `poly <nvars> <nterms>` then `<e_0 ... e_k> = <coeff>` records in
canonical exponent order.
RewriteTrace: `trace <n>` then `<step> <node> <rule>` records.
"""

from __future__ import annotations

from typing import Sequence

from .evaluate import SparsePoly
from .passes import RewriteTrace


def encode_matrix(m: Sequence[Sequence[int]]) -> str:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    out = [f"matrix {rows} {cols}"]
    for row in m:
        if len(row) != cols:
            raise ValueError("ragged matrix")
        out.append(" ".join(str(int(x)) for x in row))
    return "\n".join(out) + "\n"


def decode_matrix(text: str) -> list:
    rows = [r for r in text.splitlines() if r.strip()]
    head = rows[0].split()
    if head[:1] != ["matrix"] or len(head) != 3:
        raise ValueError("expected 'matrix <rows> <cols>' header")
    nr, nc = int(head[1]), int(head[2])
    if len(rows) != nr + 1:
        raise ValueError(f"expected {nr} rows")
    m = []
    for r in rows[1:]:
        vals = [int(x) for x in r.split()]
        if len(vals) != nc:
            raise ValueError(f"expected {nc} entries per row")
        m.append(vals)
    return m


def matrix_assignment(m: Sequence[Sequence[int]], base: int = 0) -> dict:
    """Row-major variable assignment x_{i,j} -> m[i][j]."""
    n = len(m)
    return {base + i * n + j: m[i][j] for i in range(n) for j in range(n)}


def encode_assignment(a: dict) -> str:
    out = [f"assign {len(a)}"]
    for j in sorted(a):
        out.append(f"{j} {int(a[j])}")
    return "\n".join(out) + "\n"


def decode_assignment(text: str) -> dict:
    rows = [r for r in text.splitlines() if r.strip()]
    head = rows[0].split()
    if head[:1] != ["assign"] or len(head) != 2:
        raise ValueError("expected 'assign <count>' header")
    n = int(head[1])
    if len(rows) != n + 1:
        raise ValueError(f"expected {n} records")
    out = {}
    for r in rows[1:]:
        j, v = r.split()
        out[int(j)] = int(v)
    return out


def encode_poly(p: SparsePoly) -> str:
    out = [f"poly {p.nvars} {len(p.terms)}"]
    for e in sorted(p.terms):
        out.append(" ".join(str(x) for x in e) + f" = {p.terms[e]}")
    return "\n".join(out) + "\n"


def decode_poly(text: str) -> SparsePoly:
    rows = [r for r in text.splitlines() if r.strip()]
    head = rows[0].split()
    if head[:1] != ["poly"] or len(head) != 3:
        raise ValueError("expected 'poly <nvars> <nterms>' header")
    nvars, nterms = int(head[1]), int(head[2])
    if len(rows) != nterms + 1:
        raise ValueError(f"expected {nterms} records")
    terms = {}
    for r in rows[1:]:
        left, right = r.split("=")
        e = tuple(int(x) for x in left.split())
        if len(e) != nvars:
            raise ValueError("wrong exponent vector length")
        terms[e] = int(right)
    return SparsePoly(nvars, terms)


def encode_trace(t: RewriteTrace) -> str:
    out = [f"trace {len(t.steps)}"]
    for step, (node, rule) in enumerate(t.steps):
        out.append(f"{step} {node} {rule}")
    return "\n".join(out) + "\n"
