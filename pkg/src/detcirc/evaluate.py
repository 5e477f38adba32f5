"""Exact evaluation and brute-force oracles.

Everything here is arbitrary-precision and exact: rational DAG evaluation,
sparse multivariate polynomial expansion, the Bareiss determinant, matrix
powering, and a Faddeev-LeVerrier characteristic polynomial.  These are the
independent reference implementations that the circuit constructions and
passes are tested against; none of them look at circuit structure beyond
plain bottom-up evaluation.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Sequence

from .circuit import ADD, CONST, MUL, VAR, Circuit, exact_degrees

# Random sampling range for probabilistic identity checks; with degree-d
# circuits the per-trial failure bound is d / (2 * 2**31 + 1).
SAMPLE_RANGE = 2**31


class DivisionByZero(ArithmeticError):
    def __init__(self, node: int):
        super().__init__(f"division gate at node {node} evaluates to zero")
        self.node = node


class InvNotAllowed(ValueError):
    def __init__(self, node: int):
        super().__init__(f"integer evaluation requires a division-free circuit (inv at node {node})")
        self.node = node


class TermCapExceeded(RuntimeError):
    def __init__(self, node: int, terms: int, cap: int):
        super().__init__(f"expansion aborted at node {node}: {terms} terms exceeds cap {cap}")
        self.node = node


def _as_assignment(a, var_count: int) -> dict:
    values = dict(a)
    for j in range(var_count):
        if j not in values:
            raise ValueError(f"assignment is missing variable {j}")
    return values


def eval_rat(c: Circuit, a) -> list:
    """Exact rational value per output; raises DivisionByZero naming the node."""
    values = _as_assignment(a, c.var_count)
    keep = c.reachable()
    val: list = [None] * c.size
    for i, node in enumerate(c.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind == VAR:
            val[i] = Fraction(values[node[1]])
        elif kind == CONST:
            val[i] = Fraction(node[1])
        elif kind == ADD:
            val[i] = val[node[1]] + val[node[2]]
        elif kind == MUL:
            val[i] = val[node[1]] * val[node[2]]
        else:
            if val[node[1]] == 0:
                raise DivisionByZero(i)
            val[i] = 1 / val[node[1]]
    return [val[o] for o in c.outputs]


def eval_int(c: Circuit, a) -> list:
    """Exact integer value per output; the circuit must be division-free."""
    values = _as_assignment(a, c.var_count)
    keep = c.reachable()
    val: list = [None] * c.size
    for i, node in enumerate(c.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind == VAR:
            val[i] = int(values[node[1]])
        elif kind == CONST:
            val[i] = node[1]
        elif kind == ADD:
            val[i] = val[node[1]] + val[node[2]]
        elif kind == MUL:
            val[i] = val[node[1]] * val[node[2]]
        else:
            raise InvNotAllowed(i)
    return [val[o] for o in c.outputs]


class SparsePoly:
    """Multivariate polynomial: map from exponent tuple to integer coefficient.

    Exponent tuples all have length nvars; zero coefficients are never stored.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[dict] = None):
        self.nvars = nvars
        self.terms = terms if terms is not None else {}

    @classmethod
    def const(cls, nvars: int, v: int) -> "SparsePoly":
        return cls(nvars, {(0,) * nvars: int(v)} if v else {})

    @classmethod
    def variable(cls, nvars: int, j: int) -> "SparsePoly":
        e = [0] * nvars
        e[j] = 1
        return cls(nvars, {tuple(e): 1})

    def __eq__(self, other) -> bool:
        return isinstance(other, SparsePoly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        out = dict(self.terms)
        for e, coef in other.terms.items():
            s = out.get(e, 0) + coef
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return SparsePoly(self.nvars, out)

    def __neg__(self) -> "SparsePoly":
        return SparsePoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def __mul__(self, other: "SparsePoly") -> "SparsePoly":
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return SparsePoly(self.nvars, out)

    def scale(self, k: int) -> "SparsePoly":
        if k == 0:
            return SparsePoly(self.nvars)
        return SparsePoly(self.nvars, {e: k * c for e, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def homogeneous_part(self, k: int) -> "SparsePoly":
        return SparsePoly(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == k})

    def coefficient_in(self, j: int, k: int) -> "SparsePoly":
        """Coefficient of x_j^k, as a polynomial with x_j zeroed out."""
        out = {}
        for e, c in self.terms.items():
            if e[j] == k:
                e2 = list(e)
                e2[j] = 0
                out[tuple(e2)] = c
        return SparsePoly(self.nvars, out)

    def substitute(self, j: int, image: "SparsePoly") -> "SparsePoly":
        """Exact composition x_j := image."""
        result = SparsePoly(self.nvars)
        powers = [SparsePoly.const(self.nvars, 1)]
        for e, c in self.terms.items():
            k = e[j]
            while len(powers) <= k:
                powers.append(powers[-1] * image)
            e2 = list(e)
            e2[j] = 0
            result = result + (SparsePoly(self.nvars, {tuple(e2): c}) * powers[k])
        return result

    def evaluate(self, values: Sequence[int]) -> int:
        total = 0
        for e, c in self.terms.items():
            term = c
            for j, exp in enumerate(e):
                if exp:
                    term *= values[j] ** exp
            total += term
        return total


def expand(c: Circuit, term_cap: int = 200_000, nvars: Optional[int] = None) -> list:
    """Exact polynomial per output; aborts cleanly when any intermediate
    polynomial holds more than term_cap monomials."""
    nv = c.var_count if nvars is None else nvars
    keep = c.reachable()
    val: list = [None] * c.size
    for i, node in enumerate(c.nodes):
        if not keep[i]:
            continue
        kind = node[0]
        if kind == VAR:
            val[i] = SparsePoly.variable(nv, node[1])
        elif kind == CONST:
            val[i] = SparsePoly.const(nv, node[1])
        elif kind == ADD:
            val[i] = val[node[1]] + val[node[2]]
        elif kind == MUL:
            val[i] = val[node[1]] * val[node[2]]
        else:
            raise InvNotAllowed(i)
        if len(val[i].terms) > term_cap:
            raise TermCapExceeded(i, len(val[i].terms), term_cap)
    return [val[o] for o in c.outputs]


def expand_single(c: Circuit, term_cap: int = 200_000) -> SparsePoly:
    return expand(c, term_cap)[0]


def bareiss_det(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free elimination with row pivoting."""
    n = len(m)
    for row in m:
        if len(row) != n:
            raise ValueError("matrix must be square")
    if n == 0:
        return 1
    a = [[int(x) for x in row] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        pivot = next((r for r in range(k, n) if a[r][k] != 0), None)
        if pivot is None:
            return 0
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def identity_matrix(n: int) -> list:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matrix_pow(m: Sequence[Sequence[int]], k: int) -> list:
    """Exact m^k by repeated squaring; k = 0 gives the identity."""
    n = len(m)
    if k < 0:
        raise ValueError("negative exponent")
    result = identity_matrix(n)
    base = [list(row) for row in m]
    while k:
        if k & 1:
            result = mat_mul(result, base)
        k >>= 1
        if k:
            base = mat_mul(base, base)
    return result


def char_poly_oracle(m: Sequence[Sequence[int]]) -> list:
    """Coefficients of det(zI - A), degree 0 first, by Faddeev-LeVerrier.

    Leading coefficient (of z^n) is always 1.
    """
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        am = [[sum(a[i][t] * mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        trace = sum(am[i][i] for i in range(n))
        ck = -trace / k
        coeffs[n - k] = ck
        mk = [[am[i][j] + (ck if i == j else 0) for j in range(n)] for i in range(n)]
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise ArithmeticError("characteristic polynomial coefficients must be integers")
        out.append(int(c))
    return out


def random_assignment(var_count: int, rng: random.Random, lo: int = -SAMPLE_RANGE, hi: int = SAMPLE_RANGE) -> dict:
    return {j: rng.randint(lo, hi) for j in range(var_count)}


def schwartz_zippel_equal(f: Circuit, g: Circuit, trials: int, rng: Optional[random.Random] = None,
                          max_retries: int = 50):
    """Probabilistic equality of two single-output circuits at random points.

    Samples uniformly from [-SAMPLE_RANGE, SAMPLE_RANGE], resampling when a
    division gate hits zero.  Returns (equal, per_trial_failure_bound); the
    bound is None when the syntactic degree saturated.
    """
    rng = rng or random.Random(0)
    nv = max(f.var_count, g.var_count)
    fv = f if f.var_count == nv else Circuit(f.nodes, f.outputs, nv)
    gv = g if g.var_count == nv else Circuit(g.nodes, g.outputs, nv)
    bound = None
    if f.is_division_free() and g.is_division_free():
        df, dg = exact_degrees(f), exact_degrees(g)
        if not (df.overflow or dg.overflow):
            d = max(max(df.degree[o] for o in f.outputs), max(dg.degree[o] for o in g.outputs))
            bound = Fraction(d, 2 * SAMPLE_RANGE + 1)
    for _ in range(trials):
        for attempt in range(max_retries):
            a = random_assignment(nv, rng)
            try:
                if eval_rat(fv, a) != eval_rat(gv, a):
                    return False, bound
                break
            except DivisionByZero:
                continue
        else:
            raise DivisionByZero(-1)
    return True, bound
