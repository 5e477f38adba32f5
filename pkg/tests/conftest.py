import random

import pytest

from detcirc.circuit import CircuitBuilder, exact_degrees

CORPUS_SEED = 20260809


def random_circuit(rng, max_size=40, max_deg=8, nvars=4):
    """Random division-free circuit with exact degree in [1, max_deg]."""
    while True:
        b = CircuitBuilder(var_count=nvars)
        nodes = [b.var(rng.randrange(nvars)) for _ in range(rng.randint(1, 3))]
        nodes.append(b.const(rng.randint(-3, 3)))
        target = rng.randint(8, max_size - 2)
        while len(b.nodes) < target:
            l, r = rng.choice(nodes), rng.choice(nodes)
            nodes.append(b.add(l, r) if rng.random() < 0.55 else b.mul(l, r))
        c = b.finish([nodes[-1]])
        d = exact_degrees(c).degree[c.output]
        if 1 <= d <= max_deg and c.size <= max_size:
            return c


@pytest.fixture(scope="session")
def corpus():
    rng = random.Random(CORPUS_SEED)
    return [random_circuit(rng) for _ in range(50)]


@pytest.fixture(scope="session")
def det_balanced_cache():
    """Balanced determinant circuits, shared across acceptance tests."""
    from detcirc.balance import build_det_balanced

    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = build_det_balanced(n)
        return cache[n]

    return get


def random_matrix(rng, n, lo=-50, hi=50):
    return [[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)]


def assignment_of(m, base=0):
    n = len(m)
    return {base + i * n + j: m[i][j] for i in range(n) for j in range(n)}
