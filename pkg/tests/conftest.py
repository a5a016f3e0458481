"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the package's row-reduction code:
spans are grown by closure under addition, so they can cross-check the
reduced-basis machinery without sharing a code path with it.
"""

from itertools import permutations, product

import pytest

from branchlift import ModulusContext, Perm, classify


def brute_span(ctx: ModulusContext, width: int, rows) -> frozenset:
    """All elements of the subgroup generated by ``rows``; closure under
    addition of generators, no linear algebra."""
    n = ctx.modulus
    gens = [tuple(x % n for x in r) for r in rows]
    zero = tuple([0] * width)
    elems = {zero}
    frontier = [zero]
    while frontier:
        new = []
        for v in frontier:
            for g in gens:
                w = tuple((a + b) % n for a, b in zip(v, g))
                if w not in elems:
                    elems.add(w)
                    new.append(w)
        frontier = new
    return frozenset(elems)


def brute_all_subgroups(ctx: ModulusContext, width: int) -> set[frozenset]:
    """Every subgroup of (Z/p^k)^width as a set of elements.

    Enumerates spans of all ``width``-tuples of group elements, which is
    enough generators for any subgroup here.  Tiny ambient groups only.
    """
    n = ctx.modulus
    all_vecs = list(product(range(n), repeat=width))
    assert len(all_vecs) ** width <= 300_000, "too large for the brute oracle"
    out = set()
    for gens in product(all_vecs, repeat=width):
        out.add(brute_span(ctx, width, gens))
    return out


def all_perms(m: int) -> list[Perm]:
    return [Perm(images) for images in permutations(range(1, m + 1))]


#: (p, k, n, expected number of fully liftable classes)
ACCEPTANCE_GRID = (
    (2, 1, 3, 1),
    (2, 1, 4, 2),
    (2, 1, 5, 1),
    (3, 1, 3, 2),
    (3, 1, 4, 1),
    (2, 2, 4, 3),
    (2, 2, 5, 1),
    (2, 2, 6, 2),
    (3, 2, 3, 2),
)


@pytest.fixture(scope="session")
def census_cache():
    """Census reports computed once per session, keyed by (p, k, n)."""
    cache = {}

    def get(p: int, k: int, n: int):
        key = (p, k, n)
        if key not in cache:
            cache[key] = classify(p, k, n)
        return cache[key]

    return get
