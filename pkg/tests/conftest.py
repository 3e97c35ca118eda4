"""Shared fixtures: brute-force oracles and random model generators.

The oracle here is deliberately primitive: pure-Python dictionary
enumeration over joint symbols, no shared code with the package's numpy
key machinery.  Tests compare engine outputs against it.
"""

import itertools
import math
from collections import defaultdict

import numpy as np
import pytest

import secomp as sc


# ---------------------------------------------------------------------------
# brute-force entropy oracle
# ---------------------------------------------------------------------------

def _iter_symbols(sizes):
    """(flat index, symbol tuple) in row-major order, last coordinate fastest."""
    for flat, tup in enumerate(itertools.product(*(range(a) for a in sizes))):
        yield flat, tup


def oracle_cond_entropy(src, fns, target, given=((), ())):
    """H(target | given) by dict enumeration.

    ``target`` and ``given`` are (coords tuple, funcs tuple) pairs with
    1-based coordinates and 0-based function indices.
    """
    tx, tg = target
    gx, gg = given
    joint = defaultdict(float)
    marg = defaultdict(float)
    for flat, tup in _iter_symbols(src.alphabet_sizes):
        p = float(src.pmf[flat])
        if p <= 0.0:
            continue
        tval = tuple(tup[i - 1] for i in tx) + \
            tuple(int(fns.tables[k][flat]) for k in tg)
        gval = tuple(tup[i - 1] for i in gx) + \
            tuple(int(fns.tables[k][flat]) for k in gg)
        joint[(tval, gval)] += p
        marg[gval] += p
    h_joint = -sum(p * math.log2(p) for p in joint.values())
    h_marg = -sum(p * math.log2(p) for p in marg.values())
    return h_joint - h_marg


# ---------------------------------------------------------------------------
# random model generators
# ---------------------------------------------------------------------------

def random_source(rng, m=2, max_alpha=4, allow_zeros=True):
    sizes = tuple(int(rng.integers(2, max_alpha + 1)) for _ in range(m))
    pmf = rng.random(int(np.prod(sizes))) ** 2
    if allow_zeros and rng.random() < 0.3 and pmf.size > 2:
        pmf[rng.integers(0, pmf.size)] = 0.0
    return sc.validate(pmf / pmf.sum(), sizes)


def random_case1_spec(rng, src, m0=1, max_range=4):
    """Random g_0 plus tail functions composed through g_0's value."""
    k0 = int(rng.integers(1, max_range + 1))
    g0 = rng.integers(0, k0, size=src.num_symbols)
    tables = {0: g0}
    for i in range(m0 + 1, src.m + 1):
        ki = int(rng.integers(1, max_range + 1))
        of_value = rng.integers(0, ki, size=k0)
        tables[i] = of_value[g0]
    return sc.make_function_spec(src, tables, case=1, m0=m0)


def random_case2_spec(rng, src, m0=1, max_range=4):
    k0 = int(rng.integers(1, max_range + 1))
    tables = {0: rng.integers(0, k0, size=src.num_symbols)}
    for i in range(m0 + 1, src.m + 1):
        ki = int(rng.integers(1, max_range + 1))
        tables[i] = rng.integers(0, ki, size=src.num_symbols)
    return sc.make_function_spec(src, tables, case=2, m0=m0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
