"""Finite multiterminal sources, function specifications, and an exact entropy engine.

A :class:`JointSource` is the exact joint pmf of ``m`` coordinate random
variables over finite alphabets.  A :class:`FunctionSpec` attaches lookup
tables for a private function (index 0) and one computed function per
terminal (indices 1..m), together with the structural case the tuple
belongs to:

* case 1 -- terminals ``1..m0`` compute the private value itself and every
  remaining terminal's target is a function of the private value;
* case 2 -- terminals ``1..m0`` compute the private value, the remaining
  targets are unrestricted;
* case 3 -- every terminal downloads the raw data of a subset of the other
  terminals (``recovery_sets``), with an arbitrary private function.

All information quantities are computed exactly by summation over the
joint law, in bits (base-2 logarithms), with the 0*log(0) = 0 convention.
Zero-probability conditioning cells contribute nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ArgumentOutOfRange,
    DeltaOutOfRange,
    IndexOutOfRange,
    InvalidSpec,
    MassSumOutOfTolerance,
    NegativeMass,
    RecoverySetContainsSelf,
    ShapeMismatch,
)

_SUM_TOL = 1e-9


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------

def binary_entropy(t: float) -> float:
    """h(t) = -t*log2(t) - (1-t)*log2(1-t), with h(0) = h(1) = 0."""
    if not 0.0 <= t <= 1.0:
        raise ArgumentOutOfRange(f"binary_entropy argument {t!r} outside [0, 1]")
    if t in (0.0, 1.0):
        return 0.0
    return float(-t * math.log2(t) - (1.0 - t) * math.log2(1.0 - t))


def _entropy_of_masses(masses: np.ndarray) -> float:
    m = masses[masses > 0.0]
    if m.size == 0:
        return 0.0
    return float(-(m @ np.log2(m)))


# ---------------------------------------------------------------------------
# joint source
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JointSource:
    """Exact joint pmf of m coordinate rvs over finite alphabets.

    The flat pmf is row-major over joint symbols with the *last* coordinate
    varying fastest.  Instances are immutable and safe to share.
    """

    alphabet_sizes: tuple[int, ...]
    pmf: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(a) for a in self.alphabet_sizes)
        object.__setattr__(self, "alphabet_sizes", sizes)
        if len(sizes) < 2:
            raise ShapeMismatch(f"need at least 2 terminals, got {len(sizes)}")
        if any(a < 1 for a in sizes):
            raise ShapeMismatch(f"every alphabet size must be >= 1, got {sizes}")
        pmf = np.asarray(self.pmf, dtype=np.float64).ravel()
        if pmf.shape[0] != int(np.prod(sizes)):
            raise ShapeMismatch(
                f"pmf length {pmf.shape[0]} != product of alphabet sizes "
                f"{int(np.prod(sizes))}")
        if np.any(pmf < 0.0):
            raise NegativeMass("pmf entries must be nonnegative")
        total = float(pmf.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise MassSumOutOfTolerance(
                f"pmf sums to {total!r}, outside 1 +/- {_SUM_TOL}")
        pmf = pmf / total
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @property
    def m(self) -> int:
        return len(self.alphabet_sizes)

    @property
    def num_symbols(self) -> int:
        return int(self.pmf.shape[0])

    def coordinate_symbols(self, i: int) -> np.ndarray:
        """Symbol of coordinate i (1-based) for every joint symbol index."""
        if not 1 <= i <= self.m:
            raise IndexOutOfRange(f"terminal {i} outside 1..{self.m}")
        stride = int(np.prod(self.alphabet_sizes[i:], initial=1))
        s = np.arange(self.num_symbols)
        return (s // stride) % self.alphabet_sizes[i - 1]


def validate(pmf, alphabet_sizes) -> JointSource:
    """Build a JointSource from a flat pmf, normalizing tiny rounding error."""
    return JointSource(tuple(alphabet_sizes), np.asarray(pmf, dtype=np.float64))


def make_bss(delta: float) -> JointSource:
    """Binary symmetric source pair: agreeing cells get (1-delta)/2 each."""
    if not 0.0 < delta < 0.5:
        raise DeltaOutOfRange(f"crossover {delta!r} outside open interval (0, 1/2)")
    p_eq = (1.0 - delta) / 2.0
    p_ne = delta / 2.0
    return JointSource((2, 2), np.array([p_eq, p_ne, p_ne, p_eq]))


# ---------------------------------------------------------------------------
# random-variable expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RvExpr:
    """A joint rv built from coordinate rvs and/or function-value rvs.

    ``coords`` selects terminals (1-based), ``funcs`` selects function
    indices (0 = private function).  The empty expression is a constant rv.
    """

    coords: frozenset[int] = frozenset()
    funcs: frozenset[int] = frozenset()
    block: int = 1

    def __or__(self, other: "RvExpr") -> "RvExpr":
        if self.block != other.block:
            raise ShapeMismatch("cannot join expressions of different block lengths")
        return RvExpr(self.coords | other.coords, self.funcs | other.funcs, self.block)

    @property
    def is_constant(self) -> bool:
        return not self.coords and not self.funcs


CONST = RvExpr()


def rv(x: Iterable[int] = (), g: Iterable[int] = ()) -> RvExpr:
    """Shorthand: rv(x=[1,2]) is (X_1, X_2); rv(g=[0]) is the private value."""
    return RvExpr(frozenset(int(i) for i in x), frozenset(int(k) for k in g))


# ---------------------------------------------------------------------------
# function specifications
# ---------------------------------------------------------------------------

def _dense_table(table: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values, dense = np.unique(table, return_inverse=True)
    return values, dense.astype(np.int64)


@dataclass(frozen=True)
class FunctionSpec:
    """Lookup tables g_0..g_m over joint symbols plus case metadata.

    ``tables[k]`` maps every joint symbol index to the value of function k.
    Tables are stored both as given and densified to 0..|range|-1 for
    sequence arithmetic; ``values[k]`` recovers the original labels.
    """

    tables: tuple[np.ndarray, ...]
    case: int
    m0: int | None = None
    recovery_sets: tuple[frozenset[int], ...] | None = None
    values: tuple[np.ndarray, ...] = field(default=(), repr=False)
    dense: tuple[np.ndarray, ...] = field(default=(), repr=False)

    def __post_init__(self):
        densified = []
        labels = []
        tables = []
        for t in self.tables:
            arr = np.asarray(t)
            arr.setflags(write=False)
            tables.append(arr)
            vals, dense = _dense_table(arr)
            vals.setflags(write=False)
            dense.setflags(write=False)
            labels.append(vals)
            densified.append(dense)
        object.__setattr__(self, "tables", tuple(tables))
        object.__setattr__(self, "values", tuple(labels))
        object.__setattr__(self, "dense", tuple(densified))

    @property
    def m(self) -> int:
        return len(self.tables) - 1

    def range_size(self, k: int) -> int:
        return int(self.values[k].shape[0])

    def retag(self, case: int, src: JointSource) -> "FunctionSpec":
        """Re-validate this spec under a different case tag."""
        return make_function_spec(
            src, {k: self.tables[k] for k in range(self.m + 1)},
            case=case, m0=self.m0, recovery_sets=self.recovery_sets)


def _check_case1(tables: Sequence[np.ndarray], m0: int) -> None:
    g0 = tables[0]
    for i in range(1, m0 + 1):
        if not np.array_equal(tables[i], g0):
            raise InvalidSpec(f"case 1 requires g_{i} identical to g_0 for i <= m0")
    # g_i must be a function of g_0's value: constant on every fiber of g_0
    _, fiber = np.unique(g0, return_inverse=True)
    for i in range(m0 + 1, len(tables)):
        for f in range(fiber.max() + 1):
            vals = tables[i][fiber == f]
            if vals.size and np.any(vals != vals[0]):
                raise InvalidSpec(
                    f"case 1 requires g_{i} to be a function of g_0's value; "
                    f"it varies on a fiber of g_0")


def _recovery_table(src: JointSource, members: Sequence[int]) -> np.ndarray:
    """Table of the tuple (x_j : j in members) as a single dense value."""
    if not members:
        return np.zeros(src.num_symbols, dtype=np.int64)
    key = np.zeros(src.num_symbols, dtype=np.int64)
    for j in members:
        key = key * src.alphabet_sizes[j - 1] + src.coordinate_symbols(j)
    return key


def make_function_spec(
    src: JointSource,
    tables: Mapping[int, Sequence[int]],
    case: int,
    m0: int | None = None,
    recovery_sets: Sequence[Iterable[int]] | None = None,
) -> FunctionSpec:
    """Validate and build a FunctionSpec against a source.

    For cases 1 and 2, tables for indices 1..m0 may be omitted (they equal
    g_0).  For case 3, tables for indices 1..m are derived from
    ``recovery_sets``; if supplied they must induce the same partitions.
    """
    m = src.m
    if case not in (1, 2, 3):
        raise InvalidSpec(f"case must be 1, 2 or 3, got {case!r}")
    given = {int(k): np.asarray(v).ravel() for k, v in tables.items()}
    for k, t in given.items():
        if not 0 <= k <= m:
            raise IndexOutOfRange(f"function index {k} outside 0..{m}")
        if t.shape[0] != src.num_symbols:
            raise ShapeMismatch(
                f"table for g_{k} has length {t.shape[0]}, expected {src.num_symbols}")
    if 0 not in given:
        raise InvalidSpec("a table for the private function g_0 is required")

    full: list[np.ndarray] = [given[0]]
    if case in (1, 2):
        if m0 is None or not 0 < m0 < m:
            raise InvalidSpec(f"cases 1 and 2 require 0 < m0 < m, got m0={m0!r}")
        for i in range(1, m + 1):
            if i in given:
                full.append(given[i])
            elif i <= m0:
                full.append(given[0])
            else:
                raise InvalidSpec(f"missing table for g_{i}")
        if case == 1:
            _check_case1(full, m0)
        else:
            for i in range(1, m0 + 1):
                if not np.array_equal(full[i], full[0]):
                    raise InvalidSpec(
                        f"case 2 requires g_{i} identical to g_0 for i <= m0")
        spec = FunctionSpec(tuple(full), case, m0=m0)
    else:
        if recovery_sets is None or len(recovery_sets) != m:
            raise InvalidSpec("case 3 requires one recovery set per terminal")
        rsets = []
        for i, members in enumerate(recovery_sets, start=1):
            ms = frozenset(int(j) for j in members)
            if i in ms:
                raise RecoverySetContainsSelf(
                    f"recovery set of terminal {i} contains itself")
            if any(not 1 <= j <= m for j in ms):
                raise IndexOutOfRange(f"recovery set of terminal {i} references "
                                      f"a terminal outside 1..{m}")
            rsets.append(ms)
        for i, ms in enumerate(rsets, start=1):
            derived = _recovery_table(src, sorted(ms))
            if i in given:
                # same partition of joint symbols: fibers must coincide
                _, a = np.unique(given[i], return_inverse=True)
                _, b = np.unique(derived, return_inverse=True)
                if not np.array_equal(a, b):
                    raise InvalidSpec(
                        f"supplied table for g_{i} does not equal the tuple "
                        f"of coordinates in its recovery set")
                full.append(given[i])
            else:
                full.append(derived)
        spec = FunctionSpec(tuple(full), case, recovery_sets=tuple(rsets))
    return spec


# ---------------------------------------------------------------------------
# entropy engine
# ---------------------------------------------------------------------------

def _expr_keys(src: JointSource, fns: FunctionSpec | None, expr: RvExpr) -> np.ndarray:
    """Integer label of the expression's value at every joint symbol."""
    if expr.block != 1:
        raise ShapeMismatch("entropy engine operates on single-letter expressions")
    key = np.zeros(src.num_symbols, dtype=np.int64)
    for i in sorted(expr.coords):
        if not 1 <= i <= src.m:
            raise IndexOutOfRange(f"terminal {i} outside 1..{src.m}")
        key = key * src.alphabet_sizes[i - 1] + src.coordinate_symbols(i)
    if expr.funcs and fns is None:
        raise IndexOutOfRange("expression references function rvs but no "
                              "FunctionSpec was given")
    for k in sorted(expr.funcs):
        if fns is None or not 0 <= k <= fns.m:
            raise IndexOutOfRange(f"function index {k} not available")
        key = key * fns.range_size(k) + fns.dense[k]
    return key


def _entropy_of_keys(keys: np.ndarray, probs: np.ndarray) -> float:
    if keys.size == 0:
        return 0.0
    span = int(keys.max()) + 1
    if span <= 1 << 22:
        masses = np.bincount(keys, weights=probs, minlength=span)
    else:
        _, inv = np.unique(keys, return_inverse=True)
        masses = np.bincount(inv, weights=probs)
    return _entropy_of_masses(masses)


def cond_entropy(src: JointSource, fns: FunctionSpec | None,
                 target: RvExpr, given: RvExpr = CONST) -> float:
    """Exact H(target | given) in bits over the joint law."""
    if target.is_constant:
        return 0.0
    kt = _expr_keys(src, fns, target)
    if given.is_constant:
        return _entropy_of_keys(kt, src.pmf)
    kg = _expr_keys(src, fns, given)
    joint = kg * (int(kt.max()) + 1) + kt
    return _entropy_of_keys(joint, src.pmf) - _entropy_of_keys(kg, src.pmf)


def mutual_information(src: JointSource, fns: FunctionSpec | None,
                       a: RvExpr, b: RvExpr, given: RvExpr = CONST) -> float:
    """Exact I(a ; b | given) in bits; tiny negative rounding clamped to 0."""
    value = cond_entropy(src, fns, a, given) - cond_entropy(src, fns, a, b | given)
    return max(value, 0.0) if value > -1e-12 else value
