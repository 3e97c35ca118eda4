"""Constraint sets, min-sum-rate linear programs, and secure-computability verdicts.

For a source/function spec this module builds the family of subset-sum
rate constraints for its case, solves the covering LP

    minimize   sum of all rate variables
    subject to R_S >= (a conditional entropy)  for each listed subset S,
               R >= 0,

and compares the optimal value (plus a fixed entropy offset) against
H(X_M | G_0).  The comparison certifies secure computability in one
direction unconditionally; the refuting direction additionally needs a
hypothesis that is proven here only for specific shapes (two terminals in
case 1, and the two-terminal case-2 template with a degenerate first
constraint), so every report carries an explicit assumption flag.

The LP is solved with scipy's HiGHS dual simplex and every optimum is
certified by checking dual feasibility, complementary slackness, and
strong duality before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import (
    DeltaOutOfRange,
    NumericalFailure,
    WrongArity,
    WrongCaseTag,
    WrongShape,
)
from .sources import (
    CONST,
    FunctionSpec,
    JointSource,
    binary_entropy,
    cond_entropy,
    make_bss,
    make_function_spec,
    rv,
)

VERDICT_TOL = 1e-9
_CERT_TOL = 1e-8

SECURELY_COMPUTABLE = "SecurelyComputable"
NOT_SECURELY_COMPUTABLE = "NotSecurelyComputable"
BOUNDARY = "Boundary"
BOUND_ONLY = "BoundOnly"


# ---------------------------------------------------------------------------
# constraint sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    variables: tuple[str, ...]
    bound: float
    label: str


@dataclass(frozen=True)
class ConstraintSet:
    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    fixed_offset: float = 0.0
    objective: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.objective:
            object.__setattr__(self, "objective",
                               tuple(1.0 for _ in self.variables))
        for c in self.constraints:
            if c.bound < -1e-12:
                raise NumericalFailure(f"negative bound in constraint {c.label}")
            if not c.variables:
                raise NumericalFailure(f"empty variable set in constraint {c.label}")


@dataclass(frozen=True)
class RateVector:
    values: dict[str, float]

    def total(self) -> float:
        return float(sum(self.values.values()))

    def feasible(self, cs: ConstraintSet, tol: float = VERDICT_TOL) -> bool:
        if any(v < -tol for v in self.values.values()):
            return False
        for c in cs.constraints:
            if sum(self.values[v] for v in c.variables) < c.bound - tol:
                return False
        return True


def _members(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def _subset_label(members: Iterable[int]) -> str:
    return "{" + ",".join(str(i) for i in members) + "}"


def constraints_case1(src: JointSource, fns: FunctionSpec) -> ConstraintSet:
    """Omniscience-style bounds with the private value as decoder side info.

    For every proper subset L of the terminals: R_L is lower-bounded by
    H(X_L | X_rest) when L misses some of the first m0 terminals, and by
    H(X_L | X_rest, G_0) when L contains all of them.  The fixed offset is
    the stage-two codeword budget sum_{i>m0} H(G_i | X_i).
    """
    if fns.case != 1:
        raise WrongCaseTag(f"expected a case-1 spec, got case {fns.case}")
    m, m0 = src.m, fns.m0
    head = (1 << m0) - 1
    variables = tuple(f"R_{i}" for i in range(1, m + 1))
    cons = []
    for mask in range(1, (1 << m) - 1):
        members = _members(mask)
        rest = _members(((1 << m) - 1) ^ mask)
        if mask & head == head:
            bound = cond_entropy(src, fns, rv(x=members), rv(x=rest, g=[0]))
            label = f"1b:L={_subset_label(members)}"
        else:
            bound = cond_entropy(src, fns, rv(x=members), rv(x=rest))
            label = f"1a:L={_subset_label(members)}"
        cons.append(Constraint(tuple(f"R_{i}" for i in members), bound, label))
    offset = sum(cond_entropy(src, fns, rv(g=[i]), rv(x=[i]))
                 for i in range(m0 + 1, m + 1))
    return ConstraintSet(variables, tuple(cons), fixed_offset=float(offset))


def constraints_case2(src: JointSource, fns: FunctionSpec) -> ConstraintSet:
    """Bounds for the relaxed model with unrestricted tail functions.

    Adds codeword-rate variables Rp_j (one per terminal past m0) whose
    subset sums, jointly with the R_L sums, must cover the conditional
    entropies of the corresponding function blocks given everything else
    and the private value.
    """
    if fns.case != 2:
        raise WrongCaseTag(f"expected a case-2 spec, got case {fns.case}")
    m, m0 = src.m, fns.m0
    head = (1 << m0) - 1
    tail = tuple(range(m0 + 1, m + 1))
    variables = tuple(f"R_{i}" for i in range(1, m + 1)) + \
        tuple(f"Rp_{j}" for j in tail)
    cons = []
    for mask in range(1, (1 << m) - 1):
        if mask & head == head:
            continue
        members = _members(mask)
        rest = _members(((1 << m) - 1) ^ mask)
        bound = cond_entropy(src, fns, rv(x=members), rv(x=rest))
        cons.append(Constraint(tuple(f"R_{i}" for i in members), bound,
                               f"2a:L={_subset_label(members)}"))
    for j in tail:
        bound = cond_entropy(src, fns, rv(g=[j]), rv(x=[j]))
        cons.append(Constraint((f"Rp_{j}",), bound, f"2b:j={j}"))
    full = (1 << m) - 1
    tail_full = len(tail)
    for mask in range(head, full + 1):
        if mask & head != head:
            continue
        members = _members(mask)
        rest = _members(full ^ mask)
        for pmask in range(1 << tail_full):
            if mask == full and pmask == (1 << tail_full) - 1:
                continue
            chosen = tuple(tail[t] for t in range(tail_full) if pmask >> t & 1)
            others = tuple(j for j in tail if j not in chosen)
            bound = cond_entropy(
                src, fns,
                rv(x=members, g=chosen),
                rv(x=rest, g=(0,) + others))
            names = tuple(f"Rp_{j}" for j in chosen) + \
                tuple(f"R_{i}" for i in members)
            cons.append(Constraint(
                names, bound,
                f"2c:L={_subset_label(members)},Lp={_subset_label(chosen)}"))
    return ConstraintSet(variables, tuple(cons))


def constraints_case3(src: JointSource, fns: FunctionSpec) -> ConstraintSet:
    """Bounds for the data-download model.

    (3a) for each terminal i and nonempty L inside its recovery set:
    R_L >= H(X_L | X_{recovery set minus L}, X_i).  (3b) for every proper
    subset: R_L >= H(X_L | X_rest, G_0).
    """
    if fns.case != 3:
        raise WrongCaseTag(f"expected a case-3 spec, got case {fns.case}")
    m = src.m
    variables = tuple(f"R_{i}" for i in range(1, m + 1))
    cons = []
    for i in range(1, m + 1):
        mi = sorted(fns.recovery_sets[i - 1])
        for mask in range(1, 1 << len(mi)):
            members = tuple(mi[t] for t in range(len(mi)) if mask >> t & 1)
            rest = tuple(j for j in mi if j not in members)
            bound = cond_entropy(src, fns, rv(x=members), rv(x=rest + (i,)))
            cons.append(Constraint(
                tuple(f"R_{j}" for j in members), bound,
                f"3a:i={i},L={_subset_label(members)}"))
    for mask in range(1, (1 << m) - 1):
        members = _members(mask)
        rest = _members(((1 << m) - 1) ^ mask)
        bound = cond_entropy(src, fns, rv(x=members), rv(x=rest, g=[0]))
        cons.append(Constraint(tuple(f"R_{i}" for i in members), bound,
                               f"3b:L={_subset_label(members)}"))
    return ConstraintSet(variables, tuple(cons))


def build_constraints(src: JointSource, fns: FunctionSpec) -> ConstraintSet:
    return {1: constraints_case1, 2: constraints_case2,
            3: constraints_case3}[fns.case](src, fns)


# ---------------------------------------------------------------------------
# LP solver
# ---------------------------------------------------------------------------

def min_sum_rate(cs: ConstraintSet) -> tuple[float, RateVector]:
    """Minimum of the (all-ones) objective over the constraint set.

    Returns the optimal value including the fixed offset, and an optimal
    vertex.  The optimum is certified by LP duality: the dual multipliers
    returned by the solver must be feasible and complementary within 1e-8,
    otherwise NumericalFailure is raised.
    """
    k = len(cs.variables)
    c = np.asarray(cs.objective, dtype=np.float64)
    if not cs.constraints:
        zero = RateVector({v: 0.0 for v in cs.variables})
        return cs.fixed_offset, zero
    index = {v: j for j, v in enumerate(cs.variables)}
    a = np.zeros((len(cs.constraints), k))
    b = np.empty(len(cs.constraints))
    for r, con in enumerate(cs.constraints):
        for v in con.variables:
            a[r, index[v]] = 1.0
        b[r] = con.bound
    res = linprog(c, A_ub=-a, b_ub=-b, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise NumericalFailure(f"LP solver failed with status {res.status}: "
                               f"{res.message}")
    x = np.maximum(res.x, 0.0)
    dual = -np.asarray(res.ineqlin.marginals)
    if np.any(dual < -_CERT_TOL):
        raise NumericalFailure("negative dual multiplier on a covering constraint")
    reduced = c - a.T @ dual
    if np.any(reduced < -_CERT_TOL):
        raise NumericalFailure("dual infeasible: reduced cost below zero")
    slack = a @ x - b
    if np.any(slack < -_CERT_TOL):
        raise NumericalFailure("primal infeasible solution returned")
    if abs(float(dual @ b) - float(c @ x)) > _CERT_TOL:
        raise NumericalFailure("strong duality gap above tolerance")
    if np.any(np.abs(dual * slack) > _CERT_TOL):
        raise NumericalFailure("complementary slackness violated")
    rates = RateVector({v: float(x[j]) for j, v in enumerate(cs.variables)})
    return float(c @ x) + cs.fixed_offset, rates


# ---------------------------------------------------------------------------
# closed form and verdicts
# ---------------------------------------------------------------------------

def two_terminal_closed_form(src: JointSource, fns: FunctionSpec) -> float:
    """H(X_2|X_1) + H(G_2|X_2) + H(X_1|X_2,G_0) for two-terminal case-1 specs."""
    if src.m != 2 or fns.case != 1:
        raise WrongShape("closed form requires m = 2 and a case-1 spec")
    return (cond_entropy(src, fns, rv(x=[2]), rv(x=[1]))
            + cond_entropy(src, fns, rv(g=[2]), rv(x=[2]))
            + cond_entropy(src, fns, rv(x=[1]), rv(x=[2], g=[0])))


def _hypothesis_proven(src: JointSource, fns: FunctionSpec) -> bool:
    """Shapes for which the constant-communication value is known optimal.

    Two-terminal case 1 always qualifies (the interactive-transcript
    inequality closes the argument).  A two-terminal case-2 spec qualifies
    when H(X_1|X_2,G_0,G_2) = 0 and H(X_2|X_1) >= H(X_2|G_0,G_2), the two
    facts the same inequality chain needs.
    """
    if src.m == 2 and fns.case == 1:
        return True
    if src.m == 2 and fns.case == 2 and fns.m0 == 1:
        a1 = cond_entropy(src, fns, rv(x=[1]), rv(x=[2], g=[0, 2]))
        b2 = cond_entropy(src, fns, rv(x=[2]), rv(x=[1]))
        alt = cond_entropy(src, fns, rv(x=[2]), rv(g=[0, 2]))
        return a1 <= 1e-12 and b2 >= alt - 1e-12
    return False


@dataclass(frozen=True)
class AnalysisReport:
    case: int
    h_given_g0: float
    r_value: float
    argmin: RateVector
    verdict: str
    assumption: str  # "proven" or "assumed"
    note: str
    sufficient_condition_holds: bool

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "h_given_g0": self.h_given_g0,
            "r_value": self.r_value,
            "argmin": dict(sorted(self.argmin.values.items())),
            "verdict": self.verdict,
            "assumption": self.assumption,
            "note": self.note,
            "sufficient_condition_holds": self.sufficient_condition_holds,
        }


def analyze(src: JointSource, fns: FunctionSpec) -> AnalysisReport:
    """Compare H(X_M|G_0) with the constant-communication rate value.

    The comparison is two-sided (a real verdict) only when the optimality
    of constant communication is proven for the spec's shape; otherwise
    the verdict is BoundOnly and the note records which direction still
    holds unconditionally: exceeding the value always certifies secure
    computability, falling below it refutes only under the hypothesis.
    """
    h = cond_entropy(src, fns, rv(x=range(1, src.m + 1)), rv(g=[0]))
    value, argmin = min_sum_rate(build_constraints(src, fns))
    proven = _hypothesis_proven(src, fns)
    sufficient = h > value + VERDICT_TOL
    if not proven:
        verdict = BOUND_ONLY
        note = ("rate value is an upper bound on the true multi-letter rate; "
                "H(X_M|G_0) above it certifies secure computability "
                + ("(holds here)" if sufficient else "(does not hold here)")
                + "; the refuting direction is unverified for this shape")
    elif sufficient:
        verdict = SECURELY_COMPUTABLE
        note = "H(X_M|G_0) strictly exceeds the proven-optimal rate value"
    elif abs(h - value) <= VERDICT_TOL:
        verdict = BOUNDARY
        note = "H(X_M|G_0) equals the rate value within tolerance; no verdict"
    else:
        verdict = NOT_SECURELY_COMPUTABLE
        note = "H(X_M|G_0) falls below the proven-optimal rate value"
    return AnalysisReport(
        case=fns.case, h_given_g0=float(h), r_value=float(value),
        argmin=argmin, verdict=verdict,
        assumption="proven" if proven else "assumed",
        note=note, sufficient_condition_holds=bool(sufficient))


# ---------------------------------------------------------------------------
# canonical binary-symmetric rows
# ---------------------------------------------------------------------------

_XOR = (0, 1, 1, 0)
_AND = (0, 0, 0, 1)
_PAIR = (0, 1, 1, 2)  # joint value of (xor, and): 3 reachable combinations
_ZERO = (0, 0, 0, 0)


def bss_row_spec(row: int, delta: float) -> tuple[JointSource, FunctionSpec]:
    """Source and function spec for one of the four canonical BSS rows."""
    src = make_bss(delta)
    if row == 1:
        fns = make_function_spec(src, {0: _XOR, 2: _XOR}, case=1, m0=1)
    elif row == 2:
        fns = make_function_spec(src, {0: _XOR, 2: _ZERO}, case=1, m0=1)
    elif row == 3:
        fns = make_function_spec(src, {0: _PAIR, 2: _AND}, case=1, m0=1)
    elif row == 4:
        fns = make_function_spec(src, {0: _XOR, 2: _AND}, case=2, m0=1)
    else:
        raise WrongShape(f"row must be 1..4, got {row}")
    return src, fns


@dataclass(frozen=True)
class VerdictRow:
    row: int
    g0: str
    g1: str
    g2: str
    tau: float
    verdict: str
    via: str  # "analysis" or "published"
    h_delta: float
    report: AnalysisReport | None = None

    def to_dict(self) -> dict:
        d = {"row": self.row, "g0": self.g0, "g1": self.g1, "g2": self.g2,
             "tau": self.tau, "verdict": self.verdict, "via": self.via,
             "h_delta": self.h_delta}
        if self.report is not None:
            d["analysis"] = self.report.to_dict()
        return d


def _threshold_verdict(h: float, tau: float) -> str:
    if abs(h - tau) <= VERDICT_TOL:
        return BOUNDARY
    return SECURELY_COMPUTABLE if h < tau else NOT_SECURELY_COMPUTABLE


def bss_verdict_table(delta: float) -> list[VerdictRow]:
    """The four canonical function tuples on a BSS pair with their thresholds.

    Rows 3 and 4 run through the full analysis pipeline (entropy engine
    plus LP); rows 1 and 2 use the published threshold constants 1/2 and 1
    with the h(delta) comparison.
    """
    if not 0.0 < delta < 0.5:
        raise DeltaOutOfRange(f"crossover {delta!r} outside open interval (0, 1/2)")
    h = binary_entropy(delta)
    xor, and_ = "x1^x2", "x1&x2"
    pair = "(x1^x2, x1&x2)"
    rows = [
        VerdictRow(1, xor, xor, xor, 0.5, _threshold_verdict(h, 0.5),
                   "published", h),
        VerdictRow(2, xor, xor, "const", 1.0, _threshold_verdict(h, 1.0),
                   "published", h),
    ]
    for row, (labels, tau) in ((3, ((pair, pair, and_), 2.0 * delta / 3.0)),
                               (4, ((xor, xor, and_), 2.0 / 3.0))):
        report = analyze(*bss_row_spec(row, delta))
        rows.append(VerdictRow(row, *labels, tau, report.verdict,
                               "analysis", h, report))
    return rows


# ---------------------------------------------------------------------------
# interactive-transcript inequality
# ---------------------------------------------------------------------------

def check_interactive_inequality(law) -> tuple[bool, float]:
    """H(F) - H(F|X_1^n) - H(F|X_2^n) for a two-terminal transcript law.

    Nonnegative (within 1e-9) for every transcript assembled from messages
    that each depend only on the sender's sequence and prior messages.
    Accepts any law exposing ``m``, ``entropy(names)``, ``transcript_names``
    and ``x_name(i)``.
    """
    if law.m != 2:
        raise WrongArity(f"inequality is specific to 2 terminals, law has {law.m}")
    f = list(law.transcript_names)
    h_f = law.entropy(f)
    slack = h_f
    for i in (1, 2):
        x = law.x_name(i)
        slack -= law.entropy(f + [x]) - law.entropy([x])
    return slack >= -1e-9, float(slack)
