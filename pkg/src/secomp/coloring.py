"""Empirical laboratory for balanced random colorings.

A coloring instance carries rvs U (with joint law over U x V), a derived
rv U' = U'(U), a conditioning map h : U -> {1..r'}, and a coloring
phi : U' -> {1..r}.  The central statistic is the weighted L1 deviation of
the color-class masses from uniform across all (h, V) cells:

    svar = sum_{j,v} P(h=j, V=v) * sum_i | P(phi(U')=i | h=j, V=v) - 1/r |.

Small svar certifies that phi(U') is nearly uniform and nearly independent
of (h(U), V): the entropy/independence gap

    log r - H(phi(U')) + I(phi(U') ; h(U), V)

is bounded by svar*log2(r/svar) whenever svar is inside the range where
x*log2(r/x) increases (x < r/e).  The failure-rate experiment estimates
how often a uniformly random coloring misses the 14*lambda threshold as
the hypothesis scale d grows relative to r*r'.

All statistics are exact enumerations; instances are capped at 2^20 points
rather than estimated beyond that.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import _rand
from .errors import (
    ArgumentOutOfRange,
    EnumerationCapExceeded,
    NumericalFailure,
    ShapeMismatch,
    SvarOutOfMonotoneRange,
)

MAX_EXACT_POINTS = 1 << 20
_GAP_TOL = 1e-9


@dataclass(frozen=True)
class ColoringInstance:
    """Finite instance: joint law of (U, V), maps U', h, phi, and parameters."""

    joint_uv: np.ndarray   # shape (|U|, |V|), sums to 1
    uprime_map: np.ndarray  # |U| -> |U'|
    h_map: np.ndarray       # |U| -> r'
    phi: np.ndarray         # |U'| -> r
    u0_mask: np.ndarray     # bool over U
    r: int
    rprime: int
    d: float
    lam: float

    def __post_init__(self):
        joint = np.asarray(self.joint_uv, dtype=np.float64)
        if joint.ndim != 2:
            raise ShapeMismatch("joint_uv must be a 2-D (|U|, |V|) array")
        if joint.shape[0] > MAX_EXACT_POINTS:
            raise EnumerationCapExceeded(
                f"|U| = {joint.shape[0]} exceeds exact cap {MAX_EXACT_POINTS}")
        if np.any(joint < 0) or abs(float(joint.sum()) - 1.0) > 1e-9:
            raise ShapeMismatch("joint_uv must be a probability table")
        if not 0.0 < self.lam < 1.0:
            raise ArgumentOutOfRange(f"lambda {self.lam!r} outside (0, 1)")
        if self.r < 1 or self.rprime < 1:
            raise ArgumentOutOfRange("r and r' must be >= 1")
        if self.d <= 0:
            raise ArgumentOutOfRange(f"d must be positive, got {self.d!r}")
        up = np.asarray(self.uprime_map)
        h = np.asarray(self.h_map)
        phi = np.asarray(self.phi)
        u0 = np.asarray(self.u0_mask, dtype=bool)
        nu = joint.shape[0]
        if up.shape != (nu,) or h.shape != (nu,) or u0.shape != (nu,):
            raise ShapeMismatch("uprime_map, h_map and u0_mask must cover U")
        if phi.shape != (int(up.max()) + 1,):
            raise ShapeMismatch("phi must be total over the range of U'")
        if np.any(h < 0) or np.any(h >= self.rprime):
            raise ShapeMismatch("h values outside 0..r'-1")
        if np.any(phi < 0) or np.any(phi >= self.r):
            raise ShapeMismatch("phi values outside 0..r-1")
        for name, arr in (("joint_uv", joint), ("uprime_map", up),
                          ("h_map", h), ("phi", phi), ("u0_mask", u0)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_points(self) -> int:
        return int(self.joint_uv.shape[0])

    @property
    def num_v(self) -> int:
        return int(self.joint_uv.shape[1])


def _cell_tensor(inst: ColoringInstance) -> np.ndarray:
    """Mass tensor W[u', j, v] = P(U' = u', h(U) = j, V = v)."""
    w = np.zeros((inst.phi.shape[0], inst.rprime, inst.num_v))
    np.add.at(w, (inst.uprime_map, inst.h_map), inst.joint_uv)
    return w


def balance_deviation(inst: ColoringInstance) -> float:
    """The svar statistic, exactly, by enumeration over (color, j, v)."""
    w = _cell_tensor(inst)
    pjv = w.sum(axis=0)
    colors = np.zeros((inst.r, inst.rprime, inst.num_v))
    np.add.at(colors, inst.phi, w)
    return float(np.abs(colors - pjv[None, :, :] / inst.r).sum())


def svar_log_bound(svar: float, r: int) -> float:
    """x*log2(r/x) at x = svar; only valid on the increasing branch x < r/e."""
    if svar < 0:
        raise ArgumentOutOfRange("svar must be nonnegative")
    if svar == 0.0:
        return 0.0
    if svar >= r / math.e:
        raise SvarOutOfMonotoneRange(
            f"svar {svar!r} >= r/e = {r / math.e!r}; bound form not applicable")
    return float(svar * math.log2(r / svar))


def _entropy(masses: np.ndarray) -> float:
    m = masses[masses > 0.0]
    return float(-(m @ np.log2(m))) if m.size else 0.0


@dataclass(frozen=True)
class GapReport:
    gap: float
    svar: float
    svar_bound: float | None     # svar*log2(r/svar) on the monotone branch
    lambda_bound: float | None   # 14*lam*log2(|U|/(14*lam)) when svar < 14*lam
    in_monotone_range: bool

    def to_dict(self) -> dict:
        return {"gap": self.gap, "svar": self.svar,
                "svar_bound": self.svar_bound,
                "lambda_bound": self.lambda_bound,
                "in_monotone_range": self.in_monotone_range}


def security_gap(inst: ColoringInstance) -> GapReport:
    """Exact gap log2(r) - H(phi(U')) + I(phi(U') ; h(U), V) and its bounds.

    On the monotone branch the gap is checked against svar*log2(r/svar);
    a violation there signals a broken implementation and raises.
    """
    w = _cell_tensor(inst)
    pjv = w.sum(axis=0)
    colors = np.zeros((inst.r, inst.rprime, inst.num_v))
    np.add.at(colors, inst.phi, w)
    color_mass = colors.sum(axis=(1, 2))
    h_phi = _entropy(color_mass)
    mi = h_phi + _entropy(pjv.ravel()) - _entropy(colors.ravel())
    gap = math.log2(inst.r) - h_phi + max(mi, 0.0)
    svar = float(np.abs(colors - pjv[None, :, :] / inst.r).sum())
    try:
        bound = svar_log_bound(svar, inst.r)
        in_range = True
    except SvarOutOfMonotoneRange:
        bound = None
        in_range = False
    if in_range and gap > bound + _GAP_TOL:
        raise NumericalFailure(
            f"entropy gap {gap!r} exceeds svar bound {bound!r}")
    threshold = 14.0 * inst.lam
    lam_bound = None
    if svar < threshold:
        lam_bound = float(threshold * math.log2(inst.num_points / threshold))
    return GapReport(float(gap), svar, bound, lam_bound, in_range)


# ---------------------------------------------------------------------------
# hypothesis checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisReport:
    mass_in_u0: float
    mass_condition_pass: bool          # (i)  P(U in U0) > 1 - lam^2
    matching_condition_pass: bool      # (ii) conditional matching, by search
    matching_worst_gap: float
    tail_mass: float
    tail_condition_pass: bool          # P{P(u|v) > 1/d} <= lam^2

    def to_dict(self) -> dict:
        return {"mass_in_u0": self.mass_in_u0,
                "mass_condition_pass": self.mass_condition_pass,
                "matching_condition_pass": self.matching_condition_pass,
                "matching_worst_gap": self.matching_worst_gap,
                "tail_mass": self.tail_mass,
                "tail_condition_pass": self.tail_condition_pass}


def check_hypotheses(inst: ColoringInstance, tol: float = 1e-12) -> HypothesisReport:
    """Evaluate the three instance hypotheses with exact quantities.

    The matching condition is checked by direct search: within every
    positive-mass (j, v) cell restricted to U0, each realized conditional
    probability of a U' value must be matched by the conditional
    probability of some single point of U0.
    """
    lam2 = inst.lam ** 2
    mass_u0 = float(inst.joint_uv[inst.u0_mask].sum())

    worst = 0.0
    for j in range(inst.rprime):
        sel = inst.u0_mask & (inst.h_map == j)
        if not np.any(sel):
            continue
        block = inst.joint_uv[sel]
        ups = inst.uprime_map[sel]
        for v in range(inst.num_v):
            cell = block[:, v]
            total = float(cell.sum())
            if total <= 0.0:
                continue
            p_u = cell / total
            up_mass = np.zeros(int(ups.max()) + 1)
            np.add.at(up_mass, ups, p_u)
            for pm in up_mass[up_mass > 0.0]:
                worst = max(worst, float(np.min(np.abs(p_u - pm))))
    matching_pass = worst <= tol

    v_mass = inst.joint_uv.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(v_mass > 0.0, inst.joint_uv / v_mass, 0.0)
    tail = float(inst.joint_uv[cond > 1.0 / inst.d].sum())

    return HypothesisReport(
        mass_in_u0=mass_u0,
        mass_condition_pass=mass_u0 > 1.0 - lam2,
        matching_condition_pass=matching_pass,
        matching_worst_gap=worst,
        tail_mass=tail,
        tail_condition_pass=tail <= lam2,
    )


# ---------------------------------------------------------------------------
# random-coloring experiments
# ---------------------------------------------------------------------------

def random_coloring(inst: ColoringInstance, seed: int, trial: int) -> ColoringInstance:
    """Instance with phi redrawn uniformly over all maps U' -> colors."""
    gen = _rand.stream(seed, _rand.COLOR_PHI, trial)
    phi = gen.integers(0, inst.r, size=inst.phi.shape[0], dtype=np.int64)
    return replace(inst, phi=phi)


def uniform_instance(u_size: int, r: int, rprime: int, lam: float,
                     seed: int, v_size: int = 1) -> ColoringInstance:
    """Uniform U, identity U', random h, full U0, and d at its maximum."""
    joint = np.full((u_size, v_size), 1.0 / (u_size * v_size))
    h = _rand.stream(seed, _rand.COLOR_CELL).integers(0, rprime, size=u_size,
                                                      dtype=np.int64)
    phi = _rand.stream(seed, _rand.COLOR_PHI, 0).integers(0, r, size=u_size,
                                                          dtype=np.int64)
    return ColoringInstance(
        joint_uv=joint, uprime_map=np.arange(u_size), h_map=h, phi=phi,
        u0_mask=np.ones(u_size, dtype=bool), r=r, rprime=rprime,
        d=float(u_size), lam=lam)


@dataclass(frozen=True)
class ColoringExperiment:
    trials: int
    seed: int
    threshold: float
    failure_fraction: float
    mean_svar: float
    max_svar: float
    d_over_rrprime: float

    def to_dict(self) -> dict:
        return {"trials": self.trials, "seed": self.seed,
                "threshold": self.threshold,
                "failure_fraction": self.failure_fraction,
                "mean_svar": self.mean_svar, "max_svar": self.max_svar,
                "d_over_rrprime": self.d_over_rrprime}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def failure_rate_experiment(inst: ColoringInstance, trials: int,
                            seed: int) -> ColoringExperiment:
    """Fraction of uniformly random colorings with svar >= 14*lambda.

    The multiplicative constant in the theoretical failure bound is
    unspecified, so only the empirical fraction and the scale d/(r*r')
    are reported; sweeps should show the fraction non-increasing in that
    scale.
    """
    if trials < 1:
        raise ArgumentOutOfRange(f"trials must be >= 1, got {trials}")
    threshold = 14.0 * inst.lam
    svars = np.array([balance_deviation(random_coloring(inst, seed, t))
                      for t in range(trials)])
    return ColoringExperiment(
        trials=trials, seed=seed, threshold=threshold,
        failure_fraction=float(np.mean(svars >= threshold)),
        mean_svar=float(svars.mean()), max_svar=float(svars.max()),
        d_over_rrprime=float(inst.d / (inst.r * inst.rprime)))


def failure_rate_sweep(ratios: Sequence[float], r: int, rprime: int,
                       lam: float, trials: int, seed: int
                       ) -> list[ColoringExperiment]:
    """Experiments on uniform instances with |U| = ratio * r * r'."""
    out = []
    for ratio in ratios:
        u_size = int(round(ratio * r * rprime))
        inst = uniform_instance(u_size, r, rprime, lam, seed)
        out.append(failure_rate_experiment(inst, trials, seed))
    return out
