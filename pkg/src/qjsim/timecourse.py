"""Mapping of decay rates and elapsed time to jump probabilities, and
evolution sweeps over a grid of times or probabilities.

A sweep in probability mode drives a single scalar "decay progress" per
sample and converts it to the full probability triple through the decay
rates, so that every point of the sweep corresponds to one physical time:

  cascade  progress is p21; p32 follows from the common time,
           p32 = 1 - (1 - p21)^(gamma32/gamma21)
  lambda   progress is the total departure probability p31 + p32
           = 1 - exp(-(gamma31+gamma32) t), split by branching ratio
  vee      progress is p31; p21 = 1 - (1 - p31)^(gamma21/gamma31)

The lambda split keeps p31 + p32 <= 1 for all times and preserves
p31 / p32 = gamma31 / gamma32, reaching p31 = 1 - p32 at full depletion.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .channels import (
    EMPTY_SUBSPACE_TOL,
    LEVEL_PAIRS,
    DecayType,
    DensityMatrix,
    InitialState,
    JumpProbabilities,
    apply_channel,
    build_kraus,
    closed_form_evolve,
    project_subspace,
    pure_density,
    visibility,
)
from .errors import DegenerateInputError


@dataclass(frozen=True)
class DecayRates:
    """Spontaneous decay rates (1/time); only those of the active
    transitions of a decay type are consumed."""

    gamma21: float = 0.0
    gamma31: float = 0.0
    gamma32: float = 0.0

    def __post_init__(self):
        for name in ("gamma21", "gamma31", "gamma32"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)


class SweepMode(enum.Enum):
    PROBABILITY = "probability"
    TIME = "time"


@dataclass(frozen=True)
class SweepSpec:
    """Grid of samples (times or decay-progress values) for one decay type."""

    decay_type: DecayType
    rates: DecayRates
    samples: tuple[float, ...]
    mode: SweepMode = SweepMode.PROBABILITY

    def __post_init__(self):
        ss = tuple(float(s) for s in self.samples)
        if not ss:
            raise ValueError("sweep needs at least one sample")
        if any(b <= a for a, b in zip(ss, ss[1:])):
            raise ValueError("samples must be strictly increasing")
        if self.mode is SweepMode.PROBABILITY:
            if ss[0] < 0 or ss[-1] > 1:
                raise ValueError("probability samples must lie in [0, 1]")
        else:
            if ss[0] < 0:
                raise ValueError("time samples must be nonnegative")
        object.__setattr__(self, "samples", ss)


def probs_at_time(
    decay_type: DecayType, rates: DecayRates, t: float
) -> JumpProbabilities:
    """Jump probabilities after an elapsed time t.

    Cascade and vee transitions decay independently, p_ij = 1 - exp(-g_ij t).
    For lambda decay the two depletion routes of level 3 share the total
    1 - exp(-(g31+g32) t) in proportion to their rates, which keeps
    p31 + p32 <= 1 at all times.
    """
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"time must be finite and >= 0, got {t}")

    def p(gamma: float) -> float:
        return -math.expm1(-gamma * t)

    if decay_type is DecayType.CASCADE:
        return JumpProbabilities(p21=p(rates.gamma21), p32=p(rates.gamma32))
    if decay_type is DecayType.V:
        return JumpProbabilities(p21=p(rates.gamma21), p31=p(rates.gamma31))
    total_rate = rates.gamma31 + rates.gamma32
    if total_rate == 0:
        return JumpProbabilities()
    depleted = p(total_rate)
    return JumpProbabilities(
        p31=depleted * rates.gamma31 / total_rate,
        p32=depleted * rates.gamma32 / total_rate,
    )


def probs_at_progress(
    decay_type: DecayType, rates: DecayRates, progress: float
) -> JumpProbabilities:
    """Jump probabilities at a given decay progress in [0, 1].

    Progress parametrizes the reference transition of the type (see module
    docstring); the remaining probability follows from the rate ratio via
    the implied common time.
    """
    q = float(progress)
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"progress must lie in [0, 1], got {q}")
    if q == 0.0:
        return JumpProbabilities()

    def companion(ref_rate: float, other_rate: float) -> float:
        # 1 - (1-q)^(other/ref), the other transition at the same time
        if other_rate == 0:
            return 0.0
        if ref_rate == 0:
            raise ValueError(
                "progress > 0 needs a nonzero rate on the reference transition"
            )
        if other_rate == ref_rate:
            return q
        return -math.expm1(math.log1p(-q) * other_rate / ref_rate) if q < 1 else 1.0

    if decay_type is DecayType.CASCADE:
        return JumpProbabilities(p21=q, p32=companion(rates.gamma21, rates.gamma32))
    if decay_type is DecayType.V:
        return JumpProbabilities(p31=q, p21=companion(rates.gamma31, rates.gamma21))
    total_rate = rates.gamma31 + rates.gamma32
    if total_rate == 0:
        raise ValueError("lambda progress > 0 needs gamma31 + gamma32 > 0")
    return JumpProbabilities(
        p31=q * rates.gamma31 / total_rate, p32=q * rates.gamma32 / total_rate
    )


@dataclass(frozen=True)
class SweepRecord:
    """Single sweep point: probabilities, evolved state and derived scalars.

    ``coherence_mods`` and ``visibilities`` are ordered by LEVEL_PAIRS,
    i.e. (1,2), (1,3), (2,3).  A pair whose subspace population vanishes is
    reported with zero coherence and visibility (a two-beam measurement on
    empty beams carries no fringe).
    """

    sample: float
    probs: JumpProbabilities
    rho: DensityMatrix
    populations: tuple[float, float, float]
    coherence_mods: tuple[float, float, float]
    visibilities: tuple[float, float, float]
    subspace_weights: tuple[float, float, float]


def evaluate_point(
    decay_type: DecayType,
    probs: JumpProbabilities,
    state: InitialState,
    sample: float = 0.0,
) -> SweepRecord:
    """Evolve one probability point and project out all pair observables."""
    if state.zero_phase:
        rho = closed_form_evolve(decay_type, probs, state)
    else:
        rho = apply_channel(build_kraus(decay_type, probs), pure_density(state))
    mods = []
    viss = []
    weights = []
    for i, j in LEVEL_PAIRS:
        weight = rho.population(i) + rho.population(j)
        weights.append(weight)
        if weight <= EMPTY_SUBSPACE_TOL:
            mods.append(0.0)
            viss.append(0.0)
            continue
        try:
            sub = project_subspace(rho, i, j)
        except DegenerateInputError:
            mods.append(0.0)
            viss.append(0.0)
            continue
        v = visibility(sub)
        viss.append(v)
        mods.append(0.5 * v)
    return SweepRecord(
        sample=float(sample),
        probs=probs,
        rho=rho,
        populations=rho.populations,
        coherence_mods=tuple(mods),
        visibilities=tuple(viss),
        subspace_weights=tuple(weights),
    )


def run_sweep(spec: SweepSpec, state: InitialState) -> list[SweepRecord]:
    """Evaluate every sample of the sweep independently, in sample order."""
    records = []
    for s in spec.samples:
        if spec.mode is SweepMode.PROBABILITY:
            probs = probs_at_progress(spec.decay_type, spec.rates, s)
        else:
            probs = probs_at_time(spec.decay_type, spec.rates, s)
        records.append(evaluate_point(spec.decay_type, probs, state, sample=s))
    return records
