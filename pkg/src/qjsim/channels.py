"""Quantum-channel mathematics for three-level spontaneous decay.

All states live in a fixed three-level basis |1>, |2>, |3| (matrix indices
0..2).  Three decay topologies are supported:

  cascade  3 -> 2 -> 1   (transitions 2->1 and 3->2, probabilities p21, p32)
  lambda   3 -> {1, 2}   (transitions 3->1 and 3->2, probabilities p31, p32)
  vee      {2, 3} -> 1   (transitions 2->1 and 3->1, probabilities p21, p31)

Each topology is represented by a Kraus decomposition acting as
rho -> sum_i K_i rho K_i^dag with sum_i K_i^dag K_i = I, plus a closed-form
expression for the evolved matrix of a zero-phase pure input.  Everything in
this module is a pure function of immutable inputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstraintViolationError,
    DegenerateInputError,
    UnsupportedInputError,
)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10
COMPLETENESS_TOL = 1e-12

# Subspace population below which a two-level projection is treated as empty.
EMPTY_SUBSPACE_TOL = 1e-14

LEVEL_PAIRS = ((1, 2), (1, 3), (2, 3))


class DecayType(enum.Enum):
    """The three decay topologies."""

    CASCADE = "cascade"
    LAMBDA = "lambda"
    V = "v"


def _frozen(arr: np.ndarray) -> np.ndarray:
    # always copy so freezing never mutates a caller-owned array
    out = np.array(arr, dtype=np.complex128, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DensityMatrix:
    """3x3 Hermitian, unit-trace, positive-semidefinite matrix."""

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=np.complex128)
        if m.shape != (3, 3):
            raise ValueError(f"density matrix must be 3x3, got {m.shape}")
        # non-finite entries surface as NaN here or in the trace check,
        # so the comparisons are written to fail on NaN as well
        herm = np.abs(m - m.conj().T).max()
        if not herm <= HERMITICITY_TOL:
            raise ValueError(f"not Hermitian (or non-finite): max asymmetry {herm:.3e}")
        tr = m.trace()
        if not abs(tr - 1.0) <= TRACE_TOL:
            raise ValueError(f"trace {tr} differs from 1 beyond tolerance")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < PSD_TOL:
            raise ValueError(f"not positive semidefinite: min eigenvalue {lo:.3e}")
        object.__setattr__(self, "mat", _frozen(m))

    def population(self, level: int) -> float:
        """Diagonal element for a 1-based level index."""
        return float(self.mat[level - 1, level - 1].real)

    @property
    def populations(self) -> tuple[float, float, float]:
        return (self.population(1), self.population(2), self.population(3))

    def purity(self) -> float:
        return float((self.mat @ self.mat).trace().real)


@dataclass(frozen=True)
class InitialState:
    """Pure qutrit state given by per-level intensities and phases.

    The normalized amplitude of level i is sqrt(I_i / I_T) * exp(1j*phi_i)
    with I_T the total intensity.  Phases default to zero.
    """

    intensities: tuple[float, float, float]
    phases: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        ii = tuple(float(v) for v in self.intensities)
        ph = tuple(float(v) for v in self.phases)
        if len(ii) != 3 or len(ph) != 3:
            raise ValueError("intensities and phases must have length 3")
        if not all(math.isfinite(v) for v in ii + ph):
            raise ValueError("intensities and phases must be finite")
        if any(v < 0 for v in ii):
            raise ValueError(f"intensities must be nonnegative, got {ii}")
        if sum(ii) <= 0:
            raise DegenerateInputError("total intensity must be positive")
        object.__setattr__(self, "intensities", ii)
        object.__setattr__(self, "phases", ph)

    @property
    def total_intensity(self) -> float:
        return sum(self.intensities)

    @property
    def zero_phase(self) -> bool:
        return all(p == 0.0 for p in self.phases)

    def amplitudes(self) -> np.ndarray:
        weights = np.sqrt(np.array(self.intensities) / self.total_intensity)
        return weights * np.exp(1j * np.array(self.phases))


@dataclass(frozen=True)
class JumpProbabilities:
    """Transition probabilities (p21, p31, p32), each in [0, 1].

    Only the components relevant to a given decay type are consumed by the
    channel constructors; the lambda-type sum constraint p31 + p32 <= 1 is
    enforced where the operators are built.
    """

    p21: float = 0.0
    p31: float = 0.0
    p32: float = 0.0

    def __post_init__(self):
        for name in ("p21", "p31", "p32"):
            v = float(getattr(self, name))
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p21, self.p31, self.p32)


@dataclass(frozen=True)
class KrausSet:
    """Ordered Kraus operators of one decay channel.

    Order is fixed (no-jump operator first, then the jump branches) so that
    serialized channels are reproducible.
    """

    operators: tuple[np.ndarray, ...]
    decay_type: DecayType
    probs: JumpProbabilities

    def __post_init__(self):
        ops = tuple(_frozen(np.asarray(k)) for k in self.operators)
        if not ops:
            raise ValueError("KrausSet requires at least one operator")
        for k in ops:
            if k.shape != (3, 3):
                raise ValueError("Kraus operators must be 3x3")
        object.__setattr__(self, "operators", ops)
        # operators are write-protected, so the stacked views and the
        # completeness residual can be computed once and reused
        stack = np.stack(ops)
        stack.setflags(write=False)
        conj = stack.conj()
        conj.setflags(write=False)
        s = np.einsum("kji,kjl->il", conj, stack)
        residual = float(np.abs(s - np.eye(3)).max())
        object.__setattr__(self, "_stack", stack)
        object.__setattr__(self, "_stack_conj", conj)
        object.__setattr__(self, "_residual", residual)
        if residual > COMPLETENESS_TOL:
            raise ConstraintViolationError(
                f"Kraus set is not trace preserving: residual {residual:.3e}"
            )

    def completeness_residual(self) -> float:
        return self._residual

    def __len__(self) -> int:
        return len(self.operators)


@dataclass(frozen=True)
class SubspaceState:
    """Renormalized 2x2 projection of a qutrit state onto two levels.

    ``renorm`` keeps the pre-normalization weight (the fraction of the full
    trace living in the subspace), which downstream code uses as the photon
    budget of a two-beam measurement.
    """

    sigma: np.ndarray
    pair: tuple[int, int]
    renorm: float

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=np.complex128)
        if s.shape != (2, 2):
            raise ValueError("sigma must be 2x2")
        if np.abs(s - s.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("sigma not Hermitian")
        if abs(s.trace() - 1.0) > TRACE_TOL:
            raise ValueError("sigma trace differs from 1")
        if np.linalg.eigvalsh(s)[0] < PSD_TOL:
            raise ValueError("sigma not positive semidefinite")
        i, j = self.pair
        if not (1 <= i < j <= 3):
            raise ValueError(f"pair must satisfy 1 <= i < j <= 3, got {self.pair}")
        object.__setattr__(self, "sigma", _frozen(s))
        object.__setattr__(self, "pair", (int(i), int(j)))
        object.__setattr__(self, "renorm", float(self.renorm))

    @property
    def coherence(self) -> complex:
        return complex(self.sigma[0, 1])


def pure_density(state: InitialState) -> DensityMatrix:
    """Outer product |psi><psi| of the normalized initial state."""
    a = state.amplitudes()
    return DensityMatrix(np.outer(a, a.conj()))


def _ket_bra(i: int, j: int, scale: float) -> np.ndarray:
    k = np.zeros((3, 3), dtype=np.complex128)
    k[i - 1, j - 1] = scale
    return k


def build_kraus(decay_type: DecayType, probs: JumpProbabilities) -> KrausSet:
    """Kraus operators of one decay topology at the given jump probabilities.

    Returns four operators for cascade decay and three for the lambda and
    vee topologies.  Raises ConstraintViolationError for lambda parameters
    with p31 + p32 > 1.
    """
    p21, p31, p32 = probs.as_tuple()
    if decay_type is DecayType.CASCADE:
        ops = (
            np.diag([1.0, math.sqrt(1 - p21), math.sqrt(1 - p32)]).astype(complex),
            _ket_bra(1, 2, math.sqrt(p21)),
            _ket_bra(2, 3, math.sqrt(p32 * (1 - p21))),
            _ket_bra(1, 3, math.sqrt(p32 * p21)),
        )
    elif decay_type is DecayType.LAMBDA:
        # parenthesized sum keeps 1 - (p31 + p32) >= 0 whenever the
        # constraint holds, which a left-to-right subtraction does not
        if p31 + p32 > 1.0:
            raise ConstraintViolationError(
                f"lambda decay requires p31 + p32 <= 1, got {p31 + p32}"
            )
        rest = 1.0 - (p31 + p32)
        ops = (
            np.diag([1.0, 1.0, math.sqrt(rest)]).astype(complex),
            _ket_bra(2, 3, math.sqrt(p32)),
            _ket_bra(1, 3, math.sqrt(p31)),
        )
    elif decay_type is DecayType.V:
        ops = (
            np.diag([1.0, math.sqrt(1 - p21), math.sqrt(1 - p31)]).astype(complex),
            _ket_bra(1, 2, math.sqrt(p21)),
            _ket_bra(1, 3, math.sqrt(p31)),
        )
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown decay type {decay_type}")
    return KrausSet(ops, decay_type, probs)


def apply_channel(kraus: KrausSet, rho: DensityMatrix) -> DensityMatrix:
    """Evolve rho through the channel: sum_i K_i rho K_i^dag."""
    res = kraus.completeness_residual()
    if res > COMPLETENESS_TOL:
        raise ConstraintViolationError(
            f"Kraus set is not trace preserving: residual {res:.3e}"
        )
    out = np.einsum("kij,jl,kml->im", kraus._stack, rho.mat, kraus._stack_conj)
    # symmetrize away the last bits of rounding noise
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out)


def closed_form_evolve(
    decay_type: DecayType, probs: JumpProbabilities, state: InitialState
) -> DensityMatrix:
    """Evolved matrix of a zero-phase pure input, in closed form.

    Equivalent to apply_channel(build_kraus(decay_type, probs),
    pure_density(state)) for states with all phases zero; states with a
    nonzero phase must go through apply_channel, since the closed forms
    assume real amplitudes.
    """
    if not state.zero_phase:
        raise UnsupportedInputError(
            "closed form assumes zero phases; evolve phased states with "
            "apply_channel(build_kraus(...), pure_density(state))"
        )
    i1, i2, i3 = state.intensities
    it = state.total_intensity
    p21, p31, p32 = probs.as_tuple()
    s12 = math.sqrt(i1 * i2)
    s13 = math.sqrt(i1 * i3)
    s23 = math.sqrt(i2 * i3)
    if decay_type is DecayType.CASCADE:
        q21 = math.sqrt(1 - p21)
        q32 = math.sqrt(1 - p32)
        m = np.array(
            [
                [i1 + i2 * p21 + i3 * p32 * p21, s12 * q21, s13 * q32],
                [s12 * q21, i2 * (1 - p21) + i3 * p32 * (1 - p21), s23 * q21 * q32],
                [s13 * q32, s23 * q21 * q32, i3 * (1 - p32)],
            ]
        )
    elif decay_type is DecayType.LAMBDA:
        if p31 + p32 > 1.0:
            raise ConstraintViolationError(
                f"lambda decay requires p31 + p32 <= 1, got {p31 + p32}"
            )
        rest = 1.0 - (p31 + p32)
        q3 = math.sqrt(rest)
        m = np.array(
            [
                [i1 + i3 * p31, s12, s13 * q3],
                [s12, i2 + i3 * p32, s23 * q3],
                [s13 * q3, s23 * q3, i3 * rest],
            ]
        )
    elif decay_type is DecayType.V:
        q21 = math.sqrt(1 - p21)
        q31 = math.sqrt(1 - p31)
        m = np.array(
            [
                [i1 + i2 * p21 + i3 * p31, s12 * q21, s13 * q31],
                [s12 * q21, i2 * (1 - p21), s23 * q21 * q31],
                [s13 * q31, s23 * q21 * q31, i3 * (1 - p31)],
            ]
        )
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown decay type {decay_type}")
    return DensityMatrix(m / it)


def project_subspace(rho: DensityMatrix, i: int, j: int) -> SubspaceState:
    """Renormalized projection of rho onto the {|i>, |j>} subspace."""
    if i == j or not (1 <= i <= 3 and 1 <= j <= 3):
        raise ValueError(f"levels must be distinct and in 1..3, got ({i}, {j})")
    if i > j:
        i, j = j, i
    a, b = i - 1, j - 1
    weight = float((rho.mat[a, a] + rho.mat[b, b]).real)
    if weight <= EMPTY_SUBSPACE_TOL:
        raise DegenerateInputError(
            f"subspace ({i}, {j}) carries no population (weight {weight:.3e})"
        )
    sigma = (
        np.array(
            [[rho.mat[a, a], rho.mat[a, b]], [rho.mat[b, a], rho.mat[b, b]]],
            dtype=np.complex128,
        )
        / weight
    )
    return SubspaceState(sigma, (i, j), weight)


def visibility(sub: SubspaceState) -> float:
    """Two-beam fringe contrast of a subspace state: 2 |sigma_ij|."""
    return 2.0 * abs(sub.coherence)
