"""Driver, interaction, and problem Hamiltonians, plus the annealing ramp.

The interpolation is linear: H(t) = (1 - t/T) * (driver + alpha * quadratic
transverse term) + (t/T) * problem.  In spin operators S_a = M_a / 2 the
start-of-ramp Hamiltonian at ramp position s reads
2(1-s) S_x + (4 alpha (1-s)/N) S_x^2 and the problem term (Ising case) is
(4 s / N) S_z^2; those coefficients are derived, never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .spin_algebra import (
    CollectiveBasis,
    Operator,
    magnetization_operator,
)

ISING = "ising"
XXZ = "xxz"
DEFAULT_DELTA = 1.5


@dataclass(frozen=True)
class ProblemKind:
    """Choice of problem Hamiltonian: fully connected Ising or XXZ.

    ``delta`` is the XXZ anisotropy; it is carried (with its default) even for
    the Ising variant, where it is ignored.
    """

    variant: str
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if self.variant not in (ISING, XXZ):
            raise ValueError(f"variant must be {ISING!r} or {XXZ!r}, got {self.variant!r}")
        if not math.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta!r}")

    @classmethod
    def ising(cls) -> "ProblemKind":
        return cls(ISING)

    @classmethod
    def xxz(cls, delta: float = DEFAULT_DELTA) -> "ProblemKind":
        return cls(XXZ, delta)


@dataclass(frozen=True)
class AnnealSchedule:
    """Full parameterization of one annealing run (hbar = 1 units)."""

    basis: CollectiveBasis
    t_anneal: float
    alpha: float
    problem: ProblemKind

    def __post_init__(self):
        if not (math.isfinite(self.t_anneal) and self.t_anneal > 0):
            raise ValueError(f"t_anneal must be positive, got {self.t_anneal!r}")
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be >= 0, got {self.alpha!r}")


@dataclass(frozen=True)
class LinearRamp:
    """Explicit affine Hamiltonian family H(t) = (1 - t/T) h_start + (t/T) h_end.

    Every schedule here is affine in t, so integrators consume this form.
    A constant Hamiltonian is the h_start == h_end special case.
    """

    basis: CollectiveBasis
    t_anneal: float
    h_start: Operator
    h_end: Operator

    def __post_init__(self):
        if not (math.isfinite(self.t_anneal) and self.t_anneal > 0):
            raise ValueError(f"t_anneal must be positive, got {self.t_anneal!r}")
        if self.h_start.basis != self.basis or self.h_end.basis != self.basis:
            raise ValueError("ramp endpoints must live on the ramp basis")

    def hamiltonian(self, t: float) -> Operator:
        s = _checked_fraction(t, self.t_anneal)
        return Operator(
            self.basis,
            (1.0 - s) * self.h_start.matrix + s * self.h_end.matrix,
            self.h_start.hermitian_hint and self.h_end.hermitian_hint,
        )

    def derivative(self) -> Operator:
        return (self.h_end - self.h_start) / self.t_anneal


def _checked_fraction(t: float, t_anneal: float) -> float:
    if not -1e-12 * t_anneal <= t <= (1.0 + 1e-12) * t_anneal:
        raise ValueError(f"time t = {t!r} outside the schedule range [0, {t_anneal!r}]")
    return min(max(t / t_anneal, 0.0), 1.0)


def driver_transverse(basis: CollectiveBasis) -> Operator:
    """Transverse-field driver: M_x."""
    return magnetization_operator(basis, "x")


def nonstoquastic_xx(basis: CollectiveBasis) -> Operator:
    """Anti-ferromagnetic quadratic transverse term M_x^2 / N.

    Positive semidefinite and a function of M_x, so it commutes with the
    driver; with a large positive coefficient it pulls the start-of-ramp
    ground state to the M_x = 0 eigenstate.
    """
    mx = magnetization_operator(basis, "x").matrix
    return Operator(basis, (mx @ mx) / basis.n_qubits, hermitian_hint=True)


def problem_ising(basis: CollectiveBasis) -> Operator:
    """Fully connected Ising problem M_z^2 / N (diagonal: (2m)^2 / N)."""
    mz = magnetization_operator(basis, "z").matrix
    return Operator(basis, (mz @ mz) / basis.n_qubits, hermitian_hint=True)


def problem_xxz(basis: CollectiveBasis, delta: float = DEFAULT_DELTA) -> Operator:
    """Fully connected XXZ problem (M_x^2 + M_y^2 + delta * M_z^2) / N."""
    if not math.isfinite(delta):
        raise ValueError(f"delta must be finite, got {delta!r}")
    mx = magnetization_operator(basis, "x").matrix
    my = magnetization_operator(basis, "y").matrix
    mz = magnetization_operator(basis, "z").matrix
    mat = (mx @ mx + my @ my + delta * (mz @ mz)) / basis.n_qubits
    return Operator(basis, (mat + mat.conj().T) / 2.0, hermitian_hint=True)


def problem_hamiltonian(schedule: AnnealSchedule) -> Operator:
    if schedule.problem.variant == ISING:
        return problem_ising(schedule.basis)
    return problem_xxz(schedule.basis, schedule.problem.delta)


def initial_hamiltonian(schedule: AnnealSchedule) -> Operator:
    """H at t = 0: driver plus the alpha-weighted quadratic transverse term."""
    h = driver_transverse(schedule.basis)
    if schedule.alpha != 0.0:
        h = h + schedule.alpha * nonstoquastic_xx(schedule.basis)
    return h


def as_ramp(schedule) -> LinearRamp:
    """View any supported schedule as an explicit affine ramp."""
    if isinstance(schedule, LinearRamp):
        return schedule
    return LinearRamp(
        basis=schedule.basis,
        t_anneal=schedule.t_anneal,
        h_start=initial_hamiltonian(schedule),
        h_end=problem_hamiltonian(schedule),
    )


def anneal_hamiltonian(schedule: AnnealSchedule, t: float) -> Operator:
    """H(t) = (1 - t/T)(driver + alpha * M_x^2/N) + (t/T) * problem, 0 <= t <= T."""
    return as_ramp(schedule).hamiltonian(t)


def schedule_derivative(schedule) -> Operator:
    """dH/dt = (problem - driver - alpha * M_x^2/N) / T, constant along the ramp."""
    return as_ramp(schedule).derivative()
