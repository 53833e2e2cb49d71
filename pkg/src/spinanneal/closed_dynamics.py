"""Time-dependent Schrodinger evolution along the ramp (hbar = 1).

Also provides a brute-force propagator on the full 2^N product space, used to
validate that permutation-symmetric dynamics never leaves the maximum
angular momentum sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rk45
from .hamiltonians import LinearRamp, as_ramp
from .spin_algebra import (
    CollectiveBasis,
    PureState,
    lowest_eigenpair,
    parity_operator,
)

NORM_DRIFT_TOL = 1e-6

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
}


class IntegrationError(RuntimeError):
    """The adaptive integrator could not finish the requested propagation."""


@dataclass(frozen=True)
class IntegratorOptions:
    """Tolerances and limits for the adaptive embedded Dormand-Prince 5(4) pair.

    ``initial_step`` and ``max_step`` default to T/1e4 and no cap; master
    equation solvers cap the step at T/1e3 unless overridden.
    """

    rtol: float = 1e-8
    atol: float = 1e-10
    initial_step: float | None = None
    max_steps: int = 10_000_000
    max_step: float | None = None
    method: str = "dopri5"

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("rtol and atol must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.method != "dopri5":
            raise ValueError(f"unsupported method {self.method!r}")

    def resolved_initial_step(self, t_anneal: float) -> float:
        return self.initial_step if self.initial_step is not None else t_anneal / 1e4

    def resolved_max_step(self, default: float) -> float:
        return self.max_step if self.max_step is not None else default


_STATUS_MESSAGES = {
    _rk45.STATUS_MAX_STEPS: "step budget exhausted",
    _rk45.STATUS_NONFINITE: "state became non-finite",
    _rk45.STATUS_STEP_UNDERFLOW: "step size underflow",
    _rk45.STATUS_DIVERGED: "solution diverged (growing generator mode)",
}


def _check_status(status: int, context: str):
    if status != _rk45.STATUS_OK:
        raise IntegrationError(f"{context}: {_STATUS_MESSAGES.get(status, 'unknown failure')}")


@dataclass(frozen=True)
class ClosedTrajectory:
    """Uniformly sampled observables of one Schrodinger-equation run.

    ``parity`` stores the complex parity expectation; it is real (up to
    1e-8) whenever the collective spin is an integer.  ``norm_drift`` is the
    largest |norm - 1| seen before any renormalization event.
    """

    times: np.ndarray
    states: list[PureState]
    energy: np.ndarray
    parity: np.ndarray
    fidelity_ground: np.ndarray
    norm_drift: float
    renormalizations: int


def fidelity(a: PureState, b: PureState) -> float:
    """Squared overlap |<a|b>|^2."""
    if a.basis != b.basis:
        raise ValueError("fidelity requires states on the same basis")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def _sample_grid(t_anneal: float, n_samples: int) -> np.ndarray:
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    return np.linspace(0.0, t_anneal, n_samples)


def evolve_closed(schedule, psi0: PureState | None = None,
                  opts: IntegratorOptions | None = None,
                  n_samples: int = 101) -> ClosedTrajectory:
    """Integrate d psi/dt = -i H(t) psi over the ramp.

    ``schedule`` may be an AnnealSchedule or any LinearRamp.  The initial
    state defaults to the computed ground state of H(0).  Norm drift beyond
    1e-6 triggers a logged renormalization inside the stepper.
    """
    ramp = as_ramp(schedule)
    opts = opts or IntegratorOptions()
    if psi0 is None:
        psi0 = lowest_eigenpair(ramp.h_start)[1]
    elif psi0.basis != ramp.basis:
        raise ValueError("initial state basis does not match the schedule")

    times = _sample_grid(ramp.t_anneal, n_samples)
    samples, status, *_counts = _rk45.propagate(
        _rk45.EQ_SCHRODINGER, psi0.amplitudes, (0.0, ramp.t_anneal), times,
        ramp.h_start.matrix, ramp.h_end.matrix, ramp.t_anneal,
        rtol=opts.rtol, atol=opts.atol,
        initial_step=opts.resolved_initial_step(ramp.t_anneal),
        max_step=opts.resolved_max_step(math.inf), max_steps=opts.max_steps,
        dim=ramp.basis.dim, norm_mode=1, drift_tol=NORM_DRIFT_TOL,
    )
    n_renorm = _counts[2]
    _check_status(status, "closed evolution")

    k = parity_operator(ramp.basis).matrix
    states, energy, parity, fid = [], [], [], []
    max_drift = 0.0  # per-sample drift; in-loop peaks show up as renormalizations
    for i, t in enumerate(times):
        raw = samples[i]
        drift = abs(np.linalg.norm(raw) - 1.0)
        max_drift = max(max_drift, drift)
        if drift >= NORM_DRIFT_TOL:
            raise IntegrationError(f"sample norm drift {drift:.3e} at t = {t}")
        psi = raw / np.linalg.norm(raw)
        h_t = ramp.hamiltonian(t)
        states.append(PureState(ramp.basis, psi))
        energy.append(float(np.vdot(psi, h_t.matrix @ psi).real))
        parity.append(complex(np.vdot(psi, k @ psi)))
        gs = lowest_eigenpair(h_t)[1]
        fid.append(float(abs(np.vdot(gs.amplitudes, psi)) ** 2))
    return ClosedTrajectory(
        times=times, states=states, energy=np.array(energy),
        parity=np.array(parity), fidelity_ground=np.array(fid),
        norm_drift=float(max_drift), renormalizations=int(n_renorm),
    )


@dataclass(frozen=True)
class FullSpaceTrajectory:
    """Observables of the brute-force 2^N-space run."""

    times: np.ndarray
    energy: np.ndarray
    parity: np.ndarray
    symmetric_overlap: np.ndarray


def total_pauli(n_qubits: int, axis: str) -> np.ndarray:
    """sum_i sigma_i^axis on the full 2^N product space."""
    dim = 2**n_qubits
    total = np.zeros((dim, dim), dtype=np.complex128)
    for site in range(n_qubits):
        op = np.array([[1.0]], dtype=np.complex128)
        for j in range(n_qubits):
            op = np.kron(op, _PAULI[axis] if j == site else np.eye(2))
        total += op
    return total


def symmetric_embedding(basis: CollectiveBasis) -> np.ndarray:
    """Isometry from the collective basis into the 2^N product space.

    Column for |S, m> is the uniform superposition of all bit strings with
    S + m spins up (sigma_z eigenvalue +1 encoded as bit 0).
    """
    n = basis.n_qubits
    cols = np.zeros((2**n, basis.dim), dtype=np.complex128)
    for idx, m in enumerate(basis.m_values()):
        n_up = round(m + basis.spin)
        rows = [x for x in range(2**n) if n - bin(x).count("1") == n_up]
        cols[rows, idx] = 1.0 / math.sqrt(len(rows))
    return cols


def evolve_full_space_oracle(schedule, opts: IntegratorOptions | None = None,
                             n_samples: int = 101) -> FullSpaceTrajectory:
    """Propagate the same ramp on the full 2^N space from the symmetric ground state.

    Only intended as a validation oracle for the sector restriction; limited
    to n_qubits <= 4.
    """
    ramp = as_ramp(schedule)
    n = ramp.basis.n_qubits
    if n > 4:
        raise ValueError(f"full-space oracle limited to n_qubits <= 4, got {n}")
    opts = opts or IntegratorOptions()

    embed = symmetric_embedding(ramp.basis)
    h0_full, h1_full = _full_space_endpoints(schedule, ramp)

    psi0 = embed @ lowest_eigenpair(ramp.h_start)[1].amplitudes
    times = _sample_grid(ramp.t_anneal, n_samples)
    samples, status, *_counts = _rk45.propagate(
        _rk45.EQ_SCHRODINGER, psi0, (0.0, ramp.t_anneal), times,
        h0_full, h1_full, ramp.t_anneal,
        rtol=opts.rtol, atol=opts.atol,
        initial_step=opts.resolved_initial_step(ramp.t_anneal),
        max_step=opts.resolved_max_step(math.inf), max_steps=opts.max_steps,
        dim=2**n, norm_mode=1, drift_tol=NORM_DRIFT_TOL,
    )
    _check_status(status, "full-space oracle")

    half_turn = np.array([[0.0, 1j], [1j, 0.0]], dtype=np.complex128)  # exp(i pi sigma_x / 2)
    k_full = np.array([[1.0]], dtype=np.complex128)
    for _ in range(n):
        k_full = np.kron(k_full, half_turn)

    energy, parity, overlap = [], [], []
    for i, t in enumerate(times):
        psi = samples[i] / np.linalg.norm(samples[i])
        s = t / ramp.t_anneal
        h_full = (1.0 - s) * h0_full + s * h1_full
        energy.append(float(np.vdot(psi, h_full @ psi).real))
        parity.append(complex(np.vdot(psi, k_full @ psi)))
        overlap.append(float(np.linalg.norm(embed.conj().T @ psi) ** 2))
    return FullSpaceTrajectory(
        times=times, energy=np.array(energy), parity=np.array(parity),
        symmetric_overlap=np.array(overlap),
    )


def _full_space_endpoints(schedule, ramp: LinearRamp):
    """Ramp endpoints as genuine Pauli sums on the product space."""
    from .hamiltonians import ISING, AnnealSchedule

    n = ramp.basis.n_qubits
    sx = total_pauli(n, "x")
    sy = total_pauli(n, "y")
    sz = total_pauli(n, "z")
    if isinstance(schedule, AnnealSchedule):
        h0 = sx + schedule.alpha * (sx @ sx) / n
        if schedule.problem.variant == ISING:
            h1 = (sz @ sz) / n
        else:
            h1 = (sx @ sx + sy @ sy + schedule.problem.delta * (sz @ sz)) / n
        return h0, h1
    # Generic ramp: embed the collective endpoints symmetrically.  Dynamics
    # started in the symmetric sector never leaves it, so this is equivalent.
    embed = symmetric_embedding(ramp.basis)
    return (embed @ ramp.h_start.matrix @ embed.conj().T,
            embed @ ramp.h_end.matrix @ embed.conj().T)
