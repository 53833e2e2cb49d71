"""Instantaneous eigen-analysis along the ramp.

Spectra are labeled by parity sector.  Because the parity observable commutes
with every ramp Hamiltonian, each eigenvector can be chosen as a simultaneous
eigenvector; inside degenerate eigenvalue clusters this requires an explicit
rotation that diagonalizes the parity restriction, otherwise eigensolvers
return arbitrary mixtures and the sector label is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import AnnealSchedule, anneal_hamiltonian, schedule_derivative
from .spin_algebra import (
    Operator,
    PureState,
    _fix_phase,
    parity_operator,
)

COMMUTE_TOL = 1e-8
CLUSTER_TOL = 1e-9
SECTOR_TOL = 1e-6
CROSSING_RESOLUTION = 1e-6


class SectorLabelError(ValueError):
    """A parity-sector label could not be assigned unambiguously."""


@dataclass(frozen=True)
class SpectrumSnapshot:
    """Eigenvalues (ascending), simultaneous eigenvectors, and sector labels.

    ``sector`` is None when the snapshot was built without a parity operator.
    ``s`` is the normalized ramp position t/T when known.
    """

    eigenvalues: np.ndarray
    eigenvectors: list[PureState]
    sector: np.ndarray | None = None
    s: float | None = None

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def vector_matrix(self) -> np.ndarray:
        """Eigenvectors as columns, ordered like ``eigenvalues``."""
        return np.column_stack([st.amplitudes for st in self.eigenvectors])

    def gap(self, j: int) -> float:
        """Energy gap between level j and the ground level."""
        return float(self.eigenvalues[j] - self.eigenvalues[0])


@dataclass(frozen=True)
class SpectrumSweep:
    """Snapshots on a uniform grid s_i = i/(n-1) covering [0, 1]."""

    schedule: AnnealSchedule
    s_grid: np.ndarray
    snapshots: list[SpectrumSnapshot]


def _eigh_snapshot(h: Operator, s: float | None = None) -> SpectrumSnapshot:
    """Plain eigendecomposition with deterministic phases, no sector labels."""
    if not h.hermitian_hint:
        raise ValueError("diagonalization requires a Hermitian operator")
    w, v = np.linalg.eigh(h.matrix)
    states = [PureState(h.basis, _fix_phase(v[:, j].copy())) for j in range(len(w))]
    return SpectrumSnapshot(eigenvalues=w, eigenvectors=states, sector=None, s=s)


def _degenerate_clusters(w: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Half-open index ranges of eigenvalues equal within tol (adjacent-gap rule)."""
    clusters = []
    start = 0
    for j in range(1, len(w) + 1):
        if j == len(w) or w[j] - w[j - 1] > tol:
            clusters.append((start, j))
            start = j
    return clusters


def diagonalize(h: Operator, k: Operator, s: float | None = None) -> SpectrumSnapshot:
    """Simultaneous eigenbasis of ``h`` and the parity observable ``k``.

    Within each eigenvalue cluster degenerate to CLUSTER_TOL (scaled by the
    spectral range), eigenvectors are rotated to diagonalize the restriction
    of ``k`` and ordered by parity label descending (+1 before -1).  Raises
    SectorLabelError when a rotated eigenvector is not a clean parity
    eigenstate, and ValueError when [h, k] is not numerically zero.
    """
    if not h.hermitian_hint:
        raise ValueError("diagonalize requires a Hermitian operator")
    if h.basis.n_qubits % 2 != 0:
        raise SectorLabelError(
            "parity sector labels need integer collective spin (even qubit count); "
            f"got N = {h.basis.n_qubits}"
        )
    comm = h.matrix @ k.matrix - k.matrix @ h.matrix
    comm_dev = float(np.max(np.abs(comm)))
    if comm_dev >= COMMUTE_TOL:
        raise ValueError(f"operators do not commute: max |[h, k]| = {comm_dev:.3e}")

    w, v = np.linalg.eigh(h.matrix)
    scale = max(1.0, float(w[-1] - w[0]))
    for lo, hi in _degenerate_clusters(w, CLUSTER_TOL * scale):
        if hi - lo < 2:
            continue
        block = v[:, lo:hi]
        k_sub = block.conj().T @ k.matrix @ block
        k_sub = (k_sub + k_sub.conj().T) / 2.0
        kw, kv = np.linalg.eigh(k_sub)
        order = np.argsort(-kw, kind="stable")  # +1 sector listed first
        v[:, lo:hi] = block @ kv[:, order]

    labels = np.empty(len(w), dtype=int)
    states = []
    for j in range(len(w)):
        vec = _fix_phase(v[:, j].copy())
        val = complex(np.vdot(vec, k.matrix @ vec))
        if abs(val) < 1.0 - SECTOR_TOL or abs(val.imag) > SECTOR_TOL:
            raise SectorLabelError(
                f"ambiguous parity sector for level {j}: <K> = {val:.6g}"
            )
        labels[j] = 1 if val.real > 0 else -1
        states.append(PureState(h.basis, vec))
    return SpectrumSnapshot(eigenvalues=w, eigenvectors=states, sector=labels, s=s)


def sweep_spectrum(schedule: AnnealSchedule, n_points: int) -> SpectrumSweep:
    """Labeled snapshots on the uniform grid s_i = i/(n_points - 1)."""
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    k = parity_operator(schedule.basis)
    s_grid = np.linspace(0.0, 1.0, n_points)
    snapshots = [
        diagonalize(anneal_hamiltonian(schedule, s * schedule.t_anneal), k, s=float(s))
        for s in s_grid
    ]
    return SpectrumSweep(schedule=schedule, s_grid=s_grid, snapshots=snapshots)


def _ground_sector_at(schedule: AnnealSchedule, k: Operator, s: float) -> int:
    snap = diagonalize(anneal_hamiltonian(schedule, s * schedule.t_anneal), k, s=s)
    return int(snap.sector[0])


def detect_ground_crossing(sweep: SpectrumSweep) -> list[tuple[float, float]]:
    """Bracketing intervals for every parity flip of the instantaneous ground level.

    Each grid-adjacent flip is refined by bisection on the sector label to a
    width of at most CROSSING_RESOLUTION in s.  An empty list means the ground
    level stays in one sector across the whole ramp.
    """
    k = parity_operator(sweep.schedule.basis)
    sectors = [int(snap.sector[0]) for snap in sweep.snapshots]
    intervals = []
    for i in range(len(sectors) - 1):
        if sectors[i] == sectors[i + 1]:
            continue
        lo, hi = float(sweep.s_grid[i]), float(sweep.s_grid[i + 1])
        lo_sector = sectors[i]
        while hi - lo > CROSSING_RESOLUTION:
            mid = 0.5 * (lo + hi)
            if _ground_sector_at(sweep.schedule, k, mid) == lo_sector:
                lo = mid
            else:
                hi = mid
        intervals.append((lo, hi))
    return intervals


def adiabatic_metric(schedule: AnnealSchedule, t: float, j: int) -> float | None:
    """Adiabaticity ratio |<j| dH/dt |0>| / gap_j^2 at time t.

    Small values mean the ramp is effectively adiabatic for that level.  When
    the gap vanishes (a crossing) there is no finite ratio and None is
    returned instead.  Cross-sector pairs give exactly zero because dH/dt
    commutes with the parity observable.
    """
    if j < 1:
        raise ValueError(f"level index j must be >= 1, got {j}")
    k = parity_operator(schedule.basis)
    snap = diagonalize(anneal_hamiltonian(schedule, t), k, s=t / schedule.t_anneal)
    gap = snap.gap(j)
    scale = max(1.0, float(snap.eigenvalues[-1] - snap.eigenvalues[0]))
    if gap <= CLUSTER_TOL * scale:
        return None
    dh = schedule_derivative(schedule).matrix
    elem = np.vdot(snap.eigenvectors[j].amplitudes, dh @ snap.eigenvectors[0].amplitudes)
    return float(abs(elem) / gap**2)
