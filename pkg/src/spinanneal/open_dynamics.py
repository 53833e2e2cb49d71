"""Open-system dynamics: eigenbasis-resolved master equation and GKSL channel.

The dissipative master equation decomposes the noise operator at the Bohr
frequencies of the instantaneous Hamiltonian,

    d rho/dt = -i [H(t), rho]
               + sum_{w, w'} Gamma(w') (A(w') rho A(w)^dag - A(w)^dag A(w') rho)
               + h.c.,

without a rotating-wave approximation (all w != w' cross terms kept).  A bath
that does not commute with the parity observable moves population between
sectors that coherent dynamics cannot connect.  The GKSL channel instead uses
the static collective lowering operator and so knows nothing about the
instantaneous eigenstructure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _rk45
from .closed_dynamics import IntegrationError, IntegratorOptions, _check_status
from .hamiltonians import as_ramp
from .spectrum import SpectrumSnapshot, _eigh_snapshot
from .spin_algebra import (
    CollectiveBasis,
    Operator,
    PureState,
    commutator,
    lowest_eigenpair,
    magnetization_operator,
    parity_operator,
)

TRACE_TOL = 1e-6
HERMITICITY_TOL = 1e-8
POSITIVITY_WARN = -1e-6
POSITIVITY_ABORT = -1e-4
BOHR_COMPLETENESS_TOL = 1e-12


class GammaMode(str, Enum):
    """Which branch family the bath power spectrum uses."""

    KMS = "kms"          # detailed-balance form, Gamma(-w) = e^(-w/T) Gamma(w)
    LITERAL = "literal"  # three-branch form with the emission factor on both signs


@dataclass(frozen=True)
class SpectralDensity:
    """Ohmic bath parameters (k_B = 1): strength, temperature, cutoff, regulariser."""

    t_env: float
    mode: GammaMode
    eta: float = 0.1
    omega_c: float = 20.0
    epsilon: float = 1e-7

    def __post_init__(self):
        object.__setattr__(self, "mode", GammaMode(self.mode))
        for name in ("t_env", "eta", "omega_c", "epsilon"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")


def gamma(omega: float, sd: SpectralDensity) -> float:
    """Bath power spectrum Gamma(omega) >= 0; Gamma(0) = eta * t_env in both modes."""
    return float(_rk45.gamma_scalar(
        float(omega), sd.eta, sd.t_env, sd.omega_c, sd.epsilon,
        sd.mode is GammaMode.LITERAL,
    ))


@dataclass(frozen=True)
class NoiseSpec:
    """Single system-side noise operator (one coupling channel).

    The dissipative route to the final ground state exists only when the
    operator fails to commute with the parity observable; callers are warned
    otherwise rather than stopped, so the commuting case can be studied.
    """

    operator: Operator

    def breaks_parity(self) -> bool:
        k = parity_operator(self.operator.basis)
        return commutator(self.operator, k).max_abs() > 1e-10


def default_noise(basis: CollectiveBasis) -> NoiseSpec:
    """Transverse collective noise M_y, which anticommutes with the parity."""
    return NoiseSpec(magnetization_operator(basis, "y"))


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix: Hermitian, unit trace, no significant negativity.

    Eigenvalues may dip slightly negative for the non-completely-positive
    master equation; dips past POSITIVITY_WARN warn and past POSITIVITY_ABORT
    raise.
    """

    basis: CollectiveBasis
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if mat.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(
                f"matrix shape {mat.shape} does not match basis dimension {self.basis.dim}"
            )
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        if herm >= HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) >= TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} is not 1")
        lam = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)[0])
        if lam <= POSITIVITY_ABORT:
            raise ValueError(f"density matrix has eigenvalue {lam:.3e} below {POSITIVITY_ABORT}")
        if lam < POSITIVITY_WARN:
            warnings.warn(f"density matrix eigenvalue {lam:.3e} slightly negative",
                          stacklevel=2)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        return cls(state.basis, np.outer(state.amplitudes, state.amplitudes.conj()))


@dataclass(frozen=True)
class BohrDecomposition:
    """Jump components A(w) of an operator at the distinct eigenvalue differences.

    Completeness (sum of components equals the operator) and conjugation
    (A(-w) = A(w)^dag for Hermitian input) hold by construction; frequencies
    include every clustered difference even when its component vanishes.
    """

    frequencies: np.ndarray
    components: list[Operator]

    def reconstruct(self) -> np.ndarray:
        return sum(c.matrix for c in self.components)

    def component(self, omega: float) -> Operator:
        idx = int(np.argmin(np.abs(self.frequencies - omega)))
        return self.components[idx]


def bohr_decomposition(snapshot: SpectrumSnapshot, a: Operator,
                       omega_tol: float | None = None) -> BohrDecomposition:
    """Split ``a`` into eigenbasis blocks A(w) = sum_{e' - e = w} |e><e| a |e'><e'|.

    Pairwise eigenvalue differences are clustered to ``omega_tol`` (default
    1e-9 times the spectral range); exact negation symmetry of the difference
    multiset makes the cluster representatives exact +/- pairs with an exact
    zero cluster.
    """
    w = np.asarray(snapshot.eigenvalues, dtype=float)
    v = snapshot.vector_matrix()
    d = len(w)
    if a.matrix.shape != (d, d):
        raise ValueError("operator dimension does not match the snapshot")
    span = float(w[-1] - w[0])
    tol = omega_tol if omega_tol is not None else 1e-9 * max(1.0, span)

    abar = v.conj().T @ a.matrix @ v
    if a.hermitian_hint:
        abar = (abar + abar.conj().T) / 2.0

    diffs = (w.reshape(1, d) - w.reshape(d, 1)).ravel()  # entry (i, j): w_j - w_i
    order = np.argsort(diffs, kind="stable")
    cluster_of = np.empty(d * d, dtype=int)
    reps = []
    start = 0
    sorted_diffs = diffs[order]
    for j in range(1, d * d + 1):
        if j == d * d or sorted_diffs[j] - sorted_diffs[j - 1] > tol:
            cluster_of[order[start:j]] = len(reps)
            reps.append(float(np.mean(sorted_diffs[start:j])))
            start = j
    cluster_of = cluster_of.reshape(d, d)

    components = []
    for ci in range(len(reps)):
        mask = cluster_of == ci
        block = np.where(mask, abar, 0.0)
        components.append(Operator(a.basis, v @ block @ v.conj().T, False))
    return BohrDecomposition(frequencies=np.array(reps), components=components)


def adiabatic_me_rhs(rho: np.ndarray | DensityMatrix, t: float, schedule,
                     noise: NoiseSpec, sd: SpectralDensity,
                     omega_tol: float | None = None,
                     secular: bool = False) -> np.ndarray:
    """Reference right-hand side of the dissipative master equation at time t.

    Built from the explicit Bohr decomposition; the compiled propagation path
    uses an algebraically identical per-element form.  ``secular`` keeps only
    the w = w' terms (diagnostic; detailed balance then fixes the Gibbs state
    of a frozen Hamiltonian).  The returned derivative is Hermitian and
    traceless to roundoff.
    """
    ramp = as_ramp(schedule)
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    h = ramp.hamiltonian(t)
    snap = _eigh_snapshot(h, s=t / ramp.t_anneal)
    dec = bohr_decomposition(snap, noise.operator, omega_tol)

    out = -1j * (h.matrix @ mat - mat @ h.matrix)
    if secular:
        for freq, comp in zip(dec.frequencies, dec.components):
            rate = gamma(freq, sd)
            if rate == 0.0:
                continue
            half = rate * (comp.matrix @ mat @ comp.matrix.conj().T
                           - comp.matrix.conj().T @ comp.matrix @ mat)
            out = out + half + half.conj().T
    else:
        a_full = noise.operator.matrix
        weighted = np.zeros_like(a_full)
        for freq, comp in zip(dec.frequencies, dec.components):
            weighted = weighted + gamma(freq, sd) * comp.matrix
        half = weighted @ mat @ a_full.conj().T - a_full.conj().T @ weighted @ mat
        out = out + half + half.conj().T
    return out


@dataclass(frozen=True)
class OpenTrajectory:
    """Uniformly sampled observables of one master-equation run.

    ``ground_population`` is the population of the instantaneous ground state
    (summed over a degenerate ground subspace); ``trace_error`` the raw
    per-sample |Tr rho - 1| before renormalization.
    """

    times: np.ndarray
    states: list[DensityMatrix]
    energy: np.ndarray
    ground_population: np.ndarray
    trace_error: np.ndarray
    min_eigenvalue: np.ndarray
    renormalizations: int
    positivity_warnings: int


def ground_population(rho: DensityMatrix | np.ndarray, h: Operator) -> float:
    """Population of the ground level of ``h``, summed over exact degeneracy."""
    if not h.hermitian_hint:
        raise ValueError("ground_population requires a Hermitian operator")
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    w, v = np.linalg.eigh(h.matrix)
    scale = max(1.0, float(w[-1] - w[0]))
    ground = v[:, w - w[0] <= 1e-9 * scale]
    return float(np.einsum("ij,ik,kj->", ground.conj(), mat, ground).real)


def _observe(samples: np.ndarray, times: np.ndarray, ramp, context: str) -> OpenTrajectory:
    dim = ramp.basis.dim
    states, energy, gpop, tr_err, min_eig = [], [], [], [], []
    renorm = 0
    warn_count = 0
    for i, t in enumerate(times):
        mat = samples[i].reshape(dim, dim)
        tr = complex(np.trace(mat))
        tr_err.append(abs(tr - 1.0))
        if tr_err[-1] > TRACE_TOL:
            renorm += 1
        mat = mat / tr
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        if herm >= HERMITICITY_TOL:
            raise IntegrationError(f"{context}: Hermiticity drift {herm:.3e} at t = {t}")
        lam = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)[0])
        min_eig.append(lam)
        if lam <= POSITIVITY_ABORT:
            raise IntegrationError(
                f"{context}: positivity violation {lam:.3e} at t = {t} "
                f"(below the {POSITIVITY_ABORT} abort threshold)"
            )
        if lam < POSITIVITY_WARN:
            warn_count += 1
        h_t = ramp.hamiltonian(t)
        energy.append(float(np.trace(h_t.matrix @ mat).real))
        gpop.append(ground_population(mat, h_t))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # per-sample dips already counted above
            states.append(DensityMatrix(ramp.basis, mat))
    if warn_count:
        warnings.warn(
            f"{context}: {warn_count} samples dipped below {POSITIVITY_WARN} "
            "in the smallest eigenvalue", stacklevel=3,
        )
    return OpenTrajectory(
        times=times, states=states, energy=np.array(energy),
        ground_population=np.array(gpop), trace_error=np.array(tr_err),
        min_eigenvalue=np.array(min_eig), renormalizations=renorm,
        positivity_warnings=warn_count,
    )


def _initial_density(ramp, rho0: DensityMatrix | None) -> np.ndarray:
    if rho0 is None:
        return DensityMatrix.from_pure(lowest_eigenpair(ramp.h_start)[1]).matrix
    if rho0.basis != ramp.basis:
        raise ValueError("initial density matrix basis does not match the schedule")
    return rho0.matrix


def evolve_adiabatic_me(schedule, sd: SpectralDensity,
                        rho0: DensityMatrix | None = None,
                        noise: NoiseSpec | None = None,
                        opts: IntegratorOptions | None = None,
                        n_samples: int = 101) -> OpenTrajectory:
    """Propagate the eigenbasis-resolved master equation along the ramp.

    The initial state defaults to the ground projector of H(0) and the noise
    operator to collective M_y.  The step size is capped at T/1e3 so the
    narrow window where the two lowest levels swap sectors is resolved.
    """
    ramp = as_ramp(schedule)
    opts = opts or IntegratorOptions()
    noise = noise or default_noise(ramp.basis)
    if noise.operator.basis != ramp.basis:
        raise ValueError("noise operator basis does not match the schedule")
    if not noise.breaks_parity():
        warnings.warn(
            "noise operator commutes with the parity observable; "
            "sector populations cannot mix", stacklevel=2,
        )
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    rho_start = _initial_density(ramp, rho0)
    times = np.linspace(0.0, ramp.t_anneal, n_samples)
    params = np.array([
        sd.eta, sd.t_env, sd.omega_c, sd.epsilon,
        1.0 if sd.mode is GammaMode.LITERAL else 0.0,
    ])
    samples, status, *_counts = _rk45.propagate(
        _rk45.EQ_EIGENBASIS_ME, rho_start.ravel(), (0.0, ramp.t_anneal), times,
        ramp.h_start.matrix, ramp.h_end.matrix, ramp.t_anneal,
        rtol=opts.rtol, atol=opts.atol,
        initial_step=opts.resolved_initial_step(ramp.t_anneal),
        max_step=opts.resolved_max_step(ramp.t_anneal / 1e3),
        max_steps=opts.max_steps, dim=ramp.basis.dim, norm_mode=2,
        drift_tol=TRACE_TOL, a_op=noise.operator.matrix, params=params,
    )
    _check_status(status, "master equation evolution")
    return _observe(samples, times, ramp, "master equation evolution")


def collective_lowering(basis: CollectiveBasis) -> Operator:
    """Collective lowering operator sum_i sigma_-^i = (M_x - i M_y) / 2."""
    mx = magnetization_operator(basis, "x").matrix
    my = magnetization_operator(basis, "y").matrix
    return Operator(basis, (mx - 1j * my) / 2.0, False)


def evolve_gksl(schedule, t_env: float, eta: float = 0.1,
                rho0: DensityMatrix | None = None,
                opts: IntegratorOptions | None = None,
                n_samples: int = 101) -> OpenTrajectory:
    """Propagate the finite-temperature GKSL equation with L = collective lowering.

    d rho/dt = -i[H, rho] + eta (n_b + 1) D[L] rho + eta n_b D[L^dag] rho with
    n_b = 1/(e^{1/t_env} - 1) (unit transition frequency) and
    D[X] rho = X rho X^dag - {X^dag X, rho}/2.  Completely positive, so the
    sampled spectrum stays nonnegative to integrator accuracy.
    """
    if not (math.isfinite(t_env) and t_env > 0):
        raise ValueError(f"t_env must be positive, got {t_env!r}")
    if not (math.isfinite(eta) and eta >= 0):
        raise ValueError(f"eta must be >= 0, got {eta!r}")
    ramp = as_ramp(schedule)
    opts = opts or IntegratorOptions()
    rho_start = _initial_density(ramp, rho0)
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    times = np.linspace(0.0, ramp.t_anneal, n_samples)

    lower = collective_lowering(ramp.basis).matrix
    n_b = 0.0 if 1.0 / t_env > 700.0 else 1.0 / math.expm1(1.0 / t_env)
    params = np.array([eta * (n_b + 1.0), eta * n_b, 0.0, 0.0, 0.0])
    samples, status, *_counts = _rk45.propagate(
        _rk45.EQ_GKSL, rho_start.ravel(), (0.0, ramp.t_anneal), times,
        ramp.h_start.matrix, ramp.h_end.matrix, ramp.t_anneal,
        rtol=opts.rtol, atol=opts.atol,
        initial_step=opts.resolved_initial_step(ramp.t_anneal),
        max_step=opts.resolved_max_step(ramp.t_anneal / 1e3),
        max_steps=opts.max_steps, dim=ramp.basis.dim, norm_mode=2,
        drift_tol=TRACE_TOL,
        a_op=lower, b_op=lower.conj().T @ lower, c_op=lower @ lower.conj().T,
        params=params,
    )
    _check_status(status, "GKSL evolution")
    return _observe(samples, times, ramp, "GKSL evolution")
