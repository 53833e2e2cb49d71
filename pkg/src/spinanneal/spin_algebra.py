"""Collective-spin operators and states on the maximum angular momentum basis.

N spin-1/2 particles restricted to their total-spin S = N/2 sector live in an
(N+1)-dimensional space spanned by |S, m> with m = S, S-1, ..., -S (that
ordering is used everywhere: index 0 is m = S).  Operators are dense complex
matrices.  Magnetization operators use the summed-Pauli convention
M_a = sum_i sigma_i^a = 2*S_a, so expressions written in terms of Pauli sums
over sites hold verbatim on this basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-12
STATE_NORM_TOL = 1e-9
DEGENERACY_TOL = 1e-9

AXES = ("x", "y", "z")


class BasisMismatchError(ValueError):
    """Two objects defined on different collective bases were combined."""


@dataclass(frozen=True)
class CollectiveBasis:
    """Maximum total-spin sector of ``n_qubits`` spin-1/2 particles."""

    n_qubits: int

    def __post_init__(self):
        if not isinstance(self.n_qubits, (int, np.integer)) or self.n_qubits < 1:
            raise ValueError(f"n_qubits must be a positive integer, got {self.n_qubits!r}")

    @property
    def spin(self) -> float:
        """Total spin S = N/2 (half-integer for odd N)."""
        return self.n_qubits / 2

    @property
    def dim(self) -> int:
        """Sector dimension 2S + 1 = N + 1."""
        return self.n_qubits + 1

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in storage order: S, S-1, ..., -S."""
        return self.spin - np.arange(self.dim)


def _require_same_basis(a, b):
    if a.basis != b.basis:
        raise BasisMismatchError(
            f"basis mismatch: {a.basis.n_qubits} qubits vs {b.basis.n_qubits} qubits"
        )


@dataclass(frozen=True)
class Operator:
    """Dense operator on a collective basis.

    ``hermitian_hint`` declares the matrix Hermitian; construction verifies
    the claim to ``HERMITIAN_TOL`` in max-abs deviation.
    """

    basis: CollectiveBasis
    matrix: np.ndarray = field(repr=False)
    hermitian_hint: bool = False

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if mat.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(
                f"matrix shape {mat.shape} does not match basis dimension {self.basis.dim}"
            )
        if self.hermitian_hint:
            dev = np.max(np.abs(mat - mat.conj().T))
            if dev >= HERMITIAN_TOL:
                raise ValueError(f"hermitian_hint set but max |M - M^dag| = {dev:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    # Small algebra helpers; hints propagate only where Hermiticity is
    # guaranteed by structure.
    def __add__(self, other: "Operator") -> "Operator":
        _require_same_basis(self, other)
        return Operator(self.basis, self.matrix + other.matrix,
                        self.hermitian_hint and other.hermitian_hint)

    def __sub__(self, other: "Operator") -> "Operator":
        _require_same_basis(self, other)
        return Operator(self.basis, self.matrix - other.matrix,
                        self.hermitian_hint and other.hermitian_hint)

    def __mul__(self, scalar) -> "Operator":
        keep = self.hermitian_hint and np.isrealobj(np.asarray(scalar))
        return Operator(self.basis, self.matrix * scalar, keep)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Operator":
        return self * (1.0 / scalar)

    def __matmul__(self, other: "Operator") -> "Operator":
        _require_same_basis(self, other)
        return Operator(self.basis, self.matrix @ other.matrix, False)

    def dagger(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T, self.hermitian_hint)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix)))


@dataclass(frozen=True)
class PureState:
    """Normalized state vector in the |S, m> basis (m descending)."""

    basis: CollectiveBasis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (self.basis.dim,):
            raise ValueError(
                f"amplitude shape {amp.shape} does not match basis dimension {self.basis.dim}"
            )
        nrm = np.linalg.norm(amp)
        if abs(nrm - 1.0) >= STATE_NORM_TOL:
            raise ValueError(f"state not normalized: |psi| = {nrm!r}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)


def identity(basis: CollectiveBasis) -> Operator:
    return Operator(basis, np.eye(basis.dim), hermitian_hint=True)


def m_eigenstate(basis: CollectiveBasis, m) -> PureState:
    """Basis state |S, m> (an eigenstate of M_z with eigenvalue 2m)."""
    idx = basis.spin - m
    k = int(round(idx))
    if abs(idx - k) > 1e-12 or not 0 <= k < basis.dim:
        raise ValueError(f"m = {m} is not in the ladder S, S-1, ..., -S for S = {basis.spin}")
    amp = np.zeros(basis.dim, dtype=np.complex128)
    amp[k] = 1.0
    return PureState(basis, amp)


def magnetization_operator(basis: CollectiveBasis, axis: str) -> Operator:
    """Total magnetization M_a = sum over sites of sigma_a, restricted to the sector.

    Built from the spin-S ladder operators: M_z = 2*diag(m) and
    M_x, M_y from S_plus with matrix elements sqrt(S(S+1) - m(m+1)).
    Eigenvalues are exactly {-N, -N+2, ..., N}.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    s = basis.spin
    m = basis.m_values()
    if axis == "z":
        return Operator(basis, np.diag(2.0 * m).astype(np.complex128), hermitian_hint=True)
    # S_plus maps |m_k> -> |m_k + 1>, i.e. column k to row k-1 in descending-m order.
    c = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    s_plus = np.zeros((basis.dim, basis.dim), dtype=np.complex128)
    s_plus[np.arange(basis.dim - 1), np.arange(1, basis.dim)] = c
    if axis == "x":
        mat = s_plus + s_plus.conj().T
    else:
        mat = -1j * (s_plus - s_plus.conj().T)
    return Operator(basis, mat, hermitian_hint=True)


def parity_operator(basis: CollectiveBasis) -> Operator:
    """The conserved parity K = exp(i (pi/2) M_x).

    Computed from the eigendecomposition M_x = V diag(2m) V^dag as
    K = V diag(e^{i pi m}) V^dag, which is exactly unitary by construction.
    The M_x spectrum is snapped to its exact integer values before
    exponentiating, so the eigenphases are exact roots of unity.  For even N
    (integer S) the eigenvalues are +/-1 and K is Hermitian with K^2 = I;
    for odd N they are +/-i.
    """
    mx = magnetization_operator(basis, "x")
    w, v = np.linalg.eigh(mx.matrix)
    m_exact = np.round(w) / 2.0
    phases = np.exp(1j * np.pi * m_exact)
    mat = (v * phases) @ v.conj().T
    hermitian = basis.n_qubits % 2 == 0
    if hermitian:
        mat = (mat + mat.conj().T) / 2.0
    return Operator(basis, mat, hermitian_hint=hermitian)


def commutator(a: Operator, b: Operator) -> Operator:
    """[a, b] = ab - ba on a shared basis."""
    _require_same_basis(a, b)
    return Operator(a.basis, a.matrix @ b.matrix - b.matrix @ a.matrix, False)


def expectation(op: Operator, state: PureState) -> complex:
    """<psi| Op |psi>; real up to 1e-10 imaginary part for Hermitian operators."""
    _require_same_basis(op, state)
    val = complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))
    if op.hermitian_hint and abs(val.imag) > 1e-10:
        raise ValueError(f"Hermitian expectation came out complex: {val!r}")
    return val


def _pivot_index(vec: np.ndarray) -> int:
    """Smallest index whose amplitude magnitude ties the maximum (to 1e-12)."""
    mags = np.abs(vec)
    return int(np.flatnonzero(mags >= mags.max() * (1.0 - 1e-12))[0])


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the pivot amplitude is real positive.

    The pivot is the largest-magnitude amplitude; magnitude ties (within
    relative 1e-12, so floating-point dust cannot flip the choice) break
    toward the smallest index.
    """
    k = _pivot_index(vec)
    pivot = vec[k]
    out = vec * (pivot.conjugate() / abs(pivot))
    out[k] = abs(pivot)  # exact, no residual imaginary dust on the pivot
    return out


def lowest_eigenpair(op: Operator) -> tuple[float, PureState]:
    """Smallest eigenvalue and a deterministically chosen eigenvector.

    When the lowest eigenvalue is degenerate (within DEGENERACY_TOL scaled by
    the spectral range), the returned eigenvector is the one from the
    eigensolver's degenerate set whose largest-magnitude amplitude sits at the
    smallest index in the m = S..-S ordering; its phase is fixed so that
    amplitude is real positive.
    """
    if not op.hermitian_hint:
        raise ValueError("lowest_eigenpair requires a Hermitian operator (hermitian_hint)")
    w, v = np.linalg.eigh(op.matrix)
    scale = max(1.0, float(w[-1] - w[0]))
    cluster = np.flatnonzero(w - w[0] <= DEGENERACY_TOL * scale)
    pick = cluster[0]
    if len(cluster) > 1:
        pivots = [_pivot_index(v[:, j]) for j in cluster]
        pick = cluster[int(np.argmin(pivots))]
    vec = _fix_phase(v[:, pick].copy())
    return float(w[0]), PureState(op.basis, vec)
