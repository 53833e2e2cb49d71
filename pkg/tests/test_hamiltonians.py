"""Hamiltonian builders and the affine ramp."""

import numpy as np
import pytest

from spinanneal import (
    AnnealSchedule,
    CollectiveBasis,
    LinearRamp,
    ProblemKind,
    anneal_hamiltonian,
    commutator,
    driver_transverse,
    expectation,
    lowest_eigenpair,
    m_eigenstate,
    magnetization_operator,
    nonstoquastic_xx,
    parity_operator,
    problem_ising,
    problem_xxz,
    schedule_derivative,
)
from conftest import make_schedule, max_abs


# ------------------------------------------------------------------ kinds

def test_problem_kind_validation():
    with pytest.raises(ValueError, match="variant"):
        ProblemKind("heisenberg")
    with pytest.raises(ValueError, match="delta"):
        ProblemKind("xxz", float("nan"))
    assert ProblemKind.xxz().delta == 1.5


def test_schedule_validation(basis2):
    kind = ProblemKind.ising()
    with pytest.raises(ValueError, match="t_anneal"):
        AnnealSchedule(basis2, 0.0, 1.0, kind)
    with pytest.raises(ValueError, match="alpha"):
        AnnealSchedule(basis2, 10.0, -1.0, kind)


# ------------------------------------------------------------------ driver

def test_driver_is_mx(basis2):
    np.testing.assert_array_equal(
        driver_transverse(basis2).matrix, magnetization_operator(basis2, "x").matrix
    )


def test_driver_ground_energy(basis2):
    assert lowest_eigenpair(driver_transverse(basis2))[0] == pytest.approx(-2.0)


def test_driver_n1_is_pauli_x():
    np.testing.assert_allclose(
        driver_transverse(CollectiveBasis(1)).matrix, [[0, 1], [1, 0]], atol=1e-15
    )


# ------------------------------------------------------------- xx term

def test_xx_spectrum_n2(basis2):
    w = np.linalg.eigvalsh(nonstoquastic_xx(basis2).matrix)
    np.testing.assert_allclose(w, [0.0, 2.0, 2.0], atol=1e-12)


def test_xx_commutes_with_driver(basis2):
    dev = commutator(nonstoquastic_xx(basis2), driver_transverse(basis2))
    assert max_abs(dev.matrix) < 1e-12


def test_xx_ground_is_mx_zero(basis2):
    energy, state = lowest_eigenpair(nonstoquastic_xx(basis2))
    assert energy == pytest.approx(0.0, abs=1e-12)
    mx = magnetization_operator(basis2, "x")
    assert max_abs(mx.matrix @ state.amplitudes) < 1e-10


def test_xx_positive_semidefinite():
    for n in (2, 3, 6):
        w = np.linalg.eigvalsh(nonstoquastic_xx(CollectiveBasis(n)).matrix)
        assert w[0] > -1e-12


# ------------------------------------------------------------- problems

def test_ising_n2_matrix(basis2):
    np.testing.assert_allclose(
        problem_ising(basis2).matrix, np.diag([2.0, 0.0, 2.0]), atol=1e-14
    )
    energy, state = lowest_eigenpair(problem_ising(basis2))
    assert energy == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(state.amplitudes, [0, 1, 0], atol=1e-12)


def test_ising_commutes_with_parity(basis2):
    dev = commutator(problem_ising(basis2), parity_operator(basis2))
    assert max_abs(dev.matrix) < 1e-10


def test_ising_n1_is_identity():
    np.testing.assert_allclose(
        problem_ising(CollectiveBasis(1)).matrix, np.eye(2), atol=1e-14
    )


def test_xxz_n2_spectrum_and_ground(basis2):
    op = problem_xxz(basis2, 1.5)
    w = np.linalg.eigvalsh(op.matrix)
    # Oracle: on the fixed-spin sector the operator is
    # (4 S(S+1) + 4 (delta - 1) S_z^2)/N = 4 + S_z^2 at N=2, delta=1.5.
    np.testing.assert_allclose(w, [4.0, 5.0, 5.0], atol=1e-12)
    energy, state = lowest_eigenpair(op)
    assert energy == pytest.approx(4.0)
    np.testing.assert_allclose(state.amplitudes, m_eigenstate(basis2, 0).amplitudes,
                               atol=1e-10)


def test_xxz_isotropic_collapses_to_casimir(basis2):
    np.testing.assert_allclose(problem_xxz(basis2, 1.0).matrix, 4.0 * np.eye(3),
                               atol=1e-12)


def test_xxz_commutes_with_parity(basis2):
    dev = commutator(problem_xxz(basis2, 1.5), parity_operator(basis2))
    assert max_abs(dev.matrix) < 1e-10


def test_xxz_rejects_nonfinite_delta(basis2):
    with pytest.raises(ValueError, match="delta"):
        problem_xxz(basis2, float("inf"))


# ------------------------------------------------------------- ramp

def test_ramp_endpoints(basis2):
    sch = make_schedule(alpha=7.0)
    h0 = anneal_hamiltonian(sch, 0.0)
    expected0 = driver_transverse(basis2).matrix + 7.0 * nonstoquastic_xx(basis2).matrix
    np.testing.assert_allclose(h0.matrix, expected0, atol=1e-13)
    hT = anneal_hamiltonian(sch, sch.t_anneal)
    np.testing.assert_allclose(hT.matrix, problem_ising(basis2).matrix, atol=1e-13)


def test_ramp_midpoint_affine(basis2):
    sch = make_schedule(alpha=100.0)
    mid = anneal_hamiltonian(sch, sch.t_anneal / 2)
    mx = magnetization_operator(basis2, "x").matrix
    mz = magnetization_operator(basis2, "z").matrix
    expected = 0.5 * (mx + 100.0 * (mx @ mx) / 2) + 0.5 * (mz @ mz) / 2
    np.testing.assert_allclose(mid.matrix, expected, atol=1e-13)


def test_ramp_out_of_range(basis2):
    sch = make_schedule()
    with pytest.raises(ValueError, match="outside"):
        anneal_hamiltonian(sch, -1.0)
    with pytest.raises(ValueError, match="outside"):
        anneal_hamiltonian(sch, sch.t_anneal * 1.01)


def test_derivative_definition(basis2):
    sch = make_schedule(alpha=0.0)
    dh = schedule_derivative(sch).matrix
    expected = (problem_ising(basis2).matrix
                - driver_transverse(basis2).matrix) / sch.t_anneal
    np.testing.assert_allclose(dh, expected, atol=1e-15)


@pytest.mark.parametrize("t_frac", [0.0, 0.25, 0.9])
def test_derivative_matches_finite_difference(t_frac):
    sch = make_schedule(alpha=3.0)
    t = t_frac * sch.t_anneal
    delta = 1e-4
    fd = (anneal_hamiltonian(sch, t + delta).matrix
          - anneal_hamiltonian(sch, t).matrix) / delta
    assert max_abs(fd - schedule_derivative(sch).matrix) < 1e-10


def test_derivative_scales_inversely_with_t(basis2):
    short = make_schedule(t_anneal=500.0)
    long = make_schedule(t_anneal=1000.0)
    np.testing.assert_allclose(
        schedule_derivative(long).matrix, 0.5 * schedule_derivative(short).matrix,
        atol=1e-18,
    )


def test_linear_ramp_frozen_hamiltonian(basis2):
    h = problem_ising(basis2)
    ramp = LinearRamp(basis=basis2, t_anneal=10.0, h_start=h, h_end=h)
    np.testing.assert_array_equal(ramp.hamiltonian(3.0).matrix, h.matrix)
    assert max_abs(ramp.derivative().matrix) == 0.0


# ------------------------------------------------- sector criteria

@pytest.mark.parametrize("problem", ["ising", "xxz"])
def test_sector_criterion_n2(problem):
    sch0 = make_schedule(alpha=0.0, problem=problem)
    sch100 = make_schedule(alpha=100.0, problem=problem)
    k = parity_operator(sch0.basis)

    def ground_parity(sch, t):
        _, gs = lowest_eigenpair(anneal_hamiltonian(sch, t))
        return expectation(k, gs).real

    assert ground_parity(sch0, 0.0) == pytest.approx(-1.0, abs=1e-10)
    assert ground_parity(sch100, 0.0) == pytest.approx(+1.0, abs=1e-10)
    assert ground_parity(sch0, sch0.t_anneal) == pytest.approx(-1.0, abs=1e-10)
    assert ground_parity(sch100, sch100.t_anneal) == pytest.approx(-1.0, abs=1e-10)


@pytest.mark.parametrize("problem", ["ising", "xxz"])
@pytest.mark.parametrize("alpha", [0.0, 100.0])
def test_builders_hermitian_and_consistent(problem, alpha):
    sch = make_schedule(alpha=alpha, problem=problem)
    for s in (0.0, 0.5, 1.0):
        h = anneal_hamiltonian(sch, s * sch.t_anneal)
        assert h.hermitian_hint
        assert max_abs(h.matrix - h.matrix.conj().T) < 1e-12
        assert h.matrix.shape == (sch.basis.dim, sch.basis.dim)
