import numpy as np
import pytest

from spinanneal import AnnealSchedule, CollectiveBasis, ProblemKind


@pytest.fixture(scope="session")
def basis2():
    return CollectiveBasis(2)


@pytest.fixture(scope="session")
def basis6():
    return CollectiveBasis(6)


def make_schedule(n_qubits=2, t_anneal=1000.0, alpha=100.0, problem="ising",
                  delta=1.5):
    return AnnealSchedule(
        basis=CollectiveBasis(n_qubits), t_anneal=t_anneal, alpha=alpha,
        problem=ProblemKind(problem, delta),
    )


def max_abs(arr):
    return float(np.max(np.abs(arr)))
