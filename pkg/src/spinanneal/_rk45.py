"""Compiled adaptive Dormand-Prince 5(4) propagation kernels.

One stepper drives three right-hand sides selected by an integer code:

* 0 - Schrodinger equation for a state vector,
* 1 - eigenbasis-resolved dissipative master equation on vec(rho),
* 2 - GKSL master equation with static jump operators on vec(rho).

All Hamiltonians are affine ramps H(t) = (1 - t/T) H0 + (t/T) H1.  Output is
sampled on a caller-supplied time grid through the standard quartic dense
output of the Dormand-Prince pair (coefficients as in scipy's RK45), so the
adaptive step sequence is independent of the sampling grid.  Step control is
the PI controller with the usual safety factor and growth clamps.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EQ_SCHRODINGER = 0
EQ_EIGENBASIS_ME = 1
EQ_GKSL = 2

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_NONFINITE = 2
STATUS_STEP_UNDERFLOW = 3
STATUS_DIVERGED = 4

# Dormand-Prince 5(4) tableau with FSAL; E is the embedded error weight over
# all seven stages and P the quartic dense-output map (theta powers 1..4).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
])
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([
    -71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40,
])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - 0.75 * _BETA
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@njit(cache=True, nogil=True)
def gamma_scalar(omega, eta, t_env, omega_c, eps, literal):
    """Ohmic bath power spectrum with exponential cutoff, Gamma(0) = eta * T.

    ``literal`` selects the three-branch form whose negative-frequency branch
    reuses the emission thermal factor (no detailed balance); the default form
    divides by (1 - e^{-omega/T} +/- eps) with the regulariser sign matching
    the denominator, which satisfies Gamma(-w) = e^{-w/T} Gamma(w) up to eps.
    """
    if omega == 0.0:
        return eta * t_env
    x = omega / t_env
    cut = math.exp(-abs(omega) / omega_c)
    if literal:
        ax = abs(x)
        if ax > 700.0:
            thermal = 1.0
        else:
            thermal = 1.0 / (math.expm1(ax) + eps) + 1.0
        return eta * abs(omega) * cut * thermal
    if omega > 0.0:
        return eta * omega * cut / (-math.expm1(-x) + eps)
    ax = -x
    if ax > 700.0:
        return 0.0
    return eta * (-omega) * cut / (math.expm1(ax) + eps)


@njit(cache=True, nogil=True)
def _rhs_schrodinger(t, y, h0, h1, t_ramp, a_op, b_op, c_op, p):
    s = t / t_ramp
    m = (1.0 - s) * h0 + s * h1
    return -1j * (m @ y)


@njit(cache=True, nogil=True)
def _rhs_eigenbasis_me(t, y, h0, h1, t_ramp, a_op, b_op, c_op, p):
    # p = [eta, t_env, omega_c, eps, literal_flag]
    d = a_op.shape[0]
    rho = y.reshape(d, d)
    # The generator maps Hermitian to Hermitian but need not damp the
    # anti-Hermitian roundoff sector; project it out so it cannot grow.
    rho = 0.5 * (rho + rho.conj().T)
    s = t / t_ramp
    m = (1.0 - s) * h0 + s * h1
    w, v = np.linalg.eigh(m)
    vh = np.ascontiguousarray(v.conj().T)
    abar = vh @ a_op @ v
    rbar = vh @ rho @ v
    g = np.empty((d, d))
    literal = p[4] != 0.0
    for i in range(d):
        for j in range(d):
            g[i, j] = gamma_scalar(w[j] - w[i], p[0], p[1], p[2], p[3], literal)
    atil = g * abar
    abar_h = np.ascontiguousarray(abar.conj().T)
    atil_h = np.ascontiguousarray(atil.conj().T)
    loss = abar_h @ atil
    diss = atil @ rbar @ abar_h + abar @ rbar @ atil_h - loss @ rbar - rbar @ loss.conj().T
    comm = (-1j) * (w.reshape(d, 1) - w.reshape(1, d)) * rbar
    drho = v @ (comm + diss) @ vh
    return drho.reshape(d * d)


@njit(cache=True, nogil=True)
def _rhs_gksl(t, y, h0, h1, t_ramp, a_op, b_op, c_op, p):
    # a_op = L, b_op = L^dag L, c_op = L L^dag, p = [rate_down, rate_up]
    d = a_op.shape[0]
    rho = y.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)  # same anti-Hermitian guard as above
    s = t / t_ramp
    m = (1.0 - s) * h0 + s * h1
    ld = a_op.conj().T
    drho = -1j * (m @ rho - rho @ m)
    if p[0] != 0.0:
        drho = drho + p[0] * (a_op @ rho @ ld - 0.5 * (b_op @ rho + rho @ b_op))
    if p[1] != 0.0:
        drho = drho + p[1] * (ld @ rho @ a_op - 0.5 * (c_op @ rho + rho @ c_op))
    return drho.reshape(d * d)


@njit(cache=True, nogil=True)
def _eval_rhs(eq, t, y, h0, h1, t_ramp, a_op, b_op, c_op, p):
    if eq == 0:
        return _rhs_schrodinger(t, y, h0, h1, t_ramp, a_op, b_op, c_op, p)
    elif eq == 1:
        return _rhs_eigenbasis_me(t, y, h0, h1, t_ramp, a_op, b_op, c_op, p)
    return _rhs_gksl(t, y, h0, h1, t_ramp, a_op, b_op, c_op, p)


@njit(cache=True, nogil=True)
def _error_norm(err, y_old, y_new, rtol, atol):
    n = err.shape[0]
    acc = 0.0
    for i in range(n):
        scale = atol + rtol * max(abs(y_old[i]), abs(y_new[i]))
        q = abs(err[i]) / scale
        acc += q * q
    return math.sqrt(acc / n)


@njit(cache=True, nogil=True)
def _renormalize(y, dim, norm_mode, drift_tol):
    """Pull the conserved normalization back to 1 when drift exceeds tolerance.

    Returns (renormalized?, drift before correction).
    """
    if norm_mode == 1:
        nrm = 0.0
        for i in range(y.shape[0]):
            nrm += abs(y[i]) ** 2
        nrm = math.sqrt(nrm)
        drift = abs(nrm - 1.0)
        if drift > drift_tol:
            for i in range(y.shape[0]):
                y[i] /= nrm
            return True, drift
        return False, drift
    elif norm_mode == 2:
        tr = 0.0 + 0.0j
        for i in range(dim):
            tr += y[i * dim + i]
        drift = abs(tr - 1.0)
        if drift > drift_tol:
            for i in range(y.shape[0]):
                y[i] /= tr
            return True, drift
        return False, drift
    return False, 0.0


@njit(cache=True, nogil=True)
def integrate_ramp(eq, t0, t1, y0, rtol, atol, h_init, max_step, max_steps,
                   sample_ts, dim, norm_mode, drift_tol,
                   h0, h1, t_ramp, a_op, b_op, c_op, p):
    """Propagate y' = f(t, y) from t0 to t1, sampling on ``sample_ts``.

    Returns (samples, status, n_accepted, n_rejected, n_renorm, max_drift).
    """
    n = y0.shape[0]
    n_samp = sample_ts.shape[0]
    samples = np.zeros((n_samp, n), dtype=np.complex128)
    y = y0.copy()
    t = t0
    k = np.empty((7, n), dtype=np.complex128)
    k[0] = _eval_rhs(eq, t, y, h0, h1, t_ramp, a_op, b_op, c_op, p)

    isamp = 0
    if n_samp > 0 and sample_ts[0] <= t0:
        samples[0] = y
        isamp = 1

    span = t1 - t0
    h = min(h_init, max_step, span)
    facold = 1e-4
    just_rejected = False
    n_accepted = 0
    n_rejected = 0
    n_renorm = 0
    max_drift = 0.0
    status = STATUS_OK
    tiny = 1e-14 * max(abs(t0), abs(t1), 1.0)

    while t < t1 - tiny:
        if n_accepted + n_rejected >= max_steps:
            status = STATUS_MAX_STEPS
            break
        if h < tiny:
            status = STATUS_STEP_UNDERFLOW
            break
        if t + h > t1:
            h = t1 - t

        # Six fresh stages; k[0] carries over from FSAL.
        for stage in range(1, 6):
            yt = y.copy()
            for prev in range(stage):
                aij = _A[stage, prev]
                if aij != 0.0:
                    yt += (h * aij) * k[prev]
            k[stage] = _eval_rhs(eq, t + _C[stage] * h, yt, h0, h1, t_ramp,
                                 a_op, b_op, c_op, p)
        y_new = y.copy()
        for stage in range(6):
            bj = _B[stage]
            if bj != 0.0:
                y_new += (h * bj) * k[stage]
        k[6] = _eval_rhs(eq, t + h, y_new, h0, h1, t_ramp, a_op, b_op, c_op, p)

        err_vec = np.zeros(n, dtype=np.complex128)
        for stage in range(7):
            ej = _E[stage]
            if ej != 0.0:
                err_vec += (h * ej) * k[stage]
        err = _error_norm(err_vec, y, y_new, rtol, atol)

        if not math.isfinite(err):
            n_rejected += 1
            just_rejected = True
            h *= 0.25
            continue

        if err <= 1.0:
            # Dense output for every sample time inside (t, t + h].
            t_next = t + h
            while isamp < n_samp and sample_ts[isamp] <= t_next + tiny:
                ts = sample_ts[isamp]
                theta = (ts - t) / h
                if theta >= 1.0 - 1e-12:
                    samples[isamp] = y_new
                else:
                    th1 = theta
                    th2 = th1 * theta
                    th3 = th2 * theta
                    th4 = th3 * theta
                    ys = y.copy()
                    for stage in range(7):
                        wgt = (_P[stage, 0] * th1 + _P[stage, 1] * th2
                               + _P[stage, 2] * th3 + _P[stage, 3] * th4)
                        if wgt != 0.0:
                            ys += (h * wgt) * k[stage]
                    samples[isamp] = ys
                isamp += 1

            renormed, drift = _renormalize(y_new, dim, norm_mode, drift_tol)
            if drift > max_drift:
                max_drift = drift
            biggest = 0.0
            for i in range(n):
                mag = abs(y_new[i])
                if mag > biggest:
                    biggest = mag
            if drift > 0.5 or biggest > 1e3:
                # Physical states have entries of order one; runaway growth
                # (possibly trace-preserving) means the generator has a
                # growing mode at these parameters.
                status = STATUS_DIVERGED
                break
            if renormed:
                n_renorm += 1
                k[0] = _eval_rhs(eq, t_next, y_new, h0, h1, t_ramp,
                                 a_op, b_op, c_op, p)
            else:
                k[0] = k[6]
            finite = True
            for i in range(n):
                val = y_new[i]
                if not (math.isfinite(val.real) and math.isfinite(val.imag)):
                    finite = False
                    break
            if not finite:
                status = STATUS_NONFINITE
                break
            y = y_new
            t = t_next
            n_accepted += 1

            if err == 0.0:
                factor = 1.0 / _MIN_FACTOR
            else:
                fac11 = err ** _EXPO1
                fac = fac11 / (facold ** _BETA)
                factor = 1.0 / min(1.0 / _MIN_FACTOR,
                                   max(1.0 / _MAX_FACTOR, fac / _SAFETY))
            if just_rejected:
                factor = min(factor, 1.0)
            h = min(h * factor, max_step)
            facold = max(err, 1e-4)
            just_rejected = False
        else:
            n_rejected += 1
            just_rejected = True
            fac11 = err ** _EXPO1
            h = h / min(1.0 / _MIN_FACTOR, fac11 / _SAFETY)

    if status == STATUS_OK and isamp < n_samp:
        # Numerical endpoint slack: remaining samples sit at t1.
        while isamp < n_samp:
            samples[isamp] = y
            isamp += 1
    return samples, status, n_accepted, n_rejected, n_renorm, max_drift


_DUMMY = np.zeros((1, 1), dtype=np.complex128)


def propagate(eq: int, y0: np.ndarray, t_span: tuple[float, float],
              sample_ts: np.ndarray, h0: np.ndarray, h1: np.ndarray,
              t_ramp: float, *, rtol: float, atol: float, initial_step: float,
              max_step: float, max_steps: int, dim: int, norm_mode: int,
              drift_tol: float, a_op: np.ndarray | None = None,
              b_op: np.ndarray | None = None, c_op: np.ndarray | None = None,
              params: np.ndarray | None = None):
    """Python-facing wrapper that fixes dtypes/contiguity for the jit core."""
    def cmat(x):
        return np.ascontiguousarray(_DUMMY if x is None else x, dtype=np.complex128)

    return integrate_ramp(
        eq, float(t_span[0]), float(t_span[1]),
        np.ascontiguousarray(y0, dtype=np.complex128),
        float(rtol), float(atol), float(initial_step), float(max_step),
        int(max_steps), np.ascontiguousarray(sample_ts, dtype=np.float64),
        int(dim), int(norm_mode), float(drift_tol),
        cmat(h0), cmat(h1), float(t_ramp), cmat(a_op), cmat(b_op), cmat(c_op),
        np.ascontiguousarray(params if params is not None else np.zeros(5)),
    )
