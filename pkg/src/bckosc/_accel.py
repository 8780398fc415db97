"""Hot numerical kernels: time-function evaluation, the adaptive embedded
Runge-Kutta 5(4) integrator with dense output, and the Crank-Nicolson step.

Kernels are compiled with numba when it is importable.  Setting the
environment variable ``BCKOSC_NO_NUMBA=1`` before import forces the pure
Python/NumPy path (same code, uncompiled).  ``benchmarks/bench_kernels.py``
measures the difference.
"""

import os

import numpy as np

_flag = os.environ.get("BCKOSC_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in ("1", "true", "yes", "on")

if not NUMBA_DISABLED:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised only without numba
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if NUMBA_ENABLED:
    def _jit(fn):
        return njit(cache=True)(fn)
else:
    def _jit(fn):
        return fn


# ---------- time-function encoding ----------
# kind codes shared with core.TimeFunction
KIND_POLY = 0     # params: up to 6 ascending polynomial coefficients
KIND_SIN = 1      # params: A, angular frequency, phase, offset
KIND_EXP = 2      # params: A, rate, offset
KIND_PPOLY = 3    # piecewise polynomial: breaks + per-segment ascending coeffs

# fixed slots of the per-scenario function table
SLOT_OMEGA = 0
SLOT_DOMEGA = 1
SLOT_DAMPING = 2
SLOT_DDAMPING = 3
SLOT_FORCE = 4
SLOT_DFORCE = 5
SLOT_G = 6

# system ids for the ODE right-hand side dispatch
SYS_BETA = 0       # [Re b, Im b, Re b', Im b', Re F, Im F, Re P, Im P, phi]
SYS_CLASSICAL = 1  # [q, p]
SYS_GAMMA = 2      # [gamma, gamma', gamma'']
SYS_SIGMA = 3      # [sigma, sigma']
SYS_C = 4          # [c1, c2, c3, c4, c5]

_SYS_DIM = {SYS_BETA: 9, SYS_CLASSICAL: 2, SYS_GAMMA: 3, SYS_SIGMA: 2, SYS_C: 5}


def system_dim(sys_id):
    return _SYS_DIM[sys_id]


def _tf_value(kinds, params, breaks, coefs, boff, coff, nseg, i, t):
    kind = kinds[i]
    if kind == KIND_POLY:
        v = params[i, 5]
        for k in range(4, -1, -1):
            v = v * t + params[i, k]
        return v
    elif kind == KIND_SIN:
        return params[i, 0] * np.sin(params[i, 1] * t + params[i, 2]) + params[i, 3]
    elif kind == KIND_EXP:
        return params[i, 0] * np.exp(params[i, 1] * t) + params[i, 2]
    else:
        b0 = boff[i]
        ns = nseg[i]
        # clamp to the tabulated range; domain checks happen before integration
        if t <= breaks[b0]:
            seg = 0
        elif t >= breaks[b0 + ns]:
            seg = ns - 1
        else:
            lo = 0
            hi = ns
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if breaks[b0 + mid] <= t:
                    lo = mid
                else:
                    hi = mid
            seg = lo
        u = t - breaks[b0 + seg]
        row = coff[i] + seg
        v = coefs[row, 4]
        for k in range(3, -1, -1):
            v = v * u + coefs[row, k]
        return v


def _rhs(sys_id, t, y, dy, m, tk, tp, tb, tc, tboff, tcoff, tnseg, gts, gys, gqs):
    w = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_OMEGA, t)
    g = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_DAMPING, t)
    G = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_G, t)
    w2 = w * w
    eG = np.exp(G)
    if sys_id == SYS_BETA:
        F = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_FORCE, t)
        dy[0] = y[2]
        dy[1] = y[3]
        dy[2] = -2.0 * g * y[2] - w2 * y[0]
        dy[3] = -2.0 * g * y[3] - w2 * y[1]
        dy[4] = eG * F * y[0]
        dy[5] = eG * F * y[1]
        b = complex(y[0], y[1])
        Fc = complex(y[4], y[5])
        r2 = y[0] * y[0] + y[1] * y[1]
        # Gaussian phase accumulator P' = e^{-G} F^2 / b^2 and the
        # unwrapped amplitude phase phi' = Im(b' conj(b)) / |b|^2
        pv = np.exp(-G) * (Fc * Fc) / (b * b)
        dy[6] = pv.real
        dy[7] = pv.imag
        dy[8] = (y[3] * y[0] - y[2] * y[1]) / r2
    elif sys_id == SYS_CLASSICAL:
        F = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_FORCE, t)
        dy[0] = np.exp(-G) * y[1] / m
        dy[1] = eG * F - eG * m * w2 * y[0]
    elif sys_id == SYS_GAMMA:
        wd = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_DOMEGA, t)
        gd = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_DDAMPING, t)
        dy[0] = y[1]
        dy[1] = y[2]
        dy[2] = (-6.0 * g * y[2]
                 - 2.0 * (gd + 4.0 * g * g + 2.0 * w2) * y[1]
                 - 2.0 * (2.0 * w * wd + 4.0 * w2 * g) * y[0])
    elif sys_id == SYS_SIGMA:
        F = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_FORCE, t)
        Fd = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_DFORCE, t)
        gam = _dense_scalar(gts, gys, gqs, t, 0)
        gamd = _dense_scalar(gts, gys, gqs, t, 1)
        dy[0] = y[1]
        dy[1] = (-2.0 * g * y[1] - w2 * y[0]
                 - 1.5 * eG * F * gamd - eG * (Fd + 4.0 * g * F) * gam)
    else:
        F = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_FORCE, t)
        emG = np.exp(-G)
        dy[0] = 2.0 * y[1] * eG * m * w2
        dy[1] = -y[0] * emG / m + y[2] * eG * m * w2
        dy[2] = -2.0 * emG * y[1] / m
        dy[3] = -y[1] * eG * F + y[4] * eG * m * w2
        dy[4] = -y[2] * eG * F - y[3] * emG / m


def _dense_scalar(ts, ys, qs, t, comp):
    n = ts.shape[0]
    if t <= ts[0]:
        i = 0
    elif t >= ts[n - 1]:
        i = n - 2
    else:
        lo = 0
        hi = n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ts[mid] <= t:
                lo = mid
            else:
                hi = mid
        i = lo
    th = (t - ts[i]) / (ts[i + 1] - ts[i])
    return ys[i, comp] + th * (qs[i, comp, 0] + th * (qs[i, comp, 1]
                               + th * (qs[i, comp, 2] + th * qs[i, comp, 3])))


# ---------- Dormand-Prince 5(4) tableau ----------
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 6))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_B = _A[6].copy()
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])
# quartic dense-output matrix (Shampine's continuous extension)
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423]])

STATUS_OK = 0
STATUS_UNDERFLOW = 1


def _dp54_run(sys_id, y0, t0, t1, rtol, atol, max_step, m,
              tk, tp, tb, tc, tboff, tcoff, tnseg, gts, gys, gqs):
    """Integrate one system over [t0, t1].

    Returns (ts, ys, qs, status, naccept, nreject, nfev) where qs holds the
    per-interval dense-output coefficients: on interval i,
    y(ts[i] + th*h) = ys[i] + sum_j qs[i, :, j] * th**(j+1).
    """
    dim = y0.shape[0]
    span = t1 - t0
    eps = 2.220446049250313e-16

    K = np.empty((7, dim))
    ytmp = np.empty(dim)
    ynew = np.empty(dim)

    _rhs(sys_id, t0, y0, K[0], m, tk, tp, tb, tc, tboff, tcoff, tnseg,
         gts, gys, gqs)
    nfev = 1

    # starting step as in Hairer/Norsett/Wanner II.4
    d0 = 0.0
    d1 = 0.0
    for i in range(dim):
        sc = atol + rtol * abs(y0[i])
        d0 += (y0[i] / sc) ** 2
        d1 += (K[0, i] / sc) ** 2
    d0 = np.sqrt(d0 / dim)
    d1 = np.sqrt(d1 / dim)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6 * span
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step, span)
    for i in range(dim):
        ytmp[i] = y0[i] + h0 * K[0, i]
    _rhs(sys_id, t0 + h0, ytmp, K[1], m, tk, tp, tb, tc, tboff, tcoff, tnseg,
         gts, gys, gqs)
    nfev += 1
    d2 = 0.0
    for i in range(dim):
        sc = atol + rtol * abs(y0[i])
        d2 += ((K[1, i] - K[0, i]) / sc) ** 2
    d2 = np.sqrt(d2 / dim) / h0
    dm = max(d1, d2)
    if dm > 1e-15:
        h1 = (0.01 / dm) ** 0.2
    else:
        h1 = max(1e-6 * span, h0 * 1e3)
    h = min(100.0 * h0, h1, max_step, span)

    cap = 1024
    ts_buf = np.empty(cap + 1)
    ys_buf = np.empty((cap + 1, dim))
    qs_buf = np.empty((cap, dim, 4))
    ts_buf[0] = t0
    for i in range(dim):
        ys_buf[0, i] = y0[i]
        ynew[i] = y0[i]

    t = t0
    n_acc = 0
    n_rej = 0
    status = STATUS_OK
    err_prev = 1e-4
    rejected_last = False
    y = y0.copy()

    while t < t1:
        if h < 16.0 * eps * max(abs(t), 1.0):
            status = STATUS_UNDERFLOW
            break
        last = False
        if t + h >= t1:
            h = t1 - t
            last = True

        for s in range(1, 7):
            for i in range(dim):
                acc = 0.0
                for j in range(s):
                    acc += _A[s, j] * K[j, i]
                ytmp[i] = y[i] + h * acc
            if s == 6:
                for i in range(dim):
                    ynew[i] = ytmp[i]
            _rhs(sys_id, t + _C[s] * h, ytmp, K[s], m,
                 tk, tp, tb, tc, tboff, tcoff, tnseg, gts, gys, gqs)
        nfev += 6

        errn = 0.0
        for i in range(dim):
            e = 0.0
            for s in range(7):
                e += _E[s] * K[s, i]
            e *= h
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            errn += (e / sc) ** 2
        errn = np.sqrt(errn / dim)
        if not np.isfinite(errn):
            # overflowed stages: force the strongest shrink instead of
            # letting NaN poison the controller
            errn = 1e16

        if errn <= 1.0:
            # accept: store dense coefficients, advance, FSAL reuse
            if n_acc + 1 > cap:
                new_cap = cap * 2
                nts = np.empty(new_cap + 1)
                nys = np.empty((new_cap + 1, dim))
                nqs = np.empty((new_cap, dim, 4))
                nts[:cap + 1] = ts_buf
                nys[:cap + 1] = ys_buf
                nqs[:cap] = qs_buf
                ts_buf = nts
                ys_buf = nys
                qs_buf = nqs
                cap = new_cap
            for i in range(dim):
                for j in range(4):
                    acc = 0.0
                    for s in range(7):
                        acc += K[s, i] * _P[s, j]
                    qs_buf[n_acc, i, j] = h * acc
            n_acc += 1
            t_new = t1 if last else t + h
            ts_buf[n_acc] = t_new
            for i in range(dim):
                ys_buf[n_acc, i] = ynew[i]
                y[i] = ynew[i]
                K[0, i] = K[6, i]
            t = t_new

            ef = max(errn, 1e-10)
            fac = 0.9 * ef ** -0.14 * err_prev ** 0.08
            if rejected_last:
                fac = min(fac, 1.0)
            if fac < 0.2:
                fac = 0.2
            elif fac > 10.0:
                fac = 10.0
            h = min(h * fac, max_step)
            err_prev = ef
            rejected_last = False
        else:
            n_rej += 1
            fac = 0.9 * errn ** -0.2
            if fac < 0.2:
                fac = 0.2
            h *= fac
            rejected_last = True

    return (ts_buf[:n_acc + 1].copy(), ys_buf[:n_acc + 1].copy(),
            qs_buf[:n_acc].copy(), status, n_acc, n_rej, nfev)


# ---------- Crank-Nicolson ----------

def _cn_solve(diag_h, off_h, psi, a, out, cp, u):
    """One Cayley step: solve (1 + i a H) out = (1 - i a H) psi.

    ``diag_h``/``off_h`` are the real tridiagonal Hamiltonian entries, ``a``
    is dt/(2 hbar).  Returns 0, or 1 on a vanishing pivot.
    """
    n = psi.shape[0]
    ia = complex(0.0, a)
    o = ia * off_h
    # right-hand side (1 - i a H) psi
    for j in range(n):
        hp = diag_h[j] * psi[j]
        if j > 0:
            hp += off_h * psi[j - 1]
        if j < n - 1:
            hp += off_h * psi[j + 1]
        u[j] = psi[j] - ia * hp
    d0 = complex(1.0, a * diag_h[0])
    if abs(d0) < 1e-300:
        return 1
    cp[0] = o / d0
    u[0] = u[0] / d0
    for j in range(1, n):
        denom = complex(1.0, a * diag_h[j]) - o * cp[j - 1]
        if abs(denom) < 1e-300:
            return 1
        cp[j] = o / denom
        u[j] = (u[j] - o * u[j - 1]) / denom
    out[n - 1] = u[n - 1]
    for j in range(n - 2, -1, -1):
        out[j] = u[j] - cp[j] * out[j + 1]
    return 0


def _cn_propagate(psi0, qmin, dq, t0, dt, nsteps, stride, m, hbar,
                  tk, tp, tb, tc, tboff, tcoff, tnseg):
    """Propagate psi0 over nsteps CN steps with H evaluated at midpoints.

    Records the trapezoid norm after every step and a state snapshot every
    ``stride`` steps (plus the final state).  Returns
    (slices, norms, status); slices[k] is the state at step k*stride.
    """
    n = psi0.shape[0]
    nslices = nsteps // stride + 1  # snapshots at 0, stride, ..., + final
    if (nsteps % stride) != 0:
        nslices += 1
    slices = np.empty((nslices, n), dtype=np.complex128)
    norms = np.empty(nsteps)
    diag_h = np.empty(n)
    psi = psi0.copy()
    out = np.empty(n, dtype=np.complex128)
    cp = np.empty(n, dtype=np.complex128)
    u = np.empty(n, dtype=np.complex128)
    a = dt / (2.0 * hbar)
    for k in range(n):
        slices[0, k] = psi[k]
    ks = 1
    status = STATUS_OK
    for step in range(nsteps):
        tm = t0 + (step + 0.5) * dt
        w = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_OMEGA, tm)
        F = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_FORCE, tm)
        G = _tf_value(tk, tp, tb, tc, tboff, tcoff, tnseg, SLOT_G, tm)
        eG = np.exp(G)
        kin = hbar * hbar * np.exp(-G) / (2.0 * m)
        kd = 2.0 * kin / (dq * dq)
        off_h = -kin / (dq * dq)
        for j in range(n):
            q = qmin + j * dq
            diag_h[j] = kd + 0.5 * m * w * w * eG * q * q - eG * F * q
        rc = _cn_solve(diag_h, off_h, psi, a, out, cp, u)
        if rc != 0:
            status = 2
            break
        for j in range(n):
            psi[j] = out[j]
        acc = 0.0
        for j in range(n):
            acc += psi[j].real ** 2 + psi[j].imag ** 2
        acc -= 0.5 * (psi[0].real ** 2 + psi[0].imag ** 2
                      + psi[n - 1].real ** 2 + psi[n - 1].imag ** 2)
        norms[step] = np.sqrt(dq * acc)
        if ((step + 1) % stride == 0 or step + 1 == nsteps) and ks < nslices:
            for k in range(n):
                slices[ks, k] = psi[k]
            ks += 1
    return slices[:ks].copy(), norms, status


# jit-compile in dependency order; callers resolve these module globals
_tf_value = _jit(_tf_value)
_dense_scalar = _jit(_dense_scalar)
_rhs = _jit(_rhs)
_cn_solve = _jit(_cn_solve)

tf_value = _tf_value
dense_scalar = _dense_scalar
rhs = _rhs
dp54_run = _jit(_dp54_run)
cn_solve = _cn_solve
cn_propagate = _jit(_cn_propagate)
