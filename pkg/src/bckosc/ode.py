"""Integration of the amplitude, classical, envelope and coefficient systems.

All systems run through one adaptive Dormand-Prince 5(4) stepper with PI
step-size control and quartic dense output (see _accel).  Complex systems
are integrated as paired real components.  The force functional F(beta, t),
the Gaussian phase integral and the unwrapped amplitude phase ride along as
augmented states of the amplitude system, so no separate quadrature pass is
needed.
"""

import warnings

import numpy as np

from . import _accel
from .errors import OutOfDomain, StepSizeUnderflow

_E_TS = np.zeros(0)
_E_YS = np.zeros((0, 1))
_E_QS = np.zeros((0, 1, 4))

BETA_NAMES = ("re_beta", "im_beta", "re_dbeta", "im_dbeta",
              "re_F", "im_F", "re_P", "im_P", "phase")
GAMMA_NAMES = ("gamma", "dgamma", "ddgamma")
SIGMA_NAMES = ("sigma", "dsigma")
C_NAMES = ("c1", "c2", "c3", "c4", "c5")


class ODESolution:
    """Dense solution of one system over the scenario window.

    Calling the solution interpolates with the integrator's dense-output
    polynomial; at an accepted step time the stored state itself is
    returned.  ``stats`` records accepted/rejected steps and rhs
    evaluations.
    """

    def __init__(self, ts, ys, qs, names, stats):
        self.ts = ts
        self.ys = ys
        self.qs = qs
        self.names = tuple(names)
        self.stats = dict(stats)

    @property
    def t0(self):
        return float(self.ts[0])

    @property
    def t1(self):
        return float(self.ts[-1])

    def _locate(self, t):
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        if tq.size and (tq.min() < self.t0 - 1e-12 or tq.max() > self.t1 + 1e-12):
            raise OutOfDomain(
                f"evaluation time outside [{self.t0}, {self.t1}]")
        idx = np.searchsorted(self.ts, tq, side="right") - 1
        idx = np.clip(idx, 0, self.ts.shape[0] - 2)
        th = (tq - self.ts[idx]) / (self.ts[idx + 1] - self.ts[idx])
        return tq, idx, th

    def __call__(self, t):
        tq, idx, th = self._locate(t)
        Q = self.qs[idx]
        acc = Q[..., 3]
        for j in (2, 1, 0):
            acc = acc * th[..., None] + Q[..., j]
        out = self.ys[idx] + acc * th[..., None]
        at_end = tq == self.ts[-1]
        if np.any(at_end):
            out[at_end] = self.ys[-1]
        if np.asarray(t).ndim == 0:
            return out[0]
        return out

    def derivative(self, t, order=1):
        """Time derivative of the dense interpolant (order 1 or 2)."""
        tq, idx, th = self._locate(t)
        Q = self.qs[idx]
        h = (self.ts[idx + 1] - self.ts[idx])[..., None]
        if order == 1:
            acc = 4.0 * Q[..., 3]
            for j, c in ((2, 3.0), (1, 2.0), (0, 1.0)):
                acc = acc * th[..., None] + c * Q[..., j]
            out = acc / h
        elif order == 2:
            acc = 12.0 * Q[..., 3]
            acc = acc * th[..., None] + 6.0 * Q[..., 2]
            acc = acc * th[..., None] + 2.0 * Q[..., 1]
            out = acc / h ** 2
        else:
            raise ValueError("order must be 1 or 2")
        if np.asarray(t).ndim == 0:
            return out[0]
        return out

    def component(self, name, t):
        i = self.names.index(name)
        vals = self(t)
        return vals[..., i]

    def subset(self, indices, names):
        """Selected components repackaged as a new solution."""
        sol = ODESolution(self.ts, self.ys[:, indices], self.qs[:, indices, :],
                          names, self.stats)
        return sol

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("t," + ",".join(self.names) + "\n")
            for k in range(self.ts.shape[0]):
                row = [f"{self.ts[k]:.17g}"]
                row += [f"{v:.17g}" for v in self.ys[k]]
                fh.write(",".join(row) + "\n")


class BetaSolution(ODESolution):
    """Amplitude solution with complex accessors and the augmented states."""

    def beta(self, t):
        v = self(t)
        return v[..., 0] + 1j * v[..., 1]

    def dbeta(self, t):
        v = self(t)
        return v[..., 2] + 1j * v[..., 3]

    def force_functional(self, t):
        v = self(t)
        return v[..., 4] + 1j * v[..., 5]

    def phase_integral(self, t):
        v = self(t)
        return v[..., 6] + 1j * v[..., 7]

    def phase(self, t):
        return self(t)[..., 8]


class Trajectory(ODESolution):
    """Classical phase-space trajectory."""

    def q(self, t):
        return self(t)[..., 0]

    def p(self, t):
        return self(t)[..., 1]


def _run(s, sys_id, y0, names, rtol=None, atol=None, gamma_dense=None,
         cls=ODESolution):
    table = s.table()
    if gamma_dense is None:
        gts, gys, gqs = _E_TS, _E_YS, _E_QS
    else:
        gts, gys, gqs = gamma_dense
    ts, ys, qs, status, nacc, nrej, nfev = _accel.dp54_run(
        sys_id, np.asarray(y0, dtype=float), s.t0, s.t1,
        s.rtol if rtol is None else float(rtol),
        s.atol if atol is None else float(atol),
        s.step_max, s.m, *table, gts, gys, gqs)
    if status != _accel.STATUS_OK:
        raise StepSizeUnderflow(
            f"step size underflow near t={ts[-1]} (system {sys_id})")
    stats = {"naccept": int(nacc), "nreject": int(nrej), "nfev": int(nfev)}
    return cls(ts, ys, qs, names, stats)


def integrate_beta(s, rtol=None, atol=None):
    """Integrate the amplitude equation beta'' + 2g beta' + omega^2 beta = 0
    together with the force functional, the Gaussian phase integral and the
    unwrapped phase of beta."""
    b0, db0 = s.resolved_beta0()
    F0 = s.force(s.t0)
    if b0 != 0 and F0 != 0:
        warnings.warn(
            "beta(t0)*F(t0) != 0: the force-functional side condition is "
            "violated at t0 (recorded, not enforced)",
            RuntimeWarning, stacklevel=2)
    y0 = [b0.real, b0.imag, db0.real, db0.imag,
          0.0, 0.0, 0.0, 0.0, float(np.angle(b0))]
    return _run(s, _accel.SYS_BETA, y0, BETA_NAMES, rtol, atol,
                cls=BetaSolution)


def integrate_classical(s, q0, p0, rtol=None, atol=None):
    """Integrate Hamilton's equations q' = e^{-G} p/m,
    p' = e^G (F - m omega^2 q)."""
    return _run(s, _accel.SYS_CLASSICAL, [float(q0), float(p0)],
                ("q", "p"), rtol, atol, cls=Trajectory)


def gamma_ics_from_beta(s):
    """Envelope ICs matching gamma = 2 beta* beta for the scenario's
    amplitude ICs."""
    b0, db0 = s.resolved_beta0()
    g0 = s.damping(s.t0)
    w0 = s.omega(s.t0)
    gamma0 = 2.0 * abs(b0) ** 2
    dgamma0 = 4.0 * (b0.conjugate() * db0).real
    ddgamma0 = (4.0 * abs(db0) ** 2 - 2.0 * g0 * dgamma0
                - 2.0 * w0 * w0 * gamma0)
    return gamma0, dgamma0, ddgamma0


def integrate_gamma(s, gamma0, dgamma0, ddgamma0, rtol=None, atol=None):
    """Integrate the third-order envelope equation
    gamma''' + 6g gamma'' + 2(g' + 4g^2 + 2 omega^2) gamma'
    + 2((omega^2)' + 4 omega^2 g) gamma = 0."""
    return _run(s, _accel.SYS_GAMMA,
                [float(gamma0), float(dgamma0), float(ddgamma0)],
                GAMMA_NAMES, rtol, atol)


def integrate_sigma(s, gamma_sol, sigma0=0.0, dsigma0=0.0,
                    rtol=None, atol=None):
    """Integrate the driven envelope companion
    sigma'' + 2g sigma' + omega^2 sigma =
    -(3/2) e^G F gamma' - e^G (F' + 4 g F) gamma,
    with gamma taken from a dense envelope solution."""
    dense = (gamma_sol.ts, gamma_sol.ys, gamma_sol.qs)
    return _run(s, _accel.SYS_SIGMA, [float(sigma0), float(dsigma0)],
                SIGMA_NAMES, rtol, atol, gamma_dense=dense)


def c_ics_from_gamma_sigma(s, gamma_ics, sigma_ics):
    """Coefficient ICs that reduce the five-ODE system to (gamma, sigma)."""
    gamma0, dgamma0, ddgamma0 = gamma_ics
    sigma0, dsigma0 = sigma_ics
    g0 = s.damping(s.t0)
    w0 = s.omega(s.t0)
    F0 = s.force(s.t0)
    # e^{G(t0)} = 1 by the gauge choice
    c1 = (s.m ** 2) * (0.5 * ddgamma0 + g0 * dgamma0 + w0 * w0 * gamma0)
    c2 = -0.5 * s.m * dgamma0
    c3 = gamma0
    c4 = -s.m * (dsigma0 + gamma0 * F0)
    c5 = sigma0
    return np.array([c1, c2, c3, c4, c5])


def integrate_c_system(s, c0, rtol=None, atol=None):
    """Integrate the five first-order coefficient ODEs of the quadratic
    invariant."""
    c0 = np.asarray(c0, dtype=float)
    if c0.shape != (5,):
        raise ValueError("c0 must have five components")
    return _run(s, _accel.SYS_C, c0, C_NAMES, rtol, atol)


def accumulate_F(s, beta_sol):
    """The force functional F(beta, t) = int_{t0}^t e^G beta F dtau as a
    dense solution.  It is carried as an augmented state of the amplitude
    system, so this is a view of the corresponding components."""
    return beta_sol.subset([4, 5], ("re_F", "im_F"))
