"""Independent Crank-Nicolson solver for the scaled-mass Schrodinger
equation, used as an end-to-end check: analytically constructed
eigenfunctions propagated numerically must stay on themselves.

Second-order spatial stencil (the tridiagonal solve requires it) with
Dirichlet ends, midpoint-evaluated Hamiltonian for time dependence, and a
Cayley step (1 + i dt H/2hbar) psi' = (1 - i dt H/2hbar) psi that is
unitary up to round-off.
"""

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import OutOfDomain, SolverBreakdown, ValidationError
from .invariants import frame_from_beta
from .ode import integrate_beta
from .quantum import WaveFunction, eval_psin, inner


def build_hamiltonian(s, t):
    """Tridiagonal Hamiltonian at time t on the scenario grid.

    Returns (diag, off): the diagonal entries and the constant
    off-diagonal.  Kinetic term is the second-difference stencil scaled by
    e^{-G}; the potential is (1/2) m omega^2 e^G q^2 - e^G F q.
    """
    qs = s.grid()
    dq = float(qs[1] - qs[0])
    G = float(s.G(t))
    eG = np.exp(G)
    kin = s.hbar ** 2 * np.exp(-G) / (2.0 * s.m)
    off = -kin / (dq * dq)
    diag = (2.0 * kin / (dq * dq)
            + 0.5 * s.m * float(s.omega(t)) ** 2 * eG * qs ** 2
            - eG * float(s.force(t)) * qs)
    return diag, float(off)


def crank_nicolson_step(psi, s, t, dt):
    """One unitary step from t to t + dt with H evaluated at t + dt/2."""
    if dt <= 0:
        raise ValidationError("dt must be positive")
    diag, off = build_hamiltonian(s, t + 0.5 * dt)
    n = psi.values.shape[0]
    out = np.empty(n, dtype=np.complex128)
    cp = np.empty(n, dtype=np.complex128)
    u = np.empty(n, dtype=np.complex128)
    rc = _accel.cn_solve(diag, off, psi.values.astype(np.complex128),
                         dt / (2.0 * s.hbar), out, cp, u)
    if rc != 0:
        raise SolverBreakdown("tridiagonal elimination pivot underflowed")
    return WaveFunction(qs=psi.qs, values=out, t=t + dt, n=psi.n)


@dataclass(frozen=True)
class PropagationRun:
    """Numeric propagation compared against the analytic eigenfunction."""

    initial: WaveFunction
    dt: float
    slice_ts: np.ndarray
    slice_norms: np.ndarray
    overlaps: np.ndarray
    fidelity_defects: np.ndarray
    step_norms: np.ndarray      # post-step trapezoid norms, every step

    @property
    def min_overlap(self):
        return float(np.min(self.overlaps))

    @property
    def max_step_norm_drift(self):
        """Largest norm change across one step (unitarity check)."""
        prev = np.concatenate(([self.slice_norms[0]], self.step_norms[:-1]))
        return float(np.max(np.abs(self.step_norms - prev)))

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("t,norm,overlap,fidelity_defect\n")
            for k in range(self.slice_ts.shape[0]):
                fh.write(f"{self.slice_ts[k]:.17g},"
                         f"{self.slice_norms[k]:.17g},"
                         f"{self.overlaps[k]:.17g},"
                         f"{self.fidelity_defects[k]:.17g}\n")


def propagate_and_compare(s, n, t0, t1, dt, max_slices=201, beta_sol=None):
    """Propagate the analytic psi_n numerically from t0 to t1 and record
    per-slice norms and overlaps with the analytic reference.

    dt is adjusted to divide the window exactly.  ``max_slices`` bounds how
    many intermediate comparisons are made; every step's norm is kept
    regardless.
    """
    if not (s.t0 <= t0 < t1 <= s.t1):
        raise OutOfDomain("propagation window must lie inside the scenario "
                          "window")
    if beta_sol is None:
        beta_sol = integrate_beta(s)
    fr0 = frame_from_beta(s, beta_sol, t0)
    psi0 = eval_psin(n, s, fr0, t0)
    nsteps = max(1, int(round((t1 - t0) / dt)))
    dt_eff = (t1 - t0) / nsteps
    stride = max(1, nsteps // max(1, max_slices - 1))
    qs = psi0.qs
    dq = psi0.dq
    slices, step_norms, status = _accel.cn_propagate(
        psi0.values.astype(np.complex128), s.qmin, dq, t0, dt_eff, nsteps,
        stride, s.m, s.hbar, *s.table())
    if status == 2:
        raise SolverBreakdown("tridiagonal elimination pivot underflowed")
    steps = list(range(0, nsteps + 1, stride))
    if steps[-1] != nsteps:
        steps.append(nsteps)
    slice_ts = t0 + dt_eff * np.array(steps)
    slice_ts[-1] = t0 + dt_eff * nsteps
    overlaps = np.empty(len(steps))
    norms = np.empty(len(steps))
    defects = np.empty(len(steps))
    for k, tk in enumerate(slice_ts):
        num = WaveFunction(qs=qs, values=slices[k], t=float(tk), n=n)
        ana = eval_psin(n, s, frame_from_beta(s, beta_sol, float(tk)),
                        float(tk))
        ov = abs(inner(ana, num)) / (ana.norm * num.norm)
        overlaps[k] = ov
        norms[k] = num.norm
        defects[k] = 1.0 - ov
    return PropagationRun(initial=psi0, dt=dt_eff, slice_ts=slice_ts,
                          slice_norms=norms, overlaps=overlaps,
                          fidelity_defects=defects, step_norms=step_norms)
