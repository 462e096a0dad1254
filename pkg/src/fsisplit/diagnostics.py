"""Energy-stability ledger, splitting-error quantities and rate fitting.

All time integrals use the rectangle rule at substep right endpoints, the
quadrature matching the backward-Euler substepping: with that pairing the
per-window stability inequality closes to solver precision.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .splitting import Discretization, PhysicalParams, TimeGrid, WindowRecord


@dataclass
class EnergyLedger:
    """Per-window stability bookkeeping.

    stability_residual[n] = E_n + sum_{k<=n} T_k + S_n - (E_0 + S_0); the
    scheme is stable when every entry is <= tolerance.
    """

    E: list = field(default_factory=list)        # E[n], window boundaries, E[0] initial
    T: list = field(default_factory=list)        # T[n] for n >= 1
    S: list = field(default_factory=list)        # S[n] for n >= 1; S0 held separately
    S0: float = 0.0

    def stability_residual(self, upto: int | None = None) -> float:
        """E_N + sum T_n + S_N - (E_0 + S_0) for N = upto (default: last)."""
        n = len(self.T) if upto is None else upto
        if n == 0:
            return 0.0
        s_n = self.S[n - 1]
        return self.E[n] + sum(self.T[:n]) + s_n - (self.E[0] + self.S0)

    def residuals(self) -> np.ndarray:
        return np.array([self.stability_residual(n) for n in range(1, len(self.T) + 1)])


@dataclass
class ErrorReport:
    E_final: float
    T_sum: float
    S_final: float
    T_windows: list

    @property
    def total(self) -> float:
        return self.E_final + self.T_sum + self.S_final


@dataclass
class ConvergenceReport:
    dts: list
    totals: list

    def __post_init__(self):
        if any(b >= a for a, b in zip(self.dts, self.dts[1:])):
            raise ValueError("dt levels must be strictly decreasing")

    def pairwise_ratios(self) -> list:
        return [a / b for a, b in zip(self.totals, self.totals[1:])]


def energy_E(disc: Discretization, params: PhysicalParams, u, etad, eta,
             A_s=None) -> float:
    """rho_f/2 ||u||^2 + rho_s/2 ||etad||^2 + 1/2 ||eta||_S^2."""
    if A_s is None:
        A_s = disc.stiffness_solid(params.l1, params.l2)
    return float(0.5 * params.rho_f * u @ (disc.M_f @ u)
                 + 0.5 * params.rho_s * etad @ (disc.M_s @ etad)
                 + 0.5 * eta @ (A_s @ eta))


def window_T(disc: Discretization, params: PhysicalParams, grid: TimeGrid,
             window: WindowRecord, K_f, iface_weight: float = 0.5) -> float:
    """2 mu int ||eps(u)||^2 + (weight * lambda) int ||etad - u_avg_prev||^2
    over the window (rectangle rule over substeps).

    The interface weight is 1/2 for the stability ledger and 1/4 for the
    error quantities.
    """
    lam = params.lambda_robin
    ddt = grid.ddt
    total = 0.0
    for s in window.samples:
        visc = float(s.u @ (K_f @ s.u))  # K_f already carries the factor 2 mu
        diff = s.etad_trace - window.iface_used.u_avg
        total += ddt * (visc + iface_weight * lam * disc.trace_norm_sq(diff))
    return total


def window_S(disc: Discretization, params: PhysicalParams, grid: TimeGrid,
             window: WindowRecord) -> float:
    """1/(2 lambda) int ||sigma_f n||^2 + lambda/2 int ||u||^2 on the
    interface over the window; traction in the interface-mass dual norm."""
    lam = params.lambda_robin
    ddt = grid.ddt
    total = 0.0
    for s in window.samples:
        total += ddt * (disc.traction_norm_sq(s.traction) / (2 * lam)
                        + 0.5 * lam * disc.trace_norm_sq(s.u_trace))
    return total


def initial_S0(disc: Discretization, params: PhysicalParams, grid: TimeGrid,
               u0_trace: np.ndarray, traction0: np.ndarray) -> float:
    """dt/(2 lambda) ||sigma_F(t0) n||^2 + lambda dt/2 ||u(t0)||^2 on the
    interface."""
    lam = params.lambda_robin
    return grid.dt * (disc.traction_norm_sq(traction0) / (2 * lam)
                      + 0.5 * lam * disc.trace_norm_sq(u0_trace))


def build_ledger(disc: Discretization, params: PhysicalParams, grid: TimeGrid,
                 windows, state0, iface0, K_f=None, A_s=None) -> EnergyLedger:
    """Assemble the full stability ledger from a splitting trajectory."""
    if K_f is None:
        K_f = disc.stiffness_fluid(params.mu)
    if A_s is None:
        A_s = disc.stiffness_solid(params.l1, params.l2)
    ledger = EnergyLedger(
        S0=initial_S0(disc, params, grid, iface0.u_avg, iface0.traction_avg))
    ledger.E.append(energy_E(disc, params, state0.u, state0.etad, state0.eta, A_s))
    for w in windows:
        last = w.samples[-1]
        ledger.E.append(energy_E(disc, params, last.u, last.etad, last.eta, A_s))
        ledger.T.append(window_T(disc, params, grid, w, K_f))
        ledger.S.append(window_S(disc, params, grid, w))
    return ledger


def stability_residual(ledger: EnergyLedger) -> float:
    return ledger.stability_residual()


def error_norms(disc: Discretization, params: PhysicalParams, grid: TimeGrid,
                windows, reference, state0, K_f=None, A_s=None) -> ErrorReport:
    """Splitting-error quantities against a monolithic reference trajectory.

    Both trajectories must start from the same state (so the initial error
    and interface-error stock vanish) and the reference grid must contain
    every splitting substep time.
    """
    if K_f is None:
        K_f = disc.stiffness_fluid(params.mu)
    if A_s is None:
        A_s = disc.stiffness_solid(params.l1, params.l2)
    lam = params.lambda_robin
    ddt = grid.ddt

    if not (np.allclose(reference.u[0], state0.u)
            and np.allclose(reference.eta[0], state0.eta)
            and np.allclose(reference.etad[0], state0.etad)):
        raise ValueError("reference and splitting runs start from different states")

    def err_at(sample):
        k = reference.index_at(sample.t)
        return (reference.u[k] - sample.u,
                reference.etad[k] - sample.etad,
                reference.eta[k] - sample.eta,
                reference.flux[k] - sample.traction)

    T_windows = []
    prev_eu_avg = np.zeros(disc.ifd_f.size)  # error of u_avg^0 vanishes
    S_final = 0.0
    last_err = None
    for w in windows:
        t_win = 0.0
        s_win = 0.0
        eu_traces = []
        for s in w.samples:
            eu, eetad, eeta, eflux = err_at(s)
            visc = float(eu @ (K_f @ eu))
            diff = eetad[disc.ifd_s] - prev_eu_avg
            t_win += ddt * (visc + 0.25 * lam * disc.trace_norm_sq(diff))
            s_win += ddt * (disc.traction_norm_sq(eflux) / (2 * lam)
                            + 0.5 * lam * disc.trace_norm_sq(eu[disc.ifd_f]))
            eu_traces.append(eu[disc.ifd_f])
            last_err = (eu, eetad, eeta)
        T_windows.append(t_win)
        S_final = s_win
        prev_eu_avg = np.mean(eu_traces, axis=0)

    eu, eetad, eeta = last_err
    E_final = energy_E(disc, params, eu, eetad, eeta, A_s)
    return ErrorReport(E_final=E_final, T_sum=float(np.sum(T_windows)),
                       S_final=S_final, T_windows=T_windows)


def consistency_terms(disc: Discretization, reference, dt: float,
                      lam: float, t_final: float):
    """Per-window squared interface norms of the averaging consistency terms.

    g3 = lambda (U - window-average of previous U); g2 is the analogous
    difference of fluid traction loads (dual norm).  Returns (g3, g2) arrays,
    one entry per window of size dt; the sums scale like dt for smooth
    reference trajectories.
    """
    ref_dt = reference.ddt
    per = int(round(dt / ref_dt))
    if abs(per * ref_dt - dt) > 1e-9 * dt:
        raise ValueError("window size is not a multiple of the reference step")
    n_win = int(round(t_final / dt))

    g3 = np.zeros(n_win)
    g2 = np.zeros(n_win)
    u_tr = [u[disc.ifd_f] for u in reference.u]
    for n in range(n_win):
        if n == 0:
            u_avg = u_tr[0]
            f_avg = reference.flux[0]
        else:
            lo = (n - 1) * per
            u_avg = np.mean(u_tr[lo + 1:lo + per + 1], axis=0)
            f_avg = np.mean(reference.flux[lo + 1:lo + per + 1], axis=0)
        for k in range(n * per + 1, (n + 1) * per + 1):
            g3[n] += ref_dt * lam ** 2 * disc.trace_norm_sq(u_tr[k] - u_avg)
            g2[n] += ref_dt * disc.traction_norm_sq(reference.flux[k] - f_avg)
    return g3, g2


def fit_rate(dts, totals) -> float:
    """Least-squares slope of log(sqrt(total error)) against log(dt).

    A non-monotone error sequence is flagged with a warning but still fitted.
    """
    dts = np.asarray(dts, dtype=float)
    totals = np.asarray(totals, dtype=float)
    if dts.size < 2:
        raise ValueError("need at least two levels to fit a rate")
    if np.any(np.diff(totals) >= 0):
        warnings.warn("error sequence is not strictly decreasing",
                      RuntimeWarning, stacklevel=2)
    return float(np.polyfit(np.log(dts), 0.5 * np.log(totals), 1)[0])
