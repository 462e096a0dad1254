"""Implicit monolithic reference solver and the explicit Dirichlet-Neumann
comparator.

The monolithic solver enforces velocity continuity at the interface by dof
identification (fluid and solid interface velocities share one unknown) and
traction balance weakly by summing the two weak forms.  It serves as the
error oracle for the convergence study.  The Dirichlet-Neumann stepper is the
classical loosely coupled comparator that exhibits the added-mass instability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import Factorization, apply_dirichlet
from .splitting import Discretization, PhysicalParams


@dataclass
class CoupledState:
    t: float
    u: np.ndarray        # fluid velocity (fluid-space numbering)
    p: np.ndarray
    eta: np.ndarray      # solid displacement (solid-space numbering)
    etad: np.ndarray     # solid velocity (solid-space numbering)


@dataclass
class ReferenceTrajectory:
    """Fine backward-Euler trajectory with interface flux per step."""

    ddt: float
    times: np.ndarray
    u: list
    p: list
    eta: list
    etad: list
    flux: list           # canonical interface load, flux[k] for step ending at times[k]

    def index_at(self, t: float) -> int:
        k = int(round(t / self.ddt))
        if abs(k * self.ddt - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} is not on the reference grid")
        return k


def _remap(mat: sp.spmatrix, row_map: np.ndarray, col_map: np.ndarray, shape):
    coo = mat.tocoo()
    return sp.coo_matrix((coo.data, (row_map[coo.row], col_map[coo.col])),
                         shape=shape)


class MonolithicSolver:
    """Backward-Euler solver for the fully coupled system at step size ddt."""

    def __init__(self, disc: Discretization, params: PhysicalParams, ddt: float):
        self.disc = disc
        self.params = params
        self.ddt = ddt
        d, p = disc, params

        nu, npr, ns = d.V_f.ndof, d.Q.ndof, d.V_s.ndof
        solid_map = np.full(ns, -1, dtype=np.int64)
        solid_map[d.ifd_s] = d.ifd_f
        extra = np.flatnonzero(solid_map < 0)
        solid_map[extra] = nu + npr + np.arange(extra.size)
        self.solid_map = solid_map
        self.ncomb = nu + npr + extra.size
        self._nu, self._np = nu, npr
        fluid_map = np.arange(nu)

        self.K_f = d.stiffness_fluid(p.mu)
        self.A_s = d.stiffness_solid(p.l1, p.l2)

        Af = (p.rho_f / ddt) * d.M_f + self.K_f
        As = (p.rho_s / ddt) * d.M_s + ddt * self.A_s
        shape = (self.ncomb, self.ncomb)
        pmap = nu + np.arange(npr)
        A = (_remap(Af, fluid_map, fluid_map, shape)
             + _remap(-d.B.T, fluid_map, pmap, shape)
             + _remap(d.B, pmap, fluid_map, shape)
             + _remap(As, solid_map, solid_map, shape)).tocsr()

        self.dirichlet = np.unique(np.concatenate([d.dir_f, solid_map[d.dir_s]]))
        A, _ = apply_dirichlet(A, np.zeros(self.ncomb), self.dirichlet)
        self.A_coupled = A
        self._lu = Factorization(A)

    def step(self, state: CoupledState) -> CoupledState:
        """One backward-Euler step of the coupled system."""
        d, p = self.disc, self.params
        rhs = np.zeros(self.ncomb)
        rhs[:self._nu] += (p.rho_f / self.ddt) * (d.M_f @ state.u)
        np.add.at(rhs, self.solid_map,
                  (p.rho_s / self.ddt) * (d.M_s @ state.etad) - self.A_s @ state.eta)
        rhs[self.dirichlet] = 0.0
        x = self._lu.solve(rhs)
        u = x[:self._nu]
        pres = x[self._nu:self._nu + self._np]
        etad = x[self.solid_map]
        eta = state.eta + self.ddt * etad
        return CoupledState(t=state.t + self.ddt, u=u, p=pres, eta=eta, etad=etad)

    def fluid_flux(self, u_new, u_old, p_new) -> np.ndarray:
        """Variational fluid traction <sigma_f n, v> at the interface dofs,
        recovered from the interior residual of the fluid momentum equation."""
        d = self.disc
        r = (self.params.rho_f / self.ddt) * (d.M_f @ (u_new - u_old)) \
            + self.K_f @ u_new - d.B.T @ p_new
        return r[d.ifd_f]

    def solid_flux(self, etad_new, etad_old, eta_new) -> np.ndarray:
        """Variational solid traction <sigma_s n_s, w> at the interface dofs."""
        d = self.disc
        r = (self.params.rho_s / self.ddt) * (d.M_s @ (etad_new - etad_old)) \
            + self.A_s @ eta_new
        return r[d.ifd_s]

    def energy(self, state: CoupledState) -> float:
        d, p = self.disc, self.params
        return float(0.5 * p.rho_f * state.u @ (d.M_f @ state.u)
                     + 0.5 * p.rho_s * state.etad @ (d.M_s @ state.etad)
                     + 0.5 * state.eta @ (self.A_s @ state.eta))


def run_reference(disc: Discretization, params: PhysicalParams,
                  state0: CoupledState, t_final: float,
                  num_steps: int) -> ReferenceTrajectory:
    """Run the monolithic solver on a fine grid, recording every step.

    The flux at t_0 is taken from the first step (the best available
    approximation of the initial fluid traction on this grid).
    """
    ddt = t_final / num_steps
    solver = MonolithicSolver(disc, params, ddt)
    traj = ReferenceTrajectory(
        ddt=ddt, times=np.linspace(0.0, t_final, num_steps + 1),
        u=[state0.u], p=[state0.p], eta=[state0.eta], etad=[state0.etad],
        flux=[None])
    state = state0
    for _ in range(num_steps):
        new = solver.step(state)
        traj.u.append(new.u)
        traj.p.append(new.p)
        traj.eta.append(new.eta)
        traj.etad.append(new.etad)
        traj.flux.append(solver.fluid_flux(new.u, state.u, new.p))
        state = new
    traj.flux[0] = traj.flux[1]
    return traj


class DirichletNeumannExplicit:
    """Classical explicit Dirichlet-Neumann staggering.

    The solid receives the previous fluid traction as a Neumann load; the
    fluid then takes the new solid velocity as Dirichlet data on the
    interface.  With the interface velocity prescribed the fluid boundary is
    all-Dirichlet, so one pressure dof is pinned to fix the gauge (this also
    drops one divergence row, absorbing the incompatibility of the data).
    Instability at comparable densities is the expected outcome.
    """

    def __init__(self, disc: Discretization, params: PhysicalParams, dt: float):
        self.disc = disc
        self.params = params
        self.dt = dt
        d, p = disc, params

        self.K_f = d.stiffness_fluid(p.mu)
        self.A_s = d.stiffness_solid(p.l1, p.l2)

        S = (p.rho_s / dt) * d.M_s + dt * self.A_s
        S, _ = apply_dirichlet(S, np.zeros(d.V_s.ndof), d.dir_s)
        self._solid_lu = Factorization(S)

        nu, npr = d.V_f.ndof, d.Q.ndof
        self._nu, self._np = nu, npr
        Auu = (p.rho_f / dt) * d.M_f + self.K_f
        F = sp.bmat([[Auu, -d.B.T], [d.B, None]], format="csr")
        self._F_full = F
        self.constrained = np.unique(np.concatenate(
            [d.dir_f, d.ifd_f, np.array([nu], dtype=np.int64)]))
        Fc, _ = apply_dirichlet(F, np.zeros(nu + npr), self.constrained)
        self._fluid_lu = Factorization(Fc)

    def step(self, state: CoupledState, traction: np.ndarray):
        """One explicit window; returns (new state, new fluid traction)."""
        d, p = self.disc, self.params
        dt = self.dt

        rhs_s = (p.rho_s / dt) * (d.M_s @ state.etad) - self.A_s @ state.eta
        rhs_s[d.ifd_s] -= traction
        rhs_s[d.dir_s] = 0.0
        etad = self._solid_lu.solve(rhs_s)
        eta = state.eta + dt * etad

        lift = np.zeros(self._nu + self._np)
        lift[d.ifd_f] = etad[d.ifd_s]
        rhs = np.zeros(self._nu + self._np)
        rhs[:self._nu] = (p.rho_f / dt) * (d.M_f @ state.u)
        rhs = rhs - self._F_full @ lift
        rhs[self.constrained] = 0.0
        rhs += lift
        x = self._fluid_lu.solve(rhs)
        u = x[:self._nu]
        pres = x[self._nu:]

        new_traction = ((p.rho_f / dt) * (d.M_f @ (u - state.u))
                        + self.K_f @ u - d.B.T @ pres)[d.ifd_f]
        new = CoupledState(t=state.t + dt, u=u, p=pres, eta=eta, etad=etad)
        return new, new_traction

    def energy(self, state: CoupledState) -> float:
        d, p = self.disc, self.params
        return float(0.5 * p.rho_f * state.u @ (d.M_f @ state.u)
                     + 0.5 * p.rho_s * state.etad @ (d.M_s @ state.etad)
                     + 0.5 * state.eta @ (self.A_s @ state.eta))
