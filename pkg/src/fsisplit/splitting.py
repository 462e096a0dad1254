"""Robin-Robin loosely coupled time stepping.

Per window [t_n, t_{n+1}] the solid subproblem is solved first with the Robin
condition lambda*etad + sigma_s*n_s = lambda*u_avg - traction_avg, then the
fluid subproblem with lambda*u + sigma_f*n = lambda*etad + traction_avg, and
finally the interface window averages are updated for the next window.  Each
window is discretized with m backward-Euler substeps (m = 1 recovers the
standard fully discrete scheme where the averages collapse to endpoint values).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import mesh as msh
from .assembly import (Factorization, apply_dirichlet, assemble_divergence,
                       assemble_elasticity, assemble_interface_mass,
                       assemble_symgrad, assemble_vector_mass)
from .mesh import ChannelGeometry, build_two_layer_mesh
from .spaces import SCALAR_P1, VECTOR_P2, Space, build_space


@dataclass(frozen=True)
class PhysicalParams:
    rho_f: float
    rho_s: float
    mu: float
    l1: float
    l2: float
    lambda_robin: float

    def __post_init__(self):
        for name in ("rho_f", "rho_s", "mu", "l1"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.lambda_robin <= 0:
            raise ValueError("lambda must be > 0")


@dataclass(frozen=True)
class TimeGrid:
    t_final: float
    num_windows: int
    substeps: int = 1

    def __post_init__(self):
        if self.t_final <= 0:
            raise ValueError("t_final must be > 0")
        if self.num_windows < 1:
            raise ValueError("need at least one window (T >= dt)")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")

    @property
    def dt(self) -> float:
        return self.t_final / self.num_windows

    @property
    def ddt(self) -> float:
        return self.dt / self.substeps


@dataclass
class InterfaceData:
    """Window-averaged interface data in the canonical interface ordering.

    u_avg holds velocity trace coefficients; traction_avg is the load vector
    of the averaged variational fluid traction (v -> <sigma_f n, v> on the
    interface test dofs).
    """

    u_avg: np.ndarray
    traction_avg: np.ndarray


@dataclass
class WindowSample:
    """State of one backward-Euler substep (right endpoint values)."""

    t: float
    u: np.ndarray
    p: np.ndarray
    eta: np.ndarray
    etad: np.ndarray
    u_trace: np.ndarray
    etad_trace: np.ndarray
    traction: np.ndarray


@dataclass
class WindowRecord:
    """Per-window trajectory samples plus the interface data driving them."""

    samples: list
    iface_used: InterfaceData


@dataclass
class SplitState:
    n: int
    u: np.ndarray
    p: np.ndarray
    eta: np.ndarray
    etad: np.ndarray
    iface: InterfaceData
    window: WindowRecord | None = None


class Discretization:
    """Spaces and matrices shared by the splitting and monolithic solvers."""

    def __init__(self, geom: ChannelGeometry, nx: int, ny_f: int, ny_s: int):
        self.geom = geom
        self.mesh = build_two_layer_mesh(geom, nx, ny_f, ny_s)
        self.V_f = build_space(self.mesh, msh.FLUID, VECTOR_P2)
        self.Q = build_space(self.mesh, msh.FLUID, SCALAR_P1)
        self.V_s = build_space(self.mesh, msh.SOLID, VECTOR_P2)
        if not np.allclose(self.V_f.node_coords[self.V_f.interface_nodes],
                           self.V_s.node_coords[self.V_s.interface_nodes]):
            raise RuntimeError("interface dof orderings of the two spaces differ")

        self.M_f = assemble_vector_mass(self.V_f, 1.0)
        self.M_s = assemble_vector_mass(self.V_s, 1.0)
        self.B = assemble_divergence(self.V_f, self.Q)
        self.M_if = assemble_interface_mass(self.V_f)
        self.M_is = assemble_interface_mass(self.V_s)
        self.dir_f = self.V_f.dirichlet_dofs(msh.SIGMA_F)
        self.dir_s = self.V_s.dirichlet_dofs(msh.SIGMA_S)
        self.ifd_f = self.V_f.interface_dofs
        self.ifd_s = self.V_s.interface_dofs
        # canonical interface mass (small and dense); identical from either side
        self.M_c = self.M_if[self.ifd_f][:, self.ifd_f].toarray()
        self._M_c_inv = np.linalg.inv(self.M_c)

    def stiffness_fluid(self, mu: float) -> sp.csr_matrix:
        return assemble_symgrad(self.V_f, mu)

    def stiffness_solid(self, l1: float, l2: float) -> sp.csr_matrix:
        return assemble_elasticity(self.V_s, l1, l2)

    def trace_norm_sq(self, trace: np.ndarray) -> float:
        """Squared interface L2 norm of a canonical trace vector."""
        return float(trace @ self.M_c @ trace)

    def traction_norm_sq(self, load: np.ndarray) -> float:
        """Squared dual norm of a canonical interface load vector."""
        return float(load @ self._M_c_inv @ load)

    def zero_iface(self) -> InterfaceData:
        n = self.ifd_f.size
        return InterfaceData(np.zeros(n), np.zeros(n))


class RobinRobinSolver:
    """Factorizes the two subproblem systems once and advances windows."""

    def __init__(self, disc: Discretization, params: PhysicalParams, grid: TimeGrid):
        self.disc = disc
        self.params = params
        self.grid = grid
        d, p = disc, params
        ddt = grid.ddt
        lam = p.lambda_robin

        self.K_f = d.stiffness_fluid(p.mu)
        self.A_s = d.stiffness_solid(p.l1, p.l2)

        # solid substep operator: (rho_s/ddt) M + ddt A + lambda M_iface
        S = (p.rho_s / ddt) * d.M_s + ddt * self.A_s + lam * d.M_is
        S, _ = apply_dirichlet(S, np.zeros(d.V_s.ndof), d.dir_s)
        self._solid_lu = Factorization(S)

        # fluid saddle operator: [[rho_f/ddt M + K + lambda M_iface, -B^T], [B, 0]]
        nu, npr = d.V_f.ndof, d.Q.ndof
        Auu = (p.rho_f / ddt) * d.M_f + self.K_f + lam * d.M_if
        F = sp.bmat([[Auu, -d.B.T], [d.B, None]], format="csr")
        F, _ = apply_dirichlet(F, np.zeros(nu + npr), d.dir_f)
        self._fluid_lu = Factorization(F)
        self._nu, self._np = nu, npr

    # -- subproblem solves ------------------------------------------------

    def solid_step(self, eta: np.ndarray, etad: np.ndarray, iface: InterfaceData):
        """Backward-Euler substeps of the solid Robin subproblem over one
        window; returns per-substep (eta, etad) samples."""
        d, p = self.disc, self.params
        ddt = self.grid.ddt
        lam = p.lambda_robin

        u_embed = np.zeros(d.V_s.ndof)
        u_embed[d.ifd_s] = iface.u_avg
        robin_rhs = lam * (d.M_is @ u_embed)
        robin_rhs[d.ifd_s] -= iface.traction_avg

        samples = []
        for _ in range(self.grid.substeps):
            rhs = (p.rho_s / ddt) * (d.M_s @ etad) - self.A_s @ eta + robin_rhs
            rhs[d.dir_s] = 0.0
            etad = self._solid_lu.solve(rhs)
            eta = eta + ddt * etad
            samples.append((eta, etad))
        return samples

    def fluid_step(self, u: np.ndarray, solid_samples, iface: InterfaceData):
        """Backward-Euler substeps of the fluid Robin subproblem, using the
        new solid velocity at the matching substep times."""
        d, p = self.disc, self.params
        ddt = self.grid.ddt
        lam = p.lambda_robin

        samples = []
        for _, etad in solid_samples:
            etad_embed = np.zeros(d.V_f.ndof)
            etad_embed[d.ifd_f] = etad[d.ifd_s]
            rhs_u = (p.rho_f / ddt) * (d.M_f @ u) + lam * (d.M_if @ etad_embed)
            rhs_u[d.ifd_f] += iface.traction_avg
            rhs_u[d.dir_f] = 0.0
            sol = self._fluid_lu.solve(np.concatenate([rhs_u, np.zeros(self._np)]))
            u, pres = sol[:self._nu], sol[self._nu:]
            samples.append((u, pres))
        return samples

    def extract_fluid_traction(self, u: np.ndarray, etad: np.ndarray,
                               iface: InterfaceData) -> np.ndarray:
        """Variational fluid traction implied by the discrete Robin condition:
        <sigma_f n, v> = lambda <etad - u, v> + <traction_avg, v>."""
        d = self.disc
        diff = etad[d.ifd_s] - u[d.ifd_f]
        return self.params.lambda_robin * (d.M_c @ diff) + iface.traction_avg

    @staticmethod
    def update_interface_average(samples) -> InterfaceData:
        """Rectangle-rule average of the substep traces and tractions."""
        u_avg = np.mean([s.u_trace for s in samples], axis=0)
        t_avg = np.mean([s.traction for s in samples], axis=0)
        return InterfaceData(u_avg, t_avg)

    # -- orchestration -----------------------------------------------------

    def advance(self, state: SplitState) -> SplitState:
        """One window: solid solve, fluid solve, traction extraction, average
        update.  Records the substep samples needed by the diagnostics."""
        d = self.disc
        grid = self.grid
        iface = state.iface
        t0 = state.n * grid.dt

        solid = self.solid_step(state.eta, state.etad, iface)
        fluid = self.fluid_step(state.u, solid, iface)

        samples = []
        for k, ((eta, etad), (u, pres)) in enumerate(zip(solid, fluid)):
            traction = self.extract_fluid_traction(u, etad, iface)
            samples.append(WindowSample(
                t=t0 + (k + 1) * grid.ddt, u=u, p=pres, eta=eta, etad=etad,
                u_trace=u[d.ifd_f].copy(), etad_trace=etad[d.ifd_s].copy(),
                traction=traction))
        last = samples[-1]
        return SplitState(
            n=state.n + 1, u=last.u, p=last.p, eta=last.eta, etad=last.etad,
            iface=self.update_interface_average(samples),
            window=WindowRecord(samples=samples, iface_used=iface))

    def run(self, state0: SplitState):
        """Advance all windows; returns (final state, list of WindowRecord)."""
        state = state0
        windows = []
        for _ in range(self.grid.num_windows):
            state = self.advance(state)
            windows.append(state.window)
        return state, windows


def initial_interface_data(disc: Discretization, u0: np.ndarray,
                           traction0: np.ndarray | None = None,
                           pressure0=None, mu: float = 0.0) -> InterfaceData:
    """Interface data for the first window: the initial velocity trace plus
    the initial fluid traction.

    The traction is either supplied directly as a canonical load vector
    (e.g. a monolithic-consistent variational flux) or assembled by interface
    quadrature of (2 mu eps(u0) - p0 I) n with an analytic pressure callable.
    Exactly one of the two must be provided: the scheme cannot start without
    the initial stress.
    """
    if traction0 is None and pressure0 is None:
        raise ValueError("initial pressure (or traction load) is required")
    if traction0 is None:
        from .initial_data import pointwise_traction_load
        traction0 = pointwise_traction_load(disc, u0, pressure0, mu=mu)
    return InterfaceData(u_avg=u0[disc.ifd_f].copy(),
                         traction_avg=np.asarray(traction0, dtype=float))
