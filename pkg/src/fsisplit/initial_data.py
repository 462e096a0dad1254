"""Initial states for stability and convergence experiments.

All constructors return a SplitState at t = 0 whose fields satisfy the
homogeneous Dirichlet conditions exactly and whose fluid velocity is
discretely divergence-free.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .assembly import (EDGE_POINTS, EDGE_WEIGHTS, Factorization,
                       apply_dirichlet, p2_basis, p2_edge_basis,
                       _cell_geometry)
from .splitting import Discretization, InterfaceData, PhysicalParams, SplitState


def project_divergence_free(disc: Discretization, u_raw: np.ndarray) -> np.ndarray:
    """L2-closest velocity to u_raw satisfying B u = 0 and u = 0 on the outer
    fluid boundary (one constrained saddle-point solve)."""
    d = disc
    nu, npr = d.V_f.ndof, d.Q.ndof
    u_raw = u_raw.copy()
    u_raw[d.dir_f] = 0.0
    A = sp.bmat([[d.M_f, d.B.T], [d.B, None]], format="csr")
    b = np.concatenate([d.M_f @ u_raw, np.zeros(npr)])
    A, b = apply_dirichlet(A, b, d.dir_f)
    u = Factorization(A).solve(b)[:nu]
    res = np.linalg.norm(d.B @ u)
    if res > 1e-8 * max(1.0, np.linalg.norm(u)):
        raise RuntimeError(f"divergence-free projection failed, |Bu| = {res:.3e}")
    return u


def solid_extension(disc: Discretization, trace: np.ndarray) -> np.ndarray:
    """Extend canonical interface trace values into the solid domain, zero on
    the outer solid boundary; interface dofs carry the trace bitwise."""
    d = disc
    A = (d.M_s + d.stiffness_solid(1.0, 0.0)).tocsr()
    fixed = np.concatenate([d.dir_s, d.ifd_s])
    values = np.concatenate([np.zeros(d.dir_s.size), trace])
    A, b = apply_dirichlet(A, np.zeros(d.V_s.ndof), fixed, values)
    out = Factorization(A).solve(b)
    out[d.ifd_s] = trace  # exact, not up to solver tolerance
    out[d.dir_s] = 0.0
    return out


def pointwise_traction_load(disc: Discretization, u: np.ndarray, pressure,
                            mu: float) -> np.ndarray:
    """Interface quadrature of (2 mu eps(u) - p I) n against the interface
    test functions; pressure is a callable of (x, y).

    This is the pointwise (non-variational) traction, used to seed the n = 0
    interface data from analytic initial pressure and as a low-order oracle
    for the variational flux.
    """
    d = disc
    space = d.V_f
    mesh = space.mesh
    # fluid cell adjacent to each interface facet, via shared vertex pair
    cell_lookup = {}
    for k, cid in enumerate(space.cells):
        cell = mesh.cells[cid]
        for a, b in ((0, 1), (1, 2), (2, 0)):
            cell_lookup[(min(cell[a], cell[b]), max(cell[a], cell[b]))] = k

    node_of = {tuple(np.round(space.node_coords[n], 12)): n
               for n in range(space.num_nodes)}
    load = np.zeros(space.ndof)
    normal = np.array([0.0, 1.0])  # outward fluid normal on the flat interface
    from .mesh import INTERFACE
    for v0, v1 in mesh.facets_of(INTERFACE):
        p0, p1 = mesh.vertices[v0], mesh.vertices[v1]
        if p1[0] < p0[0]:
            p0, p1 = p1, p0
        length = float(np.linalg.norm(p1 - p0))
        n0 = node_of[tuple(np.round(p0, 12))]
        n1 = node_of[tuple(np.round(p1, 12))]
        nm = node_of[tuple(np.round(0.5 * (p0 + p1), 12))]
        k = cell_lookup[(min(v0, v1), max(v0, v1))]
        cid = space.cells[k]
        det, inv = _cell_geometry(mesh, cid)
        origin = mesh.vertices[mesh.cells[cid][0]]
        nodes = space.cell_nodes[k]
        for s, w in zip(EDGE_POINTS, EDGE_WEIGHTS):
            xq = p0 + s * (p1 - p0)
            ref = inv @ (xq - origin)
            _, dn = p2_basis(ref[0], ref[1])
            gphys = dn @ inv  # (6, 2)
            grad = np.zeros((2, 2))
            for j, node in enumerate(nodes):
                grad[0] += u[2 * node] * gphys[j]
                grad[1] += u[2 * node + 1] * gphys[j]
            eps = 0.5 * (grad + grad.T)
            sigma = 2.0 * mu * eps - pressure(xq[0], xq[1]) * np.eye(2)
            tn = sigma @ normal
            vals = p2_edge_basis(s)
            for loc, node in zip(vals, (n0, n1, nm)):
                load[2 * node] += w * length * loc * tn[0]
                load[2 * node + 1] += w * length * loc * tn[1]
    return load[d.ifd_f]


def pressure_pulse(disc: Discretization, params: PhysicalParams,
                   amplitude: float, width: float) -> SplitState:
    """Zero velocity and displacement; a Gaussian pressure bump centred on the
    channel seeds the initial interface traction."""
    if not np.isfinite(amplitude):
        raise ValueError("amplitude must be finite")
    if not 0.0 < width < disc.geom.length:
        raise ValueError("width must lie in (0, L)")
    d = disc
    L = d.geom.length

    def p0(x, y):
        return amplitude * np.exp(-((x - L / 2.0) ** 2) / width ** 2)

    u = np.zeros(d.V_f.ndof)
    pres = np.array([p0(x, y) for x, y in d.Q.node_coords])
    traction = pointwise_traction_load(d, u, p0, mu=0.0)
    iface = InterfaceData(u_avg=np.zeros(d.ifd_f.size), traction_avg=traction)
    return SplitState(n=0, u=u, p=pres, eta=np.zeros(d.V_s.ndof),
                      etad=np.zeros(d.V_s.ndof), iface=iface)


def smooth_coupled_mode(disc: Discretization, params: PhysicalParams,
                        amplitude: float = 1.0) -> SplitState:
    """Smooth, kinematically compatible initial data for convergence runs.

    The fluid velocity derives from the stream function
    psi = amplitude * x^2 (L-x)^2 y^2, which vanishes along with its normal
    derivative on the outer fluid boundary, and is projected onto the
    discretely divergence-free subspace.  The solid velocity extends the
    fluid trace (shared interface values bitwise); displacement starts at
    zero.  The initial traction is left to the caller (monolithic-consistent
    flux), see initial_interface_data.
    """
    d = disc
    L = d.geom.length

    def velocity(x, y):
        ux = amplitude * x ** 2 * (L - x) ** 2 * 2.0 * y
        uy = -amplitude * (2 * x * (L - x) ** 2 - 2 * x ** 2 * (L - x)) * y ** 2
        return ux, uy

    u_raw = np.zeros(d.V_f.ndof)
    for n, (x, y) in enumerate(d.V_f.node_coords):
        ux, uy = velocity(x, y)
        u_raw[2 * n], u_raw[2 * n + 1] = ux, uy
    u = project_divergence_free(d, u_raw)

    etad = solid_extension(d, u[d.ifd_f])
    iface = InterfaceData(u_avg=u[d.ifd_f].copy(),
                          traction_avg=np.zeros(d.ifd_f.size))
    return SplitState(n=0, u=u, p=np.zeros(d.Q.ndof),
                      eta=np.zeros(d.V_s.ndof), etad=etad, iface=iface)


def random_state(disc: Discretization, params: PhysicalParams,
                 rng: np.random.Generator, scale: float = 1.0) -> SplitState:
    """Random nonzero initial data for the stability sweep: random nodal
    fields (divergence-free fluid velocity, solid displacement and velocity)
    and a random initial interface traction."""
    d = disc
    u = project_divergence_free(d, scale * rng.standard_normal(d.V_f.ndof))
    eta = scale * rng.standard_normal(d.V_s.ndof)
    etad = scale * rng.standard_normal(d.V_s.ndof)
    eta[d.dir_s] = 0.0
    etad[d.dir_s] = 0.0
    traction = scale * (d.M_c @ rng.standard_normal(d.ifd_f.size))
    iface = InterfaceData(u_avg=u[d.ifd_f].copy(), traction_avg=traction)
    return SplitState(n=0, u=u, p=np.zeros(d.Q.ndof), eta=eta, etad=etad,
                      iface=iface)
