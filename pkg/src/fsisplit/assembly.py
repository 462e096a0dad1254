"""Bilinear form assembly, boundary conditions and the sparse direct solve.

Quadrature: 6-point degree-4 rule on triangles, 3-point Gauss on interface
edges — exact for every product of P2 basis functions appearing here.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import INTERFACE, Mesh
from .spaces import Space

__all__ = [
    "assemble_vector_mass", "assemble_symgrad", "assemble_divdiv",
    "assemble_elasticity", "assemble_divergence", "assemble_interface_mass",
    "apply_dirichlet", "solve_sparse", "SingularSystemError",
]

# Dunavant degree-4 rule, weights scaled to reference-triangle area 1/2.
_A1, _A2 = 0.445948490915965, 0.091576213509771
_W1, _W2 = 0.223381589678011 / 2.0, 0.109951743655322 / 2.0
TRI_POINTS = np.array([
    [_A1, _A1], [1.0 - 2.0 * _A1, _A1], [_A1, 1.0 - 2.0 * _A1],
    [_A2, _A2], [1.0 - 2.0 * _A2, _A2], [_A2, 1.0 - 2.0 * _A2],
])
TRI_WEIGHTS = np.array([_W1, _W1, _W1, _W2, _W2, _W2])

# 3-point Gauss on [0, 1].
_G = np.sqrt(3.0 / 5.0)
EDGE_POINTS = 0.5 * (1.0 + np.array([-_G, 0.0, _G]))
EDGE_WEIGHTS = 0.5 * np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])


def p1_basis(x, y):
    """P1 values and reference gradients at one point."""
    n = np.array([1.0 - x - y, x, y])
    dn = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    return n, dn


def p2_basis(x, y):
    """P2 values and reference gradients; node order v0 v1 v2 m12 m20 m01."""
    l0, l1, l2 = 1.0 - x - y, x, y
    n = np.array([l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
                  4 * l1 * l2, 4 * l0 * l2, 4 * l0 * l1])
    d0 = np.array([-1.0, -1.0])
    d1 = np.array([1.0, 0.0])
    d2 = np.array([0.0, 1.0])
    dn = np.vstack([
        (4 * l0 - 1) * d0, (4 * l1 - 1) * d1, (4 * l2 - 1) * d2,
        4 * (l2 * d1 + l1 * d2), 4 * (l2 * d0 + l0 * d2), 4 * (l1 * d0 + l0 * d1),
    ])
    return n, dn


def p2_edge_basis(s):
    """1D P2 values on [0,1]; node order: endpoint0, endpoint1, midpoint."""
    return np.array([(1 - s) * (1 - 2 * s), s * (2 * s - 1), 4 * s * (1 - s)])


def _basis(degree):
    return p1_basis if degree == 1 else p2_basis


def _cell_geometry(mesh: Mesh, cell_id: int):
    v = mesh.vertices[mesh.cells[cell_id]]
    jac = np.array([[v[1, 0] - v[0, 0], v[2, 0] - v[0, 0]],
                    [v[1, 1] - v[0, 1], v[2, 1] - v[0, 1]]])
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    inv = np.array([[jac[1, 1], -jac[0, 1]], [-jac[1, 0], jac[0, 0]]]) / det
    return det, inv


def _tabulate(space: Space):
    """Basis values and reference gradients at the triangle quadrature points."""
    basis = _basis(space.degree)
    vals, grads = [], []
    for x, y in TRI_POINTS:
        n, dn = basis(x, y)
        vals.append(n)
        grads.append(dn)
    return np.array(vals), np.array(grads)  # (nq, nl), (nq, nl, 2)


def _scatter(shape, entries):
    rows, cols, vals = entries
    mat = sp.coo_matrix((np.concatenate(vals),
                         (np.concatenate(rows), np.concatenate(cols))),
                        shape=shape).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def _assemble_cellwise(space: Space, local_block):
    """Generic symmetric cell loop; local_block(grads_phys, vals, w) returns
    the local block already expanded to vector dofs."""
    vals, grads = _tabulate(space)
    rows, cols, data = [], [], []
    for k, cell_id in enumerate(space.cells):
        det, inv = _cell_geometry(space.mesh, cell_id)
        gphys = grads @ inv  # (nq, nl, 2)
        w = TRI_WEIGHTS * abs(det)
        block = local_block(gphys, vals, w)
        block = 0.5 * (block + block.T)  # all forms here are symmetric; make it exact
        dofs = space.expand(space.cell_nodes[k])
        rows.append(np.repeat(dofs, dofs.size))
        cols.append(np.tile(dofs, dofs.size))
        data.append(block.ravel())
    return _scatter((space.ndof, space.ndof), (rows, cols, data))


def assemble_vector_mass(space: Space, density: float) -> sp.csr_matrix:
    """density * integral of phi_i . phi_j over the space's subdomain."""
    if density <= 0:
        raise ValueError("density must be positive")
    if space.ncomp != 2:
        raise ValueError("vector mass requires a vector-valued space")

    def block(gphys, vals, w):
        m = np.einsum("q,qi,qj->ij", w, vals, vals)
        nl = m.shape[0]
        out = np.zeros((2 * nl, 2 * nl))
        out[0::2, 0::2] = m
        out[1::2, 1::2] = m
        return density * out

    return _assemble_cellwise(space, block)


def assemble_symgrad(space: Space, coeff: float) -> sp.csr_matrix:
    """coeff * integral of 2 eps(u):eps(v); with coeff = mu this is the
    viscous stiffness 2 mu (eps(u), eps(v))."""
    if space.ncomp != 2:
        raise ValueError("symmetric-gradient form requires a vector space")
    if coeff <= 0:
        raise ValueError("coefficient must be positive")

    def block(gphys, vals, w):
        lap = np.einsum("q,qid,qjd->ij", w, gphys, gphys)
        nl = lap.shape[0]
        out = np.zeros((2 * nl, 2 * nl))
        for a in range(2):
            for b in range(2):
                cross = np.einsum("q,qi,qj->ij", w, gphys[:, :, b], gphys[:, :, a])
                out[a::2, b::2] = cross + (lap if a == b else 0.0)
        return coeff * out

    return _assemble_cellwise(space, block)


def assemble_divdiv(space: Space, coeff: float) -> sp.csr_matrix:
    """coeff * integral of div(u) div(v)."""
    if space.ncomp != 2:
        raise ValueError("div-div form requires a vector space")

    def block(gphys, vals, w):
        nl = gphys.shape[1]
        out = np.zeros((2 * nl, 2 * nl))
        for a in range(2):
            for b in range(2):
                out[a::2, b::2] = np.einsum(
                    "q,qi,qj->ij", w, gphys[:, :, a], gphys[:, :, b])
        return coeff * out

    return _assemble_cellwise(space, block)


def assemble_elasticity(space: Space, l1: float, l2: float) -> sp.csr_matrix:
    """2 L1 (eps(w), eps(v)) + L2 (div w, div v); induces the solid energy
    norm used throughout the diagnostics."""
    if l1 <= 0:
        raise ValueError("l1 must be positive")
    if l2 < 0:
        raise ValueError("l2 must be non-negative")
    mat = assemble_symgrad(space, l1)
    if l2 > 0:
        mat = (mat + assemble_divdiv(space, l2)).tocsr()
    mat.sort_indices()
    return mat


def assemble_divergence(vel: Space, pres: Space) -> sp.csr_matrix:
    """Rectangular B with B[q, v] = integral of q div(v)."""
    if vel.ncomp != 2 or pres.ncomp != 1:
        raise ValueError("expected a vector velocity and scalar pressure space")
    if vel.domain != pres.domain or not np.array_equal(vel.cells, pres.cells):
        raise ValueError("velocity and pressure spaces live on different subdomains")
    vvals, vgrads = _tabulate(vel)
    pvals, _ = _tabulate(pres)
    rows, cols, data = [], [], []
    for k, cell_id in enumerate(vel.cells):
        det, inv = _cell_geometry(vel.mesh, cell_id)
        gphys = vgrads @ inv
        w = TRI_WEIGHTS * abs(det)
        nlv = gphys.shape[1]
        block = np.zeros((pvals.shape[1], 2 * nlv))
        for b in range(2):
            block[:, b::2] = np.einsum("q,qi,qj->ij", w, pvals, gphys[:, :, b])
        vdofs = vel.expand(vel.cell_nodes[k])
        pdofs = pres.cell_nodes[k]
        rows.append(np.repeat(pdofs, vdofs.size))
        cols.append(np.tile(vdofs, pdofs.size))
        data.append(block.ravel())
    return _scatter((pres.ndof, vel.ndof), (rows, cols, data))


def _interface_edges(space: Space):
    """Interface facets of the space as (node0, node1, midpoint, length),
    ordered by x like the canonical interface numbering."""
    mesh = space.mesh
    # vertex -> space node lookup via rounded coordinates
    coord_map = {tuple(np.round(space.node_coords[n], 12)): n
                 for n in range(space.num_nodes)}
    edges = []
    for v0, v1 in mesh.facets_of(INTERFACE):
        p0, p1 = mesh.vertices[v0], mesh.vertices[v1]
        if p1[0] < p0[0]:
            p0, p1 = p1, p0
        mid = 0.5 * (p0 + p1)
        n0 = coord_map[tuple(np.round(p0, 12))]
        n1 = coord_map[tuple(np.round(p1, 12))]
        nm = coord_map[tuple(np.round(mid, 12))] if space.degree == 2 else None
        edges.append((n0, n1, nm, float(np.linalg.norm(p1 - p0))))
    edges.sort(key=lambda e: space.node_coords[e[0], 0])
    return edges


def assemble_interface_mass(space: Space) -> sp.csr_matrix:
    """Interface mass: integral over the interface of phi_i . phi_j."""
    if space.interface_nodes.size == 0 and INTERFACE not in space.boundary_nodes:
        raise ValueError("space has no interface facets")
    rows, cols, data = [], [], []
    for n0, n1, nm, length in _interface_edges(space):
        loc = [n0, n1] + ([nm] if nm is not None else [])
        nl = len(loc)
        m = np.zeros((nl, nl))
        for s, w in zip(EDGE_POINTS, EDGE_WEIGHTS):
            if space.degree == 2:
                vals = np.array([(1 - s) * (1 - 2 * s), s * (2 * s - 1),
                                 4 * s * (1 - s)])
            else:
                vals = np.array([1 - s, s])
            m += w * length * np.outer(vals, vals)
        dofs = space.expand(np.asarray(loc))
        block = np.zeros((space.ncomp * nl, space.ncomp * nl))
        for c in range(space.ncomp):
            block[c::space.ncomp, c::space.ncomp] = m
        rows.append(np.repeat(dofs, dofs.size))
        cols.append(np.tile(dofs, dofs.size))
        data.append(block.ravel())
    return _scatter((space.ndof, space.ndof), (rows, cols, data))


def apply_dirichlet(A: sp.spmatrix, b: np.ndarray, dofs, values=None):
    """Symmetric elimination of the given dofs.

    Rows and columns are zeroed and replaced by the identity; for homogeneous
    conditions (the default) the RHS entries are simply zeroed, otherwise the
    lifting of the prescribed values is subtracted from the RHS first.
    """
    dofs = np.asarray(dofs, dtype=np.int64)
    A = A.tocsr()
    b = np.array(b, dtype=float)
    if dofs.size == 0:
        return A, b
    n = A.shape[0]
    keep = np.ones(n)
    keep[dofs] = 0.0
    lift = np.zeros(n)
    if values is not None:
        lift[dofs] = values
        b = b - A @ lift
    D = sp.diags(keep)
    fixed = np.zeros(n)
    fixed[dofs] = 1.0
    A2 = (D @ A @ D + sp.diags(fixed)).tocsr()
    A2.sort_indices()
    b2 = keep * b + lift
    return A2, b2


class SingularSystemError(RuntimeError):
    """Raised when the direct factorization hits an exactly singular pivot."""


class Factorization:
    """Immutable LU factorization; safe for repeated solves."""

    def __init__(self, A: sp.spmatrix):
        A = A.tocsc()
        if A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        try:
            self._lu = spla.splu(A)
        except RuntimeError as exc:
            raise SingularSystemError(str(exc)) from exc

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.asarray(b, dtype=float))


def solve_sparse(A: sp.spmatrix, b: np.ndarray) -> np.ndarray:
    """Direct sparse solve; deterministic for identical inputs."""
    return Factorization(A).solve(b)
