"""Finite element spaces on one subdomain of a two-layer mesh.

Supported elements: vector/scalar Lagrange P1 and P2 on triangles.  Nodes are
numbered vertices-first, then edge midpoints (P2 only), both in ascending mesh
order, which makes the numbering deterministic and the interface node ordering
identical for the fluid and solid spaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import INTERFACE, SIGMA_F, SIGMA_S, Mesh

VECTOR_P2 = "vector_p2"
VECTOR_P1 = "vector_p1"
SCALAR_P1 = "scalar_p1"

_KINDS = {VECTOR_P2: (2, 2), VECTOR_P1: (1, 2), SCALAR_P1: (1, 1)}


def mesh_edges(mesh: Mesh):
    """Global edge numbering: sorted vertex pair -> edge id."""
    edges = {}
    for cell in mesh.cells:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = (min(cell[a], cell[b]), max(cell[a], cell[b]))
            if key not in edges:
                edges[key] = len(edges)
    return edges


@dataclass
class Space:
    """Scalar-node based FE space; vector dofs interleave components.

    node of index k carries dofs ncomp*k + c for component c.
    """

    mesh: Mesh
    domain: int
    kind: str
    degree: int
    ncomp: int
    node_coords: np.ndarray          # (n_nodes, 2)
    cell_nodes: np.ndarray           # (n_subcells, 3 or 6) global node ids
    cells: np.ndarray                # mesh cell ids of this subdomain
    boundary_nodes: dict             # tag -> sorted array of node ids
    interface_nodes: np.ndarray      # canonical order (by x), corners excluded

    @property
    def num_nodes(self) -> int:
        return self.node_coords.shape[0]

    @property
    def ndof(self) -> int:
        return self.ncomp * self.num_nodes

    def expand(self, nodes) -> np.ndarray:
        """Vector dofs of the given scalar nodes, components interleaved."""
        nodes = np.asarray(nodes, dtype=np.int64)
        return (self.ncomp * nodes[:, None] + np.arange(self.ncomp)).ravel()

    @property
    def interface_dofs(self) -> np.ndarray:
        return self.expand(self.interface_nodes)

    def dirichlet_dofs(self, tag: str) -> np.ndarray:
        return self.expand(self.boundary_nodes.get(tag, np.empty(0, dtype=np.int64)))


def build_space(mesh: Mesh, domain: int, kind: str) -> Space:
    if kind not in _KINDS:
        raise ValueError(f"unknown space kind: {kind}")
    degree, ncomp = _KINDS[kind]

    sub = mesh.cells_of(domain)
    cells = mesh.cells[sub]
    vids = np.unique(cells)
    vmap = {int(v): i for i, v in enumerate(vids)}
    coords = [mesh.vertices[vids]]

    edge_ids = mesh_edges(mesh) if degree == 2 else {}
    if degree == 2:
        sub_edges = set()
        for cell in cells:
            for a, b in ((0, 1), (1, 2), (2, 0)):
                sub_edges.add((min(cell[a], cell[b]), max(cell[a], cell[b])))
        sub_edges = sorted(sub_edges, key=lambda k: edge_ids[k])
        emap = {k: len(vids) + i for i, k in enumerate(sub_edges)}
        coords.append(np.array([0.5 * (mesh.vertices[a] + mesh.vertices[b])
                                for a, b in sub_edges]).reshape(-1, 2))
    node_coords = np.vstack(coords)

    # local node order: v0 v1 v2 [m12 m20 m01] (midpoint opposite each vertex)
    rows = []
    for cell in cells:
        loc = [vmap[int(v)] for v in cell]
        if degree == 2:
            for a, b in ((1, 2), (2, 0), (0, 1)):
                key = (min(cell[a], cell[b]), max(cell[a], cell[b]))
                loc.append(emap[key])
        rows.append(loc)
    cell_nodes = np.asarray(rows, dtype=np.int64)

    sub_edge_set = set(emap) if degree == 2 else {
        (min(c[a], c[b]), max(c[a], c[b]))
        for c in cells for a, b in ((0, 1), (1, 2), (2, 0))}
    boundary_nodes = {}
    for tag in (SIGMA_F, SIGMA_S, INTERFACE):
        nodes = set()
        for v0, v1 in mesh.facets_of(tag):
            key = (min(v0, v1), max(v0, v1))
            if key not in sub_edge_set:
                continue
            if int(v0) in vmap:
                nodes.add(vmap[int(v0)])
                nodes.add(vmap[int(v1)])
                if degree == 2:
                    nodes.add(emap[key])
        if nodes:
            boundary_nodes[tag] = np.array(sorted(nodes), dtype=np.int64)

    dirichlet_tag = SIGMA_F if domain == 0 else SIGMA_S
    dir_nodes = set(boundary_nodes.get(dirichlet_tag, np.empty(0, np.int64)).tolist())
    iface = [n for n in boundary_nodes.get(INTERFACE, np.empty(0, np.int64)).tolist()
             if n not in dir_nodes]
    iface.sort(key=lambda n: node_coords[n, 0])

    return Space(mesh=mesh, domain=domain, kind=kind, degree=degree, ncomp=ncomp,
                 node_coords=node_coords, cell_nodes=cell_nodes, cells=sub,
                 boundary_nodes=boundary_nodes,
                 interface_nodes=np.asarray(iface, dtype=np.int64))
