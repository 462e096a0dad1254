"""Structured two-layer triangle meshes with a tagged fluid/solid interface.

The fluid occupies the lower rectangle [0, L] x [0, H_f], the solid the upper
rectangle [0, L] x [H_f, H_f + H_s].  The shared horizontal segment y = H_f is
the interface; the remaining fluid boundary is tagged SIGMA_F and the remaining
solid boundary SIGMA_S.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FLUID = 0
SOLID = 1

SIGMA_F = "sigma_f"
SIGMA_S = "sigma_s"
INTERFACE = "interface"


@dataclass(frozen=True)
class ChannelGeometry:
    """Rectangular two-layer channel: fluid below, solid above."""

    length: float
    fluid_height: float
    solid_height: float

    def __post_init__(self):
        if self.length <= 0 or self.fluid_height <= 0 or self.solid_height <= 0:
            raise ValueError("geometry dimensions must be positive")


@dataclass
class Mesh:
    """Conforming triangulation of the two subdomains.

    vertices : (nv, 2) float array
    cells : (nc, 3) int array, counter-clockwise orientation
    cell_domain : (nc,) int array with values FLUID / SOLID
    facets : (nf, 2) int array of tagged boundary/interface edges
    facet_tags : list of nf tags, each SIGMA_F / SIGMA_S / INTERFACE
    """

    vertices: np.ndarray
    cells: np.ndarray
    cell_domain: np.ndarray
    facets: np.ndarray
    facet_tags: list = field(default_factory=list)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_cells(self) -> int:
        return self.cells.shape[0]

    def cells_of(self, domain: int) -> np.ndarray:
        return np.flatnonzero(self.cell_domain == domain)

    def facets_of(self, tag: str) -> np.ndarray:
        idx = [i for i, t in enumerate(self.facet_tags) if t == tag]
        return self.facets[idx]

    def cell_areas(self) -> np.ndarray:
        p = self.vertices
        a, b, c = (p[self.cells[:, k]] for k in range(3))
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                      - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def build_two_layer_mesh(geom: ChannelGeometry, nx: int, ny_f: int, ny_s: int) -> Mesh:
    """Build the structured crossed-triangle mesh of the two-layer channel.

    Each grid quad is split along its lower-left/upper-right diagonal.  The
    interface vertices at y = H_f are shared by fluid and solid cells, so the
    subdomain meshes match vertex-for-vertex on the interface.
    """
    if nx < 1 or ny_f < 1 or ny_s < 1:
        raise ValueError("cell counts must be >= 1")
    L, Hf, Hs = geom.length, geom.fluid_height, geom.solid_height

    xs = np.linspace(0.0, L, nx + 1)
    ys = np.concatenate([np.linspace(0.0, Hf, ny_f + 1),
                         np.linspace(Hf, Hf + Hs, ny_s + 1)[1:]])
    ny = ny_f + ny_s
    xx, yy = np.meshgrid(xs, ys)
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    cells = []
    cell_domain = []
    for j in range(ny):
        dom = FLUID if j < ny_f else SOLID
        for i in range(nx):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            cells.append((v00, v10, v11))
            cells.append((v00, v11, v01))
            cell_domain.extend((dom, dom))

    facets = []
    tags = []
    for i in range(nx):
        facets.append((vid(i, 0), vid(i + 1, 0)))
        tags.append(SIGMA_F)
        facets.append((vid(i, ny), vid(i + 1, ny)))
        tags.append(SIGMA_S)
        facets.append((vid(i, ny_f), vid(i + 1, ny_f)))
        tags.append(INTERFACE)
    for j in range(ny):
        side = SIGMA_F if j < ny_f else SIGMA_S
        facets.append((vid(0, j), vid(0, j + 1)))
        tags.append(side)
        facets.append((vid(nx, j), vid(nx, j + 1)))
        tags.append(side)

    return Mesh(vertices=vertices,
                cells=np.asarray(cells, dtype=np.int64),
                cell_domain=np.asarray(cell_domain, dtype=np.int64),
                facets=np.asarray(facets, dtype=np.int64),
                facet_tags=tags)


def interface_facets(mesh: Mesh):
    """Interface facets ordered by x, with outward fluid and solid unit normals.

    Returns a list of (v0, v1, n_fluid, n_solid); the fluid lies below the
    interface so n_fluid = -n_solid always holds.
    """
    out = []
    for f in mesh.facets_of(INTERFACE):
        p0, p1 = mesh.vertices[f[0]], mesh.vertices[f[1]]
        if p1[0] < p0[0]:
            f = f[::-1]
            p0, p1 = p1, p0
        t = (p1 - p0) / np.linalg.norm(p1 - p0)
        n_fluid = np.array([-t[1], t[0]])
        out.append((int(f[0]), int(f[1]), n_fluid, -n_fluid))
    out.sort(key=lambda r: mesh.vertices[r[0]][0])
    return out


def dump_mesh(mesh: Mesh) -> str:
    """Plain-text dump (vertices / cells / facets sections) for debugging."""
    lines = ["vertices"]
    for p in mesh.vertices:
        lines.append(f"{p[0]!r} {p[1]!r}")
    lines.append("cells")
    for c, d in zip(mesh.cells, mesh.cell_domain):
        lines.append(f"{c[0]} {c[1]} {c[2]} {d}")
    lines.append("facets")
    for f, t in zip(mesh.facets, mesh.facet_tags):
        lines.append(f"{f[0]} {f[1]} {t}")
    return "\n".join(lines) + "\n"
