import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsisplit.mesh import (FLUID, INTERFACE, SIGMA_F, SIGMA_S, SOLID,
                           ChannelGeometry, build_two_layer_mesh, dump_mesh,
                           interface_facets)


def test_smallest_mesh_counts():
    mesh = build_two_layer_mesh(ChannelGeometry(1.0, 1.0, 1.0), 1, 1, 1)
    assert mesh.cells_of(FLUID).size == 2
    assert mesh.cells_of(SOLID).size == 2
    iface = mesh.facets_of(INTERFACE)
    assert iface.shape[0] == 1
    v0, v1 = iface[0]
    assert np.linalg.norm(mesh.vertices[v1] - mesh.vertices[v0]) == pytest.approx(1.0)


def test_total_area_exact():
    mesh = build_two_layer_mesh(ChannelGeometry(2.0, 1.0, 0.5), 4, 2, 1)
    assert mesh.cell_areas().sum() == pytest.approx(3.0, abs=1e-14)


def test_interface_length_sums_to_L():
    geom = ChannelGeometry(3.0, 1.0, 2.0)
    mesh = build_two_layer_mesh(geom, 5, 2, 3)
    # direct summation oracle over tagged facets
    total = sum(np.linalg.norm(mesh.vertices[v1] - mesh.vertices[v0])
                for v0, v1 in mesh.facets_of(INTERFACE))
    assert total == pytest.approx(geom.length, rel=1e-14)


def test_interface_normals_and_count():
    mesh = build_two_layer_mesh(ChannelGeometry(2.0, 0.5, 0.5), 6, 2, 2)
    facets = interface_facets(mesh)
    assert len(facets) == 6
    for _, _, n_f, n_s in facets:
        assert np.allclose(n_f, [0.0, 1.0])
        assert np.allclose(n_f + n_s, 0.0)
        assert np.linalg.norm(n_f) == pytest.approx(1.0)
    # ordered by x
    xs = [mesh.vertices[f[0]][0] for f in facets]
    assert xs == sorted(xs)


def test_interface_matches_bitwise():
    mesh = build_two_layer_mesh(ChannelGeometry(1.0, 1.0, 1.0), 4, 3, 2)
    iface_verts = np.unique(mesh.facets_of(INTERFACE))
    fluid_verts = np.unique(mesh.cells[mesh.cells_of(FLUID)])
    solid_verts = np.unique(mesh.cells[mesh.cells_of(SOLID)])
    from_fluid = np.intersect1d(iface_verts, fluid_verts)
    from_solid = np.intersect1d(iface_verts, solid_verts)
    assert np.array_equal(from_fluid, from_solid)
    # same vertex ids means bitwise equal coordinates by construction
    assert np.array_equal(mesh.vertices[from_fluid], mesh.vertices[from_solid])


def test_boundary_tag_partition():
    mesh = build_two_layer_mesh(ChannelGeometry(1.0, 1.0, 1.0), 3, 2, 2)
    seen = {}
    for f, t in zip(mesh.facets, mesh.facet_tags):
        key = (min(f), max(f))
        assert key not in seen, "facet tagged twice"
        seen[key] = t
    assert set(mesh.facet_tags) == {SIGMA_F, SIGMA_S, INTERFACE}


@settings(max_examples=30, deadline=None)
@given(L=st.floats(0.1, 10.0), hf=st.floats(0.1, 5.0), hs=st.floats(0.1, 5.0),
       nx=st.integers(1, 6), nyf=st.integers(1, 4), nys=st.integers(1, 4))
def test_mesh_properties_hold_for_any_geometry(L, hf, hs, nx, nyf, nys):
    geom = ChannelGeometry(L, hf, hs)
    mesh = build_two_layer_mesh(geom, nx, nyf, nys)
    areas = mesh.cell_areas()
    h2 = (L / nx) * (min(hf / nyf, hs / nys))
    assert np.all(areas > 1e-14 * h2)  # positive orientation, no slivers
    assert areas.sum() == pytest.approx(L * (hf + hs), rel=1e-12)
    assert mesh.facets_of(INTERFACE).shape[0] == nx
    total = sum(np.linalg.norm(mesh.vertices[v1] - mesh.vertices[v0])
                for v0, v1 in mesh.facets_of(INTERFACE))
    assert total == pytest.approx(L, rel=1e-12)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        ChannelGeometry(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ChannelGeometry(1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        build_two_layer_mesh(ChannelGeometry(1.0, 1.0, 1.0), 0, 1, 1)


def test_dump_mesh_sections():
    mesh = build_two_layer_mesh(ChannelGeometry(1.0, 1.0, 1.0), 1, 1, 1)
    text = dump_mesh(mesh)
    lines = text.splitlines()
    assert "vertices" in lines and "cells" in lines and "facets" in lines
    assert len(lines) == 1 + mesh.num_vertices + 1 + mesh.num_cells + 1 + len(mesh.facet_tags)
