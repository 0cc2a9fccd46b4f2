import io

import numpy as np
import pytest

from orthorecon.mesh import Mesh, MeshFamily, by_name, cartesian, friedrichs_keller, from_polygons


@pytest.mark.parametrize("n,count", [(0, 2), (3, 32), (30, 1922)])
def test_fk_counts(n, count):
    m = friedrichs_keller(n)
    assert len(m) == count == 2 * (n + 1) ** 2
    np.testing.assert_allclose(m.areas, 2 / (n + 1) ** 2, rtol=1e-13)


@pytest.mark.parametrize("n,count", [(2, 1), (5, 16), (30, 841)])
def test_cartesian_counts(n, count):
    m = cartesian(n)
    assert len(m) == count == (n - 1) ** 2
    side = np.ptp(m.vertices[..., 0], axis=1)
    np.testing.assert_allclose(side, 2 / (n - 1), rtol=1e-13)


def test_cartesian_two_is_domain():
    np.testing.assert_array_equal(cartesian(2).vertices[0], [[-1, -1], [1, -1], [1, 1], [-1, 1]])


def test_cartesian_needs_two():
    with pytest.raises(ValueError):
        cartesian(1)
    with pytest.raises(ValueError):
        friedrichs_keller(-1)


@pytest.mark.parametrize("mesh", [friedrichs_keller(7), friedrichs_keller(4, "up"), cartesian(9)],
                         ids=["fk-down", "fk-up", "cart"])
def test_tiling(mesh):
    assert mesh.areas.sum() == pytest.approx(4.0, abs=1e-12)
    assert np.all(mesh.areas > 0)
    # every interior sample lies in exactly one element
    pts = np.random.default_rng(1).uniform(-1, 1, (3000, 2))
    v = mesh.vertices
    e = np.roll(v, -1, axis=1) - v
    rel = pts[:, None, None, :] - v[None]
    cross = e[None, ..., 0] * rel[..., 1] - e[None, ..., 1] * rel[..., 0]
    hits = np.all(cross > 1e-13, axis=2).sum(axis=1)
    assert np.all(hits == 1)
    np.testing.assert_array_equal(mesh.locate(pts), np.argmax(np.all(cross > 1e-13, axis=2), axis=1))


def test_shared_vertices_bitwise():
    m = friedrichs_keller(6)
    coords = m.vertices.reshape(-1, 2)
    grid = -1.0 + 2.0 * np.arange(8) / 7
    assert set(np.unique(coords[:, 0])) == set(grid)
    # each shared edge appears twice, once per direction, with identical endpoints
    edges = {}
    for tri in m.vertices:
        for i in range(3):
            a, b = tuple(tri[i]), tuple(tri[(i + 1) % 3])
            edges[(a, b)] = edges.get((a, b), 0) + 1
    interior = [k for k in edges if (k[1], k[0]) in edges]
    assert len(interior) == 2 * (3 * 7 * 7 - 2 * 7)


def test_diagonal_directions():
    down = friedrichs_keller(0).vertices
    up = friedrichs_keller(0, "up").vertices
    diag = lambda tris: {tuple(map(tuple, sorted(map(tuple, set(map(tuple, tris[0])) & set(map(tuple, tris[1]))))))}
    assert diag(down) == {((-1.0, 1.0), (1.0, -1.0))}
    assert diag(up) == {((-1.0, -1.0), (1.0, 1.0))}
    with pytest.raises(ValueError):
        friedrichs_keller(2, "sideways")


def test_h_and_labels():
    m = friedrichs_keller(9)
    assert m.h == pytest.approx(np.hypot(0.2, 0.2))
    assert m.label == "fk:9" and m.family is MeshFamily.FRIEDRICHS_KELLER
    assert by_name("cart:4").label == "cart:4"
    with pytest.raises(ValueError):
        by_name("hex:4")
    with pytest.raises(ValueError):
        by_name("fk:x")


def test_locate_outside_and_custom():
    m = cartesian(3)
    assert list(m.locate([[5.0, 0.0], [-0.5, -0.5], [0.5, 0.5]])) == [-1, 0, 3]
    c = from_polygons(friedrichs_keller(1).elements)
    assert c.family is MeshFamily.CUSTOM
    pts = np.random.default_rng(2).uniform(-1, 1, (200, 2))
    np.testing.assert_array_equal(c.locate(pts), friedrichs_keller(1).locate(pts))


def test_dump_roundtrip():
    m = friedrichs_keller(2)
    buf = io.StringIO()
    m.dump(buf)
    back = np.loadtxt(io.StringIO(buf.getvalue())).reshape(-1, 3, 2)
    np.testing.assert_array_equal(back, m.vertices)
    assert len(list(m)) == len(m)
