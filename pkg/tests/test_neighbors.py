import numpy as np
import pytest

from sphmelt.neighbors import OutOfDomainError, build_index, wrap_periodic


def brute_force(points, radius):
    found = set()
    for a in range(len(points)):
        for b in range(len(points)):
            if a != b and np.linalg.norm(points[a] - points[b]) < radius:
                found.add((a, b))
    return found


class TestPairs:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        points = rng.uniform(0.0, 10.0, (120, 2))
        pairs = build_index(points, 1.5, (0.0, 0.0), (10.0, 10.0)).pairs()
        assert set(zip(pairs.i.tolist(), pairs.j.tolist())) == brute_force(
            points, 1.5
        )

    def test_sorted_and_symmetric(self):
        rng = np.random.default_rng(1)
        points = rng.uniform(0.0, 5.0, (60, 3))
        pairs = build_index(points, 1.2, (0, 0, 0), (5, 5, 5)).pairs()
        keys = pairs.i * 1000 + pairs.j
        assert np.all(np.diff(keys) > 0)
        assert np.allclose(pairs.rij, points[pairs.i] - points[pairs.j])
        assert np.allclose(np.linalg.norm(pairs.unit, axis=1), 1.0)

    def test_periodic_minimum_image(self):
        points = np.array([[0.1, 5.0], [9.9, 5.0]])
        pairs = build_index(
            points, 1.0, (0.0, 0.0), (10.0, 10.0), periodic=(True, False)
        ).pairs()
        assert len(pairs) == 2
        first = int(np.flatnonzero(pairs.i == 0)[0])
        assert pairs.rij[first] == pytest.approx([0.2, 0.0])
        assert pairs.r[first] == pytest.approx(0.2)

    def test_coincident_pairs_are_skipped(self):
        points = np.array([[1.0, 1.0], [1.0, 1.0], [1.5, 1.0]])
        pairs = build_index(points, 1.0, (0.0, 0.0), (3.0, 3.0)).pairs()
        assert pairs.skipped == 2
        assert len(pairs) == 4
        assert np.all(pairs.r > 0)

    def test_accumulate(self):
        points = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
        pairs = build_index(points, 0.75, (-1.0, -1.0), (2.0, 1.0)).pairs()
        counts = pairs.accumulate(np.ones(len(pairs)))
        assert counts.tolist() == [1.0, 2.0, 1.0]
        sums = pairs.accumulate(pairs.rij)
        assert sums.shape == (3, 2)
        assert sums[1] == pytest.approx([0.0, 0.0])

    def test_select_keeps_order(self):
        points = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
        pairs = build_index(points, 0.75, (-1.0, -1.0), (2.0, 1.0)).pairs()
        middle = pairs.select(pairs.i == 1)
        assert middle.j.tolist() == [0, 2]
        assert middle.size == 3


class TestBuildIndex:
    def test_out_of_domain(self):
        with pytest.raises(OutOfDomainError) as exc:
            build_index([[0.5, 0.5], [1.5, 0.5]], 0.5, (0.0, 0.0), (1.0, 1.0))
        assert exc.value.particle == 1

    def test_short_periodic_axis(self):
        with pytest.raises(ValueError):
            build_index([[0.5]], 1.0, (0.0,), (1.5,), periodic=(True,))

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            build_index([[0.5]], 0.0, (0.0,), (1.0,))

    def test_periodic_positions_wrapped(self):
        index = build_index([[10.0], [-0.5]], 1.0, (0.0,), (10.0,), periodic=(True,))
        assert index.positions[:, 0].tolist() == pytest.approx([0.0, 9.5])

    def test_neighbors_of(self):
        index = build_index([[0.0], [0.5], [3.0]], 1.0, (-1.0,), (4.0,))
        (j, rij, r), = index.neighbors_of(0)
        assert j == 1
        assert rij == pytest.approx([-0.5])
        assert r == pytest.approx(0.5)
        assert index.neighbors_of(2) == []
        with pytest.raises(IndexError):
            index.neighbors_of(3)


def test_wrap_periodic_counts_moved_coordinates():
    points = np.array([[1.0, 2.0], [11.0, 2.0], [-1.0, 12.0]])
    moved = wrap_periodic(
        points, np.array([0.0, 0.0]), np.array([10.0, 10.0]), (True, False)
    )
    assert moved == 2
    assert points[:, 0].tolist() == pytest.approx([1.0, 1.0, 9.0])
    assert points[2, 1] == 12.0
