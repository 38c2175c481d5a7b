import numpy as np
import pytest

from pmanifold.errors import DataFormatError
from pmanifold.geometry import PointCloud
from pmanifold.isomap import isomap


def classical_scaling_oracle(dist, dims):
    """Independent classical scaling of an explicit distance matrix."""
    n = dist.shape[0]
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (dist ** 2) @ j
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:dims]
    return evecs[:, order] * np.sqrt(np.maximum(evals[order], 0.0))


def procrustes_distance(a, b):
    """Residual after optimal rotation/reflection + translation (no scaling)."""
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    u, _, vt = np.linalg.svd(a.T @ b)
    r = u @ vt
    return np.max(np.linalg.norm(a @ r - b, axis=1))


class TestSquare:
    def test_square_matches_classical_scaling_oracle(self):
        corners = PointCloud(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float))
        result = isomap(corners, k=2, dims=2)
        # hand-computed geodesic matrix: adjacent corners 1, diagonals 2
        geo = np.array([
            [0, 1, 2, 1],
            [1, 0, 1, 2],
            [2, 1, 0, 1],
            [1, 2, 1, 0],
        ], float)
        oracle = classical_scaling_oracle(geo, 2)
        assert procrustes_distance(result.embedding, oracle) < 1e-6

    def test_square_shape_recovered(self):
        corners = PointCloud(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float))
        emb = isomap(corners, k=2, dims=2).embedding
        d = np.linalg.norm(emb[:, None] - emb[None, :], axis=2)
        sides = sorted([d[0, 1], d[1, 2], d[2, 3], d[3, 0]])
        assert sides[0] == pytest.approx(sides[-1], abs=1e-9)


class TestLine:
    def test_straight_line_residual_near_zero(self):
        pts = PointCloud(np.column_stack([np.linspace(0, 5, 40), np.zeros(40)]))
        result = isomap(pts, k=3, dims=2)
        assert result.residual_variances[0] < 1e-9


class TestProperties:
    def test_flat_patch_distances_preserved(self):
        rng = np.random.default_rng(2)
        xy = rng.uniform(0, 1, (300, 2))
        cloud = PointCloud(np.column_stack([xy, np.zeros(300)]))
        result = isomap(cloud, k=8, dims=2)
        from scipy.spatial.distance import pdist

        emb_d = pdist(result.embedding)
        amb_d = pdist(cloud.points)
        rel = np.abs(emb_d - amb_d) / amb_d
        assert np.median(rel) < 0.02

    def test_residuals_non_increasing(self):
        rng = np.random.default_rng(4)
        cloud = PointCloud(rng.normal(size=(120, 4)))
        result = isomap(cloud, k=6, dims=3)
        assert np.all(np.diff(result.residual_variances) <= 1e-6)

    def test_columns_ordered_by_eigenvalue(self):
        rng = np.random.default_rng(5)
        cloud = PointCloud(rng.normal(size=(80, 3)) * np.array([5.0, 1.0, 0.2]))
        result = isomap(cloud, k=6, dims=3)
        assert np.all(np.diff(result.eigenvalues) <= 1e-9)

    def test_deterministic_up_to_sign(self):
        rng = np.random.default_rng(6)
        cloud = PointCloud(rng.normal(size=(60, 3)))
        a = isomap(cloud, k=5, dims=2).embedding
        b = isomap(cloud, k=5, dims=2).embedding
        assert np.array_equal(a, b)

    def test_largest_component_fallback(self):
        rng = np.random.default_rng(7)
        blob1 = rng.normal(size=(40, 2)) * 0.1
        blob2 = rng.normal(size=(10, 2)) * 0.1 + 100.0
        result = isomap(PointCloud(np.vstack([blob1, blob2])), k=3, dims=2)
        assert result.n_dropped == 10
        assert result.embedding.shape == (40, 2)
        assert np.array_equal(result.kept_indices, np.arange(40))

    def test_dims_validation(self):
        cloud = PointCloud(np.random.default_rng(8).normal(size=(20, 2)))
        with pytest.raises(DataFormatError):
            isomap(cloud, k=3, dims=5)
