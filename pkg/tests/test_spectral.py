import numpy as np
import pytest

from chm.algebra import back_circulant, circulant, gramian
from chm.classifier import enumerate_blocks
from chm.spectral import EigenProfile, eigen_profile, eigen_profiles, keep_mask, prune


def random_rows(p, n, rng):
    rows = rng.choice(np.array([-1, 1], dtype=np.int8), size=(n, p))
    keep = np.abs(rows.sum(axis=1)) < p
    return rows[keep]


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_profile_matches_dense_eigensolve(p):
    rng = np.random.default_rng(p)
    rows = random_rows(p, 120, rng)[:100]
    assert len(rows) == 100
    batch = eigen_profiles(rows)
    for u, lam_b in zip(rows, batch):
        lam = np.array(eigen_profile(u).values)
        assert np.allclose(lam, lam_b, atol=1e-9)
        G = gramian(back_circulant(u)).astype(float)
        dense = np.sort(np.linalg.eigvalsh(G))
        assert np.allclose(np.sort(lam), dense, atol=1e-9)
        assert np.allclose(np.sort(lam), np.sort(np.linalg.eigvalsh(gramian(circulant(u)).astype(float))), atol=1e-9)


def test_first_eigenvalue_is_square_of_sum():
    u = np.array([1, 1, 1, -1, -1, 1, -1])
    assert eigen_profile(u).values[0] == pytest.approx(u.sum() ** 2)


def test_constant_row_rejected():
    with pytest.raises(ValueError):
        eigen_profile(np.ones(5))


def test_prune_bounds():
    p = 5
    assert prune([], p)
    flat = EigenProfile(tuple([float(p)] * p))
    assert prune([flat, flat, flat, flat], p)
    big = EigenProfile(tuple([4.0 * p + 1] + [0.0] * (p - 1)))
    assert not prune([big], p)
    assert keep_mask(np.array([[20.0] * 5, [20.1] * 5]), p).tolist() == [True, False]


@pytest.mark.parametrize("p,w", [(5, 3), (7, 5), (13, 7)])
def test_some_rows_survive_alone(p, w):
    prof = eigen_profiles(enumerate_blocks(w, p))
    assert keep_mask(prof, p).any()
