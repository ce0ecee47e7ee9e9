import numpy as np
import pytest

from qpspec.grids import DomainError, FrequencyGrid
from qpspec.operators import OperatorMatrix
from qpspec.spectra import (
    PseudospectrumMap,
    SpectralSet,
    UsageError,
    containment_verdict,
    directed_hausdorff,
    eigenvalues,
    essential_spectrum_surrogate,
    predicted_set,
    pseudospectrum,
)
from qpspec.symbols import PointCloud


def _op(entries, grid):
    return OperatorMatrix(np.asarray(entries, dtype=complex), grid, grid, "frequency")


def _grid(n):
    return FrequencyGrid.uniform(1.0, n)


def _spec_set(pts, kind="predicted-spiral", **params):
    return SpectralSet(PointCloud(np.asarray(pts, dtype=complex), kind), kind, params)


# ---------------------------------------------------------------------------
# eigenvalues


def test_eigenvalues_diagonal():
    g = _grid(5)
    d = np.array([1.0, 2.0, -1.0, 0.5j, 3.0 + 1.0j])
    out = eigenvalues(_op(np.diag(d), g))
    assert np.allclose(np.sort_complex(out.points.points), np.sort_complex(d))
    assert out.kind == "eigenvalues"


def test_eigenvalues_nilpotent_shift():
    g = _grid(8)
    out = eigenvalues(_op(np.diag(np.ones(7), 1), g))
    assert np.max(np.abs(out.points.points)) < 1e-8


def test_eigenvalues_swap_matrix():
    g = _grid(2)
    out = eigenvalues(_op([[0.0, 1.0], [1.0, 0.0]], g))
    assert np.allclose(np.sort(out.points.points.real), [-1.0, 1.0], atol=1e-12)


def test_eigenvalues_rejects_rectangular():
    g1, g2 = _grid(3), _grid(4)
    bad = OperatorMatrix(np.zeros((3, 4), dtype=complex), g2, g1, "frequency")
    with pytest.raises(UsageError):
        eigenvalues(bad)


# ---------------------------------------------------------------------------
# pseudospectrum


def test_pseudospectrum_identity_is_distance_to_one():
    g = _grid(6)
    pmap, levels = pseudospectrum(
        _op(np.eye(6), g), (0.0, 2.0, -1.0, 1.0), (33, 33), eps_list=[0.25]
    )
    truth = np.abs(pmap.grid() - 1.0)
    assert np.max(np.abs(pmap.values - truth)) < 1e-12
    lv = levels[0].points.points
    assert np.all(np.abs(lv - 1.0) <= 0.25 + 1e-12)
    assert lv.size > 0


def test_pseudospectrum_diagonal_formula():
    g = _grid(4)
    d = np.array([0.0, 1.0, 1.0j, -0.5])
    pmap, _ = pseudospectrum(_op(np.diag(d), g), (-1.0, 1.5, -1.0, 1.5), (40, 40))
    lam = pmap.grid().reshape(-1)
    truth = np.min(np.abs(lam[:, None] - d[None, :]), axis=1).reshape(pmap.values.shape)
    assert np.max(np.abs(pmap.values - truth)) < 1e-12


def test_pseudospectrum_jordan_block_singular_at_zero():
    g = _grid(9)
    J = np.diag(np.ones(8), 1)
    # odd resolution so lambda = 0 is a grid node
    pmap, _ = pseudospectrum(_op(J, g), (-0.5, 0.5, -0.5, 0.5), (33, 33))
    i0 = 16
    assert pmap.values[i0, i0] < 1e-10


def test_pseudospectrum_is_one_lipschitz():
    rng = np.random.default_rng(3)
    g = _grid(12)
    A = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    pmap, _ = pseudospectrum(_op(A, g), (-4.0, 4.0, -4.0, 4.0), (32, 32))
    h_re = 8.0 / 31
    assert np.max(np.abs(np.diff(pmap.values, axis=1))) <= h_re + 1e-9
    assert np.max(np.abs(np.diff(pmap.values, axis=0))) <= h_re + 1e-9


def test_pseudospectrum_schur_path_matches_dense():
    rng = np.random.default_rng(11)
    g = _grid(40)
    A = rng.standard_normal((40, 40)) / 8.0
    args = ((-1.0, 1.0, -1.0, 1.0), (32, 32))
    dense, _ = pseudospectrum(_op(A, g), *args, dense_cutoff=160)
    schur, _ = pseudospectrum(_op(A, g), *args, dense_cutoff=10)
    rel = np.max(np.abs(dense.values - schur.values) / (dense.values + 1e-12))
    assert rel < 1e-3


def test_pseudospectrum_resolution_guard():
    g = _grid(3)
    with pytest.raises(UsageError):
        pseudospectrum(_op(np.eye(3), g), (0.0, 1.0, 0.0, 1.0), (16, 40))


def test_pseudospectrum_map_validation():
    with pytest.raises(UsageError):
        PseudospectrumMap((0.0, 1.0, 0.0, 1.0), (4, 4), -np.ones((4, 4)))
    with pytest.raises(UsageError):
        PseudospectrumMap((0.0, 1.0, 0.0, 1.0), (4, 4), np.ones((4, 5)))


# ---------------------------------------------------------------------------
# essential-spectrum surrogate


def test_surrogate_identity_builder():
    def builder(n):
        return _op(np.eye(n), _grid(n))

    out = essential_spectrum_surrogate(
        builder, [8, 12, 16], 0.05, (0.5, 1.5, -0.5, 0.5), (33, 33)
    )
    pts = out.points.points
    assert pts.size > 0
    assert np.max(np.abs(pts - 1.0)) <= 0.05 + 1e-12
    assert out.params["per_size_counts"][0] == pts.size


def test_surrogate_decay_multiplier_fills_unit_interval():
    # diag(e^{-t_k}) on refining grids: finite sections sample (e^{-X}, 1]
    # and the stable set hugs the real segment [0, 1]
    def builder(n):
        g = FrequencyGrid.uniform(12.0, n)
        return _op(np.diag(np.exp(-g.nodes)), g)

    out = essential_spectrum_surrogate(
        builder, [48, 64, 96], 0.05, (-0.2, 1.2, -0.2, 0.2), (57, 33)
    )
    pts = out.points.points
    assert pts.size > 0
    assert np.max(np.abs(pts.imag)) <= 0.05 + 1e-12
    assert np.min(pts.real) <= 0.1 and np.max(pts.real) >= 0.9
    mid = np.min(np.abs(pts - 0.5))
    assert mid <= 0.06


def test_surrogate_size_list_guard():
    def builder(n):
        return _op(np.eye(n), _grid(n))

    with pytest.raises(UsageError):
        essential_spectrum_surrogate(builder, [8, 12], 0.1, (0.0, 2.0, -1.0, 1.0))
    with pytest.raises(UsageError):
        essential_spectrum_surrogate(builder, [8, 12, 12], 0.1, (0.0, 2.0, -1.0, 1.0))


def test_surrogate_empty_is_diagnosed_not_raised():
    def builder(n):
        return _op(np.eye(n), _grid(n))

    # region far from the spectrum {1}: no survivors at any size
    out = essential_spectrum_surrogate(
        builder, [8, 12, 16], 1e-6, (5.0, 6.0, 5.0, 6.0), (33, 33)
    )
    assert out.points.points.size == 0
    assert "diagnostic" in out.params
    assert out.params["per_size_counts"] == [0, 0, 0]


def test_surrogate_antitone_in_eps():
    def builder(n):
        g = FrequencyGrid.uniform(6.0, n)
        return _op(np.diag(np.exp(-g.nodes)), g)

    args = ([16, 24, 32], (-0.2, 1.2, -0.2, 0.2), (41, 33))
    small = essential_spectrum_surrogate(builder, args[0], 0.02, args[1], args[2])
    large = essential_spectrum_surrogate(builder, args[0], 0.1, args[1], args[2])
    a = small.points.points
    b = large.points.points
    assert a.size <= b.size
    if a.size:
        assert np.max(np.min(np.abs(a[:, None] - b[None, :]), axis=1)) == 0.0


# ---------------------------------------------------------------------------
# predicted set


def test_predicted_set_pure_decay_cluster():
    c = PointCloud(np.array([1.0j]), "a")
    out = predicted_set(c, c, t_grid=np.linspace(0.0, 8.0, 65))
    pts = out.points.points
    # t1 = t2 = 1 lands exactly on e^{-2}
    assert np.min(np.abs(pts - np.exp(-2.0))) < 1e-12
    assert np.min(np.abs(pts - 1.0)) < 1e-12  # t = 0
    assert np.min(np.abs(pts)) < 1e-12  # adjoined closure point


def test_predicted_set_spiral_hits_negative_axis():
    c = PointCloud(np.array([1.0 + 1.0j]), "a")
    out = predicted_set(c, c, t_grid=np.array([0.0, np.pi]))
    pts = out.points.points
    assert np.min(np.abs(pts - (-np.exp(-np.pi)))) < 1e-12


def test_predicted_set_lives_in_closed_unit_disc():
    c1 = PointCloud(np.array([0.5 + 0.7j, 1.0j]), "a")
    c2 = PointCloud(np.array([2.0j, 1.0 + 2.0j]), "b")
    out = predicted_set(c1, c2, t_samples=48)
    pts = out.points.points
    assert np.max(np.abs(pts)) <= 1.0 + 1e-12
    assert out.params["image_spacing"] > 0.0
    assert out.params["t_max"] == pytest.approx(8.0 / 0.7)


def test_predicted_set_rejects_bad_clusters():
    good = PointCloud(np.array([1.0j]), "a")
    with pytest.raises(DomainError):
        predicted_set(good, PointCloud(np.array([1.0 - 0.1j]), "b"))
    with pytest.raises(UsageError):
        predicted_set(good, PointCloud(np.empty(0, dtype=complex), "b"))


def test_predicted_set_subsamples_large_pair_counts():
    rng = np.random.default_rng(0)
    big = PointCloud(rng.uniform(0, 1, 20) + 1j * rng.uniform(1, 2, 20), "a")
    out = predicted_set(big, big, t_samples=16, max_pairs=16)
    assert out.params["pairs"] <= 16


# ---------------------------------------------------------------------------
# distances and verdicts


def test_directed_hausdorff_known_values():
    A = _spec_set([0.0, 3.0])
    B = _spec_set([1.0])
    assert directed_hausdorff(A, B) == pytest.approx(2.0)
    assert directed_hausdorff(B, A) == pytest.approx(1.0)


def test_directed_hausdorff_zero_on_subset():
    A = _spec_set([1.0j, 2.0])
    B = _spec_set([1.0j, 2.0, -5.0])
    assert directed_hausdorff(A, B) == 0.0


def test_directed_hausdorff_rejects_empty():
    with pytest.raises(UsageError):
        directed_hausdorff(_spec_set([]), _spec_set([1.0]))


def test_containment_verdict_pass_and_fail():
    pred = _spec_set([1.0, 0.5], image_spacing=0.01)
    near = _spec_set([1.005, 0.5], kind="essential-surrogate", grid_step=0.01)
    far = _spec_set([3.0], kind="essential-surrogate", grid_step=0.01)
    ok = containment_verdict(pred, near)
    assert ok["verdict"] == "PASS"
    assert ok["tol"] == pytest.approx(2.0 * 0.02)
    assert ok["distance"] == pytest.approx(0.005)
    bad = containment_verdict(pred, far)
    assert bad["verdict"] == "FAIL"
    assert bad["worst_point"] == [0.5, 0.0]


def test_containment_verdict_empty_surrogate_fails():
    pred = _spec_set([1.0], image_spacing=0.01)
    empty = _spec_set([], kind="essential-surrogate", grid_step=0.01,
                      diagnostic="empty intersection")
    out = containment_verdict(pred, empty)
    assert out["verdict"] == "FAIL"
    assert out["distance"] == float("inf")
    with pytest.raises(UsageError):
        containment_verdict(_spec_set([], image_spacing=0.0), empty)


def test_containment_verdict_explicit_tol():
    pred = _spec_set([1.0])
    surr = _spec_set([1.2], kind="essential-surrogate")
    assert containment_verdict(pred, surr, tol=0.3)["verdict"] == "PASS"
    assert containment_verdict(pred, surr, tol=0.1)["verdict"] == "FAIL"
