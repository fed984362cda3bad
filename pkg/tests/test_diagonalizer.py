import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridvte import diagonalizer as D
from gridvte import grid as G


def ho_ham(nq=6):
    return G.GridHamiltonian.build(G.GridSpec.centered(1, nq, 14.0), G.PotentialSpec("harmonic", (1.0,)))


def eckart_ham(nq=6):
    return G.GridHamiltonian.build(G.GridSpec.centered(1, nq, 14.0), G.PotentialSpec("eckart", (13.0, 1.5)))


def mh_ham():
    spec = G.GridSpec(2, 4, (10.0, 10.0), (-5.0, -5.0))
    return G.GridHamiltonian.build(spec, G.PotentialSpec("mexican_hat", (0.1, 1.0)))


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def test_diagonal_input_gives_permutation():
    h = np.diag([3.0, -1.0, 2.0, 0.5])
    d = D.diagonalize_sorted(h)
    np.testing.assert_allclose(d.eigenvalues, [-1.0, 0.5, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(d.matrix), np.eye(4)[:, [1, 3, 2, 0]], atol=1e-15)


def test_ho_spectrum():
    d = D.diagonalize_sorted(ho_ham().matrix())
    np.testing.assert_allclose(d.eigenvalues[:6], np.sqrt(2) * (np.arange(6) + 0.5), atol=5e-2)


@pytest.mark.parametrize("make", [ho_ham, eckart_ham])
def test_diagonalizes_and_is_unitary(make):
    h = make().matrix()
    d = D.diagonalize_sorted(h)
    u = d.matrix
    np.testing.assert_allclose(u.conj().T @ u, np.eye(len(u)), atol=1e-12)
    assert np.max(np.abs(u.conj().T @ h @ u - np.diag(d.eigenvalues))) < 1e-10
    assert np.all(np.diff(d.eigenvalues) >= 0)


def test_phase_canonical_and_deterministic():
    h = eckart_ham().matrix()
    a, b = D.diagonalize_sorted(h), D.diagonalize_sorted(h.copy())
    assert a.matrix.tobytes() == b.matrix.tobytes()
    idx = np.argmax(np.abs(a.matrix), axis=0)
    lead = a.matrix[idx, np.arange(64)]
    np.testing.assert_allclose(lead.imag, 0, atol=1e-15)
    assert np.all(lead.real > 0)


def test_degenerate_subspace_ordering_is_stable():
    # free particle: +p and -p are degenerate
    h = G.GridHamiltonian.build(G.GridSpec.centered(1, 4, 8.0), G.PotentialSpec("free")).matrix()
    a = D.diagonalize_sorted(h)
    b = D.diagonalize_sorted(h)
    assert a.matrix.tobytes() == b.matrix.tobytes()
    assert np.max(np.abs(a.matrix.conj().T @ h @ a.matrix - np.diag(a.eigenvalues))) < 1e-10


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        D.diagonalize_sorted(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        D.threshold_matrix(np.eye(2), -0.1)


def test_threshold_semantics():
    h = np.array([[2.0, 0.05 + 0.05j], [0.05 - 0.05j, -0.5]])
    out, density = D.threshold_matrix(h, 0.1)
    np.testing.assert_array_equal(out, np.diag([2.0, -0.5]))
    assert density == 0.5
    out, density = D.threshold_matrix(h, 0.0)
    np.testing.assert_array_equal(out, h)
    assert density == 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0, 3), st.floats(0, 3))
def test_threshold_hermitian_and_monotone(seed, c1, c2):
    h = random_hermitian(np.random.default_rng(seed), 8)
    lo, hi = sorted((c1, c2))
    a, da = D.threshold_matrix(h, lo)
    b, db = D.threshold_matrix(h, hi)
    assert np.array_equal(a, a.conj().T)
    assert np.array_equal(b, b.conj().T)
    _, d0 = D.threshold_matrix(h, 0.0)
    assert d0 >= da >= db


def test_thresholded_provenance():
    h = eckart_ham(4).matrix()
    assert D.thresholded_diagonalizer(h, 0.0).source == "full-H"
    d = D.thresholded_diagonalizer(h, 1.0)
    assert d.source == "thresholded(1)" and d.cut == 1.0
    hc, _ = D.threshold_matrix(h, 1.0)
    assert np.max(np.abs(d.matrix.conj().T @ hc @ d.matrix - np.diag(d.eigenvalues))) < 1e-10


def test_cnot_estimate():
    d = D.diagonalize_sorted(ho_ham(4).matrix())
    assert d.cnot_estimate == 16 * 15


def test_mexican_hat_axes():
    diags = D.per_dimension_diagonalizers(mh_ham())
    assert [d.matrix.shape for d in diags] == [(16, 16), (16, 16)]
    np.testing.assert_allclose(diags[0].eigenvalues, diags[1].eigenvalues, atol=1e-10)
    assert diags[0].eigenvalues[0] > -2.5
    assert diags[0].source == "per-dimension(0)"


def test_axis_cut_fixes_nearest_zero():
    ham = mh_ham()
    cut = D.axis_hamiltonian(ham, 1)
    x, y = G.mesh(ham.grid)
    ys = G.build_grids(ham.grid)[0][1]
    np.testing.assert_allclose(cut.potential_values, 0.1 * ys**4 - ys**2)
    assert x[0] == -5.0 and y[0] == -5.0


def test_separable_potential_tensor_diagonalizes():
    spec = G.GridSpec.centered(2, 3, 6.0)
    xs = G.build_grids(spec)[0][0]
    v1 = 0.3 * xs**2 + 0.1 * xs
    x, y = G.mesh(spec)
    idx = np.arange(64)
    vals = v1[idx % 8] + v1[idx // 8]
    ham = G.GridHamiltonian.build(spec, G.PotentialSpec("tabulated", values=vals))
    dx, dy = D.per_dimension_diagonalizers(ham)
    # axis cut at the nearest-zero point adds only a constant
    u = np.kron(dy.matrix, dx.matrix)
    out = u.conj().T @ ham.matrix() @ u
    assert np.max(np.abs(out - np.diag(np.diag(out)))) < 1e-10


def test_per_dimension_needs_two_dims():
    with pytest.raises(ValueError):
        D.per_dimension_diagonalizers(ho_ham(3))
    assert len(D.ld_diagonalizers(ho_ham(3))) == 1


def test_dense_cap_error():
    spec = G.GridSpec.centered(1, 5, 4.0)
    ham = G.GridHamiltonian.build(spec, G.PotentialSpec("free"), dense_cap=16)
    with pytest.raises(ValueError):
        D.ld_diagonalizers(ham)


def test_file_roundtrip(tmp_path):
    d = D.thresholded_diagonalizer(eckart_ham(4).matrix(), 0.1)
    path = tmp_path / "d.npz"
    D.save_diagonalizer(path, d, scenario="abc123", dimension=0)
    back, header = D.load_diagonalizer(path)
    assert back.matrix.tobytes() == d.matrix.tobytes()
    assert header["scenario_hash"] == "abc123" and header["cut"] == 0.1
    assert back.source == d.source
    np.savez(tmp_path / "bad.npz", header=np.array("{}"))
    with pytest.raises(ValueError):
        D.load_diagonalizer(tmp_path / "bad.npz")


def test_scenario_hash_stable():
    a = D.scenario_hash({"b": 1, "a": [1, 2]})
    assert a == D.scenario_hash({"a": [1, 2], "b": 1})
    assert a != D.scenario_hash({"a": [1, 2], "b": 2})
