import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from gridvte import grid as G
from gridvte import qsim


def loop_hamiltonian(spec: G.GridSpec, potential: np.ndarray, mass: float = 1.0) -> np.ndarray:
    """Reference H built from an explicit Fourier matrix, one dimension only."""
    n = spec.points_per_dim
    f = np.array([[np.exp(2j * np.pi * j * k / n) / np.sqrt(n) for j in range(n)] for k in range(n)])
    p = np.array([2 * np.pi * (k if k < n // 2 else k - n) / spec.length[0] for k in range(n)])
    return f.conj().T @ np.diag(p**2 / (2 * mass)) @ f + np.diag(potential)


def test_six_qubit_grid():
    spec = G.GridSpec.centered(1, 6, 14.0)
    xs, ps = G.build_grids(spec)
    assert len(xs[0]) == 64
    assert xs[0][0] == -7.0
    assert abs(spec.spacing[0] - 14 / 64) < 1e-15
    assert ps[0][0] == 0
    assert abs(ps[0][1] - 2 * np.pi / 14) < 1e-15
    assert abs(ps[0][32] + 32 * 2 * np.pi / 14) < 1e-12


def test_grid_validation():
    with pytest.raises(ValueError):
        G.GridSpec(1, 0, (1.0,), (0.0,))
    with pytest.raises(ValueError):
        G.GridSpec(1, 3, (-1.0,), (0.0,))
    with pytest.raises(ValueError):
        G.GridSpec(2, 3, (1.0, 1.0, 1.0), (0.0,))


def test_free_hamiltonian_spectrum():
    spec = G.GridSpec.centered(1, 3, 8.0)
    h = G.GridHamiltonian.build(spec, G.PotentialSpec("free"))
    _, ps = G.build_grids(spec)
    np.testing.assert_allclose(h.spectrum[0], np.sort(ps[0] ** 2 / 2), atol=1e-12)


@pytest.mark.parametrize("kind,coeffs", [("free", ()), ("harmonic", (1.0,)), ("eckart", (13.0, 1.5))])
def test_matrix_matches_loop_reference(kind, coeffs):
    spec = G.GridSpec.centered(1, 5, 14.0)
    pot = G.PotentialSpec(kind, coeffs)
    h = G.GridHamiltonian.build(spec, pot, mass=1.3)
    ref = loop_hamiltonian(spec, pot.evaluate(spec), 1.3)
    np.testing.assert_allclose(h.matrix(), ref, atol=1e-10)
    np.testing.assert_allclose(h.matrix(), h.matrix().conj().T, atol=0)


def test_kinetic_uses_qft_block():
    spec = G.GridSpec.centered(1, 4, 10.0)
    h = G.GridHamiltonian.build(spec, G.PotentialSpec("free"))
    f = qsim.qft_matrix(4)
    np.testing.assert_allclose(h.matrix(), f.conj().T @ np.diag(h.kinetic_values) @ f, atol=1e-12)


def test_two_dim_is_kronecker_sum():
    spec2 = G.GridSpec.centered(2, 3, 6.0)
    spec1 = G.GridSpec.centered(1, 3, 6.0)
    t1 = G.GridHamiltonian.build(spec1, G.PotentialSpec("free")).matrix()
    t2 = G.GridHamiltonian.build(spec2, G.PotentialSpec("free")).matrix()
    eye = np.eye(8)
    # dimension 0 is the low-order register
    np.testing.assert_allclose(t2, np.kron(eye, t1) + np.kron(t1, eye), atol=1e-12)


def test_mexican_hat_values():
    spec = G.GridSpec.centered(2, 3, 10.0)
    v = G.PotentialSpec("mexican_hat", (0.1, 1.0)).evaluate(spec)
    x, y = G.mesh(spec)
    r2 = x**2 + y**2
    np.testing.assert_allclose(v, 0.1 * r2**2 - r2)
    assert x[1] - x[0] > 0 and y[1] == y[0]


def test_potential_validation():
    with pytest.raises(ValueError):
        G.PotentialSpec("morse", ())
    with pytest.raises(ValueError):
        G.PotentialSpec("harmonic", (1.0, 2.0))
    with pytest.raises(ValueError):
        G.PotentialSpec("eckart", (13.0, 1.5)).evaluate(G.GridSpec.centered(2, 2, 4.0))
    with pytest.raises(ValueError):
        G.PotentialSpec("tabulated", values=np.zeros(3)).evaluate(G.GridSpec.centered(1, 2, 4.0))
    with pytest.raises(ValueError):
        G.GridHamiltonian.build(G.GridSpec.centered(1, 2, 4.0), G.PotentialSpec("free"), mass=0.0)


def test_tabulated_loader(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("1 2.5\n0 -1.0\n3 0.5\n2 4.0\n")
    pot = G.load_tabulated_potential(path)
    np.testing.assert_array_equal(pot.values, [-1.0, 2.5, 4.0, 0.5])
    path.write_text("0 1\n2 1\n")
    with pytest.raises(ValueError):
        G.load_tabulated_potential(path)


def test_apply_matches_matrix_batch():
    rng = np.random.default_rng(0)
    spec = G.GridSpec.centered(2, 3, 6.0)
    h = G.GridHamiltonian.build(spec, G.PotentialSpec("mexican_hat", (0.1, 1.0)))
    batch = rng.normal(size=(5, 64)) + 1j * rng.normal(size=(5, 64))
    np.testing.assert_allclose(h.apply(batch), batch @ h.matrix().T, atol=1e-10)


def test_dense_cap():
    spec = G.GridSpec.centered(1, 4, 4.0)
    h = G.GridHamiltonian.build(spec, G.PotentialSpec("free"), dense_cap=8)
    with pytest.raises(ValueError):
        h.matrix()


def test_harmonic_ground_energy():
    # V = x^2 means omega = sqrt(2)
    spec = G.GridSpec.centered(1, 7, 14.0)
    h = G.GridHamiltonian.build(spec, G.PotentialSpec("harmonic", (1.0,)))
    e = h.spectrum[0]
    np.testing.assert_allclose(e[:4], np.sqrt(2) * (np.arange(4) + 0.5), atol=1e-8)


def test_exact_evolve_matches_expm():
    rng = np.random.default_rng(1)
    spec = G.GridSpec.centered(1, 4, 8.0)
    h = G.GridHamiltonian.build(spec, G.PotentialSpec("eckart", (13.0, 1.5)))
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    np.testing.assert_allclose(G.exact_evolve(h, psi, 0.7), expm(-0.7j * h.matrix()) @ psi, atol=1e-10)
    rows = G.exact_evolve(h, psi, [0.0, 0.7])
    np.testing.assert_allclose(rows[0], psi, atol=1e-12)


def test_exact_evolve_conserves_norm_and_energy():
    spec = G.GridSpec.centered(1, 6, 14.0)
    h = G.GridHamiltonian.build(spec, G.PotentialSpec("eckart", (13.0, 1.5)))
    psi0 = G.gaussian_wavepacket(spec, G.WavepacketParams(-3.5, 5.0, 1 / np.sqrt(2)))
    e0 = G.energy_expectation(h, psi0)
    for psi in G.exact_evolve(h, psi0, np.linspace(0, 3, 31)):
        assert abs(np.linalg.norm(psi) - 1) < 1e-12
        assert abs(G.energy_expectation(h, psi) - e0) < 1e-10


def test_energy_expectation_matches_quadratic_form():
    rng = np.random.default_rng(2)
    spec = G.GridSpec.centered(1, 5, 10.0)
    h = G.GridHamiltonian.build(spec, G.PotentialSpec("harmonic", (1.0,)))
    psi = rng.normal(size=32) + 1j * rng.normal(size=32)
    psi /= np.linalg.norm(psi)
    assert abs(G.energy_expectation(h, psi) - np.vdot(psi, h.matrix() @ psi).real) < 1e-10


def test_wavepacket_moments():
    spec = G.GridSpec.centered(1, 7, 20.0)
    psi = G.gaussian_wavepacket(spec, G.WavepacketParams(1.5, 2.0, 0.8))
    mean, var = G.position_moments(spec, psi)
    assert abs(mean - 1.5) < 1e-8
    assert abs(np.sqrt(var) - 0.8) < 1e-8
    assert abs(G.periodic_width(spec, psi) - 0.8) < 1e-8
    # <p^2> = p0^2 + 1 / (4 B^2)
    assert abs(G.momentum_second_moment(spec, psi) - (4 + 1 / (4 * 0.64))) < 1e-6


def test_wavepacket_validation():
    spec = G.GridSpec.centered(1, 4, 4.0)
    with pytest.raises(ValueError):
        G.gaussian_wavepacket(spec, G.WavepacketParams(5.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        G.WavepacketParams(0.0, 0.0, -1.0)


def test_free_spreading_matches_continuum():
    # sigma(t) = B sqrt(1 + (t / 2B^2)^2) for a free Gaussian, unit mass
    spec = G.GridSpec.centered(1, 8, 60.0)
    b = 1 / np.sqrt(2)
    h = G.GridHamiltonian.build(spec, G.PotentialSpec("free"))
    psi0 = G.gaussian_wavepacket(spec, G.WavepacketParams(0.0, 0.0, b))
    psi = G.exact_evolve(h, psi0, 1.5)
    expected = b * np.sqrt(1 + (1.5 / (2 * b * b)) ** 2)
    assert abs(np.sqrt(G.position_moments(spec, psi)[1]) - expected) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 2), st.integers(1, 4), st.integers(0, 2**31))
def test_momentum_roundtrip(nd, nq, seed):
    spec = G.GridSpec.centered(nd, nq, 5.0)
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=spec.size) + 1j * rng.normal(size=spec.size)
    np.testing.assert_allclose(G.from_momentum(spec, G.to_momentum(spec, psi)), psi, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(G.to_momentum(spec, psi)), np.linalg.norm(psi), rtol=1e-12)


def test_dense_hamiltonian():
    h = G.DenseHamiltonian(np.array([[0, -1j], [1j, 0]]))
    np.testing.assert_allclose(h.apply(np.array([1, 0])), [0, 1j])
    assert G.energy_expectation(h, np.array([1, 1j]) / np.sqrt(2)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        G.DenseHamiltonian(np.array([[0, 1], [0, 0]]))
