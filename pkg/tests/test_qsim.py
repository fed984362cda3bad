import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridvte import qsim
from gridvte.ansatz import FORMS, parameterized_circuit
from gridvte.qsim import Analytic, Circuit, ForwardDifference, Gate, RegisterUnitary

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_ry_pi_flips_zero():
    out = qsim.apply_gate(qsim.zero_state(1), Gate("RY", (0,), angle=np.pi))
    np.testing.assert_allclose(out, [0, 1], atol=1e-15)


def test_x_on_zero():
    np.testing.assert_array_equal(qsim.apply_gate(qsim.zero_state(1), Gate("X", (0,))), [0, 1])


def test_cz_phases_only_both_set():
    for idx in range(4):
        out = qsim.apply_gate(qsim.basis_state(2, idx), Gate("CZ", (0, 1)))
        expected = qsim.basis_state(2, idx) * (-1 if idx == 3 else 1)
        np.testing.assert_array_equal(out, expected)


def test_cx_flips_target_when_control_set():
    # qubit 0 is the least-significant bit
    out = qsim.apply_gate(qsim.basis_state(2, 0b01), Gate("CX", (0, 1)))
    np.testing.assert_array_equal(out, qsim.basis_state(2, 0b11))
    out = qsim.apply_gate(qsim.basis_state(2, 0b10), Gate("CX", (0, 1)))
    np.testing.assert_array_equal(out, qsim.basis_state(2, 0b10))


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("CZ", (1, 1))
    with pytest.raises(ValueError):
        Gate("H", (0,), angle=0.3)
    with pytest.raises(ValueError):
        Gate("SWAP", (0, 1))
    with pytest.raises(ValueError):
        qsim.apply_gate(qsim.zero_state(1), Gate("X", (3,)))
    with pytest.raises(ValueError):
        Gate("RZ", (0,), param=0).resolve_angle([])


@pytest.mark.parametrize("kind", ["RX", "RY", "RZ", "H", "X", "Z", "CX", "CZ", "ControlledPhase"])
def test_gate_matrices_unitary(kind):
    targets = (0, 1) if kind in qsim.TWO_QUBIT else (0,)
    angled = kind in qsim.ROTATIONS or kind == "ControlledPhase"
    m = Gate(kind, targets, angle=0.7 if angled else None).matrix()
    np.testing.assert_allclose(m.conj().T @ m, np.eye(len(m)), atol=1e-14)


@given(angles, angles, st.sampled_from(["RX", "RY", "RZ"]))
def test_rotation_group_law(a, b, kind):
    lhs = qsim.rotation_matrix(kind, a) @ qsim.rotation_matrix(kind, b)
    np.testing.assert_allclose(lhs, qsim.rotation_matrix(kind, a + b), atol=1e-12)


def test_empty_circuit_is_identity():
    psi = random_state(np.random.default_rng(0), 3)
    np.testing.assert_array_equal(qsim.apply_circuit(Circuit(3), [], psi), psi)


def test_vf1_d5_accepts_72_params():
    c = parameterized_circuit("vf1", 6, 5)
    assert c.num_params == 72
    qsim.apply_circuit(c, np.zeros(72))
    with pytest.raises(ValueError):
        qsim.apply_circuit(c, np.zeros(71))


def test_slot_validation():
    with pytest.raises(ValueError):
        Circuit(1, (Gate("RY", (0,), param=1),))
    with pytest.raises(ValueError):
        Circuit(1, (Gate("RY", (0,), param=0), Gate("RZ", (0,), param=0)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_vf2_norm_preserved(seed):
    c = parameterized_circuit("vf2", 5, 3)
    theta = np.random.default_rng(seed).uniform(-np.pi, np.pi, c.num_params)
    assert abs(np.linalg.norm(qsim.apply_circuit(c, theta)) - 1) < 1e-12


def test_qft_one_qubit_is_hadamard():
    np.testing.assert_allclose(qsim.qft_matrix(1), np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("n", range(1, 9))
def test_qft_unitary(n):
    f = qsim.qft_matrix(n)
    np.testing.assert_allclose(f.conj().T @ f, np.eye(2**n), atol=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_qft_squared_reverses_index(n):
    big_n = 2**n
    f2 = qsim.qft_matrix(n) @ qsim.qft_matrix(n)
    perm = np.zeros((big_n, big_n))
    for j in range(big_n):
        perm[(-j) % big_n, j] = 1
    np.testing.assert_allclose(f2, perm, atol=1e-12)


def test_qft_of_zero_is_uniform():
    out = qsim.apply_register_unitary(qsim.zero_state(4), qsim.qft_block(4))
    np.testing.assert_allclose(out, np.full(16, 0.25), atol=1e-15)


def test_qft_matches_numpy_inverse_fft():
    psi = random_state(np.random.default_rng(1), 5)
    np.testing.assert_allclose(qsim.qft_matrix(5) @ psi, np.fft.ifft(psi, norm="ortho"), atol=1e-13)


def test_register_unitary_roundtrip():
    psi = random_state(np.random.default_rng(2), 4)
    f = qsim.qft_block(4)
    back = qsim.apply_register_unitary(qsim.apply_register_unitary(psi, f), f.dagger())
    np.testing.assert_allclose(back, psi, atol=1e-12)


def test_identity_block():
    psi = random_state(np.random.default_rng(3), 3)
    out = qsim.apply_register_unitary(psi, RegisterUnitary(np.eye(4), start=1))
    np.testing.assert_allclose(out, psi, atol=0)


def test_disjoint_blocks_commute():
    rng = np.random.default_rng(4)
    dx = RegisterUnitary(random_unitary(rng, 16), 0)
    dy = RegisterUnitary(random_unitary(rng, 16), 4)
    psi = random_state(rng, 8)
    a = qsim.apply_register_unitary(qsim.apply_register_unitary(psi, dx), dy)
    b = qsim.apply_register_unitary(qsim.apply_register_unitary(psi, dy), dx)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_register_block_acts_on_its_factor():
    rng = np.random.default_rng(5)
    u = random_unitary(rng, 4)
    lo, hi = random_state(rng, 2), random_state(rng, 1)
    psi = np.kron(hi, lo)  # qubits 0-1 low, qubit 2 high
    out = qsim.apply_register_unitary(psi, RegisterUnitary(u, 0))
    np.testing.assert_allclose(out, np.kron(hi, u @ lo), atol=1e-12)


def test_register_unitary_rejects_bad_input():
    with pytest.raises(ValueError):
        RegisterUnitary(np.ones((2, 2)))
    with pytest.raises(ValueError):
        RegisterUnitary(np.eye(3))
    with pytest.raises(ValueError):
        qsim.apply_register_unitary(qsim.zero_state(2), RegisterUnitary(np.eye(4), start=1))


def test_inner_product_basics():
    rng = np.random.default_rng(6)
    a, b = random_state(rng, 3), random_state(rng, 3)
    assert abs(qsim.inner_product(a, a) - 1) < 1e-12
    assert qsim.inner_product(qsim.basis_state(1, 0), qsim.basis_state(1, 1)) == 0
    u = random_unitary(rng, 8)
    assert abs(abs(qsim.inner_product(u @ a, u @ b)) - abs(qsim.inner_product(a, b))) < 1e-12
    with pytest.raises(ValueError):
        qsim.inner_product(a, qsim.zero_state(2))


def test_single_ry_analytic_derivative():
    c = Circuit(1, (Gate("RY", (0,), param=0),))
    theta = 0.83
    d = qsim.derivative_state(c, [theta], 0, Analytic())
    np.testing.assert_allclose(d, [-np.sin(theta / 2) / 2, np.cos(theta / 2) / 2], atol=1e-15)


def test_derivative_errors():
    c = parameterized_circuit("vf1", 2, 1)
    with pytest.raises(IndexError):
        qsim.derivative_state(c, np.zeros(c.num_params), c.num_params)
    cp = Circuit(2, (Gate("ControlledPhase", (0, 1), param=0),))
    with pytest.raises(ValueError):
        qsim.derivative_state(cp, [0.1], 0, Analytic())
    with pytest.raises(ValueError):
        ForwardDifference(0.0)


@pytest.mark.parametrize("form", FORMS)
def test_batch_matches_gate_by_gate(form):
    rng = np.random.default_rng(7)
    c = parameterized_circuit(form, 4, 2)
    theta = rng.uniform(-np.pi, np.pi, c.num_params)
    psi, d = qsim.run_batch(c, theta, Analytic())
    np.testing.assert_allclose(psi, qsim.apply_circuit(c, theta), atol=1e-13)
    np.testing.assert_allclose(qsim.simulate(c, theta), psi, atol=1e-13)
    for k in range(c.num_params):
        np.testing.assert_allclose(d[k], qsim.derivative_state(c, theta, k, Analytic()), atol=1e-13)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 0.5, atol=1e-13)


@pytest.mark.parametrize("form", FORMS)
@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_forward_difference_oracle(form, n):
    rng = np.random.default_rng(100 + n)
    c = parameterized_circuit(form, n, 2)
    theta = rng.uniform(-np.pi, np.pi, c.num_params)
    _, da = qsim.run_batch(c, theta, Analytic())
    _, df = qsim.run_batch(c, theta, ForwardDifference(1e-6))
    assert np.max(np.abs(da - df)) < 1e-5


def test_vf2_fd_1e8_within_1e6():
    c = parameterized_circuit("vf2", 5, 3)
    theta = np.random.default_rng(8).uniform(-np.pi, np.pi, c.num_params)
    _, da = qsim.run_batch(c, theta, Analytic())
    _, df = qsim.run_batch(c, theta, ForwardDifference(1e-8))
    assert np.max(np.abs(da - df)) < 1e-6


def test_batch_fd_matches_single_fd():
    c = parameterized_circuit("vf4", 3, 2)
    theta = np.random.default_rng(9).uniform(-np.pi, np.pi, c.num_params)
    _, df = qsim.run_batch(c, theta, ForwardDifference(1e-6))
    for k in range(c.num_params):
        single = qsim.derivative_state(c, theta, k, ForwardDifference(1e-6))
        np.testing.assert_allclose(df[k], single, atol=1e-8)


def test_parameterized_controlled_phase_fd():
    c = Circuit(2, (Gate("H", (0,)), Gate("H", (1,)), Gate("ControlledPhase", (0, 1), param=0)))
    _, d = qsim.run_batch(c, [0.4], ForwardDifference(1e-7))
    exact = np.zeros(4, dtype=complex)
    exact[3] = 0.5j * np.exp(0.4j)
    np.testing.assert_allclose(d[0], exact, atol=1e-6)


@pytest.mark.parametrize("form", ["vf1", "vf2", "vf3", "vf5"])
def test_zero_angles_give_zero_state(form):
    c = parameterized_circuit(form, 4, 3)
    out = qsim.apply_circuit(c, np.zeros(c.num_params))
    assert out[0] == 1.0
    np.testing.assert_array_equal(out[1:], 0)
