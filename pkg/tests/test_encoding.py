import numpy as np
import pytest

from mleqc.core import DensityMatrix, EncodedSpace, KrausChannel, PureState, Unitary, haar_unitary
from mleqc.encoding import (
    ea_operators,
    ea_signature,
    equivalent_operations,
    equivalent_states,
    gell_mann_basis,
    permissible_operation_apply,
    probe_states,
    regroup_permutation,
    sample_class_member,
    weakly_commute,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_gell_mann_basis_d2_is_half_pauli():
    basis = gell_mann_basis(2)
    assert len(basis) == 3
    sy = np.array([[0, -1j], [1j, 0]])
    targets = [SX / 2, sy / 2, SZ / 2]
    for lam, t in zip(basis, targets):
        assert np.allclose(lam, t, atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_gell_mann_basis_orthonormality(d):
    basis = gell_mann_basis(d)
    assert len(basis) == d * d - 1
    for i, a in enumerate(basis):
        assert np.allclose(a, a.conj().T, atol=1e-14), "generators are Hermitian"
        assert abs(np.trace(a)) < 1e-14
        for j, b in enumerate(basis):
            want = 0.5 if i == j else 0.0
            assert np.trace(a @ b).real == pytest.approx(want, abs=1e-13)


def test_ea_operator_count_single_qubit(qubit_ops):
    # 2^(2M) - 1 = 3 traceless operators plus nothing else for M = 1
    assert qubit_ops.count == 3


def test_ea_operator_count_two_qubits():
    ops = ea_operators(EncodedSpace(2, 2))
    assert ops.count == 15


def test_ea_operators_act_on_logical_factor_only(qubit_ops):
    # Lambda_r = lambda_r (x) 1_n, so it commutes with 1_2 (x) V for every V
    v = haar_unitary(2, np.random.default_rng(5))
    w = np.kron(np.eye(2), v)
    basis = gell_mann_basis(2)
    for lam, lam_logical in zip(qubit_ops.operators, basis):
        assert np.allclose(lam, np.kron(lam_logical, np.eye(2)), atol=1e-14)
        assert np.allclose(lam @ w, w @ lam, atol=1e-12)


def test_ea_signature_distinguishes_logical_states(qubit_space, qubit_ops):
    zero = PureState(qubit_space, [1, 0, 0, 0])
    one = PureState(qubit_space, [0, 0, 1, 0])
    assert not equivalent_states(zero, one, qubit_ops)


def test_equal_signature_means_equivalent(qubit_space, qubit_ops):
    # same logical content, different encoded vector
    a = PureState(qubit_space, [1, 0, 0, 0])
    b = PureState(qubit_space, [1 / np.sqrt(2), 1 / np.sqrt(2), 0, 0])
    assert equivalent_states(a, b, qubit_ops)
    sig_a = ea_signature(a, qubit_ops)
    sig_b = ea_signature(b, qubit_ops)
    assert sig_a.max_deviation(sig_b) < 1e-14


def test_signature_works_on_density_matrices(qubit_space, qubit_ops):
    rho = DensityMatrix(qubit_space, np.diag([0.5, 0.25, 0.25, 0.0]))
    sig = ea_signature(rho, qubit_ops)
    assert sig.trace_check == pytest.approx(1.0)
    # logical weight difference r11 - r22 = 0.75 - 0.25 shows up in the z component
    assert np.max(np.abs(sig.values)) == pytest.approx(0.25)


def test_regroup_permutation_roundtrip():
    space = EncodedSpace(2, 2)
    p = regroup_permutation(space)
    assert np.allclose(p @ p.T, np.eye(space.total_dim))
    # physical kron(q1, q2) layout -> grouped (logical, encoded) layout:
    # the grouped vector of kron(a (x) u, b (x) v) is kron(a, b) (x) kron(u, v)
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    u, v = np.array([0.6, 0.8]), np.array([1.0, 0.0])
    phys = np.kron(np.kron(a, u), np.kron(b, v))
    grouped = np.kron(np.kron(a, b), np.kron(u, v))
    assert np.allclose(p @ phys, grouped)


def test_probe_states_informationally_complete(qubit_space):
    probes = probe_states(qubit_space)
    assert len(probes) == 4  # |0>, |1>, |+>, |+i> on the logical factor
    # logical density matrices of the probes span the full 2x2 operator space
    mats = []
    for s in probes:
        r = s.density_matrix()
        mats.append(np.array([[r.logical_weight(1, 1), r.logical_weight(1, 2)],
                              [r.logical_weight(2, 1), r.logical_weight(2, 2)]]))
    stack = np.array([m.reshape(-1) for m in mats])
    assert np.linalg.matrix_rank(stack) == 4


def test_equivalent_operations_same_class(qubit_ops):
    u1 = sample_class_member(SX, 2, seed=11)
    u2 = sample_class_member(SX, 2, seed=12)
    assert equivalent_operations(u1, u2, qubit_ops)


def test_equivalent_operations_detects_different_logical(qubit_ops):
    ux = sample_class_member(SX, 2, seed=11)
    uz = sample_class_member(SZ, 2, seed=11)
    assert not equivalent_operations(ux, uz, qubit_ops)


def test_equivalent_operations_with_random_probes(qubit_ops):
    u1 = sample_class_member(SZ, 2, seed=3)
    u2 = sample_class_member(SZ, 2, seed=4)
    assert equivalent_operations(u1, u2, qubit_ops, num_probe_states=8, seed=0)


def test_global_phase_is_equivalent(qubit_ops):
    u = sample_class_member(np.eye(2), 2, seed=9)
    v = Unitary(np.exp(1j * 0.7) * u.matrix, u.space)
    assert equivalent_operations(u, v, qubit_ops)


def test_weak_commutation_x_z(qubit_ops):
    # sigma_x sigma_z = -sigma_z sigma_x: equal up to phase, so FG ~ GF
    f = sample_class_member(SX, 2, seed=21)
    g = sample_class_member(SZ, 2, seed=22)
    assert weakly_commute(f, g, qubit_ops)


def test_weak_commutation_fails_for_hadamard_z(qubit_ops):
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    f = sample_class_member(h, 2, seed=23)
    g = sample_class_member(SZ, 2, seed=24)
    assert not weakly_commute(f, g, qubit_ops)


def test_sample_class_member_structure():
    u = sample_class_member(SX, 3, seed=40)
    m = u.matrix
    assert m.shape == (6, 6)
    assert np.allclose(m[:3, :3], 0, atol=1e-14)
    assert np.allclose(m[3:, 3:], 0, atol=1e-14)
    v = m[:3, 3:]
    assert np.allclose(v, m[3:, :3], atol=1e-14)  # xi = sigma_x gives B = C
    assert np.allclose(v.conj().T @ v, np.eye(3), atol=1e-12)


def test_sample_class_member_two_qubits(qubit_ops):
    cnot = np.eye(4)[[0, 1, 3, 2]]
    u = sample_class_member(cnot, 2, seed=50)
    assert u.matrix.shape == (16, 16)
    space = EncodedSpace(2, 2)
    ops = ea_operators(space)
    u2 = sample_class_member(cnot, 2, seed=51)
    assert equivalent_operations(u, u2, ops)


def test_permissible_operation_weak_identity(qubit_space, qubit_ops, rng):
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    state = PureState(qubit_space, v / np.linalg.norm(v))
    rho = state.density_matrix()
    w = KrausChannel.from_unitary(haar_unitary(2, rng))
    out = permissible_operation_apply(np.eye(2), w, rho)
    assert equivalent_states(rho, out, qubit_ops, tol=1e-12)


def test_permissible_operation_conjugates_logical_weights(qubit_space, rng):
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    rho = PureState(qubit_space, v / np.linalg.norm(v)).density_matrix()
    out = permissible_operation_apply(SX, KrausChannel.identity(2), rho)
    r = np.array([[rho.logical_weight(1, 1), rho.logical_weight(1, 2)],
                  [rho.logical_weight(2, 1), rho.logical_weight(2, 2)]])
    r_out = np.array([[out.logical_weight(1, 1), out.logical_weight(1, 2)],
                      [out.logical_weight(2, 1), out.logical_weight(2, 2)]])
    assert np.allclose(r_out, SX @ r @ SX, atol=1e-12)
