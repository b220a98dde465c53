"""Named gate equivalence classes and membership tests.

A logical operation on MLE qubits is an equivalence class

    { xi (x) (V1 (x) ... (x) VM) : V_k in U(n) },

fully characterized by its logical component xi (itself defined only up
to a global phase).  This module provides constructors for the named
classes (weak identity, the Pauli triple, Hadamard, phase shift, C-NOT
and general two-qubit S), a decision procedure for membership based on
the closest-tensor-product (operator-Schmidt) decomposition, and the
padded-target fidelity for laboratory spaces with extra levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import EncodedSpace, Unitary, matrix_norm
from .encoding import EQUIV_TOL, regroup_permutation, sample_class_member

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class GateClass:
    """Equivalence class of unitaries sharing the logical component ``logical``."""

    logical: np.ndarray
    num_qubits: int
    encoding_dim: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        logical = np.asarray(self.logical, dtype=complex)
        object.__setattr__(self, "logical", logical)
        d = 2**self.num_qubits
        if logical.shape != (d, d):
            raise ValueError(f"logical component must be {d}x{d}, got {logical.shape}")
        if matrix_norm(logical.conj().T @ logical - np.eye(d)) > 1e-12 * d:
            raise ValueError("logical component is not unitary")

    @property
    def space(self) -> EncodedSpace:
        return EncodedSpace(self.num_qubits, self.encoding_dim)

    def sample(self, seed=None) -> Unitary:
        """Draw a class member with Haar-random encoded factors."""
        return sample_class_member(self.logical, self.encoding_dim, seed)

    def canonical_member(self) -> Unitary:
        """The member with identity encoded factors."""
        n = self.encoding_dim
        member = np.kron(self.logical, np.eye(n**self.num_qubits))
        space = self.space
        if self.num_qubits > 1:
            p = regroup_permutation(space)
            member = p.T @ member @ p
        return Unitary(member, space)

    def __eq__(self, other) -> bool:
        # Two classes are the same iff the logical components agree up to
        # a global phase.
        if not isinstance(other, GateClass):
            return NotImplemented
        if (
            self.num_qubits != other.num_qubits
            or self.encoding_dim != other.encoding_dim
        ):
            return False
        d = 2**self.num_qubits
        return abs(np.trace(self.logical.conj().T @ other.logical)) >= d - 1e-9


def weak_identity_class(n: int) -> GateClass:
    return GateClass(np.eye(2), 1, n, name="identity")


def pauli_class(axis: str, n: int) -> GateClass:
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    return GateClass(_PAULI[axis], 1, n, name=f"pauli_{axis}")


def hadamard_class(n: int) -> GateClass:
    return GateClass(_HADAMARD, 1, n, name="hadamard")


def phase_class(phi: float, n: int) -> GateClass:
    return GateClass(np.diag([1.0, np.exp(1j * phi)]), 1, n, name=f"phase({phi:g})")


def cnot_class(n: int) -> GateClass:
    cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    return GateClass(cnot, 2, n, name="cnot")


def two_qubit_class(s, n: int) -> GateClass:
    s = np.asarray(s, dtype=complex)
    if s.shape != (4, 4):
        raise ValueError(f"two-qubit logical component must be 4x4, got {s.shape}")
    if matrix_norm(s.conj().T @ s - np.eye(4)) > 1e-10:
        raise ValueError("logical component is not unitary")
    return GateClass(s, 2, n, name="two_qubit")


def _unitarize(a: np.ndarray) -> np.ndarray:
    """Closest unitary to ``a`` in Frobenius norm (polar factor via SVD)."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def _phase_align(candidate: np.ndarray, reference: np.ndarray) -> complex:
    """Global phase minimizing ||reference - phase * candidate||_F."""
    overlap = np.trace(candidate.conj().T @ reference)
    return np.exp(1j * np.angle(overlap)) if abs(overlap) > 0 else 1.0


def _dominant_tensor_pair(m: np.ndarray, d1: int, d2: int):
    """Dominant operator-Schmidt pair of a (d1*d2) x (d1*d2) matrix.

    Reshape to (d1, d2, d1, d2), move the row/column indices of each
    factor together, and take the leading SVD pair of the resulting
    (d1^2) x (d2^2) matrix.
    """
    r = m.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)
    u, s, vh = np.linalg.svd(r)
    left = (u[:, 0] * s[0]).reshape(d1, d1)
    right = vh[0].reshape(d2, d2)
    return left, right


def _nearest_factors(m: np.ndarray, num_qubits: int, n: int):
    """Greedy unitarized tensor factors of a grouped-layout matrix.

    Splits off the 2^M logical factor first, then peels the encoded
    factors one qubit at a time, unitarizing each dominant Schmidt
    factor via its polar decomposition.
    """
    d_logical = 2**num_qubits
    left, right = _dominant_tensor_pair(m, d_logical, n**num_qubits)
    xi_hat = _unitarize(left)
    factors = []
    rest = right
    remaining = num_qubits
    while remaining > 1:
        v, rest = _dominant_tensor_pair(rest, n, n ** (remaining - 1))
        factors.append(_unitarize(v))
        remaining -= 1
    factors.append(_unitarize(rest))
    return xi_hat, factors


def nearest_class_form(u: Unitary, num_qubits: int, n: int):
    """Best approximation of U by xi (x) (V1 (x) ... (x) VM).

    Returns (xi_hat, [V1..VM], residual) where the factors are unitarized
    greedily from the operator-Schmidt decomposition and

        residual = min_theta || U - e^{i theta} xi_hat (x) V1 (x) ... ||_F.
    """
    dim = u.dim
    space = EncodedSpace(num_qubits, n)
    if dim != space.total_dim:
        raise ValueError(f"dimension {dim} does not match ({num_qubits} qubits, n={n})")
    m = u.matrix
    if num_qubits > 1:
        p = regroup_permutation(space)
        m = p @ m @ p.T
    xi_hat, factors = _nearest_factors(m, num_qubits, n)
    candidate = xi_hat
    for v in factors:
        candidate = np.kron(candidate, v)
    # The identity ||U - e^{it}C||^2 = 2 dim - 2|tr(C'U)| cancels
    # catastrophically for near-members; the aligned difference norm is
    # the same number computed stably.
    residual = float(matrix_norm(m - _phase_align(candidate, m) * candidate))
    return xi_hat, factors, residual


def class_membership(u: Unitary, cls: GateClass, tol: float = EQUIV_TOL):
    """Decide whether U belongs to the gate class.

    Returns ``(member, residual)``: residual is the Frobenius distance of
    U from its best tensor factorization (global phase minimized), and
    membership additionally requires the extracted logical component to
    match ``cls.logical`` up to a global phase within the same tolerance.
    """
    xi_hat, _, residual = nearest_class_form(u, cls.num_qubits, cls.encoding_dim)
    logical_residual = matrix_norm(
        cls.logical - _phase_align(xi_hat, cls.logical) * xi_hat
    )
    return bool(residual <= tol and logical_residual <= tol), residual


@dataclass(frozen=True)
class PaddedTarget:
    """Target of the form (xi (x) V) (+) W on a 2n + k dimensional space."""

    gate_class: GateClass
    pad_dim: int

    def __post_init__(self):
        if self.gate_class.num_qubits != 1:
            raise ValueError("padded targets are defined for single qubits")
        if self.pad_dim < 0:
            raise ValueError("pad_dim must be nonnegative")

    @property
    def total_dim(self) -> int:
        return 2 * self.gate_class.encoding_dim + self.pad_dim


def padded_fidelity(u_lab: Unitary, target: PaddedTarget) -> float:
    """Fidelity of a laboratory unitary against a padded class target.

    Penalizes, in quadrature with equal weights, (a) any coupling between
    the 2n-dimensional encoded subspace and the k pad levels and (b) the
    class-membership residual of the upper-left 2n block:

        F = max(0, 1 - sqrt(residual^2 + ||X||^2 + ||Y||^2))

    where X, Y are the off-diagonal coupling blocks.  Exact members of
    the padded class score exactly 1; with k = 0 this reduces to
    1 - class residual.
    """
    if u_lab.dim != target.total_dim:
        raise ValueError(
            f"unitary dimension {u_lab.dim} does not match padded dimension "
            f"{target.total_dim}"
        )
    dim2n = 2 * target.gate_class.encoding_dim
    m = u_lab.matrix
    top = m[:dim2n, :dim2n]
    x = m[:dim2n, dim2n:]
    y = m[dim2n:, :dim2n]
    # The top block need not be unitary when coupling is present, but the
    # greedy factorization is still well defined on it.
    xi_hat, factors = _nearest_factors(top, 1, target.gate_class.encoding_dim)
    candidate = np.kron(xi_hat, factors[0])
    residual = matrix_norm(top - _phase_align(candidate, top) * candidate)
    logical = target.gate_class.logical
    logical_residual = matrix_norm(logical - _phase_align(xi_hat, logical) * xi_hat)
    penalty = np.sqrt(
        residual**2
        + logical_residual**2
        + matrix_norm(x) ** 2
        + matrix_norm(y) ** 2
    )
    return float(max(0.0, 1.0 - penalty))
