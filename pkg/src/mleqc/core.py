"""Dense linear algebra over partitioned Hilbert spaces.

A multilevel-encoded (MLE) qubit lives in a tensor product of a
two-dimensional logical factor and an n-dimensional encoding factor;
M qubits occupy the (2n)^M-dimensional product of such spaces.  The
logical factor is always the slow (leftmost) tensor index, so a
single-qubit 2n x 2n operator splits into four n x n sub-blocks
addressed by logical indices.

All types here are plain values: the constructor validates the
defining invariant (normalization, Hermiticity, trace preservation,
unitarity) and instances are treated as immutable afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Tolerances, named per invariant.  Dimensions in this package are tiny
# (at most 16 for two qubits with n = 2), so double precision holds these
# comfortably.
ATOL_HERMITIAN = 1e-12   # elementwise Hermiticity of density matrices
ATOL_TRACE = 1e-12       # unit trace / unit norm
ATOL_UNITARY = 1e-10     # Frobenius unitarity / trace preservation
ATOL_POSITIVITY = 1e-10  # slack on the smallest density-matrix eigenvalue


def matrix_norm(m) -> float:
    """Matrix norm ``sqrt(Tr(M M^dagger))`` (the Frobenius norm).

    Parameters
    ----------
    m : array_like
        Any complex rectangular matrix.

    Returns
    -------
    float
        Nonnegative real norm.
    """
    m = np.asarray(m, dtype=complex)
    return float(np.sqrt(np.vdot(m, m).real))


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Draw a Haar-distributed random unitary of size ``dim``.

    QR decomposition of a complex Ginibre matrix, with the R-diagonal
    phases folded back into Q so the distribution is exactly Haar.
    ``rng`` may be a seed or a ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(rng)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class EncodedSpace:
    """Hilbert-space partition: M qubits, each logical level encoded in n physical levels."""

    num_qubits: int
    encoding_dim: int

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if self.encoding_dim < 1:
            raise ValueError("encoding_dim must be >= 1")

    @property
    def total_dim(self) -> int:
        return (2 * self.encoding_dim) ** self.num_qubits


def _as_complex_matrix(m, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class PureState:
    """Normalized complex state vector over an :class:`EncodedSpace`."""

    space: EncodedSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amp)
        if amp.shape != (self.space.total_dim,):
            raise ValueError(
                f"amplitude vector has length {amp.shape[0]}, "
                f"space dimension is {self.space.total_dim}"
            )
        if abs(np.linalg.norm(amp) - 1.0) > ATOL_TRACE:
            raise ValueError("state vector is not normalized")

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive, unit-trace matrix over an :class:`EncodedSpace`."""

    space: EncodedSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex_matrix(self.matrix, "density matrix")
        object.__setattr__(self, "matrix", m)
        d = self.space.total_dim
        if m.shape != (d, d):
            raise ValueError(f"matrix is {m.shape}, space dimension is {d}")
        if np.max(np.abs(m - m.conj().T)) > ATOL_HERMITIAN:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > ATOL_TRACE:
            raise ValueError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(m)[0] < -ATOL_POSITIVITY:
            raise ValueError("density matrix has a negative eigenvalue")

    def block(self, i: int, j: int) -> np.ndarray:
        """The (i, j) logical sub-block R_ij (single qubit only, 1-indexed)."""
        return block(self, i, j)

    def logical_weight(self, i: int, j: int) -> complex:
        """r_ij = Tr R_ij, the weight of the |i><j| logical component."""
        return complex(np.trace(self.block(i, j)))


@dataclass(frozen=True)
class Unitary:
    """Unitary matrix, optionally tagged with the space it acts on."""

    matrix: np.ndarray
    space: EncodedSpace | None = None

    def __post_init__(self):
        m = _as_complex_matrix(self.matrix, "unitary")
        object.__setattr__(self, "matrix", m)
        if self.space is not None and m.shape[0] != self.space.total_dim:
            raise ValueError(
                f"matrix is {m.shape}, space dimension is {self.space.total_dim}"
            )
        defect = matrix_norm(m.conj().T @ m - np.eye(m.shape[0]))
        if defect > ATOL_UNITARY:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def block(self, i: int, j: int) -> np.ndarray:
        """The (i, j) logical sub-block (single qubit only, 1-indexed)."""
        return block(self, i, j)


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators W_nu."""

    dim: int
    operators: tuple

    def __post_init__(self):
        if not self.operators:
            raise ValueError("KrausChannel requires at least one operator")
        ops = tuple(_as_complex_matrix(w, "Kraus operator") for w in self.operators)
        object.__setattr__(self, "operators", ops)
        for w in ops:
            if w.shape != (self.dim, self.dim):
                raise ValueError(f"Kraus operator is {w.shape}, channel dim is {self.dim}")
        total = sum(w.conj().T @ w for w in ops)
        defect = matrix_norm(total - np.eye(self.dim))
        if defect > ATOL_UNITARY:
            raise ValueError(f"channel is not trace preserving (defect {defect:.3e})")

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls(dim, (np.eye(dim, dtype=complex),))

    @classmethod
    def from_unitary(cls, v) -> "KrausChannel":
        v = _as_complex_matrix(v, "unitary Kraus operator")
        return cls(v.shape[0], (v,))


def apply_channel(channel: KrausChannel, rho_block) -> np.ndarray:
    """Kraus action ``sum_nu W_nu R W_nu^dagger`` on an n x n block."""
    rho_block = _as_complex_matrix(rho_block, "input block")
    if rho_block.shape != (channel.dim, channel.dim):
        raise ValueError(
            f"block is {rho_block.shape}, channel dimension is {channel.dim}"
        )
    out = np.zeros_like(rho_block)
    for w in channel.operators:
        out += w @ rho_block @ w.conj().T
    return out


def compose_channels(w1: KrausChannel, w2: KrausChannel) -> KrausChannel:
    """Composition applying ``w2`` first, then ``w1``.

    The Kraus list of the composite is all pairwise products A_i B_j; the
    permissible operations therefore form a closed set under composition.
    """
    if w1.dim != w2.dim:
        raise ValueError(f"channel dimensions differ: {w1.dim} vs {w2.dim}")
    products = tuple(a @ b for a in w1.operators for b in w2.operators)
    return KrausChannel(w1.dim, products)


def block(mat, i: int, j: int) -> np.ndarray:
    """The (i, j) logical n x n sub-block of a single-qubit 2n x 2n matrix.

    Indices are 1-based, matching the block layout

        [[ A, B ],      A = block(., 1, 1), B = block(., 1, 2),
         [ C, D ]]      C = block(., 2, 1), D = block(., 2, 2).
    """
    space = getattr(mat, "space", None)
    if space is not None and space.num_qubits != 1:
        raise ValueError("block access is defined for single-qubit spaces only")
    m = np.asarray(getattr(mat, "matrix", mat), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ValueError(f"expected a square even-dimensional matrix, got {m.shape}")
    if i not in (1, 2) or j not in (1, 2):
        raise ValueError("block indices must be 1 or 2")
    n = m.shape[0] // 2
    return m[(i - 1) * n : i * n, (j - 1) * n : j * n].copy()
