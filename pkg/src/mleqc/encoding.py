"""Equivalence-assay operators and logical-equivalence predicates.

Two states that differ inside an encoding subspace can be identical as
far as logical information is concerned.  Logical equivalence is decided
by a finite set of observables, the equivalence-assay (EA) operators

    Lambda_r = lambda_r (x) 1,

where lambda_r runs over the Z_M = 2^(2M) - 1 Hermitian generators of
SU(2^M) acting on the logical factor and the identity acts on the
encoding factors.  Two states are logically equivalent when every EA
expectation value coincides; two operations are equivalent when they map
every state to logically equivalent outputs.

The generator basis is the Hermitian generalized Gell-Mann family
(symmetric, antisymmetric, diagonal), scaled by 1/2 so that for a single
qubit the EA operators are exactly (1/2) sigma_{x,y,z} (x) 1_n.

For M >= 2 the physical basis interleaves logical and encoding factors
qubit by qubit, while the EA operators are naturally written with all
logical factors grouped in front.  The regrouping permutation is built
explicitly and applied to every operator, so callers always work in the
physical (per-qubit) basis layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DensityMatrix,
    EncodedSpace,
    KrausChannel,
    PureState,
    Unitary,
    apply_channel,
    haar_unitary,
    matrix_norm,
)

#: Default tolerance for the equivalence predicates: two orders of
#: magnitude above the propagator's unitarity drift.
EQUIV_TOL = 1e-9


def gell_mann_basis(d: int) -> list[np.ndarray]:
    """Hermitian generators of SU(d), scaled by 1/2.

    Ordered as all symmetric pairs (lexicographic), then all
    antisymmetric pairs, then the d-1 diagonal generators; for d = 2
    this is exactly [sigma_x/2, sigma_y/2, sigma_z/2].
    """
    sym, antisym, diag = [], [], []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            sym.append(m / 2)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            antisym.append(m / 2)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[:l, :l] = np.eye(l)
        m[l, l] = -l
        diag.append(np.sqrt(2.0 / (l * (l + 1))) * m / 2)
    return sym + antisym + diag


def regroup_permutation(space: EncodedSpace) -> np.ndarray:
    """Permutation P mapping the physical basis to the grouped basis.

    Physical layout: (logical_1 (x) encoded_1) (x) ... per qubit.
    Grouped layout: (logical_1 ... logical_M) (x) (encoded_1 ... encoded_M).
    P satisfies v_grouped = P @ v_physical.
    """
    m_qubits, n = space.num_qubits, space.encoding_dim
    dim = space.total_dim
    perm = np.zeros(dim, dtype=int)
    for phys in range(dim):
        # Decode per-qubit (logical, encoded) digits, most significant first.
        digits = []
        rest = phys
        for _ in range(m_qubits):
            digits.append(rest % (2 * n))
            rest //= 2 * n
        digits.reverse()
        logical = 0
        encoded = 0
        for dgt in digits:
            logical = 2 * logical + dgt // n
            encoded = n * encoded + dgt % n
        perm[logical * n**m_qubits + encoded] = phys
    p = np.zeros((dim, dim))
    p[np.arange(dim), perm] = 1.0
    return p


@dataclass(frozen=True)
class EAOperatorSet:
    """The Z_M equivalence-assay operators for a given space."""

    space: EncodedSpace
    operators: tuple

    @property
    def count(self) -> int:
        return len(self.operators)


@dataclass(frozen=True)
class EASignature:
    """Vector of EA expectation values, plus the trace/norm check scalar."""

    values: np.ndarray
    trace_check: float

    def max_deviation(self, other: "EASignature") -> float:
        return float(np.max(np.abs(self.values - other.values)))


def ea_operators(space: EncodedSpace) -> EAOperatorSet:
    """Build the Z_M = 2^(2M) - 1 EA operators in the physical basis layout."""
    m_qubits, n = space.num_qubits, space.encoding_dim
    d_logical = 2**m_qubits
    eye_enc = np.eye(n**m_qubits)
    ops = [np.kron(lam, eye_enc) for lam in gell_mann_basis(d_logical)]
    if m_qubits > 1:
        p = regroup_permutation(space)
        ops = [p.T @ op @ p for op in ops]
    return EAOperatorSet(space, tuple(ops))


def _state_matrix(state) -> np.ndarray:
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    if isinstance(state, DensityMatrix):
        return state.matrix
    raise TypeError(f"expected PureState or DensityMatrix, got {type(state).__name__}")


def ea_signature(state, ops: EAOperatorSet) -> EASignature:
    """Expectation values <Lambda_r> of a pure or mixed state."""
    rho = _state_matrix(state)
    if rho.shape[0] != ops.space.total_dim:
        raise ValueError(
            f"state dimension {rho.shape[0]} does not match space "
            f"dimension {ops.space.total_dim}"
        )
    values = np.array([np.trace(rho @ lam).real for lam in ops.operators])
    return EASignature(values, float(np.trace(rho).real))


def equivalent_states(s1, s2, ops: EAOperatorSet, tol: float = EQUIV_TOL) -> bool:
    """True iff the EA signatures of the two states agree within tol."""
    return ea_signature(s1, ops).max_deviation(ea_signature(s2, ops)) <= tol


def probe_states(space: EncodedSpace) -> list[PureState]:
    """Deterministic probe set spanning the logical operator space.

    All logical basis states |i>, all (|i>+|j>)/sqrt(2) and all
    (|i>+i|j>)/sqrt(2), each tensored with a fixed uniform-superposition
    encoded reference vector.  Together these probes are informationally
    complete on the logical factor, so an operation-equivalence test over
    them is sound rather than merely sampled.
    """
    m_qubits, n = space.num_qubits, space.encoding_dim
    d_logical = 2**m_qubits
    ref = np.full(n**m_qubits, 1.0 / np.sqrt(n**m_qubits), dtype=complex)
    p = regroup_permutation(space) if m_qubits > 1 else None

    logical_vectors = []
    eye = np.eye(d_logical, dtype=complex)
    for i in range(d_logical):
        logical_vectors.append(eye[i])
    for i in range(d_logical):
        for j in range(i + 1, d_logical):
            logical_vectors.append((eye[i] + eye[j]) / np.sqrt(2))
            logical_vectors.append((eye[i] + 1j * eye[j]) / np.sqrt(2))

    probes = []
    for lv in logical_vectors:
        amp = np.kron(lv, ref)
        if p is not None:
            amp = p.T @ amp
        probes.append(PureState(space, amp))
    return probes


def equivalent_operations(
    u1: Unitary,
    u2: Unitary,
    ops: EAOperatorSet,
    num_probe_states: int = 0,
    tol: float = EQUIV_TOL,
    seed=None,
) -> bool:
    """True iff U1 and U2 map every probe state to equivalent outputs.

    The deterministic probe set guarantees detection of logical
    differences; ``num_probe_states`` extra Haar-random probes can be
    added (seeded) as a belt-and-braces check.
    """
    if u1.dim != u2.dim:
        raise ValueError(f"operation dimensions differ: {u1.dim} vs {u2.dim}")
    space = ops.space
    if u1.dim != space.total_dim:
        raise ValueError("operations do not act on the EA operator space")
    probes = [p.amplitudes for p in probe_states(space)]
    if num_probe_states > 0:
        rng = np.random.default_rng(seed)
        for _ in range(num_probe_states):
            v = rng.standard_normal(space.total_dim) + 1j * rng.standard_normal(
                space.total_dim
            )
            probes.append(v / np.linalg.norm(v))
    for amp in probes:
        out1 = PureState(space, u1.matrix @ amp)
        out2 = PureState(space, u2.matrix @ amp)
        if not equivalent_states(out1, out2, ops, tol):
            return False
    return True


def weakly_commute(
    f: Unitary,
    g: Unitary,
    ops: EAOperatorSet,
    num_probe_states: int = 0,
    tol: float = EQUIV_TOL,
    seed=None,
) -> bool:
    """True iff FG ~ GF, i.e. the products are equivalent operations."""
    fg = Unitary(f.matrix @ g.matrix, f.space)
    gf = Unitary(g.matrix @ f.matrix, g.space)
    return equivalent_operations(fg, gf, ops, num_probe_states, tol, seed)


def sample_class_member(logical, n: int, seed=None) -> Unitary:
    """Draw xi (x) (V1 (x) ... (x) VM) with each V Haar-random in U(n).

    ``logical`` is the 2^M x 2^M logical component xi; the member is
    returned in the physical basis layout.
    """
    logical = np.asarray(logical, dtype=complex)
    d = logical.shape[0]
    m_qubits = int(round(np.log2(d)))
    if logical.shape != (d, d) or 2**m_qubits != d:
        raise ValueError(f"logical component must be 2^M x 2^M, got {logical.shape}")
    if matrix_norm(logical.conj().T @ logical - np.eye(d)) > 1e-10:
        raise ValueError("logical component is not unitary")
    rng = np.random.default_rng(seed)
    encoded = haar_unitary(n, rng)
    for _ in range(m_qubits - 1):
        encoded = np.kron(encoded, haar_unitary(n, rng))
    member = np.kron(logical, encoded)
    space = EncodedSpace(m_qubits, n)
    if m_qubits > 1:
        p = regroup_permutation(space)
        member = p.T @ member @ p
    return Unitary(member, space)


def permissible_operation_apply(
    xi, w: KrausChannel, rho: DensityMatrix
) -> DensityMatrix:
    """Action of the permissible operation L_xi = {xi, W} on a density matrix.

    The logical 2x2 unitary xi conjugates the logical weights while the
    trace-preserving channel W acts on every n x n sub-block:

        rho' = sum_ij  xi (r_ij |i><j|) xi^dagger  (x)  W(R_ij).

    Single-qubit spaces only.  With xi = 1 the output is logically
    equivalent to the input (the generalized weak identity).
    """
    if rho.space.num_qubits != 1:
        raise ValueError("permissible operations are defined for single qubits here")
    n = rho.space.encoding_dim
    if w.dim != n:
        raise ValueError(f"channel dimension {w.dim} does not match encoding dim {n}")
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (2, 2):
        raise ValueError(f"logical component must be 2x2, got {xi.shape}")
    transformed = [[apply_channel(w, rho.block(i, j)) for j in (1, 2)] for i in (1, 2)]
    out = np.zeros_like(rho.matrix)
    for k in range(2):
        for l in range(2):
            acc = np.zeros((n, n), dtype=complex)
            for i in range(2):
                for j in range(2):
                    acc += xi[k, i] * np.conj(xi[l, j]) * transformed[i][j]
            out[k * n : (k + 1) * n, l * n : (l + 1) * n] = acc
    return DensityMatrix(rho.space, out)
