"""Multilevel-encoded qubits: equivalence formalism, gate search, decoherence.

A logical qubit is stored in a pair of n-dimensional physical
subspaces; logical information is defined through equivalence-assay
expectation values, operations through equivalence classes of
unitaries.  The package provides the formalism (core, encoding, gates),
control-field propagation and a genetic gate search for a four-level
sodium-dimer model (dynamics, optimizer), and the dephasing/thermal
error studies comparing multilevel against single-level encoding
(decoherence), all wired to a deterministic command-line tool (cli).
"""

__version__ = "0.1.0"

from .core import (
    DensityMatrix,
    EncodedSpace,
    KrausChannel,
    PureState,
    Unitary,
    apply_channel,
    block,
    compose_channels,
    matrix_norm,
)
from .encoding import (
    EAOperatorSet,
    EASignature,
    EQUIV_TOL,
    ea_operators,
    ea_signature,
    equivalent_operations,
    equivalent_states,
    gell_mann_basis,
    permissible_operation_apply,
    sample_class_member,
    weakly_commute,
)
from .gates import (
    GateClass,
    PaddedTarget,
    class_membership,
    cnot_class,
    hadamard_class,
    nearest_class_form,
    padded_fidelity,
    pauli_class,
    phase_class,
    two_qubit_class,
    weak_identity_class,
)
from .dynamics import (
    ControlField,
    Envelope,
    FieldComponent,
    ModelSystem,
    PropagatorResult,
    default_dt,
    field_value,
    na2_model,
    omega_max,
    propagate,
)
from .optimizer import (
    FidelityFunctional,
    GAConfig,
    OptimizationRecord,
    TARGET_PRESETS,
    fidelity_mle_x,
    fidelity_mle_z,
    fidelity_sle_x,
    fidelity_sle_z,
    ga_optimize,
    preset_run,
)
from .decoherence import (
    BOLTZMANN,
    DephasingStudyResult,
    RandomStateSpec,
    SweepTable,
    ThermalSpec,
    crossover_temperature,
    dephase,
    dephasing_study,
    error_mle,
    error_sle,
    sle_bitflip_exact,
    temperature_sweep,
    thermal_state,
)
