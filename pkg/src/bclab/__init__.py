"""Truncated Fock-space laboratory for phase-insensitive bosonic channels.

Entropies are in nats throughout.
"""

from .errors import (
    BclError,
    DomainError,
    QuadratureError,
    ResourceError,
    SpectrumError,
    TruncationError,
)
from .fock import (
    DensityMatrix,
    Moments,
    PureState,
    Truncation,
    coherent_state,
    displacement_operator,
    fock_state,
    ladder_operators,
    moments,
    partial_trace,
    random_pure_state,
    squeeze_operator,
    squeezed_state,
    tensor_with_ancilla,
    thermal_state,
)
from .channels import (
    Amplifier,
    Cascade,
    ChannelApplication,
    Loss,
    amplifier_output_for_coherent,
    apply_amplifier,
    apply_channel,
    apply_loss,
)
from .entropy import (
    EntropyReport,
    g_function,
    holevo_chi_amplifier,
    holevo_chi_general,
    von_neumann_entropy,
)

__version__ = "0.1.0"
