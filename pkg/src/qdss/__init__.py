"""Quantum-inspired deep sets and deep sequences.

Variadic models over sets and sequences of vectors: elements are embedded
into simulated few-qubit quantum states, pooled by statevector averaging
(sets) or by a tristochastic binary channel (sequences), and projected by a
small classical network. Training runs on a self-contained reverse-mode
tape; everything is deterministic under explicit seeds.
"""

from .autodiff import ParamVector, grad, grad_check
from .channel import (
    ChannelSpec,
    TristochasticTensor,
    associativity_defect,
    build_channel_unitary,
    channel_product,
    commutativity_defect,
    default_tensor,
    fold_sequence,
    validate_tensor,
)
from .datagen import (
    EntropySample,
    SequenceSample,
    entropy_target,
    gen_entropy_dataset,
    gen_sorted_dataset,
    rotation_matrix,
    sample_covariance,
)
from .deepsets import (
    ClassicalDeepSets,
    QuantumDeepSets,
    average_state,
    classical_ds_forward,
    embed_state,
    qds_forward,
)
from .linalg import kron, l2_normalize, matexp_antihermitian, partial_trace_second
from .nets import LstmSpec, MlpSpec, count_params, init_params, lstm_forward, mlp_forward
from .paulis import GeneratorBasis, enumerate_generators, su_unitary
from .sequences import (
    LstmClassifier,
    QuantumDeepSequences,
    embed_density,
    qdseq_forward,
    stick_breaking_eigenvalues,
)
from .training import (
    AdamState,
    MetricsRow,
    TrainConfig,
    adam_step,
    evaluate,
    loss_bce,
    loss_mse,
    sweep,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ChannelSpec",
    "ClassicalDeepSets",
    "EntropySample",
    "GeneratorBasis",
    "LstmClassifier",
    "LstmSpec",
    "MetricsRow",
    "MlpSpec",
    "ParamVector",
    "QuantumDeepSequences",
    "QuantumDeepSets",
    "SequenceSample",
    "TrainConfig",
    "TristochasticTensor",
    "adam_step",
    "associativity_defect",
    "average_state",
    "build_channel_unitary",
    "channel_product",
    "classical_ds_forward",
    "commutativity_defect",
    "count_params",
    "default_tensor",
    "embed_density",
    "embed_state",
    "entropy_target",
    "evaluate",
    "fold_sequence",
    "gen_entropy_dataset",
    "gen_sorted_dataset",
    "grad",
    "grad_check",
    "init_params",
    "kron",
    "l2_normalize",
    "loss_bce",
    "loss_mse",
    "lstm_forward",
    "matexp_antihermitian",
    "mlp_forward",
    "partial_trace_second",
    "qds_forward",
    "qdseq_forward",
    "rotation_matrix",
    "sample_covariance",
    "stick_breaking_eigenvalues",
    "su_unitary",
    "sweep",
    "train",
    "validate_tensor",
]
