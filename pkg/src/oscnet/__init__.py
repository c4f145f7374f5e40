"""Oscillatory activation functions: catalog, XOR certification, CNN benchmark."""

from .activations import (
    COUNTABLY_INFINITE,
    ActivationDescriptor,
    ActivationId,
    ValueRange,
    all_ids,
    apply,
    apply_grad,
    derivative,
    descriptor,
    evaluate,
    sinc,
)
from .properties import (
    Interval,
    continuity_scan,
    gradient_check,
    monotonicity_scan,
    range_scan,
    sign_equivalence_scan,
    small_value_check,
    verify_catalog,
    zero_crossings,
)
from .xorlab import (
    SingleNeuron,
    TrainSpec,
    XorCertificate,
    XorDataset,
    decision_boundary_grid,
    grid_search_certificate,
    neuron_forward,
    train_single_neuron,
    xor_dataset,
)
from .network import (
    AdamState,
    NetworkConfig,
    adam_init,
    adam_step,
    build_model,
    evaluate_top1,
    load_checkpoint,
    save_checkpoint,
    train_epoch,
)
from .cifar import ImageDataset, load_cifar10, stratified_subset, synthetic_check_image

__version__ = "0.1.0"
