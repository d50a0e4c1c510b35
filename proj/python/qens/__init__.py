"""Neural ensemble decoding for the planar surface code."""

from ._qens import (
    CodeLayout,
    ContractViolation,
    CurvePoint,
    Toolkit,
    decoder_names,
    extract_syndrome,
    load_dataset,
    logical_outcome,
    make_grid,
    oracle_selector,
    pseudo_threshold,
    sample_error,
    train_model,
)

__all__ = [
    "CodeLayout",
    "ContractViolation",
    "CurvePoint",
    "Toolkit",
    "decoder_names",
    "extract_syndrome",
    "load_dataset",
    "logical_outcome",
    "make_grid",
    "oracle_selector",
    "pseudo_threshold",
    "sample_error",
    "train_model",
]
