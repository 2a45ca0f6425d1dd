"""Kernel-regression detection of hidden confounding."""

import json as _json

from ._krcd import (
    ArgumentError,
    ConfigurationError,
    InputError,
    KernelSpec,
    KrcdError,
    NumericError,
    TestResult,
    __version__,
    detect,
    fit,
    generate,
    gram,
    kernel_eval,
    roc_auc,
)
from ._krcd import null_calibration as _null_calibration
from ._krcd import oracle_agreement as _oracle_agreement


def oracle_agreement(instances=20, seed=0):
    return _json.loads(_oracle_agreement(instances, seed))


def null_calibration(repeats=100, n=1000, seed=0):
    return _json.loads(_null_calibration(repeats, n, seed))


__all__ = [
    "ArgumentError",
    "ConfigurationError",
    "InputError",
    "KernelSpec",
    "KrcdError",
    "NumericError",
    "TestResult",
    "__version__",
    "detect",
    "fit",
    "generate",
    "gram",
    "kernel_eval",
    "null_calibration",
    "oracle_agreement",
    "roc_auc",
]
