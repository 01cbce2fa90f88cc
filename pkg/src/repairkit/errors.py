"""Shared exception types."""


class RepairKitError(Exception):
    """Base class for package errors."""


class DegenerateInputError(RepairKitError):
    """Input is well-formed but carries no usable signal (e.g. nothing to weight)."""


class BackendContractError(RepairKitError):
    """A model backend violated determinism or causality."""


class LosslessnessError(RepairKitError):
    """Accelerated decoding produced output that differs from plain greedy decoding."""
