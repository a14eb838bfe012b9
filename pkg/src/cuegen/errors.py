"""Exception taxonomy shared across the package.

Errors are grouped by contract kind: bad caller input (precondition),
missing/unreadable artifacts (I/O), and numerical failures. The CLI maps
PreconditionError to exit code 2 and ArtifactError to exit code 3.
"""

from __future__ import annotations


class CuegenError(Exception):
    """Base class for all package errors."""


class PreconditionError(CuegenError):
    """An operation was called with inputs violating its contract."""


class ArtifactError(CuegenError):
    """A required on-disk artifact is missing, malformed, or would be clobbered."""


# domain
class UnknownSymbol(PreconditionError):
    def __init__(self, symbol: str):
        super().__init__(f"phoneme symbol not in inventory: {symbol!r}")
        self.symbol = symbol


class MissingCodebookEntry(PreconditionError):
    def __init__(self, symbol: str):
        super().__init__(f"codebook has no entry for phoneme: {symbol!r}")
        self.symbol = symbol


# signal features
class TooShort(PreconditionError):
    """Audio shorter than one analysis window."""


class DegenerateData(PreconditionError):
    """PCA input has an all-zero covariance."""


class DimensionMismatch(PreconditionError):
    """Tensor/matrix extents incompatible with the operation."""


# neural core
class NonScalarLoss(PreconditionError):
    """backward() requires a scalar loss tensor."""


class MissingGrad(PreconditionError):
    """Optimizer step found a trainable parameter without a gradient."""


class EvenKernel(PreconditionError):
    """Same-padded 1-D convolution requires an odd kernel size."""


# models
class EmptyInput(PreconditionError):
    pass


class EmptyTarget(PreconditionError):
    pass


class UninitializedState(PreconditionError):
    pass


class LengthMismatch(PreconditionError):
    pass


class MissingCheckpoint(PreconditionError):
    """S2/S3 strategies require a source checkpoint."""


class NameMismatch(PreconditionError):
    """Checkpoint names do not line up with the model's parameter names."""


class InfeasibleLabel(PreconditionError):
    """CTC label sequence cannot be emitted within the given frame count."""


# metrics
class EmptyReference(PreconditionError):
    pass


class EmptyCorpus(PreconditionError):
    pass


class NonStochasticRows(PreconditionError):
    """Attention rows must be probability vectors."""


# training
class NaNLoss(CuegenError):
    """Training loss became non-finite; aborted with diagnostics."""
