"""Exception hierarchy shared by the library, the CLI and the API.

Every error carries the process exit status the CLI reports for it:
1 usage, 2 infeasible/domain, 3 IO/format.
"""


class LapqError(Exception):
    """Base class for all quantizer, codec and harness errors."""

    exit_code = 1


class UsageError(LapqError):
    """Malformed command-line input."""

    exit_code = 1


class DomainError(LapqError, ValueError):
    """An input lies outside an operation's mathematical domain."""

    exit_code = 2


class InvalidThresholdError(DomainError):
    """Decision threshold is negative or not finite."""


class InfeasibleTargetError(DomainError):
    """No non-negative threshold attains the requested SQNR or distortion."""


class SolverError(DomainError):
    """Threshold search did not reach the requested tolerance."""


class InvalidProbabilityError(DomainError):
    """Symbol probabilities are outside (0, 1) or do not sum to one."""


class BlockSizeError(DomainError):
    """Block size outside the supported range."""


class DegenerateModelError(DomainError):
    """Block model cannot produce a Huffman code."""


class MismatchedModelError(DomainError):
    """Codebook and block model disagree on block size or ordering."""


class CodebookMismatchError(DomainError):
    """Codebook was not built from the design's symbol probabilities."""


class EmptyInputError(DomainError):
    """No samples were supplied."""


class InvalidSampleError(DomainError):
    """A sample is NaN or infinite."""


class FormatError(LapqError):
    """A container or file could not be parsed."""

    exit_code = 3


class CorruptHeaderError(FormatError):
    """LAPQ header deviates from the container layout."""


class PayloadError(FormatError):
    """Payload bits are inconsistent with the header."""


class TruncatedPayloadError(PayloadError):
    """Payload ended before every block was decoded."""


class DanglingBitsError(PayloadError):
    """Bits remain that are neither a complete codeword nor zero padding."""
