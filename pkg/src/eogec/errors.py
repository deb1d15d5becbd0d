"""Exception hierarchy.

Two families matter to callers: :class:`InputError` for bad data coming in
(the CLI maps it to exit code 1) and :class:`InvariantViolation` for rule
bugs inside the toolkit (exit code 2).
"""


class EogecError(Exception):
    pass


class InputError(EogecError):
    pass


class InvariantViolation(EogecError):
    pass


# align
class SpanOutOfRange(InputError):
    pass


class OverlappingEdits(InputError):
    pass


# classify
class IllegalCombination(InvariantViolation):
    pass


class EmptyDataset(InputError):
    pass


class FormatError(InputError):
    pass


# score
class SourceMismatch(InputError):
    pass


# freq
class EmptyDistribution(InputError):
    pass


class InsufficientData(InputError):
    pass


# ingest
class UnreadableDocument(InputError):
    pass


# harness
class MissingExamples(InputError):
    pass


class EndpointUnreachable(EogecError):
    pass


class MalformedResponse(EogecError):
    pass


class QuotaExceeded(EogecError):
    pass
