"""Exception types raised across the package.

Class names double as the error identifiers surfaced by the command line,
so they intentionally mirror the failure they describe rather than carrying
an ``Error`` suffix.
"""


class SentimentTransferError(Exception):
    """Base class for every error raised by this package."""


# image I/O
class NotFound(SentimentTransferError, FileNotFoundError):
    pass


class DecodeError(SentimentTransferError):
    pass


class IoError(SentimentTransferError, OSError):
    pass


# edges / ssim / losses
class ShapeMismatch(SentimentTransferError, ValueError):
    pass


class BackendUnavailable(SentimentTransferError):
    pass


# corpus index
class ParseError(SentimentTransferError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingField(ParseError):
    pass


class DuplicateId(SentimentTransferError, ValueError):
    def __init__(self, entry_id, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate entry id {entry_id!r}{where}")
        self.entry_id = entry_id


class EntryImageError(SentimentTransferError):
    def __init__(self, entry_id, reason=""):
        msg = entry_id if not reason else f"{entry_id}: {reason}"
        super().__init__(msg)
        self.entry_id = entry_id


class CorruptIndex(SentimentTransferError):
    pass


class MissingEdgeMap(CorruptIndex):
    pass


# retrieval
class NoCandidates(SentimentTransferError):
    def __init__(self, noun, adjective):
        super().__init__(f"no corpus entries tagged ({noun!r}, {adjective!r})")
        self.noun = noun
        self.adjective = adjective


# backbone
class MissingTensor(SentimentTransferError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class FormatError(SentimentTransferError):
    pass


class InputTooSmall(SentimentTransferError, ValueError):
    pass


# transfer
class NonFiniteLoss(SentimentTransferError, FloatingPointError):
    def __init__(self, iteration):
        super().__init__(f"loss became non-finite at iteration {iteration}")
        self.iteration = iteration


# evaluation
class PairShapeMismatch(SentimentTransferError, ValueError):
    pass
