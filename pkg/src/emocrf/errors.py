"""Exception types shared across the package.

Everything raised on purpose derives from EmocrfError so callers can catch
one base class at process boundaries (the CLI maps these to exit code 1,
except for usage problems which argparse reports as exit code 2).
Plain ValueError is reserved for bad arguments: wrong shapes, out-of-range
indices, unknown mode strings.
"""


class EmocrfError(Exception):
    """Base class for package-specific failures."""


class CorpusParseError(EmocrfError):
    """A corpus line is malformed or conversations are not contiguous."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = "line {}: {}".format(line_no, message)
        super().__init__(message)
        self.line_no = line_no


class VocabularyError(EmocrfError):
    """An emotion word does not resolve against the active label set."""


class FormatError(EmocrfError):
    """A file does not conform to its documented schema."""


class CorruptionError(FormatError):
    """Stored bytes disagree with the shape declared by the manifest."""


class ManifestError(EmocrfError):
    """A required tensor or row key is missing from an embedding manifest."""


class NumericInputError(EmocrfError):
    """An input array contains NaN or infinite entries."""


class DegenerateVectorError(EmocrfError):
    """A zero-norm vector reached a cosine computation."""


class DegenerateRowError(EmocrfError):
    """A transfer-probability row could not be normalized."""

    def __init__(self, row, message=None):
        if message is None:
            message = "transfer row {} has a zero normalizer".format(row)
        super().__init__(message)
        self.row = row


class DivergenceError(EmocrfError):
    """Training produced a non-finite loss."""

    def __init__(self, batch_id, epoch=None):
        message = "non-finite loss in batch {}".format(batch_id)
        if epoch is not None:
            message += " of epoch {}".format(epoch)
        super().__init__(message)
        self.batch_id = batch_id
        self.epoch = epoch
