"""Exception hierarchy for the bridge tool."""


class BridgeError(Exception):
    """Base class for everything raised deliberately by this package."""


class SetupError(BridgeError):
    """The encoder or the generation backend could not be prepared."""


class InputError(BridgeError):
    """An input file is malformed. Carries a line number when one is known."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = "line {}: {}".format(line_no, message)
        super().__init__(message)
        self.line_no = line_no


class GenerationError(BridgeError):
    """A generation request failed and retrying will not help."""


class PartialOutputError(GenerationError):
    """Generation stopped part way through the word list.

    ``completed`` lists the words whose records were finished before the
    failure, so a rerun can be restricted to the remainder. ``word`` is the
    one whose request ultimately failed.
    """

    def __init__(self, word, completed, reason):
        self.word = word
        self.completed = tuple(completed)
        done = ", ".join(self.completed) if self.completed else "none"
        super().__init__(
            "generation failed at {!r} after completing {} word(s) ({}): {}".format(
                word, len(self.completed), done, reason
            )
        )
