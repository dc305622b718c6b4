"""Exception hierarchy shared by every fracstab module."""


class FracStabError(Exception):
    """Base class for all errors raised by fracstab."""


class InvalidInputError(FracStabError, ValueError):
    pass


class DomainError(FracStabError, ValueError):
    """A value is syntactically fine but outside the supported domain."""


class UnsupportedFormError(FracStabError, ValueError):
    pass


class ParseError(FracStabError, ValueError):
    """Syntax error in a textual polynomial, transfer function or field.

    ``offset`` is the byte offset into the source text where parsing failed.
    """

    def __init__(self, message, text="", offset=0):
        self.text = text
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class NumericError(FracStabError, ArithmeticError):
    """An iterative numerical method failed to converge."""


class EvaluationError(NumericError):
    pass


class LossOfPrecisionError(NumericError):
    pass


class NotApplicableError(FracStabError):
    pass
