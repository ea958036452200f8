"""Exception hierarchy shared by all trisum modules."""


class TrisumError(Exception):
    """Base class for all errors raised by trisum."""


class InputError(TrisumError):
    """A caller-supplied expression or option is invalid."""


class ParseError(InputError):
    """Syntax error in an input expression, with a source position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class FactorizationError(InputError):
    """A supplied factorization is inconsistent or not certified."""


class OrderLimitError(TrisumError):
    """The telescoper search exceeded its order cap without success."""
