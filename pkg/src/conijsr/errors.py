"""Exception hierarchy shared by the library and the CLI."""


class JsrError(Exception):
    """Base class for all errors raised by conijsr."""


class InputError(JsrError, ValueError):
    """Malformed or inconsistent user input (bad matrices, words, files)."""


class NumericError(JsrError, ArithmeticError):
    """An iterative numerical routine failed to converge."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class BudgetError(JsrError):
    """An enumeration would exceed the configured product budget."""

    def __init__(self, message, budget=None, required=None):
        super().__init__(message)
        self.budget = budget
        self.required = required


class StateError(JsrError):
    """An object was used in a state that does not support the operation."""
