"""Exception hierarchy.

Every error carries an ``exit_code`` that the command-line front end maps to
its process exit status (2 config/parse, 3 numeric degeneracy, 4 singular
offset, 5 coincidence failure).
"""


class DarbouxError(Exception):
    exit_code = 3
    code = "error"


class ConfigError(DarbouxError, ValueError):
    exit_code = 2
    code = "config"


# geometry ------------------------------------------------------------------

class GeometryError(DarbouxError):
    code = "numeric"


class DegenerateParameterization(GeometryError):
    code = "degenerate-parameterization"


class OutOfDomain(GeometryError):
    code = "out-of-domain"


class DegenerateSpeed(GeometryError):
    code = "degenerate-speed"


class OutOfRange(GeometryError, ValueError):
    code = "out-of-range"


class TooFewSamples(GeometryError, ValueError):
    code = "too-few-samples"


class UndefinedAngle(GeometryError):
    code = "undefined-angle"


# expression language -------------------------------------------------------

class ExprError(DarbouxError):
    """Base for expression language errors; ``offset`` is a byte offset."""

    exit_code = 2

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class ExprSyntaxError(ExprError, SyntaxError):
    code = "syntax"

    def __init__(self, message, offset, expected=()):
        self.expected = tuple(sorted(set(expected)))
        if self.expected:
            message = f"{message}; expected one of: {' '.join(self.expected)}"
        ExprError.__init__(self, message, offset)


class UnknownIdentifier(ExprError):
    code = "unknown-identifier"


class DepthExceeded(ExprError):
    code = "depth-exceeded"


class DomainError(ExprError):
    """A function was evaluated outside its real domain."""

    exit_code = 3
    code = "domain"


# catalog -------------------------------------------------------------------

class UnknownEntry(DarbouxError, KeyError):
    exit_code = 2
    code = "unknown-entry"

    def __str__(self):
        return str(self.args[0]) if self.args else ""


# Mannheim pairs --------------------------------------------------------------

class ZeroLambda(DarbouxError, ValueError):
    exit_code = 2
    code = "zero-lambda"


class SingularOffset(DarbouxError):
    exit_code = 4
    code = "singular-offset"

    def __init__(self, message, s1=None):
        self.s1 = s1
        super().__init__(message)


class DegenerateSweep(GeometryError):
    code = "degenerate-sweep"


class NoCorrespondence(DarbouxError):
    code = "no-correspondence"


class UnknownIdentity(DarbouxError, ValueError):
    exit_code = 2
    code = "unknown-identity"


class CoincidenceFailure(DarbouxError):
    exit_code = 5
    code = "coincidence"
