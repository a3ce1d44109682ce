"""Exception types shared across the package."""


class CsdpError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(CsdpError, ValueError):
    pass


class NotPerfectOrdering(CsdpError):
    pass


class NotChordal(CsdpError):
    pass


class DisconnectedCliques(CsdpError):
    """Raised by ``clique_tree(..., strict=True)`` when the cliques form a forest."""


class NotPositiveSemidefinite(CsdpError):
    pass


class NotPositiveDefinite(CsdpError):
    pass


class InfeasibleCompletion(CsdpError):
    pass


class SingularSeparator(UserWarning):
    """Warning: a separator block was singular and a pseudoinverse was used."""


class SingularKkt(CsdpError):
    def __init__(self, message, dependent_rows=()):
        super().__init__(message)
        self.dependent_rows = tuple(dependent_rows)


class SupportNotCovered(CsdpError):
    def __init__(self, uncovered):
        self.uncovered = tuple(uncovered)
        super().__init__(f"{len(self.uncovered)} support exponents not covered by the edge set: "
                         f"{list(self.uncovered)[:5]}")


class ConstraintOutsideClique(CsdpError):
    pass


class ParseError(CsdpError):
    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
