"""Exception hierarchy shared across the package."""


class DdfError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(DdfError):
    """Input parameters violate a documented invariant."""


class DegenerateModel(DdfError):
    """Massing generation could not satisfy the volume floor."""


class MalformedPolygon(DdfError):
    """Polygon rings are not valid rectilinear geometry."""


class EmptyModel(DdfError):
    """Operation requires a model with non-empty solid."""


class EmptyProfile(DdfError):
    """Operation requires a non-empty sectional profile."""


class ParseError(DdfError):
    """Document is structurally malformed."""


class ValidationError(DdfError):
    """Document parsed but violates plan geometry rules."""


class GridMismatch(DdfError):
    """Supplied analysis grid does not match the plan."""


class InfeasibleConstraints(DdfError):
    """Placement constraints cannot admit any window."""


class DanglingWallReference(DdfError):
    """Facade spec references a wall absent from the model profile."""


class EmptyLexiconCategory(DdfError):
    """Prompt lexicon has an empty category."""


class ClientUnavailable(DdfError):
    """External language-model endpoint could not be reached."""


class MalformedReply(DdfError):
    """External language-model reply could not be parsed."""

    def __init__(self, message: str, reply: str = ""):
        super().__init__(message)
        self.reply = reply


class DegenerateCamera(DdfError):
    """Camera parameters produce a zero view volume."""


class StageOrderError(DdfError):
    """Pipeline stage invoked before its prerequisites."""
