"""Exception hierarchy shared by every tornadet module."""


class TornadetError(ValueError):
    """Base class for all data and model errors raised by tornadet."""


class ShapeError(TornadetError):
    pass


class RangeError(TornadetError):
    """A value lies outside its declared range.

    ``variable``, ``cell`` and ``value`` identify the offending entry when the
    error comes from snapshot validation; ``line`` is set for catalog rows.
    """

    def __init__(self, message, *, variable=None, cell=None, value=None, line=None):
        super().__init__(message)
        self.variable = variable
        self.cell = cell
        self.value = value
        self.line = line

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.args == other.args
            and (self.variable, self.cell, self.value, self.line)
            == (other.variable, other.cell, other.value, other.line)
        )

    __hash__ = TornadetError.__hash__


class NonFiniteError(TornadetError):
    def __init__(self, message, *, variable=None, cell=None):
        super().__init__(message)
        self.variable = variable
        self.cell = cell


class MissingVariableError(TornadetError):
    def __init__(self, message, *, variable=None):
        super().__init__(message)
        self.variable = variable


class DocumentSyntaxError(TornadetError):
    """Malformed snapshot, catalog, dataset or config document.

    Carries a byte ``offset``, a JSON ``path`` or a 1-based ``line``, whichever
    locates the fault.
    """

    def __init__(self, message, *, offset=None, path=None, line=None):
        super().__init__(message)
        self.offset = offset
        self.path = path
        self.line = line


class DuplicateIdError(TornadetError):
    def __init__(self, message, *, event_id=None, lines=()):
        super().__init__(message)
        self.event_id = event_id
        self.lines = tuple(lines)


class WindowError(TornadetError):
    """An event window breaks the consecutive-day or shared-grid contract."""


class EmptyDatasetError(TornadetError):
    def __init__(self, message, *, skipped=0):
        super().__init__(message)
        self.skipped = skipped


class EmptyQuadrantError(TornadetError):
    pass


class EmptyInputError(TornadetError):
    pass


class LengthMismatchError(TornadetError):
    pass


class SingleClassError(TornadetError):
    pass


class DegenerateInputError(TornadetError):
    pass


class VersionError(TornadetError):
    pass


class CorruptModelError(TornadetError):
    pass


class FutureEventError(TornadetError):
    pass
