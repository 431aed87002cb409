"""Exception hierarchy shared by all modules."""


class GroupTestingError(Exception):
    """Base class for every error raised by this package."""


class DegenerateChannel(GroupTestingError, ValueError):
    pass


class DomainError(GroupTestingError, ValueError):
    pass


class InvalidParams(GroupTestingError, ValueError):
    pass


class TooSmallPopulation(InvalidParams):
    pass


class LengthMismatch(GroupTestingError, ValueError):
    pass


class IndexOutOfRange(GroupTestingError, IndexError):
    pass


class TooLarge(GroupTestingError, ValueError):
    """Instance too big for exhaustive enumeration."""


class SessionMismatch(GroupTestingError, ValueError):
    pass


class MalformedInput(GroupTestingError, ValueError):
    pass


class InternalInconsistency(GroupTestingError, RuntimeError):
    """A mathematical invariant failed; indicates a bug, not bad input."""


class Infeasible(InternalInconsistency):
    pass
