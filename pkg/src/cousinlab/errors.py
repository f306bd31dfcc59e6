"""Exception hierarchy shared by all cousinlab modules."""

import sys


class CousinLabError(Exception):
    """Base class; the CLI prefixes messages with ``module`` when set."""

    module = "cousinlab"

    def __init__(self, *args, module=None):
        super().__init__(*args)
        if module is None and type(self).module == "cousinlab":
            module = _raising_module()
        if module is not None:
            self.module = module

    def __str__(self):
        return f"{self.module}: {super().__str__()}"


class InvalidInputError(CousinLabError, ValueError):
    pass


class GridTooSmallError(InvalidInputError):
    module = "surface"


class DegenerateNodeError(CousinLabError):
    """Raised with the offending node index when an immersion degenerates."""

    module = "surface"

    def __init__(self, message, node=None):
        super().__init__(message if node is None else f"{message} at node {tuple(int(i) for i in node)}")
        self.node = node


class NotConformalError(CousinLabError):
    module = "surface"


class NotIntegrableError(CousinLabError):
    module = "cousin"

    def __init__(self, message, plaquette=None, value=None):
        extra = ""
        if plaquette is not None:
            extra = f" (worst plaquette {tuple(int(i) for i in plaquette)}, residual density {value:.3e})"
        super().__init__(message + extra)
        self.plaquette = plaquette
        self.value = value


class IntegrationUnstableError(CousinLabError):
    module = "cousin"


class OrientationError(CousinLabError):
    module = "cousin"


class PathError(InvalidInputError):
    module = "cousin"


class NotHopfFiberError(CousinLabError):
    module = "moduli"


class InadmissibleError(InvalidInputError):
    module = "moduli"


class GluingError(CousinLabError):
    module = "devmap"


class BoundaryQueryError(CousinLabError, ValueError):
    module = "devmap"


def _raising_module():
    """Short name of the first cousinlab module outside this file on the stack."""
    frame = sys._getframe(2)
    while frame is not None:
        name = frame.f_globals.get("__name__", "")
        if name != __name__:
            return name.rsplit(".", 1)[-1] if name.startswith("cousinlab.") else None
        frame = frame.f_back
    return None
