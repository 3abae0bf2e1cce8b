"""Exception hierarchy.

Errors are split into validation errors (bad input data, raised before any
construction starts) and construction errors (a build step could not satisfy
its own invariants).  The CLI maps the former to exit code 2 and the latter
to exit code 3.
"""


class HolderCurvesError(Exception):
    """Base class for all library errors."""


class ValidationError(HolderCurvesError):
    """Input data failed a precondition check."""


class ConstructionError(HolderCurvesError):
    """A construction step failed part-way through."""


# --- validation ---

class EmptyAfterNormalize(ValidationError):
    """No maps left after dropping non-contractions."""


class NotSelfSimilar(ValidationError):
    """A map's linear part is not a scalar multiple of an isometry."""


class SeparationViolated(ValidationError):
    """The net separation inequality failed for the chosen radius."""


class BranchingInput(ValidationError):
    """A construction that needs a non-branching system got a branching one."""


class AlphaTooSmall(ValidationError):
    """Requested Holder exponent is at or below the similarity dimension."""


class ApertureTooLarge(ValidationError):
    """A diamond aperture is outside (0, 1/2)."""


class DiamondOverlap(ValidationError):
    """Two diamonds overlap beyond a shared segment endpoint."""


class SegmentEscapes(ValidationError):
    """A generator segment leaves the interior of the base diamond."""


class DisconnectedCarpet(ValidationError):
    """Carpet fails the connectivity prechecks needed for a tour."""


class NoBranching(ValidationError):
    """A tour construction needs a branching system; use the arc pipeline."""


# --- construction ---

class CutTooFine(ConstructionError):
    """A word cut would exceed the word budget."""


class NoAncestor(ConstructionError):
    """A word has no ancestor in the given cut."""


class NoChain(ConstructionError):
    """No chain of adjacent cylinders joins the two points."""


class BranchExhausted(ConstructionError):
    """No untraced branch was available where one was required."""


class LiftFailed(ConstructionError):
    """No adjacent descendant pair realizes a coarse tree edge one level down
    (usually a sign the adjacency oracle is under-resolved)."""


class ScalesBelowResolution(ConstructionError):
    """Box-counting scales fell below the certified cover resolution."""


class InsufficientDepths(ValidationError):
    """An exponent scan needs at least three depths."""
