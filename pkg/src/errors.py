"""
Exception hierarchy for horolab.

Every error raised on purpose by the library derives from HorolabError and
from the builtin type a caller would naturally catch (ValueError or
RuntimeError), so both styles of handling work.
"""


class HorolabError(Exception):
    """Base class for all horolab errors."""


class ManifoldError(HorolabError, ValueError):
    """Invalid chart, metric, seam or spec file."""


class SourceError(HorolabError, ValueError):
    """Empty or out-of-window source set for a distance computation."""


class BackendError(HorolabError, ValueError):
    """The requested distance backend cannot run on this manifold."""


class StabilizationError(HorolabError, RuntimeError):
    """A limit of minimal segments did not stabilize inside the window."""


class SequenceError(HorolabError, ValueError):
    """A point or set sequence does not escape the window."""


class EmptySetError(HorolabError, ValueError):
    """A sublevel set or level band is empty inside the reliable region."""


class ScenarioError(HorolabError, ValueError):
    """Unknown scenario or unsupported scenario/verification pairing."""


class ExhaustionError(HorolabError, ValueError):
    """A compact exhaustion reaches outside the reliable region of a field."""
