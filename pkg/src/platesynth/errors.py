"""Exception hierarchy shared across the toolchain.

Every error raised on purpose by this package derives from PlatesynthError,
so callers can catch one base class at CLI boundaries.  Per-frame recoverable
failures in the rectification pipeline carry a machine-readable ``status``
string that is copied verbatim into the per-frame outcome records.
"""


class PlatesynthError(Exception):
    """Base class for all errors raised by this package."""


class PlateGrammarError(PlatesynthError, ValueError):
    """A plate string violates the registration grammar."""


class ConfigError(PlatesynthError, ValueError):
    """A scene configuration is invalid or a config file cannot be parsed."""


class TrajectoryError(PlatesynthError):
    """Trajectory sampling could not satisfy its constraints."""


class ProjectionError(PlatesynthError):
    """A point cannot be projected (at or behind the camera plane)."""


class AssetError(PlatesynthError):
    """A required asset (glyph atlas, texture) is missing or malformed."""


class AnnotationError(PlatesynthError, ValueError):
    """An annotation document is structurally invalid."""


class RectifyError(PlatesynthError):
    """Base class for per-frame rectification failures.

    ``status`` matches the status field of the per-frame outcome record.
    """

    status = "error"


class QuadNotFoundError(RectifyError):
    """No display quadrilateral could be located in a recorded frame."""

    status = "quad_not_found"


class IndexUndecodableError(RectifyError):
    """The frame-index marker strip failed its checksum or framing."""

    status = "index_undecodable"


class DegenerateHomographyError(RectifyError):
    """Point correspondences do not determine a usable homography."""

    status = "degenerate_homography"


class GeometryError(PlatesynthError, ValueError):
    """Degenerate input geometry (collinear or coincident points)."""


class SplitError(PlatesynthError, ValueError):
    """A dataset split request or manifest is invalid."""


class EvaluationError(PlatesynthError, ValueError):
    """An evaluation input (predictions file, ground truth) is invalid."""
