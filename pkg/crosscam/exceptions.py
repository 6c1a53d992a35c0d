"""Custom exceptions for crosscam-sim."""


class CrossCamError(Exception):
    """Base exception for all crosscam errors."""

    pass


class GeometryError(CrossCamError, ValueError):
    """Raised when a geometric value violates its invariants."""

    pass


class DegeneratePointError(GeometryError):
    """Raised when a point maps to the line at infinity."""

    def __init__(self, x: float, y: float, denominator: float):
        self.x = x
        self.y = y
        self.denominator = denominator
        super().__init__(
            f"Point ({x}, {y}) maps to the line at infinity "
            f"(projective denominator {denominator:.3e})"
        )


class SingularHomographyError(GeometryError):
    """Raised when a homography is not invertible."""

    def __init__(self, determinant: float):
        self.determinant = determinant
        super().__init__(f"Homography is singular (determinant {determinant:.3e})")


class LogIOError(CrossCamError):
    """Raised when a detection log or report cannot be read or written."""

    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")


class ParseError(CrossCamError):
    """Raised when a log record is not valid structured text."""

    def __init__(self, line: int, reason: str):
        self.line = line
        super().__init__(f"Line {line}: {reason}")


class SchemaError(CrossCamError):
    """Raised when a log record is well-formed but violates the schema."""

    def __init__(self, frame_idx, reason: str):
        self.frame_idx = frame_idx
        super().__init__(f"Frame {frame_idx}: {reason}")


class EmptyMatrixError(CrossCamError, ValueError):
    """Raised when an assignment problem has no rows or columns."""

    def __init__(self):
        super().__init__("Cost matrix must have at least one row and one column")


class MissingHomographyError(CrossCamError):
    """Raised when a collaborator has no mapping into supreme coordinates."""

    def __init__(self, camera_id: str):
        self.camera_id = camera_id
        super().__init__(f"No homography to supreme coordinates for camera '{camera_id}'")


class MissingInputError(CrossCamError):
    """Raised when supreme selection lacks the inputs its mode needs."""

    pass


class InvalidAgreementError(CrossCamError, ValueError):
    """Raised when a trust agreement value lies outside [0, 1]."""

    def __init__(self, agreement: float):
        self.agreement = agreement
        super().__init__(f"Agreement must lie in [0, 1], got {agreement}")


class OutOfRangeError(CrossCamError, ValueError):
    """Raised when a trust score lies outside [0, 1]."""

    def __init__(self, score: float):
        self.score = score
        super().__init__(f"Trust score must lie in [0, 1], got {score}")


class EmptyInputError(CrossCamError, ValueError):
    """Raised when a metric is asked for over no frames."""

    pass


class ScenarioError(CrossCamError):
    """Raised when a scenario is internally inconsistent."""

    pass


class ConfigurationError(CrossCamError):
    """Raised when there's an issue with a scenario configuration file."""

    def __init__(self, message: str, field_path: str = ""):
        self.field_path = field_path
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)
