"""Exception types shared by every module."""


class ValidationError(ValueError):
    """Input failed a structural or numerical check.

    ``kind`` is a short machine-readable tag (``"not_unitary"``,
    ``"dimension"``, ...) surfaced by the CLI error object.
    """

    def __init__(self, message, kind="invalid"):
        super().__init__(message)
        self.kind = kind


class DimensionError(ValidationError):
    def __init__(self, message):
        super().__init__(message, kind="dimension")
