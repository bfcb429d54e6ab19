"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A scalar or table parameter violates its documented range."""


class InputError(ValueError):
    """Malformed input data; message carries a file/row locator when known."""


class ConfigError(ValueError):
    """Invalid run configuration (bad paths, schema mismatch, bad ranges)."""


class ScenarioError(RuntimeError):
    """A scenario could not be solved; carries solver diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
