"""Exception types shared across the package."""


class QjsimError(Exception):
    """Base class for all package-specific errors."""


class DegenerateInputError(QjsimError, ValueError):
    """Input carries no usable signal (all-zero intensities, empty subspace)."""


class ConstraintViolationError(QjsimError, ValueError):
    """Parameters violate a structural constraint (e.g. p31 + p32 > 1)."""


class UnsupportedInputError(QjsimError, ValueError):
    """Input is valid but outside what this code path supports."""


class FieldContractError(QjsimError, ValueError):
    """An intensity field returned negative or non-finite values."""


class PeakDegeneracyError(QjsimError, RuntimeError):
    """Fewer resolvable peaks than the model requires."""

    def __init__(self, n_found: int, n_required: int = 3):
        self.n_found = n_found
        self.n_required = n_required
        super().__init__(
            f"found {n_found} resolvable peak(s), need {n_required}"
        )


class FitConvergenceError(QjsimError, RuntimeError):
    """Iterative fit exhausted its iteration budget."""

    def __init__(self, residual_rms: float, n_iter: int):
        self.residual_rms = residual_rms
        self.n_iter = n_iter
        super().__init__(
            f"fit did not converge after {n_iter} evaluations "
            f"(last residual rms {residual_rms:.3e})"
        )


class PartialResultError(QjsimError, RuntimeError):
    """A reconstruction is missing one or more required fits."""

    def __init__(self, missing: tuple):
        self.missing = tuple(missing)
        super().__init__(f"missing fits for: {', '.join(map(str, missing))}")


class ConfigError(QjsimError, ValueError):
    """Scenario configuration is malformed; message carries line/field info."""


class SchemaError(QjsimError, ValueError):
    """CSV input does not match the expected schema."""
