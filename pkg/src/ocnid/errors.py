"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class ConfigError(ValueError):
    """A run configuration is inconsistent (bad distribution spec, mismatched supports)."""


class DataError(ValueError):
    """Input data are malformed or non-finite."""


class InvariantError(RuntimeError):
    """An internal invariant (e.g. the lower/upper sandwich) was violated."""


class NonCoalescenceError(RuntimeError):
    """The bounding processes failed to meet the stopping rule before ``max_n``."""

    def __init__(self, max_n, gap):
        self.max_n = max_n
        self.gap = gap
        super().__init__(f"no coalescence within n={max_n} (last gap {gap:.6g})")


class DegenerateEvidenceError(ArithmeticError):
    """Coincident eigenvalue estimates make the Laplace determinant vanish."""
