"""Exception types shared across the package."""


class EstimateOverflowError(ArithmeticError):
    """A path weight exp(-action) would overflow; the estimate is invalid.

    Carries the index of the first offending path so the run can be
    reproduced and inspected.
    """

    def __init__(self, path_index: int, log_weight: float):
        self.path_index = path_index
        self.log_weight = log_weight
        super().__init__(
            f"path {path_index}: log weight {log_weight:.3g} exceeds the "
            f"overflow guard; the potential is too negative along this path"
        )


class HypothesisError(ValueError):
    """A theorem hypothesis failed its pre-check; no verdict is possible."""


class TooLargeError(ValueError):
    """Requested dense matrix exceeds the configured size cap."""
