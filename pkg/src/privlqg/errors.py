"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Two matrices of a model have incompatible shapes."""

    def __init__(self, first, second, detail=""):
        self.pair = (first, second)
        msg = f"dimension mismatch between {first} and {second}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class NonConvergence(RuntimeError):
    """A fixed-point iteration exhausted its budget (or blew up)."""

    def __init__(self, residual, iters, what="fixed-point iteration"):
        self.residual = residual
        self.iters = iters
        super().__init__(
            f"{what} did not converge after {iters} iterations "
            f"(residual {residual:.3e})"
        )


class DetectabilityViolation(ValueError):
    """(C, A^T) fails the PBH detectability test for a transmission period T."""

    def __init__(self, T):
        self.T = T
        super().__init__(f"(C, A^{T}) is not detectable for transmission period T={T}")


class MonotonicityViolation(RuntimeError):
    """The LQG loss is not non-decreasing over the search range, so bisection is unsafe."""
