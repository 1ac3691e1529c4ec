"""Exception types raised across the package."""


class RabiGatesError(Exception):
    pass


class ExcessLeakage(RabiGatesError):
    """Population in the truncation guard band exceeds the configured tolerance."""

    def __init__(self, leakage, tol, what="state"):
        self.leakage = float(leakage)
        self.tol = float(tol)
        super().__init__(f"{what} leaks {self.leakage:.3e} into the guard band (tolerance {self.tol:.1e})")


class ExcessLeakageWarning(UserWarning):
    pass


class NotHermitian(RabiGatesError):
    pass


class NonCommuting(RabiGatesError):
    pass


class StrengthOutOfRange(RabiGatesError):
    pass


class DegenerateResidual(RabiGatesError):
    """The state has no weight outside the reference state, so the complement is undefined."""


class NoImprovement(RabiGatesError):
    """The optimiser found no interior optimum; ``zeta`` holds its best point anyway."""

    def __init__(self, zeta, best, edge):
        self.zeta = float(zeta)
        self.best = float(best)
        self.edge = float(edge)
        super().__init__(f"search is flat: best {best:.8f} at zeta={zeta:.5f}, window edges reach {edge:.8f}")


class ConfigError(RabiGatesError):
    pass
