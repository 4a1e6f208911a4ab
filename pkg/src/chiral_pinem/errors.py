"""Exception hierarchy shared by all modules."""


class ChiralPinemError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ChiralPinemError, ValueError):
    """An argument lies outside the domain where the model is defined."""


class PoleError(DomainError):
    """The SPP dispersion relation hits its pole (eps_metal + eps_dielectric = 0)."""


class ShapeError(ChiralPinemError, ValueError):
    """Fields defined on incompatible grids."""


class DegenerateError(DomainError):
    """A ratio with vanishing denominator was requested."""


class UnreliableLoopError(ChiralPinemError):
    """Field modulus drops below threshold on a phase-winding loop."""


class InsufficientFringesError(ChiralPinemError):
    """Fewer fringe maxima than needed to estimate a period."""


class ConvergenceError(ChiralPinemError):
    """A numerical procedure did not reach its stated tolerance."""


class ResolutionError(ConvergenceError):
    """Quadrature grid too coarse: refinement changed the result too much."""


class ConfigError(ChiralPinemError):
    """Invalid scenario configuration; ``key`` is the dotted config path."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
