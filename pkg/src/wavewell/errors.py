"""Exception types shared across the package."""


class WavewellError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(WavewellError, ValueError):
    """Invalid domain, coefficient, state, or run-configuration data."""


class InapplicableError(WavewellError, RuntimeError):
    """An analysis operation was invoked outside its admissible regime.

    Examples: the auxiliary blow-up functional with a non-negative initial
    energy, a decay fit on a window where the energy is not positive, or a
    sharpness check on data that does not satisfy the required inequalities.
    """


class NonFiniteFunctionalError(WavewellError, FloatingPointError):
    """A quadrature accumulation produced a non-finite value.

    This signals that the state has left the range where the functionals are
    numerically meaningful (typically on the approach to blow-up).
    """
