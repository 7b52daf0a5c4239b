"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    pass


class TruncationOverflow(ValueError):
    """The Fock cutoff needed to meet the tail bound exceeds the hard cap."""

    def __init__(self, required, hard_cap, what="mode"):
        self.required = int(required)
        self.hard_cap = int(hard_cap)
        super().__init__(
            f"{what} needs cutoff {self.required} but hard_cap is {self.hard_cap}; "
            f"raise hard_cap to at least {self.required} or loosen tail_epsilon"
        )


class KernelMismatch(ValueError):
    pass


class AlreadyCold(ArithmeticError):
    """All mean occupations are zero, so no optimal interval exists."""


class ExpansionDomainError(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


class ConfigError(ValueError):
    pass
