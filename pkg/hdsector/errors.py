class HDSectorError(Exception):
    """
    Base class of all errors raised by hdsector.
    """


class TruncationMismatchError(HDSectorError, ValueError):
    def __init__(self, left, right):
        self.left = left
        self.right = right
        super().__init__(
            f"Series truncated at different orders: g^{left} and "
            f"g^{right}. Truncate both to a common order first."
        )


class MissingAssignmentError(HDSectorError, KeyError):
    def __init__(self, variable):
        self.variable = variable
        super().__init__(
            f"Jet variable {variable!r} is used but has no assignment"
        )


class PotentialError(HDSectorError, ValueError):
    pass


class JetOrderError(HDSectorError, ValueError):
    pass


class SeriesInversionError(HDSectorError, ArithmeticError):
    pass


class GaugeError(HDSectorError, RuntimeError):
    pass


class IntegrabilityError(HDSectorError, RuntimeError):
    pass


class IntegrationError(HDSectorError, RuntimeError):
    pass


class DomainError(HDSectorError, ValueError):
    pass


class ConfigError(HDSectorError, ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        lines = "\n".join(f"  - {p}" for p in self.problems)
        super().__init__(
            f"Invalid configuration ({len(self.problems)} "
            f"problem(s)):\n{lines}"
        )


class VerificationError(HDSectorError, RuntimeError):
    pass
