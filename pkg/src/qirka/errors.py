"""Exception hierarchy used across the package."""


class QirkaError(Exception):
    """Base class; ``code`` is the machine-readable tag written to CSV summaries."""

    code = "error"


class DimensionError(QirkaError, ValueError):
    code = "invalid_dimension"


class ContractError(QirkaError, ValueError):
    code = "contract_violation"


class ConfigError(QirkaError, ValueError):
    code = "invalid_config"


class NearPoleError(QirkaError):
    code = "near_pole"


class ShiftCollisionError(QirkaError):
    code = "shift_collision"

    def __init__(self, msg, shift=None):
        super().__init__(msg)
        self.shift = shift


class InsufficientPoolError(QirkaError):
    code = "insufficient_pool"

    def __init__(self, msg, achieved=0):
        super().__init__(msg)
        self.achieved = achieved


class DegeneratePairingError(QirkaError):
    code = "degenerate_pairing"

    def __init__(self, msg, alpha_min=None):
        super().__init__(msg)
        self.alpha_min = alpha_min


class NonSymplecticBasisError(QirkaError):
    code = "non_symplectic_basis"


class InstabilityError(QirkaError):
    code = "instability"


class NumericalBreakdownError(QirkaError):
    code = "numerical_breakdown"


class ParseError(QirkaError, ValueError):
    code = "parse_error"

    def __init__(self, msg, line=None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line
