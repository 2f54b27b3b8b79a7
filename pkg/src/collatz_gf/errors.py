"""Exception hierarchy shared by all modules."""


class CollatzError(ValueError):
    """Base class for every error raised by this package."""


class MapValidationError(CollatzError):
    """A raw branch table does not define a valid Collatz map."""


class MissingResidueClass(MapValidationError):
    def __init__(self, r):
        self.r = tuple(r)
        super().__init__(f"no branch supplied for residue class r={list(self.r)}")


class ConditionViolated(MapValidationError):
    condition = "?"

    def __init__(self, r, component, value, d):
        self.r = tuple(r)
        self.component = component
        self.value = value
        label = self.condition.format(dim="1" if d == 1 else "2")
        self.label = label
        where = f"r={self.r[0]}" if d == 1 else f"r={list(self.r)}, component {component}"
        super().__init__(f"condition {label} violated at {where}: {self._describe(value)}")

    def _describe(self, value):
        raise NotImplementedError


class ConditionCaViolated(ConditionViolated):
    """lambda_r = A_r m is not a vector of positive integers."""

    condition = "C{dim}.a"

    def _describe(self, value):
        return f"lambda = {value} is not a positive integer"


class ConditionCbViolated(ConditionViolated):
    """mu_r = A_r r + b_r is not a vector of nonnegative integers."""

    condition = "C{dim}.b"

    def _describe(self, value):
        return f"mu = {value} is not a nonnegative integer"


class NonDiagonalBranch(MapValidationError):
    """Off-diagonal entries break n -> q*lambda + mu, on which every identity rests."""

    def __init__(self, r, i, j, value):
        self.r = tuple(r)
        super().__init__(
            f"branch r={list(self.r)} has off-diagonal entry A[{i}][{j}] = {value}; "
            "only diagonal branch matrices satisfy t(q*m + r) = q*lambda_r + mu_r"
        )


class TruncationTooLarge(CollatzError):
    pass


class OutOfBox(CollatzError, IndexError):
    pass


class ZeroArgument(CollatzError, ZeroDivisionError):
    pass


class PoleProximity(CollatzError):
    pass


class NonFiniteSample(CollatzError, ArithmeticError):
    pass


class DomainViolation(CollatzError):
    pass


class BudgetExceeded(CollatzError):
    pass


class BadResidue(CollatzError):
    pass


class SchemaError(CollatzError):
    pass
