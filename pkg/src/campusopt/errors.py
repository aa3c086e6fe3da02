"""Exception types shared across the pipelines."""


class InfeasibleError(Exception):
    """An optimisation instance admits no feasible solution."""


class NumericalError(Exception):
    """A numerical routine failed to produce a trustworthy result."""


class TimetableConflict(ValueError):
    """Two meetings claim the same room at overlapping times."""
