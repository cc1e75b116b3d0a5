"""Trade-off search between atmospheric demisability and debris-impact
survivability of preliminary spacecraft configurations."""

__version__ = "0.1.0"
