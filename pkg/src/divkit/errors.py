"""Exception types shared across the toolkit.

Plain ``ValueError`` is raised for mathematical domain violations (empty
distributions, negative orders, zero variance).  The subclasses below let
callers, in particular the CLI, distinguish bad configuration from bad
input data when mapping failures to exit codes.
"""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration (schedules, orders, flags)."""


class InputDataError(ValueError):
    """Malformed or missing input data (corpus files, treebanks, tables)."""
