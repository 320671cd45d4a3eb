"""Exception hierarchy shared by every layer; the CLI maps each class to an exit code."""

from __future__ import annotations


class ArtifactError(Exception):
    exit_code = 1


class ValidationError(ArtifactError, ValueError):
    """Malformed input, non-reflexive polytope, or inconsistent arguments."""

    exit_code = 2


class DegeneracyError(ArtifactError):
    """A coefficient function failed a non-degeneracy requirement."""

    exit_code = 3


class BudgetError(ArtifactError):
    """A computation would exceed a configured size limit."""

    exit_code = 4
