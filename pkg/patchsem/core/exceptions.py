"""
Exception base classes shared by every PatchSEM service.

Each service declares its own concrete errors next to the code that raises
them; the CLI only needs the base class and its exit code.
"""


class PatchSemError(Exception):
    """Base exception for PatchSEM errors (input or data problems)."""

    exit_code: int = 1


class VerificationError(PatchSemError):
    """Base exception for failed verification gates."""

    exit_code: int = 2
