# Core configuration module
from .config import RunConfig, merge_overrides, parse_override
from .exceptions import PatchSemError, VerificationError
from .logging import configure_logging

__all__ = [
    "RunConfig",
    "merge_overrides",
    "parse_override",
    "PatchSemError",
    "VerificationError",
    "configure_logging",
]
