"""PatchSEM - multilevel semantic embedding classifier for security patch detection."""

__version__ = "0.1.0"
