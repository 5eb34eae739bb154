"""
Diff Parser - Splits unified-diff text into added, removed and context lines.

Hunk bodies are delimited by the line counts of their `@@ -a,b +c,d @@`
headers, so code lines that happen to start with `---` or `+++` are still
classified correctly. Text without any hunk marker is read line by line
using the marker prefixes alone.
"""

import re

from patchsem.core.exceptions import PatchSemError
from patchsem.schemas.patch import DiffHunks

_HUNK_RE = re.compile(r"^@@ -\d+(?:,(\d+))? \+\d+(?:,(\d+))? @@")
_HEADER_PREFIXES = ("+++", "---", "@@", "diff", "index")
_MAIL_HEADERS = (
    "From ",
    "From:",
    "Date:",
    "Author:",
    "AuthorDate:",
    "Commit:",
    "CommitDate:",
    "Merge:",
    "commit ",
    "MIME-Version:",
    "Content-Type:",
    "Content-Transfer-Encoding:",
)
_SUBJECT_RE = re.compile(r"^Subject:\s*(?:\[[^\]]*\]\s*)?")


class MalformedDiff(PatchSemError):
    """Raised when text has neither a hunk marker nor any +/- line."""

    pass


class _Collector:
    """Accumulates classified lines for one parse."""

    def __init__(self):
        self.added: list[str] = []
        self.removed: list[str] = []
        self.context: list[str] = []

    def take(self, line: str) -> str | None:
        """Classify one body line; returns the marker or None if not a body line."""
        if line.startswith("+"):
            self.added.append(line[1:])
            return "+"
        if line.startswith("-"):
            self.removed.append(line[1:])
            return "-"
        if line.startswith(" ") or line == "":
            # Some tools strip the single space of empty context lines
            self.context.append(line[1:])
            return " "
        return None

    def result(self) -> DiffHunks:
        return DiffHunks(
            added_lines=self.added,
            removed_lines=self.removed,
            context_lines=self.context,
        )


def parse_unified_diff(diff_text: str) -> DiffHunks:
    """
    Classify the body lines of a unified diff.

    Args:
        diff_text: Unified-diff text; file headers are optional

    Returns:
        DiffHunks with markers stripped and order preserved

    Raises:
        MalformedDiff: If no `@@` marker is found and no line starts with + or -
    """
    lines = (diff_text or "").splitlines()
    has_hunk = any(line.startswith("@@") for line in lines)
    if not has_hunk:
        if not any(line.startswith(("+", "-")) for line in lines):
            raise MalformedDiff("no hunk marker and no +/- lines found")
        return _parse_headerless(lines)
    return _parse_hunks(lines)


def _parse_headerless(lines: list[str]) -> DiffHunks:
    collector = _Collector()
    for line in lines:
        if line.startswith(_HEADER_PREFIXES) or line.startswith("\\") or line == "":
            continue
        collector.take(line)
    return collector.result()


def _parse_hunks(lines: list[str]) -> DiffHunks:
    collector = _Collector()
    old_left = new_left = 0
    # Hunk whose header carried no usable counts: runs until the next header line
    open_hunk = False

    for line in lines:
        if old_left > 0 or new_left > 0:
            if line.startswith("\\"):
                continue
            marker = collector.take(line)
            if marker == "+":
                new_left = max(0, new_left - 1)
                continue
            if marker == "-":
                old_left = max(0, old_left - 1)
                continue
            if marker == " ":
                old_left = max(0, old_left - 1)
                new_left = max(0, new_left - 1)
                continue
            # Counts overshot the real hunk: treat the line as a header below
            old_left = new_left = 0

        if line.startswith("@@"):
            match = _HUNK_RE.match(line)
            if match:
                old_left = int(match.group(1)) if match.group(1) is not None else 1
                new_left = int(match.group(2)) if match.group(2) is not None else 1
                open_hunk = False
            else:
                open_hunk = True
            continue

        if open_hunk:
            if line.startswith(_HEADER_PREFIXES):
                open_hunk = False
                continue
            if line.startswith("\\") or line == "":
                continue
            collector.take(line)

    return collector.result()


def extract_commit_message(patch_text: str) -> str:
    """
    Pull the commit message out of `git format-patch` / `git show` output.

    Mail and commit headers are dropped, the `[PATCH]` prefix is removed from
    the subject, and reading stops at the diffstat separator or the first
    diff. A bare diff yields "".
    """
    message: list[str] = []
    in_subject = False
    for line in (patch_text or "").splitlines():
        if line.startswith(("diff --git", "Index: ")) or line.rstrip() == "---":
            break
        if line.startswith(("--- ", "+++ ", "@@")):
            break
        if in_subject and line[:1] in (" ", "\t") and line.strip():
            # Folded subject header
            message[-1] = f"{message[-1]} {line.strip()}"
            continue
        in_subject = False
        if line.startswith(_MAIL_HEADERS):
            continue
        if line.startswith("Subject:"):
            message.append(_SUBJECT_RE.sub("", line).rstrip())
            in_subject = True
            continue
        # git show indents the message body by four spaces
        message.append(line[4:] if line.startswith("    ") else line)
    return "\n".join(message).strip()


def parse_record_diff(diff_text: str) -> DiffHunks:
    """parse_unified_diff, except that blank text yields empty hunks instead of an error."""
    if not (diff_text or "").strip():
        return DiffHunks()
    return parse_unified_diff(diff_text)
