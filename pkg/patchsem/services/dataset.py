"""
Dataset I/O - JSON Lines patch corpora.

One object per line with `id`, `diff`, `message` and `label` (0/1);
unknown fields are ignored and blank lines are skipped.
"""

import json
import logging
from pathlib import Path

from pydantic import ValidationError
from sklearn.model_selection import train_test_split

from patchsem.core.exceptions import PatchSemError
from patchsem.schemas.patch import PatchRecord

logger = logging.getLogger(__name__)


class DatasetIOError(PatchSemError):
    """Raised when a dataset file cannot be read or written."""

    pass


class SchemaError(PatchSemError):
    """Raised when a dataset line does not match the record schema."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def load_dataset(path: Path | str) -> list[PatchRecord]:
    """
    Read a JSONL dataset.

    Returns:
        Records in file order

    Raises:
        DatasetIOError: If the file cannot be read
        SchemaError: On invalid JSON, a missing field or a non-binary label
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise DatasetIOError(f"Dataset {path} is not valid UTF-8: {e}") from e
    except OSError as e:
        raise DatasetIOError(f"Cannot read dataset {path}: {e}") from e

    records: list[PatchRecord] = []
    # Records end at "\n" only; U+2028, U+0085 and friends may appear raw inside strings
    for line_number, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON ({e.msg})", line_number) from e
        if not isinstance(payload, dict):
            raise SchemaError("expected a JSON object", line_number)
        try:
            records.append(PatchRecord.model_validate(payload))
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or 'record'}: {err['msg']}" for err in e.errors()
            )
            raise SchemaError(problems, line_number) from e

    logger.info("Loaded %d records from %s", len(records), path)
    return records


def save_dataset(records: list[PatchRecord], path: Path | str) -> None:
    """Write records as JSONL, one per line, in the same schema load_dataset reads."""
    path = Path(path)
    lines = [json.dumps(record.to_json_record(), ensure_ascii=False) for record in records]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    except OSError as e:
        raise DatasetIOError(f"Cannot write dataset {path}: {e}") from e
    logger.info("Wrote %d records to %s", len(records), path)


def label_counts(records: list[PatchRecord]) -> dict[int, int]:
    """Number of records per label."""
    counts = {0: 0, 1: 0}
    for record in records:
        counts[record.label] += 1
    return counts


def split_dataset(
    records: list[PatchRecord], valid_fraction: float, seed: int = 0
) -> tuple[list[PatchRecord], list[PatchRecord]]:
    """
    Seeded split into (train, valid).

    Stratified by label when every class has at least two records;
    otherwise a plain seeded shuffle split. The relative order of the
    records inside each part is the file order.
    """
    if not 0.0 <= valid_fraction < 1.0:
        raise ValueError("valid_fraction must lie in [0, 1)")
    if valid_fraction == 0.0 or len(records) < 2:
        return list(records), []

    indices = list(range(len(records)))
    labels = [record.label for record in records]
    counts = label_counts(records)
    stratify = labels if min(counts.values()) >= 2 else None
    try:
        train_idx, valid_idx = train_test_split(
            indices, test_size=valid_fraction, random_state=seed, stratify=stratify
        )
    except ValueError:
        # Too few records for a stratified split of this size
        train_idx, valid_idx = train_test_split(indices, test_size=valid_fraction, random_state=seed)

    train = [records[i] for i in sorted(train_idx)]
    valid = [records[i] for i in sorted(valid_idx)]
    logger.info("Split %d records into %d train / %d valid", len(records), len(train), len(valid))
    return train, valid
