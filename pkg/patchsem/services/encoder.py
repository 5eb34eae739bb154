"""
Patch Encoder - Turns parsed patches into fixed-length id sequences.

Token and line streams read removed lines first, then added lines. Context
lines are parsed but never encoded.
"""

import logging

from patchsem.schemas.config import IngestConfig
from patchsem.schemas.patch import PAD_ID, DiffHunks, EncodedPatch, PatchRecord, Vocab, VocabSet

from .diff_parser import parse_record_diff
from .tokenizer import tokenize_code, tokenize_lines
from .vocab import normalize_line

logger = logging.getLogger(__name__)


def _fit(ids: list[int], limit: int) -> tuple[int, ...]:
    """Truncate to `limit`, then right-pad with PAD."""
    ids = ids[:limit]
    return tuple(ids + [PAD_ID] * (limit - len(ids)))


def encode_patch(
    rec: PatchRecord,
    hunks: DiffHunks,
    token_vocab: Vocab,
    line_vocab: Vocab,
    desc_vocab: Vocab,
    limits: IngestConfig,
) -> EncodedPatch:
    """
    Encode one patch into the three id streams.

    Args:
        rec: The raw record (description and label are read from it)
        hunks: Parsed diff of `rec`
        token_vocab: Vocabulary of code tokens
        line_vocab: Vocabulary of whitespace-normalized code lines
        desc_vocab: Vocabulary of description words
        limits: nw / ns / nd budgets

    Returns:
        EncodedPatch whose non-PAD count per stream is min(limit, true length)
    """
    changed = hunks.changed_lines
    token_ids = token_vocab.lookup(tokenize_lines(changed))
    line_ids = line_vocab.lookup([normalize_line(line) for line in changed])
    desc_ids = desc_vocab.lookup(tokenize_code(rec.description))

    return EncodedPatch(
        id=rec.id,
        token_ids=_fit(token_ids, limits.token_limit),
        line_ids=_fit(line_ids, limits.line_limit),
        desc_ids=_fit(desc_ids, limits.description_limit),
        label=rec.label,
    )


def encode_records(
    records: list[PatchRecord], vocabs: VocabSet, limits: IngestConfig
) -> list[EncodedPatch]:
    """Parse and encode every record, in order."""
    encoded = []
    for record in records:
        hunks = parse_record_diff(record.diff_text)
        encoded.append(
            encode_patch(record, hunks, vocabs.token, vocabs.line, vocabs.description, limits)
        )
    logger.debug("Encoded %d records", len(encoded))
    return encoded
