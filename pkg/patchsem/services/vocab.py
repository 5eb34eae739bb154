"""
Vocabulary builder - Assigns dense ids to tokens, lines and description words.
"""

import logging
from collections import Counter
from collections.abc import Iterable

from patchsem.schemas.patch import PAD_TOKEN, UNK_TOKEN, PatchRecord, Vocab, VocabSet

from .diff_parser import parse_record_diff
from .tokenizer import tokenize_code, tokenize_lines

logger = logging.getLogger(__name__)

_SPECIALS = {PAD_TOKEN, UNK_TOKEN}


def build_vocab(corpus: Iterable[Iterable[str]], min_freq: int = 1) -> Vocab:
    """
    Build a vocabulary from token lists.

    Entries with frequency >= min_freq get ids from 2 upwards, by descending
    frequency with ties broken lexicographically. PAD=0 and UNK=1 are always
    present.
    """
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    counts: Counter[str] = Counter()
    for tokens in corpus:
        counts.update(tokens)
    kept = sorted(
        (token for token, freq in counts.items() if freq >= min_freq and token not in _SPECIALS),
        key=lambda token: (-counts[token], token),
    )
    return Vocab(id_to_token=[PAD_TOKEN, UNK_TOKEN, *kept], min_freq=min_freq)


def normalize_line(line: str) -> str:
    """Collapse runs of whitespace; the key of the line vocabulary."""
    return " ".join(line.split())


def fit_vocabs(records: list[PatchRecord], min_freq: int) -> VocabSet:
    """Build the token, line and description vocabularies from training records only."""
    token_corpus: list[list[str]] = []
    line_corpus: list[list[str]] = []
    desc_corpus: list[list[str]] = []
    for record in records:
        hunks = parse_record_diff(record.diff_text)
        changed = hunks.changed_lines
        token_corpus.append(tokenize_lines(changed))
        line_corpus.append([normalize_line(line) for line in changed])
        desc_corpus.append(tokenize_code(record.description))

    vocabs = VocabSet(
        token=build_vocab(token_corpus, min_freq),
        line=build_vocab(line_corpus, min_freq),
        description=build_vocab(desc_corpus, min_freq),
    )
    logger.info(
        "Vocabularies: %d tokens, %d lines, %d description words (min_freq=%d)",
        len(vocabs.token),
        len(vocabs.line),
        len(vocabs.description),
        min_freq,
    )
    return vocabs
