"""
Code Tokenizer - Splits code lines and commit messages into word tokens.

Rules, applied in order:
1. split on whitespace
2. every punctuation / operator character becomes its own token
3. identifiers split on snake_case and camelCase boundaries
4. everything lowercased; empty tokens dropped

The rules are language-agnostic; there is no real lexer behind them.
"""

import re

# A word run or a single non-word, non-space character
_PIECE_RE = re.compile(r"\w+|[^\w\s]")
# Acronyms, Capitalized / lowercase words, digit runs, other letters
_SUBWORD_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z]?[a-z]+|\d+|[^\W\d_]+")


class CodeTokenizer:
    """
    Deterministic tokenizer for C-like code and free text.

    Usage:
        tokenizer = CodeTokenizer()
        tokenizer.tokenize("int fooBar=0;")  # ["int", "foo", "bar", "=", "0", ";"]
    """

    def __init__(self, lowercase: bool = True, split_identifiers: bool = True):
        """
        Initialize the tokenizer.

        Args:
            lowercase: Lowercase every token (rule 4)
            split_identifiers: Apply the snake/camel split (rule 3)
        """
        self.lowercase = lowercase
        self.split_identifiers = split_identifiers

    def _split_word(self, word: str) -> list[str]:
        if not self.split_identifiers:
            return [word]
        parts: list[str] = []
        for chunk in word.split("_"):
            parts.extend(_SUBWORD_RE.findall(chunk))
        return parts

    def tokenize(self, line: str) -> list[str]:
        """Tokenize one line (or any text; newlines count as whitespace)."""
        tokens: list[str] = []
        for piece in _PIECE_RE.findall(line or ""):
            if piece[0].isalnum() or piece[0] == "_":
                tokens.extend(self._split_word(piece))
            else:
                tokens.append(piece)
        if self.lowercase:
            tokens = [t.lower() for t in tokens]
        return [t for t in tokens if t]

    def tokenize_lines(self, lines: list[str]) -> list[str]:
        """Concatenated tokens of several lines, in order."""
        tokens: list[str] = []
        for line in lines:
            tokens.extend(self.tokenize(line))
        return tokens


# Default tokenizer instance
default_tokenizer = CodeTokenizer()


def tokenize_code(line: str) -> list[str]:
    """Convenience function using default tokenizer."""
    return default_tokenizer.tokenize(line)


def tokenize_lines(lines: list[str]) -> list[str]:
    """Convenience function using default tokenizer."""
    return default_tokenizer.tokenize_lines(lines)
