"""Deterministic tokenization used for budgets, windowing, and the mock embedder.

The default profile counts whitespace-delimited words, with each standalone
run of punctuation counted as one extra token ("hello, world!" is four
tokens: hello / , / world / !). All token budgets in the package are
expressed in tokens of the active profile, so a provider-specific
tokenizer can be plugged in behind the same interface.
"""

from __future__ import annotations

import re
from typing import Callable, Sequence

# Word runs (letters, digits, underscore) and punctuation runs are separate
# tokens; whitespace only separates.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]+")


class TokenizerProfile:
    """Named tokenizer with span-level access.

    ``token_spans`` returns (start, end) character offsets so callers can
    split text at token boundaries without losing the separator characters
    in between (cuts happen at token starts, keeping slices concatenable
    back to the original string).
    """

    def __init__(self, name: str = "default",
                 span_fn: Callable[[str], list[tuple[int, int]]] | None = None):
        self.name = name
        self._span_fn = span_fn

    def token_spans(self, text: str) -> list[tuple[int, int]]:
        if self._span_fn is not None:
            return self._span_fn(text)
        return [m.span() for m in _TOKEN_RE.finditer(text)]

    def tokens(self, text: str) -> list[str]:
        return [text[a:b] for a, b in self.token_spans(text)]

    def count(self, text: str) -> int:
        return len(self.token_spans(text))

    def split_at(self, text: str, block_tokens: int) -> list[str]:
        """Cut text into consecutive pieces of at most ``block_tokens`` tokens.

        Cuts are placed at token start offsets, so ``"".join(pieces) == text``
        and each piece tokenizes to exactly its block of the original token
        sequence.
        """
        if block_tokens < 1:
            raise ValueError("block_tokens must be >= 1")
        spans = self.token_spans(text)
        if len(spans) <= block_tokens:
            return [text] if text else []
        cuts = [spans[i][0] for i in range(block_tokens, len(spans), block_tokens)]
        pieces = []
        prev = 0
        for cut in cuts:
            pieces.append(text[prev:cut])
            prev = cut
        pieces.append(text[prev:])
        return pieces


DEFAULT_PROFILE = TokenizerProfile()

_PROFILES: dict[str, TokenizerProfile] = {"default": DEFAULT_PROFILE}


def register_profile(profile: TokenizerProfile) -> None:
    _PROFILES[profile.name] = profile


def get_profile(name: str = "default") -> TokenizerProfile:
    try:
        return _PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown tokenizer profile {name!r}") from None


def count_tokens(text: str, profile: TokenizerProfile | None = None) -> int:
    """Token count of ``text`` under the given (or default) profile."""
    return (profile or DEFAULT_PROFILE).count(text)
