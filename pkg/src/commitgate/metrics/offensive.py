"""Pluggable offensive-comment scoring (M18).

A scorer is any pure function mapping a comment string to 0 or 1. The
default is a lexicon matcher over a shipped term list: case-insensitive,
word-boundary anchored, multi-word entries matched as phrases.
"""

from __future__ import annotations

import logging
import re
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

log = logging.getLogger(__name__)

Scorer = Callable[[str], int]


class LexiconScorer:
    """Word-boundary lexicon matcher; 1 iff any term occurs."""

    def __init__(self, terms: Iterable[str] | None = None, path: Path | None = None):
        if terms is None:
            if path is not None:
                text = Path(path).read_text(encoding="utf-8")
            else:
                text = (
                    resources.files("commitgate.data")
                    .joinpath("offensive_lexicon.txt")
                    .read_text(encoding="utf-8")
                )
            terms = [
                line.strip()
                for line in text.splitlines()
                if line.strip() and not line.lstrip().startswith("#")
            ]
        self.terms = tuple(sorted({t.casefold() for t in terms}))
        if not self.terms:
            raise ValueError("empty offensive lexicon")
        alternatives = "|".join(re.escape(t).replace(r"\ ", r"\s+") for t in self.terms)
        self._pattern = re.compile(rf"\b(?:{alternatives})\b", re.IGNORECASE)

    def __call__(self, comment: str) -> int:
        return 1 if self._pattern.search(comment) else 0


def score_offensive(comments: Sequence[str], scorer: Scorer | None = None) -> int:
    """Number of comments the scorer flags; a scorer failure scores 0."""
    scorer = scorer if scorer is not None else LexiconScorer()
    count = 0
    for comment in comments:
        try:
            count += 1 if scorer(comment) else 0
        except Exception:
            log.exception("offensive scorer failed on a comment; scored 0")
    return count
