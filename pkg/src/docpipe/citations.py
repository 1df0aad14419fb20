"""In-text citation removal for extracted document text.

Targets APA-style patterns: parenthetical author-year lists such as
"(Smith et al., 2020)" or "(e.g., Smith & Jones, 2019; Doe, 2021, p. 4)",
and narrative year groups such as "Smith (2020) showed". Non-citation
parentheticals are left alone. The pattern list is extensible so corpora
with other citation styles can add their own regexes.
"""

from __future__ import annotations

import re

_YEAR = r"(?:19|20)\d{2}[a-z]?"
_PAGE = r"(?:,\s*pp?\.?\s*\d+(?:\s*[-–]\s*\d+)?)?"
_YEARS = rf"{_YEAR}{_PAGE}(?:\s*,\s*{_YEAR}{_PAGE})*"
# One cited work: optional connective prefix, author name list, comma, year(s).
_PREFIX = r"(?:e\.g\.,?|i\.e\.,?|cf\.|see(?:\s+also)?|in|as\s+in)?\s*"
# One author or organization: capitalized words, possibly multi-word ("R Core Team").
_NAME = r"[A-Z][\w'’.-]*(?:\s+[A-Z][\w'’.-]*)*"
_AUTHORS = rf"{_NAME}(?:\s*(?:,|&|and|et\s+al\.?)\s*(?:{_NAME})?)*"
_WORK = rf"{_PREFIX}{_AUTHORS}\s*,\s*{_YEARS}"

DEFAULT_CITATION_PATTERNS: tuple[str, ...] = (
    # Parenthetical citation list: "(Smith et al., 2020; Doe, 2021)".
    rf"\s?\(\s*{_WORK}(?:\s*;\s*{_WORK})*\s*\)",
    # Narrative year group after an author mention: "Smith (2020) showed".
    rf"\s?\(\s*{_YEARS}(?:\s*;\s*{_YEARS})*\s*\)",
)


def compile_patterns(patterns: tuple[str, ...] = DEFAULT_CITATION_PATTERNS) -> list[re.Pattern[str]]:
    return [re.compile(p) for p in patterns]


_DEFAULT_COMPILED = compile_patterns()
_MULTISPACE = re.compile(r"[ \t]{2,}")


def strip_citations(text: str, patterns: list[re.Pattern[str]] | None = None) -> str:
    """Remove in-text citations; collapse doubled spaces. Never lengthens the text."""
    out = text
    for pattern in patterns if patterns is not None else _DEFAULT_COMPILED:
        out = pattern.sub("", out)
    return _MULTISPACE.sub(" ", out)
