"""Shared test helpers."""

from labelforge.ingest import SectionKind
from labelforge.normalize import NormalizedSentence, SourceRef, Token

LUNGS = SectionKind("lungs")
TUBES = SectionKind("tubes_lines")


def sent(
    text: str,
    section: SectionKind = LUNGS,
    report_id: str = "r1",
    index: int = 0,
    copies: int = 1,
) -> NormalizedSentence:
    """Normalized sentence from a space-joined token string.

    A leading "!" marks a negated token, mirroring Token.parse.
    """
    tokens = tuple(Token.parse(w) for w in text.split())
    sources = tuple(
        SourceRef(report_id if copies == 1 else f"{report_id}.{k}", index)
        for k in range(copies)
    )
    return NormalizedSentence(tokens=tokens, section=section, sources=sources)
