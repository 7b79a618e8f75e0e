"""Parse templated report records into section-tagged sentences.

Input corpora are newline-delimited JSON records, one report per line:

    {"report_id": "r1", "image_ids": ["i1"], "sections": {"lungs": "..."}}

Section headings matching the report template are kept in template order;
anything else becomes an ``other`` section in record order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    DuplicateReportId,
    DuplicateSection,
    EmptyDocument,
    MalformedRecord,
    MissingReportId,
)

# Template headings in the order they appear on the report form.
TEMPLATE_SECTIONS = (
    "lungs",
    "heart_mediastinum",
    "bones_soft_tissue",
    "tubes_lines",
    "technical_assessment",
    "viewpoint",
)

_OTHER = "other"


@dataclass(frozen=True)
class SectionKind:
    """A report-template section, or ``other`` with the original heading."""

    kind: str
    other_name: str | None = None

    def __post_init__(self):
        if self.kind == _OTHER:
            if not self.other_name:
                raise ValueError("other section requires a non-empty name")
        elif self.kind in TEMPLATE_SECTIONS:
            if self.other_name is not None:
                raise ValueError("template section carries no custom name")
        else:
            raise ValueError(f"unknown section kind: {self.kind!r}")

    @classmethod
    def of(cls, heading: str) -> "SectionKind":
        """Map a raw heading to a template section or ``other``."""
        key = heading.strip().lower().replace(" ", "_").replace("-", "_")
        if key in TEMPLATE_SECTIONS:
            return cls(key)
        return cls(_OTHER, heading.strip())

    @property
    def canonical(self) -> str:
        if self.kind == _OTHER:
            return f"other:{self.other_name}"
        return self.kind

    @classmethod
    def from_canonical(cls, text: str) -> "SectionKind":
        if text.startswith("other:"):
            return cls(_OTHER, text[len("other:"):])
        return cls(text)

    @property
    def sort_key(self) -> tuple[int, str]:
        if self.kind == _OTHER:
            return (len(TEMPLATE_SECTIONS), self.other_name or "")
        return (TEMPLATE_SECTIONS.index(self.kind), "")


@dataclass(frozen=True)
class ReportDocument:
    report_id: str
    image_ids: tuple[str, ...]
    sections: tuple[tuple[SectionKind, str], ...]


@dataclass(frozen=True)
class RawSentence:
    text: str
    report_id: str
    section: SectionKind
    index_in_section: int


@dataclass(frozen=True)
class Corpus:
    documents: tuple[ReportDocument, ...] = ()
    sentences: tuple[RawSentence, ...] = field(default=())

    @classmethod
    def from_documents(cls, documents: Iterable[ReportDocument]) -> "Corpus":
        docs = tuple(documents)
        sentences = []
        for doc in docs:
            for section, text in doc.sections:
                for i, sent in enumerate(split_sentences(text)):
                    sentences.append(RawSentence(sent, doc.report_id, section, i))
        return cls(docs, tuple(sentences))

    def images_by_report(self) -> dict[str, tuple[str, ...]]:
        return {doc.report_id: doc.image_ids for doc in self.documents}


_RESERVED_KEYS = frozenset({"report_id", "id", "image_ids"})

# A run of sentence terminators counts as an end only before whitespace or at
# end of text, so the dot inside "5.5 cm" never splits.
_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")


def split_sentences(section_text: str) -> list[str]:
    """Split free text into sentences on terminator runs.

    Fragments without a single word character (blank or punctuation-only)
    are dropped.
    """
    out = []
    start = 0
    for m in _SENTENCE_END.finditer(section_text):
        frag = section_text[start : m.end()].strip()
        if any(c.isalnum() for c in frag):
            out.append(frag)
        start = m.end()
    tail = section_text[start:].strip()
    if any(c.isalnum() for c in tail):
        out.append(tail)
    return out


def parse_report(raw: Mapping) -> ReportDocument:
    """Build a ReportDocument from one record.

    Accepts either a nested ``sections`` map or flat section keys next to
    the id. Sections with only whitespace are dropped; a record with no
    usable section raises ``EmptyDocument``.
    """
    report_id = raw.get("report_id") or raw.get("id")
    if not report_id or not str(report_id).strip():
        raise MissingReportId("record has no report_id")
    report_id = str(report_id).strip()

    image_ids = tuple(str(x) for x in raw.get("image_ids", ()) or ())

    if isinstance(raw.get("sections"), Mapping):
        items = raw["sections"].items()
    else:
        items = [(k, v) for k, v in raw.items() if k not in _RESERVED_KEYS]

    known: list[tuple[SectionKind, str]] = []
    others: list[tuple[SectionKind, str]] = []
    seen: set[SectionKind] = set()
    for heading, text in items:
        if text is None:
            continue
        text = str(text)
        if not text.strip():
            continue
        kind = SectionKind.of(str(heading))
        if kind in seen:
            raise DuplicateSection(f"{report_id}: repeated section {kind.canonical}")
        seen.add(kind)
        (known if kind.kind != _OTHER else others).append((kind, text))

    if not known and not others:
        raise EmptyDocument(f"{report_id}: no non-blank section")

    known.sort(key=lambda pair: TEMPLATE_SECTIONS.index(pair[0].kind))
    return ReportDocument(report_id, image_ids, tuple(known + others))


def load_corpus(path) -> Corpus:
    """Read a newline-delimited report file and assemble a Corpus."""
    documents: list[ReportDocument] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedRecord(line_no, f"invalid JSON: {e}") from e
            if not isinstance(record, Mapping):
                raise MalformedRecord(line_no, "record is not an object")
            try:
                doc = parse_report(record)
            except (MissingReportId, EmptyDocument, DuplicateSection) as e:
                raise type(e)(f"line {line_no}: {e}") from e
            if doc.report_id in seen_ids:
                raise DuplicateReportId(f"line {line_no}: {doc.report_id!r}")
            seen_ids.add(doc.report_id)
            documents.append(doc)
    return Corpus.from_documents(documents)
