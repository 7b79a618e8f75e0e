"""Exception types shared across the labelforge pipeline."""


class LabelForgeError(Exception):
    """Base class for all labelforge errors."""


# --- ingest ---------------------------------------------------------------


class IngestError(LabelForgeError):
    pass


class MissingReportId(IngestError):
    pass


class EmptyDocument(IngestError):
    """Report record had no non-blank section text."""


class DuplicateSection(IngestError):
    """Two headings of one record mapped to the same section kind."""


class MalformedRecord(IngestError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateReportId(IngestError):
    pass


# --- normalize ------------------------------------------------------------


class EmptySentenceAfterNormalization(LabelForgeError):
    """Every token of a sentence was removed; caller drops the sentence."""


# --- tuning ---------------------------------------------------------------


class TuningError(LabelForgeError):
    pass


class EmptyPairSet(TuningError):
    pass


class EmptyGrid(TuningError):
    pass


class NoFeasiblePoint(TuningError):
    """No grid point met the precision/recall constraints."""


# --- labelset -------------------------------------------------------------


class LabelSetError(LabelForgeError):
    pass


class UnknownClusterId(LabelSetError):
    pass


class UnknownGroupId(LabelSetError):
    pass


class ConflictingDecision(LabelSetError):
    """Two decisions claim the same identity and order cannot resolve them."""


# --- storage / service ----------------------------------------------------


class SnapshotFormatError(LabelForgeError):
    """Snapshot file has a wrong magic header or unsupported version."""


class CorruptLog(LabelForgeError):
    """Decision log has an unreadable record before its end.

    ``last_valid_offset`` is the byte offset just past the last record that
    replayed cleanly.
    """

    def __init__(self, message: str, last_valid_offset: int):
        super().__init__(f"{message} (last valid offset: {last_valid_offset})")
        self.last_valid_offset = last_valid_offset


class BindError(LabelForgeError):
    pass


class StaleVersion(LabelForgeError):
    """A mutation named a state_version the service has moved past."""

    def __init__(self, expected: int, actual: int):
        super().__init__(
            f"expected state_version {expected}, service is at {actual}"
        )
        self.expected = expected
        self.actual = actual
