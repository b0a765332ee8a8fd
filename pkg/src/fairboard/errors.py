"""Error hierarchy shared across the package.

Every error carries a machine-readable ``code`` that the HTTP layer maps
onto API error bodies, so exception classes here double as the wire-level
error vocabulary.
"""

from __future__ import annotations

from typing import Any


class FairboardError(Exception):
    """Base class; ``code`` is stable and machine-readable."""

    code = "INTERNAL"
    http_status = 400

    def __init__(self, message: str, **detail: Any):
        super().__init__(message)
        self.message = message
        self.detail = dict(detail)

    def to_payload(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail or None}


class CrcMismatch(FairboardError):
    code = "CRC_MISMATCH"

    def __init__(self, offset: int, path: str | None = None):
        super().__init__(f"frame checksum failed at byte offset {offset}", offset=offset, path=path)
        self.offset = offset


class MalformedVarint(FairboardError):
    code = "MALFORMED_VARINT"


class TruncatedField(FairboardError):
    code = "TRUNCATED_FIELD"


class InvalidK(FairboardError):
    code = "INVALID_K"


class InvalidWindow(FairboardError):
    code = "INVALID_WINDOW"


class UnknownColumn(FairboardError):
    code = "UNKNOWN_COLUMN"
    http_status = 404

    def __init__(self, run_id: str, tag: str):
        super().__init__(f"no series {tag!r} in run {run_id!r}", run_id=run_id, tag=tag)


class UnknownRun(FairboardError):
    code = "UNKNOWN_RUN"
    http_status = 404

    def __init__(self, run_id: str):
        super().__init__(f"no run named {run_id!r}", run_id=run_id)


class UnknownAttribute(FairboardError):
    code = "UNKNOWN_ATTRIBUTE"

    def __init__(self, axis: str):
        super().__init__(f"attribute {axis!r} not present in prediction log", axis=axis)


class WrongTask(FairboardError):
    code = "WRONG_TASK"


class DegenerateBox(FairboardError):
    code = "DEGENERATE_BOX"


class NoGroundTruth(FairboardError):
    code = "NO_GROUND_TRUTH"


class InsufficientGroups(FairboardError):
    code = "INSUFFICIENT_GROUPS"


class NoEpochData(FairboardError):
    code = "NO_EPOCH_DATA"


class UnknownGroup(FairboardError):
    code = "UNKNOWN_GROUP"

    def __init__(self, key: str):
        super().__init__(f"threshold map names unknown group {key!r}", group=key)


class InvalidRequest(FairboardError):
    code = "INVALID_REQUEST"


class LengthMismatch(FairboardError):
    code = "LENGTH_MISMATCH"


class NotADirectory(FairboardError):
    code = "NOT_A_DIRECTORY"


class InvalidSpec(FairboardError):
    code = "INVALID_SPEC"


class TruthMismatch(FairboardError):
    code = "MISMATCH"
