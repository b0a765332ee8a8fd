"""Length-prefixed record framing for event files.

Frame layout, bit-exact:

    [length: u64 LE][masked_crc32c(length bytes): u32 LE]
    [payload: length bytes][masked_crc32c(payload): u32 LE]

with masked_crc(c) = ((c >> 15) | (c << 17)) + 0xa282ead8 mod 2**32 over
CRC32C. The framing has no sync markers, so a failed checksum fails the
whole file rather than attempting a resync; an incomplete trailing frame
(live append in progress) is a clean stop and the reader can resume later
from the last good offset.
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

from . import kernels
from .errors import CrcMismatch

_LEN_STRUCT = struct.Struct("<QI")
_CRC_STRUCT = struct.Struct("<I")
_HEADER_SIZE = 12
_MASK_DELTA = 0xA282EAD8


@dataclass(frozen=True)
class RecordFrame:
    payload: bytes
    offset: int

    @property
    def end_offset(self) -> int:
        return self.offset + _HEADER_SIZE + len(self.payload) + 4


def masked_crc32c(data: bytes) -> int:
    crc = kernels.crc32c(data)
    return (((crc >> 15) | (crc << 17)) + _MASK_DELTA) & 0xFFFFFFFF


def frame_bytes(payload: bytes) -> bytes:
    header = struct.pack("<Q", len(payload))
    return b"".join(
        (
            header,
            _CRC_STRUCT.pack(masked_crc32c(header)),
            payload,
            _CRC_STRUCT.pack(masked_crc32c(payload)),
        )
    )


def write_frames(target: str | os.PathLike | BinaryIO, payloads: Iterable[bytes], append: bool = False) -> None:
    if hasattr(target, "write"):
        for p in payloads:
            target.write(frame_bytes(p))
        return
    mode = "ab" if append else "wb"
    with open(target, mode) as fh:
        for p in payloads:
            fh.write(frame_bytes(p))


def read_record_stream(source: str | os.PathLike | BinaryIO, start_offset: int = 0) -> Iterator[RecordFrame]:
    """Yield complete frames in file order, starting at ``start_offset``.

    Stops cleanly on EOF or an incomplete trailing frame. Raises
    CrcMismatch (with the frame's byte offset) on a failed checksum; no
    resynchronization is attempted past that point.
    """
    if hasattr(source, "read"):
        yield from _read_frames(source, start_offset)
    else:
        with open(source, "rb") as fh:
            yield from _read_frames(fh, start_offset)


def _read_frames(fh: BinaryIO, start_offset: int) -> Iterator[RecordFrame]:
    fh.seek(start_offset)
    offset = start_offset
    while True:
        header = fh.read(_HEADER_SIZE)
        if len(header) < _HEADER_SIZE:
            return  # EOF or truncated trailing frame
        length, length_crc = _LEN_STRUCT.unpack(header)
        if masked_crc32c(header[:8]) != length_crc:
            raise CrcMismatch(offset)
        body = fh.read(length + 4)
        if len(body) < length + 4:
            return  # payload still being appended
        payload = body[:length]
        (payload_crc,) = _CRC_STRUCT.unpack(body[length:])
        if masked_crc32c(payload) != payload_crc:
            raise CrcMismatch(offset)
        yield RecordFrame(payload, offset)
        offset += _HEADER_SIZE + length + 4


def scan_frames(path: str | os.PathLike, start_offset: int = 0) -> tuple[list[RecordFrame], int]:
    """Read all complete frames from ``start_offset``; return them with the
    offset just past the last good frame (the resume point)."""
    frames: list[RecordFrame] = []
    end = start_offset
    for frame in read_record_stream(Path(path), start_offset):
        frames.append(frame)
        end = frame.end_offset
    return frames, end


def iter_payloads(data: bytes) -> Iterator[bytes]:
    """Frames over an in-memory buffer, for tests and small files."""
    for frame in _read_frames(io.BytesIO(data), 0):
        yield frame.payload
