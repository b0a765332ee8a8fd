"""Minimal protobuf wire-format codec for scalar event payloads.

Supported subset (all other fields are skipped by wire type):

    Event:   1 wall_time (fixed64 double), 2 step (varint int64),
             5 summary (length-delimited)
    Summary: 1 value (repeated, length-delimited)
    Value:   1 tag (length-delimited UTF-8), 2 simple_value (fixed32 float)

The decoder is deliberately dependency-free; it is paired in the test
suite with an independently written reference encoder.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import MalformedVarint, TruncatedField

_WIRE_VARINT = 0
_WIRE_I64 = 1
_WIRE_LEN = 2
_WIRE_I32 = 5


@dataclass(frozen=True)
class ScalarEvent:
    wall_time: float
    step: int
    tag: str
    value: float


def read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    for _ in range(10):  # an int64 varint never exceeds 10 bytes
        if pos >= len(buf):
            raise MalformedVarint(f"varint continues past end of payload at byte {pos}")
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
    raise MalformedVarint(f"varint longer than 10 bytes at byte {pos - 10}")


def _to_int64(value: int) -> int:
    value &= (1 << 64) - 1
    return value - (1 << 64) if value >= 1 << 63 else value


def _skip_field(buf: bytes, pos: int, wire_type: int) -> int:
    if wire_type == _WIRE_VARINT:
        _, pos = read_varint(buf, pos)
        return pos
    if wire_type == _WIRE_I64:
        if pos + 8 > len(buf):
            raise TruncatedField(f"fixed64 field truncated at byte {pos}")
        return pos + 8
    if wire_type == _WIRE_I32:
        if pos + 4 > len(buf):
            raise TruncatedField(f"fixed32 field truncated at byte {pos}")
        return pos + 4
    if wire_type == _WIRE_LEN:
        length, pos = read_varint(buf, pos)
        if pos + length > len(buf):
            raise TruncatedField(f"length-delimited field truncated at byte {pos}")
        return pos + length
    raise TruncatedField(f"unsupported wire type {wire_type} at byte {pos}")


def _read_len(buf: bytes, pos: int) -> tuple[bytes, int]:
    length, pos = read_varint(buf, pos)
    if pos + length > len(buf):
        raise TruncatedField(f"length-delimited field truncated at byte {pos}")
    return buf[pos : pos + length], pos + length


def decode_scalar_event(payload: bytes) -> list[ScalarEvent]:
    """Decode one framed event payload into its scalar summaries.

    Events without scalar summaries (file-version records, graph defs)
    decode to an empty list. Raises MalformedVarint / TruncatedField when
    the payload violates wire-format framing.
    """
    wall_time = 0.0
    step = 0
    scalars: list[tuple[str, float]] = []
    pos = 0
    n = len(payload)
    while pos < n:
        key, pos = read_varint(payload, pos)
        field, wire_type = key >> 3, key & 0x7
        if field == 1 and wire_type == _WIRE_I64:
            if pos + 8 > n:
                raise TruncatedField(f"wall_time truncated at byte {pos}")
            (wall_time,) = struct.unpack_from("<d", payload, pos)
            pos += 8
        elif field == 2 and wire_type == _WIRE_VARINT:
            raw, pos = read_varint(payload, pos)
            step = _to_int64(raw)
        elif field == 5 and wire_type == _WIRE_LEN:
            summary, pos = _read_len(payload, pos)
            scalars.extend(_decode_summary(summary))
        else:
            pos = _skip_field(payload, pos, wire_type)
    return [ScalarEvent(wall_time, step, tag, value) for tag, value in scalars]


def _decode_summary(buf: bytes) -> list[tuple[str, float]]:
    out: list[tuple[str, float]] = []
    pos = 0
    while pos < len(buf):
        key, pos = read_varint(buf, pos)
        field, wire_type = key >> 3, key & 0x7
        if field == 1 and wire_type == _WIRE_LEN:
            value_msg, pos = _read_len(buf, pos)
            scalar = _decode_value(value_msg)
            if scalar is not None:
                out.append(scalar)
        else:
            pos = _skip_field(buf, pos, wire_type)
    return out


def _decode_value(buf: bytes) -> tuple[str, float] | None:
    tag = ""
    simple_value: float | None = None
    pos = 0
    while pos < len(buf):
        key, pos = read_varint(buf, pos)
        field, wire_type = key >> 3, key & 0x7
        if field == 1 and wire_type == _WIRE_LEN:
            raw, pos = _read_len(buf, pos)
            tag = raw.decode("utf-8", errors="replace")
        elif field == 2 and wire_type == _WIRE_I32:
            if pos + 4 > len(buf):
                raise TruncatedField(f"simple_value truncated at byte {pos}")
            (simple_value,) = struct.unpack_from("<f", buf, pos)
            pos += 4
        else:
            pos = _skip_field(buf, pos, wire_type)
    if simple_value is None:
        return None  # histogram/tensor/image value, not a scalar
    return tag, simple_value


# --- encoding side, used by the synthetic-run generator ---


def encode_varint(value: int) -> bytes:
    if value < 0:
        value &= (1 << 64) - 1
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _key(field: int, wire_type: int) -> bytes:
    return encode_varint(field << 3 | wire_type)


def _len_field(field: int, data: bytes) -> bytes:
    return _key(field, _WIRE_LEN) + encode_varint(len(data)) + data


def encode_scalar_event(wall_time: float, step: int, tag: str, value: float) -> bytes:
    value_msg = _len_field(1, tag.encode("utf-8")) + _key(2, _WIRE_I32) + struct.pack("<f", value)
    summary = _len_field(1, value_msg)
    return (
        _key(1, _WIRE_I64)
        + struct.pack("<d", wall_time)
        + _key(2, _WIRE_VARINT)
        + encode_varint(step)
        + _len_field(5, summary)
    )


def encode_file_version(wall_time: float = 0.0, version: str = "brain.Event:2") -> bytes:
    # Event field 3 is the file_version string; readers skip it.
    return _key(1, _WIRE_I64) + struct.pack("<d", wall_time) + _len_field(3, version.encode("utf-8"))
