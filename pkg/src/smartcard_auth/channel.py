"""Simulated transport: wire codec, tick clock, delivery with an interception tap.

Frame layout (all integers big-endian)::

    offset 0   version      u8   (= 1)
    offset 1   scheme tag   u8   (1 HL, 2 SLH, 3 KUMAR, 4 PROPOSED)
    offset 2   field count  u8
    then per field:
               length       u32
               value        `length` bytes, minimal big-endian (0 is empty)

Field order: HL/SLH  identity, C1, C2, T
             KUMAR   identity, C_ID, C1, C2, T
             PROPOSED identity, R, C_ID, C1, C2, T

The codec does not know p and does not range-check residues.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable

from .schemes import LoginMessage, Scheme

WIRE_VERSION = 1

_TAGS = {Scheme.HL: 1, Scheme.SLH: 2, Scheme.KUMAR: 3, Scheme.PROPOSED: 4}
_SCHEMES = {v: k for k, v in _TAGS.items()}
_FIELDS = {
    Scheme.HL: ("identity", "c1", "c2", "t_stamp"),
    Scheme.SLH: ("identity", "c1", "c2", "t_stamp"),
    Scheme.KUMAR: ("identity", "c_id", "c1", "c2", "t_stamp"),
    Scheme.PROPOSED: ("identity", "reg_number", "c_id", "c1", "c2", "t_stamp"),
}


class MalformedFrame(ValueError):
    pass


def frame_fields(scheme: Scheme) -> tuple[str, ...]:
    return _FIELDS[scheme]


def _int_bytes(n: int) -> bytes:
    if n < 0:
        raise ValueError("wire integers are non-negative")
    return n.to_bytes((n.bit_length() + 7) // 8, "big")


def encode(msg: LoginMessage) -> bytes:
    names = _FIELDS[msg.scheme]
    out = [bytes([WIRE_VERSION, _TAGS[msg.scheme], len(names)])]
    for name in names:
        raw = _int_bytes(getattr(msg, name))
        out.append(struct.pack(">I", len(raw)))
        out.append(raw)
    return b"".join(out)


def decode(frame: bytes) -> LoginMessage:
    if len(frame) < 3:
        raise MalformedFrame("frame shorter than its header")
    version, tag, count = frame[0], frame[1], frame[2]
    if version != WIRE_VERSION:
        raise MalformedFrame(f"unknown wire version {version}")
    if tag not in _SCHEMES:
        raise MalformedFrame(f"unknown scheme tag {tag}")
    scheme = _SCHEMES[tag]
    names = _FIELDS[scheme]
    if count != len(names):
        raise MalformedFrame(f"{scheme.value} frames carry {len(names)} fields, got {count}")
    values, pos = {}, 3
    for name in names:
        if pos + 4 > len(frame):
            raise MalformedFrame("truncated length prefix")
        (n,) = struct.unpack(">I", frame[pos : pos + 4])
        pos += 4
        raw = frame[pos : pos + n]
        if len(raw) != n:
            raise MalformedFrame("truncated field")
        if raw[:1] == b"\x00":
            raise MalformedFrame("non-canonical integer (leading zero byte)")
        values[name] = int.from_bytes(raw, "big")
        pos += n
    if pos != len(frame):
        raise MalformedFrame("trailing bytes after last field")
    return LoginMessage(scheme, **values)


@dataclass
class SimClock:
    now: int = 0
    delay: int = 0

    def advance(self, ticks: int = 1) -> int:
        if ticks < 1:
            raise ValueError("the clock only moves forward")
        self.now += ticks
        return self.now


def deliver(
    frame: bytes, clock: SimClock, tap: Callable[[bytes], None] | None = None
) -> tuple[bytes, int]:
    """Send ``frame`` now; return it with its arrival tick."""
    if tap is not None:
        tap(bytes(frame))
    return frame, clock.now + clock.delay


@dataclass
class Wiretap:
    """Records every frame that crosses the channel."""

    frames: list[bytes] = field(default_factory=list)

    def __call__(self, frame: bytes) -> None:
        self.frames.append(frame)
