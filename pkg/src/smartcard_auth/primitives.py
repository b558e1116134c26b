"""One-way function, shadow function Red(.), check-digit function C_K(.).

The shadow and check-digit functions are keyed HMAC-SHA256 constructions so
that only the holder of the server secret can evaluate them.
"""

from __future__ import annotations

import hashlib
import hmac
import random
import struct
from dataclasses import dataclass, field
from typing import Mapping

from .counting import tally

DEFAULT_DIGITS = 6
MIN_KEY_BYTES = 16
KEYFILE_MAGIC = b"SCAK"
KEYFILE_VERSION = 1


class TestVectorMissing(KeyError):
    """A table-backed one-way function was asked for an input it does not hold."""

    __test__ = False


class BadKeyFile(ValueError):
    pass


def int_to_bytes(n: int, length: int | None = None) -> bytes:
    if length is None:
        length = max(1, (n.bit_length() + 7) // 8)
    return n.to_bytes(length, "big")


@dataclass(frozen=True)
class OwfHandle:
    """The public one-way function h(.) (also written f)."""

    algorithm: str = "sha256"
    table: Mapping[bytes, int] | None = field(default=None, compare=False)
    width: int = 32

    @classmethod
    def injected(cls, table: Mapping[bytes, int], width: int = 8) -> "OwfHandle":
        """Lookup-table handle for pinning worked examples."""
        return cls("test-injected", dict(table), width)

    def __post_init__(self) -> None:
        if self.algorithm == "sha256":
            if self.width != 32:
                raise ValueError("sha256 digests are 32 bytes")
        elif self.algorithm == "test-injected":
            if self.table is None:
                raise ValueError("test-injected handle needs a table")
        else:
            raise ValueError(f"unknown one-way function {self.algorithm!r}")


SHA256 = OwfHandle()


def owf(handle: OwfHandle, data: bytes) -> bytes:
    tally("H")
    if handle.algorithm == "sha256":
        return hashlib.sha256(data).digest()
    try:
        return int_to_bytes(handle.table[data], handle.width)
    except KeyError:
        raise TestVectorMissing(data.hex()) from None


def reduce_to_exponent(digest: bytes, p: int) -> int:
    return int.from_bytes(digest, "big") % (p - 1)


def xor_align(a: int, b: int) -> int:
    # Python ints are already zero-extended to the longer width.
    return a ^ b


def xor_width(p: int) -> int:
    """Byte width used when XORing a timestamp with a password."""
    return (max(p.bit_length(), 64) + 7) // 8


def encode_stamp_xor_pw(t_stamp: int, pw: int, p: int) -> bytes:
    """Canonical fixed-width encoding of T XOR PW fed to the one-way function."""
    return int_to_bytes(xor_align(t_stamp, pw), xor_width(p))


@dataclass(frozen=True)
class ServerSecret:
    """Everything only the authentication server knows."""

    shadow_key: bytes = field(repr=False)
    checkdigit_key: bytes = field(repr=False)
    x_s: int = field(repr=False)

    @classmethod
    def generate(cls, p: int, rng: random.Random, x_s: int | None = None) -> "ServerSecret":
        from .modmath import sample_exponent

        if x_s is None:
            # coprime to p - 1 so that id -> id**x_s is a permutation
            x_s = sample_exponent(p, p - 1, rng)
        return cls(rng.randbytes(32), rng.randbytes(32), x_s)

    def is_strong(self) -> bool:
        return len(self.shadow_key) >= MIN_KEY_BYTES and len(self.checkdigit_key) >= MIN_KEY_BYTES

    def to_bytes(self) -> bytes:
        out = [KEYFILE_MAGIC, bytes([KEYFILE_VERSION])]
        for part in (self.shadow_key, self.checkdigit_key, int_to_bytes(self.x_s)):
            out.append(struct.pack(">I", len(part)))
            out.append(part)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ServerSecret":
        if blob[:4] != KEYFILE_MAGIC:
            raise BadKeyFile("not a server key file")
        if blob[4:5] != bytes([KEYFILE_VERSION]):
            raise BadKeyFile(f"unsupported key file version {blob[4:5].hex()}")
        parts, pos = [], 5
        for _ in range(3):
            if pos + 4 > len(blob):
                raise BadKeyFile("truncated key file")
            (n,) = struct.unpack(">I", blob[pos : pos + 4])
            pos += 4
            if pos + n > len(blob):
                raise BadKeyFile("truncated key file")
            parts.append(blob[pos : pos + n])
            pos += n
        if pos != len(blob):
            raise BadKeyFile("trailing bytes in key file")
        return cls(parts[0], parts[1], int.from_bytes(parts[2], "big"))


def shadow(secret: ServerSecret, identity: int, p: int) -> int:
    """Red(ID): keyed one-way map of an identity into [2, p - 2]."""
    tally("R")
    # expand to bitlen(p) + 64 bits so the modular bias is negligible
    need = (p.bit_length() + 64 + 7) // 8
    stream, block = b"", 0
    while len(stream) < need:
        msg = b"shadow|" + struct.pack(">I", block) + int_to_bytes(identity)
        stream += hmac.digest(secret.shadow_key, msg, "sha256")
        block += 1
    return 2 + int.from_bytes(stream[:need], "big") % (p - 3)


def check_digit(secret: ServerSecret, value: int, digits: int = DEFAULT_DIGITS) -> int:
    """C_K(value): keyed digest of ``value`` truncated to ``digits`` decimal digits."""
    if digits < 1:
        raise ValueError("digits must be >= 1")
    tally("C")
    mac = hmac.digest(secret.checkdigit_key, b"check|" + int_to_bytes(value), "sha256")
    return int.from_bytes(mac, "big") % 10**digits
