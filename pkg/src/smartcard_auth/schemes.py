"""The four smart-card login schemes.

HL        identity ID, password ID**x_s
SLH       shadow identity SID = Red(ID) replaces ID everywhere
KUMAR     SLH plus a server-keyed check digit C_K(SID) on the wire
PROPOSED  registration number R, password (ID ^ R)**x_s, check digit C_K(ID ^ R)

All four share one login computation and one verification identity:

    C1 = b**r,  t = h(T ^ PW) mod (p - 1),  C2 = m**t * PW**r
    C2 * (C1**x_s)**-1 == m**t  (mod p)
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from . import modmath
from .modmath import is_probable_prime, mod_exp, mod_inv, mod_mul
from .primitives import (
    DEFAULT_DIGITS,
    SHA256,
    OwfHandle,
    ServerSecret,
    check_digit,
    encode_stamp_xor_pw,
    owf,
    reduce_to_exponent,
    shadow,
    xor_align,
)

DEFAULT_DELTA_T = 60
DEFAULT_MIN_BITS = 1024


class Scheme(str, enum.Enum):
    HL = "hl"
    SLH = "slh"
    KUMAR = "kumar"
    PROPOSED = "proposed"


class Mode(str, enum.Enum):
    """PAPER reproduces the published checks; HARDENED adds registry membership and a replay cache."""

    PAPER = "paper"
    HARDENED = "hardened"


class Reason(str, enum.Enum):
    OK = "OK"
    BAD_ID_FORMAT = "BAD_ID_FORMAT"
    BAD_CHECK_DIGIT = "BAD_CHECK_DIGIT"
    STALE_TIMESTAMP = "STALE_TIMESTAMP"
    REPLAY = "REPLAY"
    VERIFY_FAILED = "VERIFY_FAILED"


class SchemeError(Exception):
    pass


class DuplicateId(SchemeError):
    pass


class BadIdFormat(SchemeError):
    pass


class SchemeMismatch(SchemeError):
    pass


@dataclass(frozen=True)
class SystemParams:
    p: int
    secret: ServerSecret = field(repr=False)
    owf: OwfHandle = SHA256
    delta_t: int = DEFAULT_DELTA_T
    digits: int = DEFAULT_DIGITS
    mode: Mode = Mode.HARDENED
    min_bits: int = DEFAULT_MIN_BITS

    def __post_init__(self) -> None:
        if self.p.bit_length() < self.min_bits:
            raise ValueError(f"p has {self.p.bit_length()} bits, need >= {self.min_bits}")
        if self.p < 5 or not is_probable_prime(self.p):
            raise ValueError(f"p = {self.p} is not a usable prime")
        if self.delta_t <= 0:
            raise ValueError("delta_t must be positive")
        if self.digits < 1:
            raise ValueError("digits must be >= 1")
        if not 0 <= self.secret.x_s < self.p - 1:
            raise ValueError("x_s must lie in [0, p - 1)")

    @property
    def x_s(self) -> int:
        return self.secret.x_s


def setup(
    bits: int,
    rng: random.Random,
    *,
    owf: OwfHandle = SHA256,
    delta_t: int = DEFAULT_DELTA_T,
    digits: int = DEFAULT_DIGITS,
    mode: Mode = Mode.HARDENED,
    min_bits: int = DEFAULT_MIN_BITS,
) -> SystemParams:
    """Initial phase: pick p, x_s and the server keys."""
    p = modmath.gen_prime(bits, rng)
    secret = ServerSecret.generate(p, rng)
    return SystemParams(p, secret, owf, delta_t, digits, mode, min_bits)


@dataclass(frozen=True)
class Credential:
    """Contents of the smart card plus the issued password."""

    scheme: Scheme
    id: int
    pw: int
    p: int
    owf_id: str = "sha256"
    sid: int | None = None
    reg_number: int | None = None
    c_id: int | None = None

    def __post_init__(self) -> None:
        need_sid = self.scheme in (Scheme.SLH, Scheme.KUMAR)
        need_r = self.scheme is Scheme.PROPOSED
        need_cid = self.scheme in (Scheme.KUMAR, Scheme.PROPOSED)
        if (self.sid is not None) != need_sid:
            raise ValueError(f"{self.scheme.value} credential: sid presence mismatch")
        if (self.reg_number is not None) != need_r:
            raise ValueError(f"{self.scheme.value} credential: R presence mismatch")
        if (self.c_id is not None) != need_cid:
            raise ValueError(f"{self.scheme.value} credential: C_ID presence mismatch")

    @property
    def registration_base(self) -> int:
        """The value whose x_s-th power is the password."""
        if self.scheme is Scheme.HL:
            return self.id
        if self.scheme is Scheme.PROPOSED:
            return xor_align(self.id, self.reg_number)
        return self.sid


@dataclass(frozen=True)
class LoginMessage:
    """Login request as sent over the wire.

    ``identity`` is ID for HL and PROPOSED and SID for SLH and KUMAR.
    """

    scheme: Scheme
    identity: int
    c1: int
    c2: int
    t_stamp: int
    reg_number: int | None = None
    c_id: int | None = None

    def __post_init__(self) -> None:
        need_r = self.scheme is Scheme.PROPOSED
        need_cid = self.scheme in (Scheme.KUMAR, Scheme.PROPOSED)
        if (self.reg_number is not None) != need_r or (self.c_id is not None) != need_cid:
            raise SchemeMismatch(f"message fields do not match a {self.scheme.value} login")

    @property
    def identity_part(self) -> tuple:
        if self.scheme is Scheme.PROPOSED:
            return (self.identity, self.reg_number, self.c_id)
        if self.scheme is Scheme.KUMAR:
            return (self.identity, self.c_id)
        return (self.identity,)


@dataclass(frozen=True)
class AuthDecision:
    accepted: bool
    reason: Reason

    def __post_init__(self) -> None:
        if self.accepted != (self.reason is Reason.OK):
            raise ValueError("accepted must hold exactly when reason is OK")

    @classmethod
    def reject(cls, reason: Reason) -> "AuthDecision":
        return cls(False, reason)


ACCEPT = AuthDecision(True, Reason.OK)


@dataclass
class Registry:
    """Server-side state: issued identities and the replay cache.

    Mutations must be serialised by the caller.
    """

    scheme: Scheme
    # identity key -> clear-text ID. Keys: ID (HL), SID (SLH, KUMAR), (ID, R) (PROPOSED)
    records: dict = field(default_factory=dict)
    ids: set = field(default_factory=set)
    used_r: set = field(default_factory=set)
    # (identity part, T) -> T
    seen: dict = field(default_factory=dict)

    def is_registered(self, key) -> bool:
        return key in self.records

    def check_replay(self, key: tuple, t_now: int, window: int) -> bool:
        """Drop entries older than ``window`` and report whether ``key`` is cached."""
        stale = [k for k, t in self.seen.items() if t_now - t > window]
        for k in stale:
            del self.seen[k]
        return key in self.seen

    def remember(self, key: tuple, t_stamp: int) -> None:
        self.seen[key] = t_stamp


def valid_identity(value: int, p: int) -> bool:
    """Structural format rule: a residue other than 0, 1 and p - 1."""
    return 2 <= value <= p - 2


def _require_format(identity: int, p: int) -> None:
    if not valid_identity(identity, p):
        raise BadIdFormat(f"identity {identity} must lie in [2, p - 2]")


# --- shared core --------------------------------------------------------


def derive_exponent(t_stamp: int, pw: int, p: int, handle: OwfHandle) -> int:
    """t = h(T ^ PW) mod (p - 1)."""
    return reduce_to_exponent(owf(handle, encode_stamp_xor_pw(t_stamp, pw, p)), p)


def login_core(
    c1_base: int, m_base: int, pw: int, t_stamp: int, r: int, p: int, handle: OwfHandle = SHA256
) -> tuple[int, int]:
    if not 2 <= r <= p - 2:
        raise ValueError(f"r = {r} outside [2, p - 2]")
    c1 = mod_exp(c1_base, r, p)
    t = derive_exponent(t_stamp, pw, p, handle)
    m = mod_exp(m_base, t, p)
    c2 = mod_mul(m, mod_exp(pw, r, p), p)
    return c1, c2


def verify_core(
    x_s: int,
    c1: int,
    c2: int,
    m_base: int,
    pw_recomputed: int,
    t_stamp: int,
    p: int,
    handle: OwfHandle = SHA256,
) -> bool:
    lhs = mod_mul(c2, mod_inv(mod_exp(c1, x_s, p), p), p)
    t = derive_exponent(t_stamp, pw_recomputed, p, handle)
    return lhs == mod_exp(m_base, t, p)


def _check_freshness(params: SystemParams, registry: Registry, msg: LoginMessage, t_now: int) -> Reason | None:
    if not 0 <= t_now - msg.t_stamp <= params.delta_t:
        return Reason.STALE_TIMESTAMP
    if params.mode is Mode.HARDENED:
        if registry.check_replay((msg.identity_part, msg.t_stamp), t_now, 2 * params.delta_t):
            return Reason.REPLAY
    return None


def _finish(params: SystemParams, registry: Registry, msg: LoginMessage, m_base: int, base: int) -> AuthDecision:
    p = params.p
    if not (1 <= msg.c1 < p and 1 <= msg.c2 < p):
        return AuthDecision.reject(Reason.VERIFY_FAILED)
    pw = mod_exp(base, params.x_s, p)
    if not verify_core(params.x_s, msg.c1, msg.c2, m_base, pw, msg.t_stamp, p, params.owf):
        return AuthDecision.reject(Reason.VERIFY_FAILED)
    if params.mode is Mode.HARDENED:
        registry.remember((msg.identity_part, msg.t_stamp), msg.t_stamp)
    return ACCEPT


def _expect(obj, scheme: Scheme) -> None:
    if obj.scheme is not scheme:
        raise SchemeMismatch(f"expected a {scheme.value} object, got {obj.scheme.value}")


def _check_registry(registry: Registry, scheme: Scheme) -> None:
    if registry.scheme is not scheme:
        raise SchemeMismatch(f"registry belongs to {registry.scheme.value}, not {scheme.value}")


# --- Hwang-Li -----------------------------------------------------------


def hl_register(params: SystemParams, registry: Registry, identity: int) -> Credential:
    _check_registry(registry, Scheme.HL)
    _require_format(identity, params.p)
    if identity in registry.records:
        raise DuplicateId(f"identity {identity} already registered")
    pw = mod_exp(identity, params.x_s, params.p)
    registry.records[identity] = identity
    registry.ids.add(identity)
    return Credential(Scheme.HL, identity, pw, params.p, params.owf.algorithm)


def _plain_login(cred: Credential, scheme: Scheme, identity: int, t_stamp: int, r: int, handle: OwfHandle) -> LoginMessage:
    _expect(cred, scheme)
    c1, c2 = login_core(identity, identity, cred.pw, t_stamp, r, cred.p, handle)
    return LoginMessage(scheme, identity, c1, c2, t_stamp)


def hl_login(cred: Credential, t_stamp: int, r: int, handle: OwfHandle = SHA256) -> LoginMessage:
    return _plain_login(cred, Scheme.HL, cred.id, t_stamp, r, handle)


def _plain_authenticate(params: SystemParams, registry: Registry, msg: LoginMessage, t_now: int, scheme: Scheme) -> AuthDecision:
    _expect(msg, scheme)
    _check_registry(registry, scheme)
    identity = msg.identity
    if not valid_identity(identity, params.p):
        return AuthDecision.reject(Reason.BAD_ID_FORMAT)
    if params.mode is Mode.HARDENED and not registry.is_registered(identity):
        return AuthDecision.reject(Reason.BAD_ID_FORMAT)
    reason = _check_freshness(params, registry, msg, t_now)
    if reason is not None:
        return AuthDecision.reject(reason)
    return _finish(params, registry, msg, identity, identity)


def hl_authenticate(params: SystemParams, registry: Registry, msg: LoginMessage, t_now: int) -> AuthDecision:
    return _plain_authenticate(params, registry, msg, t_now, Scheme.HL)


# --- Shen-Lin-Hwang -----------------------------------------------------


def _shadow_register(params: SystemParams, registry: Registry, identity: int, scheme: Scheme) -> tuple[int, int]:
    _check_registry(registry, scheme)
    _require_format(identity, params.p)
    if identity in registry.ids:
        raise DuplicateId(f"identity {identity} already registered")
    sid = shadow(params.secret, identity, params.p)
    if sid in registry.records:
        raise DuplicateId(f"shadow identity of {identity} collides with an issued one")
    pw = mod_exp(sid, params.x_s, params.p)
    registry.records[sid] = identity
    registry.ids.add(identity)
    return sid, pw


def slh_register(params: SystemParams, registry: Registry, identity: int) -> Credential:
    sid, pw = _shadow_register(params, registry, identity, Scheme.SLH)
    return Credential(Scheme.SLH, identity, pw, params.p, params.owf.algorithm, sid=sid)


def slh_login(cred: Credential, t_stamp: int, r: int, handle: OwfHandle = SHA256) -> LoginMessage:
    return _plain_login(cred, Scheme.SLH, cred.sid, t_stamp, r, handle)


def slh_authenticate(params: SystemParams, registry: Registry, msg: LoginMessage, t_now: int) -> AuthDecision:
    return _plain_authenticate(params, registry, msg, t_now, Scheme.SLH)


# --- Kumar --------------------------------------------------------------


def kumar_register(params: SystemParams, registry: Registry, identity: int) -> Credential:
    sid, pw = _shadow_register(params, registry, identity, Scheme.KUMAR)
    c_id = check_digit(params.secret, sid, params.digits)
    return Credential(Scheme.KUMAR, identity, pw, params.p, params.owf.algorithm, sid=sid, c_id=c_id)


def kumar_login(cred: Credential, t_stamp: int, r: int, handle: OwfHandle = SHA256) -> LoginMessage:
    _expect(cred, Scheme.KUMAR)
    c1, c2 = login_core(cred.sid, cred.sid, cred.pw, t_stamp, r, cred.p, handle)
    return LoginMessage(Scheme.KUMAR, cred.sid, c1, c2, t_stamp, c_id=cred.c_id)


def kumar_authenticate(params: SystemParams, registry: Registry, msg: LoginMessage, t_now: int) -> AuthDecision:
    _expect(msg, Scheme.KUMAR)
    _check_registry(registry, Scheme.KUMAR)
    sid = msg.identity
    if not valid_identity(sid, params.p):
        return AuthDecision.reject(Reason.BAD_ID_FORMAT)
    if params.mode is Mode.HARDENED and not registry.is_registered(sid):
        return AuthDecision.reject(Reason.BAD_ID_FORMAT)
    if msg.c_id != check_digit(params.secret, sid, params.digits):
        return AuthDecision.reject(Reason.BAD_CHECK_DIGIT)
    reason = _check_freshness(params, registry, msg, t_now)
    if reason is not None:
        return AuthDecision.reject(reason)
    return _finish(params, registry, msg, sid, sid)


# --- proposed scheme ----------------------------------------------------


def _assign_reg_number(params: SystemParams, registry: Registry, identity: int, rng: random.Random) -> int:
    bits = params.p.bit_length()
    while True:
        r = rng.randrange(1, 1 << bits)
        if r not in registry.used_r and valid_identity(xor_align(identity, r), params.p):
            return r


def prop_register(
    params: SystemParams,
    registry: Registry,
    identity: int,
    rng: random.Random,
    reg_number: int | None = None,
) -> Credential:
    """Register ``identity`` under a fresh registration number R.

    The same identity may register any number of times; each registration
    gets its own R and therefore its own password and check digit.
    """
    _check_registry(registry, Scheme.PROPOSED)
    _require_format(identity, params.p)
    if reg_number is None:
        reg_number = _assign_reg_number(params, registry, identity, rng)
    elif reg_number in registry.used_r:
        raise DuplicateId(f"registration number {reg_number} already issued")
    base = xor_align(identity, reg_number)
    if reg_number < 1 or not valid_identity(base, params.p):
        raise BadIdFormat(f"ID ^ R = {base} must lie in [2, p - 2]")
    pw = mod_exp(base, params.x_s, params.p)
    c_id = check_digit(params.secret, base, params.digits)
    registry.records[(identity, reg_number)] = identity
    registry.ids.add(identity)
    registry.used_r.add(reg_number)
    return Credential(
        Scheme.PROPOSED, identity, pw, params.p, params.owf.algorithm, reg_number=reg_number, c_id=c_id
    )


def prop_login(cred: Credential, t_stamp: int, r: int, handle: OwfHandle = SHA256) -> LoginMessage:
    _expect(cred, Scheme.PROPOSED)
    base = xor_align(cred.id, cred.reg_number)
    # C1 uses ID ^ R, m uses the bare ID
    c1, c2 = login_core(base, cred.id, cred.pw, t_stamp, r, cred.p, handle)
    return LoginMessage(Scheme.PROPOSED, cred.id, c1, c2, t_stamp, reg_number=cred.reg_number, c_id=cred.c_id)


def prop_authenticate(params: SystemParams, registry: Registry, msg: LoginMessage, t_now: int) -> AuthDecision:
    _expect(msg, Scheme.PROPOSED)
    _check_registry(registry, Scheme.PROPOSED)
    identity, reg_number = msg.identity, msg.reg_number
    base = xor_align(identity, reg_number)
    if not valid_identity(identity, params.p) or not valid_identity(base, params.p):
        return AuthDecision.reject(Reason.BAD_ID_FORMAT)
    if params.mode is Mode.HARDENED and not registry.is_registered((identity, reg_number)):
        return AuthDecision.reject(Reason.BAD_ID_FORMAT)
    if msg.c_id != check_digit(params.secret, base, params.digits):
        return AuthDecision.reject(Reason.BAD_CHECK_DIGIT)
    reason = _check_freshness(params, registry, msg, t_now)
    if reason is not None:
        return AuthDecision.reject(reason)
    return _finish(params, registry, msg, identity, base)


# --- dispatch -----------------------------------------------------------


def register(
    params: SystemParams, registry: Registry, identity: int, rng: random.Random | None = None
) -> Credential:
    scheme = registry.scheme
    if scheme is Scheme.HL:
        return hl_register(params, registry, identity)
    if scheme is Scheme.SLH:
        return slh_register(params, registry, identity)
    if scheme is Scheme.KUMAR:
        return kumar_register(params, registry, identity)
    return prop_register(params, registry, identity, rng or random.SystemRandom())


_LOGIN = {Scheme.HL: hl_login, Scheme.SLH: slh_login, Scheme.KUMAR: kumar_login, Scheme.PROPOSED: prop_login}
_AUTH = {
    Scheme.HL: hl_authenticate,
    Scheme.SLH: slh_authenticate,
    Scheme.KUMAR: kumar_authenticate,
    Scheme.PROPOSED: prop_authenticate,
}


def login(cred: Credential, t_stamp: int, r: int, handle: OwfHandle = SHA256) -> LoginMessage:
    return _LOGIN[cred.scheme](cred, t_stamp, r, handle)


def authenticate(params: SystemParams, registry: Registry, msg: LoginMessage, t_now: int) -> AuthDecision:
    return _AUTH[msg.scheme](params, registry, msg, t_now)
