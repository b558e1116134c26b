"""Published attacks on the scheme lineage, and a runner that scores them.

Forgeries via the authentication phase (Chan-Cheng, Chang-Hwang I/II,
Leung et al.) exploit the multiplicative structure pw = base**x_s: any
product or power of valid (base, pw) pairs is again a valid pair. The
Shen-Lin-Hwang masquerade works through the registration phase instead.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from scipy.stats import binom

from .modmath import gen_prime, mod_exp, mod_mul, primitive_root
from .primitives import OwfHandle, SHA256, ServerSecret, xor_align
from .schemes import (
    AuthDecision,
    Credential,
    DuplicateId,
    LoginMessage,
    Mode,
    Reason,
    Registry,
    Scheme,
    SystemParams,
    authenticate,
    login_core,
    register,
    valid_identity,
)


class AttackError(Exception):
    pass


class EmptyCoalition(AttackError):
    pass


class NonInvertibleExponent(AttackError):
    pass


class MatrixMismatch(AssertionError):
    def __init__(self, rows: Sequence["MatrixRow"]):
        self.rows = list(rows)
        cells = ", ".join(f"({r.scheme.value}, {r.attack})" for r in self.rows)
        super().__init__(f"attack matrix deviates from expectation in {cells}")


@dataclass(frozen=True)
class ForgedPair:
    identity: int
    pw: int
    provenance: str = ""


# --- forgery procedures ---------------------------------------------------


def chan_cheng_forge(id_b: int, pw_b: int, p: int) -> ForgedPair:
    return ForgedPair(
        mod_mul(id_b, id_b, p), mod_mul(pw_b, pw_b, p), f"chan-cheng(id={id_b})"
    )


def chang_hwang_mech1(id_b: int, pw_b: int, r: int, p: int) -> ForgedPair:
    if r < 1:
        raise ValueError("r must be >= 1")
    return ForgedPair(mod_exp(id_b, r, p), mod_exp(pw_b, r, p), f"mech1(id={id_b}, r={r})")


def chang_hwang_mech2(pairs: Sequence[tuple[int, int]], p: int) -> ForgedPair:
    """Colluding users multiply their identities and passwords together."""
    if len(pairs) < 2:
        raise EmptyCoalition("a coalition needs at least two valid pairs")
    identity, pw = 1, 1
    for i, w in pairs:
        identity = identity * i % p
        pw = pw * w % p
    return ForgedPair(identity, pw, f"mech2(ids={[i for i, _ in pairs]})")


def _exponent_inverse(r: int, p: int) -> int:
    if math.gcd(r, p - 1) != 1:
        raise NonInvertibleExponent(f"gcd({r}, {p - 1}) != 1")
    return pow(r, -1, p - 1)


def shen_masquerade(id_k: int, r: int, p: int) -> int:
    """Identity the attacker registers in order to learn the victim's password."""
    _exponent_inverse(r, p)
    return mod_exp(id_k, r, p)


def shen_recover_pw(pw_b: int, r: int, p: int) -> int:
    # pw_b = id_k**(r * x_s), so pw_k = pw_b**(r^-1 mod (p - 1))
    return mod_exp(pw_b, _exponent_inverse(r, p), p)


def leung_forge(sid_b: int, pw_b: int, r: int, p: int) -> ForgedPair:
    """Chang-Hwang mechanism I with shadow identities in place of identities."""
    pair = chang_hwang_mech1(sid_b, pw_b, r, p)
    return dataclasses.replace(pair, provenance=f"leung(sid={sid_b}, r={r})")


def prop_attack_attempt(id_i: int, reg_number: int, pw_i: int, k: int, p: int) -> tuple[int, int]:
    """Raise a proposed-scheme credential to the k-th power.

    Returns the shifted base (ID ^ R)**k and a password valid for it. Any
    split ID_b ^ R' of that base still lacks a matching check digit.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    base = xor_align(id_i, reg_number)
    return mod_exp(base, k, p), mod_exp(pw_i, k, p)


def splits(base: int, p: int) -> Iterable[tuple[int, int]]:
    """Every (ID_b, R') with a well-formed ID_b and ID_b ^ R' == base."""
    for id_b in range(2, p - 1):
        yield id_b, base ^ id_b


def discrete_log_table(g: int, p: int) -> dict[int, int]:
    table, x = {}, 1
    for k in range(p - 1):
        table[x] = k
        x = x * g % p
    return table


def forged_login(
    scheme: Scheme,
    base: int,
    pw: int,
    t_stamp: int,
    r: int,
    p: int,
    *,
    handle: OwfHandle = SHA256,
    c_id: int | None = None,
    id_b: int | None = None,
) -> LoginMessage:
    """Build the login an attacker would send with a forged (base, pw) pair.

    For the proposed scheme ``id_b`` picks the split; R' = base ^ id_b.
    """
    if scheme is Scheme.PROPOSED:
        c1, c2 = login_core(base, id_b, pw, t_stamp, r, p, handle)
        return LoginMessage(scheme, id_b, c1, c2, t_stamp, reg_number=base ^ id_b, c_id=c_id)
    c1, c2 = login_core(base, base, pw, t_stamp, r, p, handle)
    return LoginMessage(scheme, base, c1, c2, t_stamp, c_id=c_id)


# --- matrix ---------------------------------------------------------------


class Expect(str, enum.Enum):
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"
    # acceptance rate must match blind guessing of a check digit
    RATE = "RATE"


ATTACKS: dict[Scheme, tuple[str, ...]] = {
    Scheme.HL: ("chan-cheng", "mech1", "mech2", "shen", "primitive"),
    Scheme.SLH: ("chan-cheng", "leung", "mech2", "shen"),
    Scheme.KUMAR: ("chan-cheng", "leung", "mech2", "shen", "cid-guess"),
    Scheme.PROPOSED: ("chan-cheng", "mech1", "mech2", "shen", "cid-guess"),
}

ALIASES = {"mech1": "leung", "leung": "mech1"}

def expected(scheme: Scheme, attack: str, mode: Mode = Mode.PAPER) -> tuple[Expect, Reason | None]:
    """Expected verdict for one cell of the matrix."""
    if attack == "shen":
        if scheme is Scheme.HL:
            return Expect.ACCEPTED, None
        # the shadow function / registration number breaks the password relation
        return Expect.REJECTED, Reason.VERIFY_FAILED
    if mode is Mode.HARDENED:
        # forged identities were never issued
        return Expect.REJECTED, Reason.BAD_ID_FORMAT
    if attack == "cid-guess":
        return Expect.RATE, None
    if scheme in (Scheme.HL, Scheme.SLH):
        return Expect.ACCEPTED, None
    return Expect.REJECTED, Reason.BAD_CHECK_DIGIT


@dataclass(frozen=True)
class AttackOutcome:
    scheme: Scheme
    attack: str
    login_accepted: bool
    rejection_reason: Reason | None

    @classmethod
    def from_decision(cls, scheme: Scheme, attack: str, decision: AuthDecision) -> "AttackOutcome":
        return cls(scheme, attack, decision.accepted, None if decision.accepted else decision.reason)


@dataclass
class MatrixRow:
    scheme: Scheme
    attack: str
    trials: int
    accepted: int
    expect: Expect
    expect_reason: Reason | None
    reasons: Counter = field(default_factory=Counter)
    # acceptance count bounds implied by the expectation
    low: int = 0
    high: int = 0
    # masquerade cells only: trials in which the victim's true password was recovered
    recovered: int | None = None
    recovered_bounds: tuple[int, int] | None = None
    passed: bool = False

    def render(self) -> str:
        want = self.expect.value if self.expect_reason is None else f"{self.expect.value}:{self.expect_reason.value}"
        extra = ""
        if self.recovered is not None:
            lo, hi = self.recovered_bounds
            extra = f" recovered={self.recovered} in [{lo},{hi}]"
        return (
            f"{self.scheme.value:<9} {self.attack:<11} trials={self.trials:<8} accepted={self.accepted:<7} "
            f"expected={want:<25} bounds=[{self.low},{self.high}]{extra} {'PASS' if self.passed else 'FAIL'}"
        )


def _upper(n: int, q: float) -> int:
    return int(binom.ppf(0.999, n, min(q, 1.0)))


def _score(row: MatrixRow, chance: float, confidence: float = 0.99) -> MatrixRow:
    n = row.trials
    if row.expect is Expect.ACCEPTED:
        row.low = row.high = n
    elif row.expect is Expect.RATE:
        tail = (1 - confidence) / 2
        row.low = int(binom.ppf(tail, n, chance))
        row.high = int(binom.ppf(1 - tail, n, chance))
    else:
        row.low, row.high = 0, _upper(n, chance)
    ok = row.low <= row.accepted <= row.high
    if row.expect is Expect.REJECTED:
        ok = ok and set(row.reasons) <= {row.expect_reason}
    if row.recovered is not None:
        lo, hi = row.recovered_bounds
        ok = ok and lo <= row.recovered <= hi
    row.passed = ok
    return row


def smallest_order(p: int) -> int:
    """Smallest multiplicative order of a residue other than 1 and p - 1."""
    n = p - 1
    return next(d for d in range(3, n + 1) if n % d == 0)


def blind_login_chance(p: int) -> float:
    """Upper bound on accepting a login built with a wrong password.

    The verifier compares b**t with b**t' * (pw'/pw)**r for unrelated
    exponents t, t'; b**(t' - t) is spread over the subgroup generated by b,
    which has at least ``smallest_order(p)`` elements. Negligible for real p,
    noticeable for toy primes.
    """
    return 1 / (p - 3) + 1 / smallest_order(p)


@dataclass
class _Trial:
    """One freshly initialised server for one attack attempt."""

    params: SystemParams
    registry: Registry
    rng: random.Random
    t_stamp: int = 1000

    @property
    def p(self) -> int:
        return self.params.p

    def enroll(self, n: int) -> list[Credential]:
        creds, taken = [], set()
        while len(creds) < n:
            identity = self.rng.randint(2, self.p - 2)
            if identity in taken:
                continue
            try:
                creds.append(register(self.params, self.registry, identity, self.rng))
            except DuplicateId:
                continue
            taken.add(identity)
        return creds

    def nonce(self) -> int:
        return self.rng.randint(2, self.p - 2)

    def submit(self, msg: LoginMessage) -> AuthDecision:
        return authenticate(self.params, self.registry, msg, self.t_stamp)


class _Retry(Exception):
    """Degenerate draw (e.g. a forgery that collapses onto the original); draw again."""


class MatrixRunner:
    """Runs (scheme, attack) cells against freshly set-up servers.

    Each trial gets its own parameters and registry; with ``p`` fixed only the
    server secret changes between trials, otherwise a new prime of ``bits``
    bits is drawn.
    """

    def __init__(
        self,
        seed: int,
        *,
        p: int | None = None,
        bits: tuple[int, int] = (8, 16),
        digits: int = 6,
        mode: Mode = Mode.PAPER,
        delta_t: int = 60,
    ):
        self.rng = random.Random(seed)
        self.p = p
        self.bits = bits
        self.digits = digits
        self.mode = mode
        self.delta_t = delta_t

    def _trial(self, scheme: Scheme) -> _Trial:
        p = self.p or gen_prime(self.rng.randint(*self.bits), self.rng)
        params = SystemParams(
            p, ServerSecret.generate(p, self.rng), delta_t=self.delta_t, digits=self.digits, mode=self.mode, min_bits=2
        )
        return _Trial(params, Registry(scheme), self.rng)

    # Each attempt returns the forged login message for a fresh trial.

    def _forge_message(self, tr: _Trial, scheme: Scheme, attack: str) -> LoginMessage:
        p = tr.p
        if attack == "mech2":
            coalition = tr.enroll(self.rng.randint(2, 3))
            forged = chang_hwang_mech2([(c.registration_base, c.pw) for c in coalition], p)
            originals = {c.registration_base for c in coalition}
        else:
            (cred,) = tr.enroll(1)
            base = cred.registration_base
            if attack == "chan-cheng":
                forged = chan_cheng_forge(base, cred.pw, p)
            elif scheme is Scheme.PROPOSED:
                k = self.rng.randint(2, p - 2)
                forged = ForgedPair(*prop_attack_attempt(cred.id, cred.reg_number, cred.pw, k, p))
            elif scheme in (Scheme.SLH, Scheme.KUMAR):
                forged = leung_forge(base, cred.pw, self.rng.randint(2, p - 2), p)
            else:
                forged = chang_hwang_mech1(base, cred.pw, self.rng.randint(2, p - 2), p)
            coalition, originals = [cred], {base}
        if not valid_identity(forged.identity, p) or forged.identity in originals:
            raise _Retry
        c_id = coalition[0].c_id
        id_b = None
        if scheme is Scheme.PROPOSED:
            id_b = self.rng.randint(2, p - 2)
        return forged_login(scheme, forged.identity, forged.pw, tr.t_stamp, tr.nonce(), p, c_id=c_id, id_b=id_b)

    def _shen(self, tr: _Trial, scheme: Scheme) -> tuple[AuthDecision, bool]:
        p = tr.p
        (victim,) = tr.enroll(1)
        r = self.rng.randint(1, p - 2)
        if math.gcd(r, p - 1) != 1:
            raise _Retry
        id_b = shen_masquerade(victim.id, r, p)
        if id_b == victim.id:
            raise _Retry
        try:
            bob = register(tr.params, tr.registry, id_b, self.rng)
        except DuplicateId:
            raise _Retry from None
        pw_k = shen_recover_pw(bob.pw, r, p)
        # the victim's identity part is public: it travels in every login
        stolen = dataclasses.replace(victim, pw=pw_k)
        c1_base = stolen.registration_base
        m_base = victim.id if scheme is Scheme.PROPOSED else c1_base
        c1, c2 = login_core(c1_base, m_base, pw_k, tr.t_stamp, tr.nonce(), p)
        msg = LoginMessage(
            scheme,
            victim.id if scheme in (Scheme.HL, Scheme.PROPOSED) else victim.sid,
            c1,
            c2,
            tr.t_stamp,
            reg_number=victim.reg_number,
            c_id=victim.c_id,
        )
        return tr.submit(msg), pw_k == victim.pw

    def attempt(self, scheme: Scheme, attack: str) -> tuple[AttackOutcome, int, bool]:
        """One attack on a fresh server: (outcome, prime used, password recovered)."""
        while True:
            tr = self._trial(scheme)
            recovered = False
            try:
                if attack == "shen":
                    decision, recovered = self._shen(tr, scheme)
                else:
                    decision = tr.submit(self._forge_message(tr, scheme, attack))
            except _Retry:
                continue
            return AttackOutcome.from_decision(scheme, attack, decision), tr.p, recovered

    def primitive_cell(self, scheme: Scheme = Scheme.HL) -> list[AttackOutcome]:
        """Forge every identity from one registered primitive element."""
        tr = self._trial(scheme)
        p = tr.p
        g = primitive_root(p)
        cred = register(tr.params, tr.registry, g, self.rng)
        logs = discrete_log_table(g, p)
        outcomes = []
        for target in range(2, p - 1):
            if target == g:
                continue
            forged = chang_hwang_mech1(g, cred.pw, logs[target], p)
            assert forged.identity == target
            msg = forged_login(scheme, forged.identity, forged.pw, tr.t_stamp, tr.nonce(), p)
            outcomes.append(AttackOutcome.from_decision(scheme, "primitive", tr.submit(msg)))
        return outcomes

    def guess_cell(self, scheme: Scheme, trials: int) -> list[AttackOutcome]:
        """Attach uniformly guessed check digits to one valid forged login."""
        while True:
            tr = self._trial(scheme)
            try:
                msg = self._forge_message(tr, scheme, "chan-cheng")
            except _Retry:
                continue
            break
        space = 10**self.digits
        fields = (msg.scheme, msg.identity, msg.c1, msg.c2, msg.t_stamp, msg.reg_number)
        tally = Counter()
        for _ in range(trials):
            tally[tr.submit(LoginMessage(*fields, self.rng.randrange(space)))] += 1
        return [AttackOutcome.from_decision(scheme, "cid-guess", d) for d, n in tally.items() for _ in range(n)]

    def cell(self, scheme: Scheme, attack: str, trials: int) -> MatrixRow:
        if attack not in ATTACKS[scheme]:
            raise ValueError(f"attack {attack!r} does not apply to {scheme.value}")
        chance = 10.0**-self.digits
        recovered = recovered_bounds = None
        if attack == "primitive":
            outcomes = self.primitive_cell(scheme)
        elif attack == "cid-guess":
            outcomes = self.guess_cell(scheme, trials)
        else:
            runs = [self.attempt(scheme, attack) for _ in range(trials)]
            outcomes = [o for o, _, _ in runs]
            if attack == "shen":
                smallest = min(p for _, p, _ in runs)
                chance = max(blind_login_chance(p) for _, p, _ in runs)
                recovered = sum(hit for _, _, hit in runs)
                if scheme is Scheme.HL:
                    recovered_bounds = (trials, trials)
                else:
                    # the recovered value is a blind hit on the victim's password
                    recovered_bounds = (0, _upper(trials, 1 / (smallest - 3)))
        expect, reason = expected(scheme, attack, self.mode)
        row = MatrixRow(
            scheme,
            attack,
            len(outcomes),
            sum(o.login_accepted for o in outcomes),
            expect,
            reason,
            Counter(o.rejection_reason for o in outcomes if not o.login_accepted),
            recovered=recovered,
            recovered_bounds=recovered_bounds,
        )
        return _score(row, chance)


def run_attack_matrix(
    trials: int = 100,
    seed: int = 0,
    *,
    p: int | None = None,
    bits: tuple[int, int] = (8, 16),
    digits: int = 6,
    mode: Mode = Mode.PAPER,
    guess_trials: int | None = None,
    cells: Iterable[tuple[Scheme, str]] | None = None,
) -> list[MatrixRow]:
    runner = MatrixRunner(seed, p=p, bits=bits, digits=digits, mode=mode)
    if cells is None:
        cells = [(s, a) for s, attacks in ATTACKS.items() for a in attacks]
    rows = []
    for scheme, attack in cells:
        n = guess_trials if attack == "cid-guess" and guess_trials else trials
        rows.append(runner.cell(scheme, attack, n))
    return rows


def check_matrix(rows: Sequence[MatrixRow]) -> None:
    bad = [r for r in rows if not r.passed]
    if bad:
        raise MatrixMismatch(bad)
