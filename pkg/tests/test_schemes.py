import dataclasses
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import P, T0, X_S, fixed_secret, injected_owf, small_params
from oracles import naive_pow
from smartcard_auth.modmath import ZeroInverse, gen_prime
from smartcard_auth.primitives import ServerSecret, check_digit, shadow
from smartcard_auth.schemes import (
    AuthDecision,
    BadIdFormat,
    Credential,
    DuplicateId,
    LoginMessage,
    Mode,
    Reason,
    Registry,
    Scheme,
    SchemeMismatch,
    SystemParams,
    authenticate,
    hl_authenticate,
    hl_login,
    hl_register,
    kumar_authenticate,
    kumar_login,
    kumar_register,
    login,
    login_core,
    prop_authenticate,
    prop_login,
    prop_register,
    register,
    slh_authenticate,
    slh_login,
    slh_register,
    verify_core,
)


# --- shared core ----------------------------------------------------------


def test_login_core_worked_examples(t3_owf):
    assert login_core(5, 5, 17, T0, 4, P, t3_owf) == (4, 11)
    assert login_core(5, 9, 17, T0, 4, P, t3_owf) == (4, 13)


def test_login_core_unit_password():
    handle = injected_owf([(T0, 1, 3)])
    for r in range(2, P - 1):
        c1, c2 = login_core(5, 5, 1, T0, r, P, handle)
        assert c2 == naive_pow(5, 3, P)


def test_login_core_rejects_out_of_range_nonce(t3_owf):
    for r in (0, 1, P - 1, P):
        with pytest.raises(ValueError):
            login_core(5, 5, 17, T0, r, P, t3_owf)


def test_verify_core_worked_examples(t3_owf):
    assert verify_core(X_S, 4, 11, 5, 17, T0, P, t3_owf)
    assert verify_core(X_S, 4, 13, 9, 17, T0, P, t3_owf)
    for bit in range(5):
        assert not verify_core(X_S, 4, 11 ^ (1 << bit), 5, 17, T0, P, t3_owf)
        assert not verify_core(X_S, 4, 13 ^ (1 << bit), 9, 17, T0, P, t3_owf)


def test_verify_core_zero_c1(t3_owf):
    with pytest.raises(ZeroInverse):
        verify_core(X_S, 0, 11, 5, 17, T0, P, t3_owf)


# --- Hwang-Li -------------------------------------------------------------


def test_hl_worked_fixture(t3_owf):
    params = small_params(owf=t3_owf)
    registry = Registry(Scheme.HL)
    cred = hl_register(params, registry, 5)
    assert cred.pw == 17 == naive_pow(5, X_S, P)
    msg = hl_login(cred, T0, 4, t3_owf)
    assert (msg.identity, msg.c1, msg.c2, msg.t_stamp) == (5, 4, 11, T0)
    assert hl_authenticate(params, registry, msg, T0) == AuthDecision(True, Reason.OK)
    assert hl_authenticate(params, registry, msg, T0 + 1).reason is Reason.REPLAY


def test_hl_registration_rules():
    params = small_params()
    registry = Registry(Scheme.HL)
    for bad in (0, 1, P - 1, P, -3):
        with pytest.raises(BadIdFormat):
            hl_register(params, registry, bad)
    hl_register(params, registry, 5)
    with pytest.raises(DuplicateId):
        hl_register(params, registry, 5)


def test_hl_stale_and_future_timestamps():
    params = small_params(p=1019, delta_t=10)
    registry = Registry(Scheme.HL)
    cred = hl_register(params, registry, 77)
    msg = hl_login(cred, 500, 9)
    assert hl_authenticate(params, registry, msg, 511).reason is Reason.STALE_TIMESTAMP
    assert hl_authenticate(params, registry, msg, 499).reason is Reason.STALE_TIMESTAMP
    assert hl_authenticate(params, registry, msg, 510).accepted


def test_scheme_mismatch(t3_owf):
    params = small_params(owf=t3_owf)
    registry = Registry(Scheme.HL)
    cred = hl_register(params, registry, 5)
    with pytest.raises(SchemeMismatch):
        prop_login(cred, T0, 4)
    msg = hl_login(cred, T0, 4, t3_owf)
    with pytest.raises(SchemeMismatch):
        kumar_authenticate(params, Registry(Scheme.KUMAR), msg, T0)
    with pytest.raises(SchemeMismatch):
        slh_authenticate(params, registry, dataclasses.replace(msg, scheme=Scheme.SLH), T0)
    with pytest.raises(SchemeMismatch):
        LoginMessage(Scheme.KUMAR, 5, 4, 11, T0)


def test_credential_shape_is_enforced():
    with pytest.raises(ValueError):
        Credential(Scheme.HL, 5, 17, P, sid=3)
    with pytest.raises(ValueError):
        Credential(Scheme.PROPOSED, 9, 17, P, reg_number=12)
    with pytest.raises(ValueError):
        Credential(Scheme.KUMAR, 9, 17, P, sid=4)


def test_auth_decision_invariant():
    with pytest.raises(ValueError):
        AuthDecision(True, Reason.REPLAY)
    with pytest.raises(ValueError):
        AuthDecision(False, Reason.OK)


def test_system_params_validation():
    s = fixed_secret()
    with pytest.raises(ValueError):
        SystemParams(23, s)  # below the 1024-bit default
    with pytest.raises(ValueError):
        SystemParams(21, s, min_bits=2)
    with pytest.raises(ValueError):
        SystemParams(23, s, delta_t=0, min_bits=2)
    with pytest.raises(ValueError):
        SystemParams(23, fixed_secret(22), min_bits=2)


# --- Shen-Lin-Hwang / Kumar ----------------------------------------------


def test_slh_registration_uses_shadow_identity():
    params = small_params(p=1019)
    registry = Registry(Scheme.SLH)
    cred = slh_register(params, registry, 321)
    assert cred.sid == shadow(params.secret, 321, 1019)
    assert cred.pw == naive_pow(cred.sid, X_S, 1019)
    other = slh_register(params, registry, 322)
    assert other.sid != cred.sid
    with pytest.raises(DuplicateId):
        slh_register(params, registry, 321)
    msg = slh_login(cred, 40, 17)
    assert msg.identity == cred.sid
    assert slh_authenticate(params, registry, msg, 40).accepted


def test_slh_at_p23_against_oracle():
    params = small_params()
    registry = Registry(Scheme.SLH)
    cred = slh_register(params, registry, 5)
    assert cred.pw == naive_pow(cred.sid, X_S, P)


def test_kumar_registration_and_round_trip():
    params = small_params(p=1019)
    registry = Registry(Scheme.KUMAR)
    cred = kumar_register(params, registry, 321)
    assert cred.c_id == check_digit(params.secret, cred.sid, params.digits)
    assert cred.pw == naive_pow(cred.sid, X_S, 1019)
    assert (cred.sid, cred.c_id, cred.pw) == (shadow(params.secret, 321, 1019), cred.c_id, cred.pw)
    msg = kumar_login(cred, 40, 17)
    assert (msg.identity, msg.c_id) == (cred.sid, cred.c_id)
    assert kumar_authenticate(params, registry, msg, 40).accepted


def test_kumar_step_order():
    params = small_params(p=1019, delta_t=5)
    registry = Registry(Scheme.KUMAR)
    cred = kumar_register(params, registry, 321)
    msg = kumar_login(cred, 40, 17)
    wrong_cid = (msg.c_id + 1) % 10**6
    # bad format beats everything
    assert kumar_authenticate(params, registry, dataclasses.replace(msg, identity=1, c_id=wrong_cid), 99).reason is Reason.BAD_ID_FORMAT
    # bad check digit beats staleness and bad c2
    bad = dataclasses.replace(msg, c_id=wrong_cid, c2=msg.c2 ^ 1)
    assert kumar_authenticate(params, registry, bad, 99).reason is Reason.BAD_CHECK_DIGIT
    # staleness beats bad c2
    assert kumar_authenticate(params, registry, dataclasses.replace(msg, c2=msg.c2 ^ 1), 99).reason is Reason.STALE_TIMESTAMP
    assert kumar_authenticate(params, registry, dataclasses.replace(msg, c2=msg.c2 ^ 1), 40).reason is Reason.VERIFY_FAILED


# --- proposed -------------------------------------------------------------


def test_proposed_worked_fixture(t3_owf):
    params = small_params(owf=t3_owf)
    registry = Registry(Scheme.PROPOSED)
    cred = prop_register(params, registry, 9, random.Random(0), reg_number=12)
    assert cred.pw == 17
    assert cred.c_id == check_digit(params.secret, 5, params.digits)
    msg = prop_login(cred, T0, 4, t3_owf)
    assert (msg.identity, msg.reg_number, msg.c_id, msg.c1, msg.c2) == (9, 12, cred.c_id, 4, 13)
    assert prop_authenticate(params, registry, msg, T0).accepted


def test_proposed_duplicate_identity(rng):
    params = small_params(p=65521)
    registry = Registry(Scheme.PROPOSED)
    a = prop_register(params, registry, 4242, rng)
    b = prop_register(params, registry, 4242, rng)
    assert a.reg_number != b.reg_number and a.pw != b.pw and a.c_id != b.c_id
    with pytest.raises(DuplicateId):
        prop_register(params, registry, 77, rng, reg_number=a.reg_number)
    assert prop_authenticate(params, registry, prop_login(a, 10, 99), 10).accepted
    assert prop_authenticate(params, registry, prop_login(b, 10, 99), 10).accepted


def test_proposed_credentials_do_not_cross_authenticate(rng):
    params = small_params(p=65521)
    registry = Registry(Scheme.PROPOSED)
    a = prop_register(params, registry, 4242, rng)
    b = prop_register(params, registry, 4242, rng)
    # A's card with B's R: check digit no longer matches ID ^ R
    msg = prop_login(dataclasses.replace(a, reg_number=b.reg_number), 10, 99)
    assert prop_authenticate(params, registry, msg, 10).reason is Reason.BAD_CHECK_DIGIT
    # A's card with all of B's public fields but A's password
    msg = prop_login(dataclasses.replace(a, reg_number=b.reg_number, c_id=b.c_id), 10, 99)
    assert prop_authenticate(params, registry, msg, 10).reason is Reason.VERIFY_FAILED


def test_proposed_tampered_r(t3_owf):
    params = small_params(p=1019)
    registry = Registry(Scheme.PROPOSED)
    cred = prop_register(params, registry, 300, random.Random(1))
    msg = prop_login(cred, 5, 7)
    for delta in (1, 2, 4, 64):
        forged = dataclasses.replace(msg, reg_number=msg.reg_number ^ delta)
        assert prop_authenticate(params, registry, forged, 5).reason in (Reason.BAD_CHECK_DIGIT, Reason.BAD_ID_FORMAT)
    paper = small_params(p=1019, mode=Mode.PAPER)
    forged = dataclasses.replace(msg, reg_number=msg.reg_number ^ 1)
    assert prop_authenticate(paper, registry, forged, 5).reason is Reason.BAD_CHECK_DIGIT


def test_proposed_nonce_boundary(t3_owf):
    params = small_params(p=1019)
    registry = Registry(Scheme.PROPOSED)
    cred = prop_register(params, registry, 300, random.Random(1))
    assert prop_authenticate(params, registry, prop_login(cred, 5, 1019 - 2), 5).accepted


def test_proposed_wrong_password_fails_verify():
    params = small_params(p=1019)
    registry = Registry(Scheme.PROPOSED)
    cred = prop_register(params, registry, 300, random.Random(1))
    msg = prop_login(dataclasses.replace(cred, pw=cred.pw * 2 % 1019), 5, 9)
    assert prop_authenticate(params, registry, msg, 5).reason is Reason.VERIFY_FAILED


def test_proposed_rejects_bad_registration_number():
    params = small_params(p=1019)
    registry = Registry(Scheme.PROPOSED)
    with pytest.raises(BadIdFormat):
        prop_register(params, registry, 300, random.Random(1), reg_number=300)  # ID ^ R = 0
    with pytest.raises(BadIdFormat):
        prop_register(params, registry, 1, random.Random(1))


# --- modes, registry membership, replay ---------------------------------


@pytest.mark.parametrize("scheme", list(Scheme))
def test_membership_is_checked_only_in_hardened_mode(scheme, rng):
    hardened = small_params(p=1019)
    paper = small_params(p=1019, mode=Mode.PAPER)
    registry = Registry(scheme)
    cred = register(hardened, registry, 300, rng)
    msg = login(cred, 5, 9)
    assert authenticate(hardened, registry, msg, 5).accepted
    empty = Registry(scheme)
    assert authenticate(hardened, empty, msg, 6).reason is Reason.BAD_ID_FORMAT
    assert authenticate(paper, empty, msg, 6).accepted


@pytest.mark.parametrize("scheme", list(Scheme))
def test_replay_cache(scheme, rng):
    hardened = small_params(p=1019, delta_t=10)
    paper = small_params(p=1019, delta_t=10, mode=Mode.PAPER)
    registry = Registry(scheme)
    cred = register(hardened, registry, 300, rng)
    msg = login(cred, 50, 9)
    assert authenticate(hardened, registry, msg, 50).accepted
    assert authenticate(hardened, registry, msg, 55).reason is Reason.REPLAY
    assert authenticate(paper, Registry(scheme), msg, 55).accepted
    # cache entries expire after two windows
    registry.check_replay((), 50 + 21, 20)
    assert registry.seen == {}


def test_rejected_logins_are_not_cached():
    params = small_params(p=1019)
    registry = Registry(Scheme.HL)
    cred = hl_register(params, registry, 300)
    msg = hl_login(cred, 50, 9)
    assert hl_authenticate(params, registry, dataclasses.replace(msg, c2=msg.c2 ^ 1), 50).reason is Reason.VERIFY_FAILED
    assert hl_authenticate(params, registry, msg, 50).accepted


@pytest.mark.parametrize("field_name", ["c1", "c2"])
def test_out_of_range_ciphertexts(field_name):
    params = small_params(p=1019)
    registry = Registry(Scheme.HL)
    msg = hl_login(hl_register(params, registry, 300), 50, 9)
    for bad in (0, 1019, 5000):
        forged = dataclasses.replace(msg, **{field_name: bad})
        assert hl_authenticate(params, registry, forged, 50).reason is Reason.VERIFY_FAILED


# --- algebra --------------------------------------------------------------


def test_verification_identity_exhaustive_p23():
    """c2 * (c1**x_s)**-1 == m**t for every base, nonce and exponent at p = 23."""
    for x_s in (3, 7, 21):
        for base in range(1, P):
            pw = naive_pow(base, x_s, P)
            # T = t pins h(T ^ pw) = t
            handle = injected_owf([(t, pw, t) for t in range(P - 1)])
            for m_base in {base, 9}:
                for r in range(2, P - 1):
                    for t in range(P - 1):
                        c1, c2 = login_core(base, m_base, pw, t, r, P, handle)
                        assert c2 * pow(naive_pow(c1, x_s, P), -1, P) % P == naive_pow(m_base, t, P)
                        assert verify_core(x_s, c1, c2, m_base, pw, t, P, handle)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(list(Scheme)), st.integers(8, 16), st.integers(0, 2**32))
def test_completeness_property(scheme, bits, seed):
    rng = random.Random(seed)
    p = gen_prime(bits, rng)
    params = SystemParams(p, ServerSecret.generate(p, rng), min_bits=8)
    registry = Registry(scheme)
    cred = register(params, registry, rng.randint(2, p - 2), rng)
    assert cred.pw == pow(cred.registration_base, params.x_s, p)
    t = rng.randint(0, 2**40)
    msg = login(cred, t, rng.randint(2, p - 2))
    assert authenticate(params, registry, msg, t + rng.randint(0, params.delta_t)).accepted
