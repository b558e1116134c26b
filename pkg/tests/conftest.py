import random

import pytest

from smartcard_auth.primitives import OwfHandle, ServerSecret, encode_stamp_xor_pw
from smartcard_auth.schemes import Mode, SystemParams

P = 23
X_S = 7
T0 = 100


def fixed_secret(x_s=X_S):
    return ServerSecret(b"shadow-key-for-tests-0123456789a", b"check-key-for-tests-0123456789ab", x_s)


def injected_owf(entries, p=P):
    """Handle where h(T ^ pw) = t for each (T, pw, t) in ``entries``."""
    return OwfHandle.injected({encode_stamp_xor_pw(T, pw, p): t for T, pw, t in entries})


def small_params(p=P, *, owf=None, mode=Mode.HARDENED, digits=6, delta_t=60, x_s=X_S):
    kw = {} if owf is None else {"owf": owf}
    return SystemParams(p, fixed_secret(x_s), mode=mode, digits=digits, delta_t=delta_t, min_bits=2, **kw)


@pytest.fixture
def rng():
    return random.Random(20240501)


@pytest.fixture
def t3_owf():
    # pins t = 3 for the worked example: pw = 17 at T = 100
    return injected_owf([(T0, 17, 3)])


# --- acceptance reporting -------------------------------------------------

_criteria: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    number, title = marker
    _, outcomes = _criteria.setdefault(number, (title, []))
    if report.when == "call" or report.outcome != "passed":
        outcomes.append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result()._criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, outcomes = _criteria[number]
        ok = outcomes and all(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
