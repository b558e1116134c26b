"""Command-line driver.

    smartcard-auth setup --bits 16 --seed 1
    smartcard-auth register 4242 --scheme proposed --seed 2
    smartcard-auth login --credential cred.json --seed 3 [--delay N] [--tamper c2]
    smartcard-auth attack matrix --seed 7 [--prime 23]
    smartcard-auth costs [--format json]

Every flag can also come from an environment variable named SCAUTH_<FLAG>,
e.g. SCAUTH_SEED=7 or SCAUTH_DELTA_T=30. Command-line flags win.

Exit codes: 0 success, 1 operational error, 2 authentication rejected,
3 attack matrix or cost table mismatch, 64 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import random
import sys
from pathlib import Path

from . import attacks, channel, costmodel, storage
from .primitives import BadKeyFile, ServerSecret
from .schemes import (
    DEFAULT_DELTA_T,
    DEFAULT_DIGITS,
    Mode,
    Registry,
    Scheme,
    SchemeError,
    authenticate,
    login,
    register,
    setup,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2
EXIT_MISMATCH = 3
EXIT_USAGE = 64

ENV_PREFIX = "SCAUTH_"
MIN_CLI_BITS = 8
TAMPER_FIELDS = {"id": "identity", "r": "reg_number", "cid": "c_id", "c1": "c1", "c2": "c2", "t": "t_stamp"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _add(parser: argparse.ArgumentParser, flag: str, **kw) -> None:
    env_default = _env(flag.lstrip("-"))
    if env_default is not None:
        kw["default"] = kw.get("type", str)(env_default)
        kw.pop("required", None)
    parser.add_argument(flag, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smartcard-auth", description="Smart-card remote user authentication testbed")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    _add(common, "--dir", default=".", help="directory holding params.json, server.key and registries")
    _add(common, "--seed", type=int, default=None, help="seed for every random choice")

    p = sub.add_parser("setup", parents=[common], help="generate p, x_s and the server keys")
    _add(p, "--bits", type=int, default=1024)
    _add(p, "--digits", type=int, default=DEFAULT_DIGITS)
    _add(p, "--delta-t", type=int, default=DEFAULT_DELTA_T)
    _add(p, "--mode", choices=[m.value for m in Mode], default=Mode.HARDENED.value)

    p = sub.add_parser("register", parents=[common], help="issue a credential")
    p.add_argument("identity", type=int)
    _add(p, "--scheme", choices=[s.value for s in Scheme], required=True)
    _add(p, "--out", default=None, help="credential file (default: derived from scheme and identity)")

    p = sub.add_parser("login", parents=[common], help="log in with a credential and authenticate")
    _add(p, "--credential", required=True)
    _add(p, "--time", type=int, default=1000, help="send tick T")
    _add(p, "--delay", type=int, default=0, help="transmission delay in ticks")
    _add(p, "--tamper", choices=sorted(TAMPER_FIELDS), default=None, help="flip the low bit of a field")
    _add(p, "--mode", choices=[m.value for m in Mode], default=None, help="override the mode in params.json")

    p = sub.add_parser("attack", parents=[common], help="run an attack or the full matrix")
    p.add_argument("attack", choices=["matrix", *sorted({a for v in attacks.ATTACKS.values() for a in v})])
    _add(p, "--scheme", choices=[s.value for s in Scheme], default=None)
    _add(p, "--trials", type=int, default=100)
    _add(p, "--guess-trials", type=int, default=None)
    _add(p, "--prime", type=int, default=None, help="fixed small prime (default: random 8-16 bit primes)")
    _add(p, "--digits", type=int, default=DEFAULT_DIGITS)
    _add(p, "--mode", choices=[m.value for m in Mode], default=Mode.PAPER.value)
    _add(p, "--format", choices=["text", "json"], default="text")

    p = sub.add_parser("costs", parents=[common], help="print the operation-count table")
    _add(p, "--format", choices=["text", "json"], default="text")
    return parser


def _rng(seed: int | None) -> random.Random:
    return random.SystemRandom() if seed is None else random.Random(seed)


def _paths(directory: str) -> tuple[Path, Path]:
    d = Path(directory)
    return d / "params.json", d / "server.key"


def _registry_path(directory: str, scheme: Scheme) -> Path:
    return Path(directory) / f"registry-{scheme.value}.json"


def _load_params(directory: str, mode: str | None = None):
    params_path, key_path = _paths(directory)
    secret = ServerSecret.from_bytes(key_path.read_bytes())
    params = storage.params_from_text(storage.read_text(params_path), secret)
    if mode is not None:
        params = dataclasses.replace(params, mode=Mode(mode))
    return params


def _load_registry(directory: str, scheme: Scheme) -> Registry:
    path = _registry_path(directory, scheme)
    if path.exists():
        return storage.registry_from_text(storage.read_text(path))
    return Registry(scheme)


def cmd_setup(args) -> int:
    if args.bits < MIN_CLI_BITS:
        raise UsageError(f"--bits must be >= {MIN_CLI_BITS}")
    params = setup(
        args.bits,
        _rng(args.seed),
        delta_t=args.delta_t,
        digits=args.digits,
        mode=Mode(args.mode),
        min_bits=min(args.bits, MIN_CLI_BITS),
    )
    params_path, key_path = _paths(args.dir)
    Path(args.dir).mkdir(parents=True, exist_ok=True)
    storage.write_text(params_path, storage.params_to_text(params))
    key_path.write_bytes(params.secret.to_bytes())
    print(f"p = {params.p}")
    print(f"bits = {params.p.bit_length()}")
    print(f"delta_t = {params.delta_t}")
    print(f"digits = {params.digits}")
    print(f"mode = {params.mode.value}")
    return EXIT_OK


def cmd_register(args) -> int:
    scheme = Scheme(args.scheme)
    params = _load_params(args.dir)
    registry = _load_registry(args.dir, scheme)
    cred = register(params, registry, args.identity, _rng(args.seed))
    out = args.out
    if out is None:
        suffix = f"-{cred.reg_number}" if cred.reg_number is not None else ""
        out = Path(args.dir) / f"cred-{scheme.value}-{cred.id}{suffix}.json"
    storage.write_text(out, storage.credential_to_text(cred))
    storage.write_text(_registry_path(args.dir, scheme), storage.registry_to_text(registry))
    print(f"credential = {out}")
    for name in ("id", "sid", "reg_number", "c_id"):
        value = getattr(cred, name)
        if value is not None:
            print(f"{name} = {value}")
    return EXIT_OK


def cmd_login(args) -> int:
    cred = storage.credential_from_text(storage.read_text(args.credential))
    params = _load_params(args.dir, args.mode)
    if cred.p != params.p:
        raise UsageError("credential was issued under different parameters")
    registry = _load_registry(args.dir, cred.scheme)
    rng = _rng(args.seed)
    clock = channel.SimClock(now=args.time, delay=args.delay)
    msg = login(cred, clock.now, rng.randint(2, params.p - 2), storage.default_owf(cred.owf_id))
    if args.tamper:
        name = TAMPER_FIELDS[args.tamper]
        if getattr(msg, name) is None:
            raise UsageError(f"{cred.scheme.value} messages have no {args.tamper} field")
        msg = dataclasses.replace(msg, **{name: getattr(msg, name) ^ 1})
    frame, arrival = channel.deliver(channel.encode(msg), clock)
    decision = authenticate(params, registry, channel.decode(frame), arrival)
    storage.write_text(_registry_path(args.dir, cred.scheme), storage.registry_to_text(registry))
    print(f"frame = {frame.hex()}")
    print(f"sent = {msg.t_stamp}")
    print(f"arrival = {arrival}")
    print(f"decision = {'accepted' if decision.accepted else 'rejected'} {decision.reason.value}")
    return EXIT_OK if decision.accepted else EXIT_REJECTED


def _row_json(row: attacks.MatrixRow) -> dict:
    return {
        "scheme": row.scheme.value,
        "attack": row.attack,
        "trials": row.trials,
        "accepted": row.accepted,
        "expected": row.expect.value,
        "expected_reason": row.expect_reason.value if row.expect_reason else None,
        "bounds": [row.low, row.high],
        "reasons": {k.value: v for k, v in sorted(row.reasons.items())},
        "pass": row.passed,
    }


def cmd_attack(args) -> int:
    if args.seed is None:
        raise UsageError("attack runs need --seed for reproducibility")
    schemes = [Scheme(args.scheme)] if args.scheme else list(Scheme)
    cells = []
    for scheme in schemes:
        for name in attacks.ATTACKS[scheme]:
            if args.attack in ("matrix", name, attacks.ALIASES.get(name)):
                cells.append((scheme, name))
    if not cells:
        raise UsageError(f"attack {args.attack!r} does not apply to {args.scheme}")
    rows = attacks.run_attack_matrix(
        args.trials,
        args.seed,
        p=args.prime,
        digits=args.digits,
        mode=Mode(args.mode),
        guess_trials=args.guess_trials,
        cells=cells,
    )
    if args.format == "json":
        print(json.dumps([_row_json(r) for r in rows], indent=2))
    else:
        for row in rows:
            print(row.render())
    ok = all(r.passed for r in rows)
    print(f"verdict = {'as expected' if ok else 'MISMATCH'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_costs(args) -> int:
    table = costmodel.cost_table()
    print(costmodel.render_json(table) if args.format == "json" else costmodel.render_text(table), end="")
    bad = costmodel.compare(table)
    for scheme, phase, got, want in bad:
        print(f"mismatch: {scheme.value} {phase}: measured {got}, published {want}", file=sys.stderr)
    return EXIT_MISMATCH if bad else EXIT_OK


COMMANDS = {
    "setup": cmd_setup,
    "register": cmd_register,
    "login": cmd_login,
    "attack": cmd_attack,
    "costs": cmd_costs,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"smartcard-auth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemeError, storage.BadFile, BadKeyFile, OSError, ValueError) as exc:
        print(f"smartcard-auth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
