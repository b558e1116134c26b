"""On-disk formats.

Public parameters, credentials and registries are JSON documents with a
fixed key order (listed in each ``*_FIELDS`` tuple) and integers written as
plain decimal numbers, so saving a loaded file reproduces it byte for byte.
The server key is a separate binary file, see ``ServerSecret.to_bytes``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .primitives import SHA256, OwfHandle, ServerSecret
from .schemes import Credential, Mode, Registry, Scheme, SystemParams

FORMAT_VERSION = 1

PARAMS_FIELDS = ("format", "kind", "p", "owf", "delta_t", "digits", "mode", "min_bits")
CREDENTIAL_FIELDS = ("format", "kind", "scheme", "id", "pw", "p", "owf", "sid", "reg_number", "c_id")
REGISTRY_FIELDS = ("format", "kind", "scheme", "records", "used_r", "seen")


class BadFile(ValueError):
    pass


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _load(text: str, kind: str, fields: tuple) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadFile(str(exc)) from None
    if doc.get("kind") != kind:
        raise BadFile(f"expected a {kind} file")
    if doc.get("format") != FORMAT_VERSION:
        raise BadFile(f"unsupported {kind} format {doc.get('format')!r}")
    if tuple(doc) != fields:
        raise BadFile(f"{kind} fields out of order or missing")
    return doc


def params_to_text(params: SystemParams) -> str:
    if params.owf.algorithm != "sha256":
        raise BadFile("only the sha256 one-way function can be persisted")
    doc = dict(
        format=FORMAT_VERSION,
        kind="params",
        p=params.p,
        owf=params.owf.algorithm,
        delta_t=params.delta_t,
        digits=params.digits,
        mode=params.mode.value,
        min_bits=params.min_bits,
    )
    return _dump(doc)


def params_from_text(text: str, secret: ServerSecret) -> SystemParams:
    doc = _load(text, "params", PARAMS_FIELDS)
    if doc["owf"] != "sha256":
        raise BadFile(f"unknown one-way function {doc['owf']!r}")
    return SystemParams(
        doc["p"], secret, SHA256, doc["delta_t"], doc["digits"], Mode(doc["mode"]), doc["min_bits"]
    )


def credential_to_text(cred: Credential) -> str:
    doc = dict(
        format=FORMAT_VERSION,
        kind="credential",
        scheme=cred.scheme.value,
        id=cred.id,
        pw=cred.pw,
        p=cred.p,
        owf=cred.owf_id,
        sid=cred.sid,
        reg_number=cred.reg_number,
        c_id=cred.c_id,
    )
    return _dump(doc)


def credential_from_text(text: str) -> Credential:
    doc = _load(text, "credential", CREDENTIAL_FIELDS)
    return Credential(
        Scheme(doc["scheme"]),
        doc["id"],
        doc["pw"],
        doc["p"],
        doc["owf"],
        sid=doc["sid"],
        reg_number=doc["reg_number"],
        c_id=doc["c_id"],
    )


def _key_to_json(key):
    return list(key) if isinstance(key, tuple) else key


def _key_from_json(key):
    return tuple(key) if isinstance(key, list) else key


def registry_to_text(registry: Registry) -> str:
    doc = dict(
        format=FORMAT_VERSION,
        kind="registry",
        scheme=registry.scheme.value,
        records=[[_key_to_json(k), v] for k, v in sorted(registry.records.items())],
        used_r=sorted(registry.used_r),
        seen=[[list(part), t] for (part, t), _ in sorted(registry.seen.items())],
    )
    return _dump(doc)


def registry_from_text(text: str) -> Registry:
    doc = _load(text, "registry", REGISTRY_FIELDS)
    registry = Registry(Scheme(doc["scheme"]))
    for key, identity in doc["records"]:
        registry.records[_key_from_json(key)] = identity
        registry.ids.add(identity)
    registry.used_r.update(doc["used_r"])
    for part, t in doc["seen"]:
        registry.seen[(tuple(part), t)] = t
    return registry


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def default_owf(owf_id: str) -> OwfHandle:
    if owf_id != "sha256":
        raise BadFile(f"no built-in one-way function {owf_id!r}")
    return SHA256
