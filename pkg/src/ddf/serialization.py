"""Canonical JSON encoding and content hashing.

Documents keep their builder's field order (never sorted) and are encoded
without whitespace, so equal structures serialize to identical bytes and
hashes are byte-stable across runs.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def canonical_bytes(doc) -> bytes:
    return json.dumps(doc, separators=(",", ":"), allow_nan=False).encode()


def canonical_dumps(doc) -> str:
    return json.dumps(doc, separators=(",", ":"), allow_nan=False)


def pretty_dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def document_hash(doc) -> str:
    return sha256_hex(canonical_bytes(doc))


def file_hash(path: Path) -> str:
    return sha256_hex(Path(path).read_bytes())


def write_atomic(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)
