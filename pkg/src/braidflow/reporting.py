"""Deterministic artifact emission: canonical JSON, config hashes, atomic IO."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path


def _default(obj):
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def canonical_json(payload) -> str:
    """Sorted-key JSON with deterministic float formatting (repr)."""
    return json.dumps(payload, sort_keys=True, default=_default,
                      separators=(",", ":"))


def config_hash(payload) -> str:
    """Stable 16-hex-digit digest of a configuration mapping."""
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()[:16]


def atomic_write_text(path: Path | str, text: str) -> None:
    """Write via a temp file in the same directory plus rename, so no
    partially written artifact can ever be observed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
