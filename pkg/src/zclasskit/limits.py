"""Resource bounds, overridable via environment or per call.

ZK_MAX_GROUP  - largest group order instantiate() will accept (default 2e6).
ZK_MAX_FIELD  - largest field order make_field() will accept (default 2^20).
"""
from __future__ import annotations

import os

DEFAULT_MAX_GROUP = 2_000_000
DEFAULT_MAX_FIELD = 2**20

# Cap on brute-force enumerations inside witness searches (unit groups of
# centralizer algebras and the like). Not user-facing.
SEARCH_CAP = 4_000_000


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def max_group(override: int | None = None) -> int:
    if override is not None:
        return override
    return _env_int("ZK_MAX_GROUP", DEFAULT_MAX_GROUP)


def max_field(override: int | None = None) -> int:
    if override is not None:
        return override
    return _env_int("ZK_MAX_FIELD", DEFAULT_MAX_FIELD)
