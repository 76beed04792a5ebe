"""Flat ``key = value`` run configuration.

Grammar, one entry per line::

    # comment
    J_q_tau = 0.1
    disorder_range = [0, 3]       # bracketed, comma separated
    qubit_state = plus            # bare words for enum values
    plot = true

Unknown keys are rejected and missing keys take the RunConfig defaults.
"""

import re
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.errors import ConfigError, OutputError
from app.tools.types import RunConfig

KEY_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
NUMBER_PATTERN = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
INT_PATTERN = re.compile(r"[+-]?(0[bB][01]+|0[xX][0-9a-fA-F]+|\d+)")


def _scalar(token: str, line: int, column: int) -> Any:
    token = token.strip()
    if not token:
        raise ConfigError("empty value", line=line, column=column)
    if token[0] in "\"'":
        if len(token) < 2 or token[-1] != token[0]:
            raise ConfigError("unterminated string", line=line, column=column)
        return token[1:-1]
    lowered = token.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if lowered in ("none", "null"):
        return None
    if INT_PATTERN.fullmatch(token):
        return int(token, 0) if re.search(r"0[bBxX]", token) else int(token)
    if NUMBER_PATTERN.fullmatch(token):
        return float(token)
    if KEY_PATTERN.fullmatch(token) or re.fullmatch(r"[\w./-]+", token):
        return token
    raise ConfigError(f"cannot read value {token!r}", line=line, column=column)


def _value(text: str, line: int, column: int) -> Any:
    stripped = text.strip()
    column += len(text) - len(text.lstrip())
    if stripped.startswith("["):
        if not stripped.endswith("]"):
            raise ConfigError("list is missing its closing ']'", line=line, column=column + len(stripped))
        body = stripped[1:-1]
        if not body.strip():
            return []
        items, offset = [], column + 1
        for part in body.split(","):
            items.append(_scalar(part, line, offset + len(part) - len(part.lstrip())))
            offset += len(part) + 1
        return items
    return _scalar(stripped, line, column)


def parse_entries(text: str) -> dict[str, Any]:
    entries: dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            column = len(line) - len(line.lstrip()) + 1
            raise ConfigError("expected 'key = value'", line=number, column=column)
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        key_column = len(key_part) - len(key_part.lstrip()) + 1
        if not KEY_PATTERN.fullmatch(key):
            raise ConfigError(f"invalid key {key!r}", line=number, column=key_column)
        if key in entries:
            raise ConfigError("duplicate key", key=key, line=number, column=key_column)
        entries[key] = _value(value_part, number, len(key_part) + 2)
    return entries


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    entries = parse_entries(text)
    try:
        return RunConfig.model_validate(entries)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = ".".join(str(part) for part in error["loc"]) or None
        raise ConfigError(error["msg"], key=key) from exc


def load_config(path: Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
