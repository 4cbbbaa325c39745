"""Utility functions for defcohom."""

import json
import os
from pathlib import Path
from typing import Any, Optional, Union

from src import DEFAULT_SEED, SEED_ENV_VAR
from src.errors import UsageError


def ensure_dir(path: Path) -> Path:
    """Ensure directory exists, create if not.

    Args:
        path: Directory path

    Returns:
        The path (created if needed)
    """
    path.mkdir(parents=True, exist_ok=True)
    return path


def canonical_json(data: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_output(text: str, out: Optional[Union[str, Path]] = None) -> None:
    """Write a result to ``out`` (parents created) or to standard output."""
    if out is None:
        print(text, end="" if text.endswith("\n") else "\n")
        return
    path = Path(out)
    ensure_dir(path.parent)
    path.write_text(text if text.endswith("\n") else text + "\n")


def parse_seed(value: Union[str, int]) -> int:
    """Decimal or 0x-hex seed."""
    if isinstance(value, int):
        return value
    try:
        return int(value, 0)
    except ValueError as exc:
        raise UsageError(f"Invalid seed {value!r}; use a decimal or 0x-prefixed integer") from exc


def resolve_seed(flag: Optional[str] = None) -> int:
    """Seed from the CLI flag, else the environment, else DEFAULT_SEED."""
    if flag is not None:
        return parse_seed(flag)
    env = os.environ.get(SEED_ENV_VAR)
    if env:
        return parse_seed(env.strip())
    return DEFAULT_SEED


def truncate_text(text: str, max_length: int = 60) -> str:
    """Truncate text with ellipsis if too long.

    Args:
        text: Text to truncate
        max_length: Maximum length

    Returns:
        Truncated text
    """
    if len(text) <= max_length:
        return text
    return text[: max_length - 3] + "..."
