"""Module contains TOML / JSON run configuration loading."""
from __future__ import annotations

import argparse
import json
import tomllib
from pathlib import Path
from typing import Any

from .exceptions import ConfigError


__all__ = (
    "load_config",
    "section_for",
    "validate_options",
)


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a TOML or JSON config file into a mapping."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        msg = f"Can not read config {path}: {error.strerror}."
        raise ConfigError(msg) from error
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as error:
        msg = f"Malformed config {path}: {error}"
        raise ConfigError(msg) from error
    if not isinstance(data, dict):
        msg = "Config must be a table of options."
        raise ConfigError(msg)
    return data


def section_for(data: dict[str, Any], command: str) -> dict[str, Any]:
    """Options of ``command``: its own table if present, else the top level."""
    section = data.get(command)
    if isinstance(section, dict):
        return section
    return {key: value for key, value in data.items() if not isinstance(value, dict)}


def _matches(action: argparse.Action, value: Any) -> bool:
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        return isinstance(value, bool)
    if action.nargs in {"+", "*"}:
        values = value if isinstance(value, list) else [value]
    else:
        values = [value]
    kind = action.type
    for item in values:
        if isinstance(item, bool):
            return False
        if kind is int and not isinstance(item, int):
            return False
        if kind is float and not isinstance(item, (int, float)):
            return False
        if kind in {None, str} and not isinstance(item, str):
            return False
        if action.choices is not None and item not in action.choices:
            return False
    return True


def validate_options(
    parser: argparse.ArgumentParser,
    options: dict[str, Any],
) -> dict[str, Any]:
    """Check config keys and value types against ``parser`` options.

    Keys use the option names with dashes or underscores. Returns parser
    defaults keyed by destination.
    """
    actions = {
        action.dest: action
        for action in parser._actions
        if action.option_strings and action.dest != "help"
    }
    resolved: dict[str, Any] = {}
    for key, value in options.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None:
            msg = f"Unknown config key '{key}'."
            raise ConfigError(msg)
        if not _matches(action, value):
            msg = f"Bad value for config key '{key}': {value!r}."
            raise ConfigError(msg)
        if action.nargs in {"+", "*"} and not isinstance(value, list):
            value = [value]
        if action.type is float:
            value = [float(item) for item in value] if isinstance(value, list) else float(value)
        resolved[dest] = value
    return resolved
