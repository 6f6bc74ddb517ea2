"""Experiment configuration: TOML defaults shipped with the package, overridden by a user file."""

from __future__ import annotations

import copy
import sys
from importlib import resources

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def defaults() -> dict:
    with resources.files("hirota").joinpath("defaults.toml").open("rb") as fh:
        return tomllib.load(fh)


def merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the TOML file at ``path`` (if any), then ``overrides``."""
    cfg = defaults()
    if path is not None:
        with open(path, "rb") as fh:
            user = tomllib.load(fh)
        unknown = set(user) - set(cfg)
        if unknown:
            raise ValueError(f"unknown config section(s): {sorted(unknown)}")
        cfg = merge(cfg, user)
    if overrides:
        cfg = merge(cfg, overrides)
    return cfg
