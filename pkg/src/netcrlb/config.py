"""Flat ``key = value`` parameter files and the preset parameter sets.

Keys mirror :class:`~netcrlb.localizability.NetworkParams` plus ``sigma_r``,
``N`` and ``M``.  Any key may carry a ``_db`` suffix (``gamma_db``,
``beta_db``) to give a power ratio in dB; ``shadow_sigma_db`` is always dB.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .localizability import NetworkParams

NETWORK_KEYS = ("alpha", "lam", "shadow_sigma_db", "q", "gamma", "beta", "K")
EXTRA_KEYS = ("sigma_r", "N", "M")
INT_KEYS = ("K", "N")

HEX_500M_DENSITY = 2.0 / (np.sqrt(3.0) * 500.0 ** 2)

_BASE = {
    "alpha": 4.0,
    "lam": HEX_500M_DENSITY,
    "shadow_sigma_db": 8.0,
    "M": 200.0,
    "N": 10,
    "q": 1.0,
}

#: One parameter set per numerical study (the swept parameter at a middle value).
PRESETS = {
    "reuse": {**_BASE, "beta": 10.0, "gamma": 100.0, "K": 1, "sigma_r": 20.0},
    "load": {**_BASE, "beta": 10.0, "gamma": 100.0, "K": 2, "q": 0.5, "sigma_r": 20.0},
    "gain": {**_BASE, "beta": 10 ** 0.5, "gamma": 10 ** 2.0, "K": 2, "sigma_r": 30.0},
    "ranging": {**_BASE, "beta": 10.0, "gamma": 100.0, "K": 3, "sigma_r": 40.0},
}

#: Values swept in each study.
SWEEPS = {
    "reuse": ("K", [1, 2, 3, 4]),
    "load": ("q", [1.0, 0.75, 0.5, 0.25]),
    "gain": ("gamma_db", [10.0, 15.0, 20.0, 25.0, 30.0]),
    "ranging": ("sigma_r", [20.0, 40.0, 60.0, 80.0]),
}


class ConfigParseError(ValueError):
    pass


def normalize(key: str, value) -> tuple[str, float]:
    """Map one raw key/value to its canonical (linear-unit) form."""
    key = key.strip()
    if key.endswith("_db") and key != "shadow_sigma_db":
        base = key[:-3]
        return base, 10.0 ** (float(value) / 10.0)
    if key not in NETWORK_KEYS + EXTRA_KEYS:
        raise ConfigParseError(f"unknown parameter {key!r}")
    if key in INT_KEYS:
        v = float(value)
        if v != int(v):
            raise ConfigParseError(f"{key} must be an integer")
        return key, int(v)
    return key, float(value)


def parse_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected 'key = value'")
        k, v = line.split("=", 1)
        try:
            key, val = normalize(k, v.strip())
        except ValueError as exc:
            raise ConfigParseError(f"line {lineno}: {exc}") from None
        out[key] = val
    return out


def load(path) -> dict:
    with open(path) as fh:
        return parse_text(fh.read())


def default_config() -> dict:
    """The shipped default parameter file."""
    return parse_text(resources.files("netcrlb").joinpath("data/default.cfg").read_text())


def network_params(cfg: dict) -> NetworkParams:
    kw = {k: cfg[k] for k in NETWORK_KEYS if k in cfg}
    return NetworkParams(**kw)
