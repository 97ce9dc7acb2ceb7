"""Flat ``key = value`` configuration files.

Keys are the :class:`~risrelay.channel.SystemConfig` field names plus the
run-control keys below; anything else is rejected so a typo cannot silently
fall back to a default.

    # comments and blank lines are ignored
    n1 = 2
    n2 = 3
    k_relays = 2
    rate_threshold = 0.5
    snr_grid_db = 0:40:5        # start:stop:step (inclusive) or a comma list
    i_relay = 1
    rho_i_relay_db = 0
    trials = 1000000
    seed = 7
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..channel import SystemConfig

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "parse_grid", "METHODS"]

METHODS = ("analytic", "asymptotic", "montecarlo", "oracle")
_INT_FIELDS = {"n1", "n2", "k_relays", "i_relay", "i_dest"}
_SYSTEM_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}
_RUN_FIELDS = {"snr_grid_db", "trials", "seed", "methods", "workers"}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class RunConfig:
    system: dict
    snr_grid_db: tuple[float, ...] | None = None
    trials: int | None = None
    seed: int | None = None
    methods: tuple[str, ...] | None = None
    workers: int | None = None

    def base(self, snr_db: float | None = None) -> SystemConfig:
        values = dict(self.system)
        if snr_db is not None:
            values["snr_db"] = snr_db
        elif "snr_db" not in values:
            if self.snr_grid_db:
                raise ConfigError("single-point commands need snr_db (the file only has snr_grid_db)")
            raise ConfigError("missing key: snr_db")
        try:
            return SystemConfig(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def grid(self) -> tuple[float, ...]:
        if self.snr_grid_db is not None:
            return self.snr_grid_db
        if "snr_db" in self.system:
            return (float(self.system["snr_db"]),)
        raise ConfigError("missing key: snr_grid_db (or snr_db)")


def parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ConfigError(f"grid range must be start:stop:step with step > 0, got {text!r}")
            start, stop, step = parts
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            grid = tuple(float(round(start + i * step, 12)) for i in range(max(count, 0)))
        elif text == "":
            grid = ()
        else:
            grid = tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad grid {text!r}") from None
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("snr_grid_db must be strictly increasing")
    return grid


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ConfigError(f"methods must be a non-empty subset of {METHODS}, got {text!r}")
    return methods


def parse_config(text: str) -> RunConfig:
    system: dict = {}
    run: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in system or key in run:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _INT_FIELDS:
                system[key] = int(value)
            elif key in _SYSTEM_FIELDS:
                system[key] = float(value)
            elif key == "snr_grid_db":
                run[key] = parse_grid(value)
            elif key in ("trials", "workers"):
                run[key] = int(value)
            elif key == "seed":
                run[key] = int(value, 0)
            elif key == "methods":
                run[key] = _parse_methods(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from None
    for key in ("n1", "n2", "k_relays", "rate_threshold"):
        if key not in system:
            raise ConfigError(f"missing key: {key}")
    return RunConfig(system=system, **run)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)
