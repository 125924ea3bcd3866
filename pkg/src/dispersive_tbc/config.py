"""Run configuration: flat ``key = value`` files plus command-line overrides."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .solver import Coefficient, ProblemSpec

log = logging.getLogger(__name__)

EXPERIMENTS = ("airy_g0", "const_g", "variable_g", "kernels_dump", "converge_space", "converge_time")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str = "airy_g0"
    g_kind: str = "0"  # a number, or "cosine" for pi (1 + cos(pi (x + A) / (2A)))
    half_width: float = 6.0
    t_final: float = 2.0
    n_steps: int = 2048
    n_modes: int = 256
    c_radius: float | None = None  # None: 1 / (scaled final time), i.e. r^m = e
    snapshot_times: list = field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0])
    output_dir: str = "output"
    seed: int = 0
    sweep_g: list = field(default_factory=list)  # empty: just ``g``
    sweep_modes: list = field(default_factory=lambda: [16, 20, 24, 28, 32, 36, 40, 44, 48])
    ref_modes: int = 64
    sweep_steps: list = field(default_factory=lambda: [128, 256, 512, 1024])
    ref_steps: int = 16384
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if not self.t_final > 0:
            raise ConfigError("t_final must be positive")
        if not self.half_width > 0:
            raise ConfigError("half_width must be positive")
        if self.n_steps < 1 or self.n_modes < 8:
            raise ConfigError("need n_steps >= 1 and n_modes >= 8")
        if self.c_radius is not None and not self.c_radius > 0:
            raise ConfigError("c_radius must be positive")
        bad = [t for t in self.snapshot_times if t < 0 or t > self.t_final]
        if bad:
            raise ConfigError(f"snapshot times {bad} outside [0, {self.t_final}]")
        for g in self.g_list():
            coefficient(g, self.half_width)
        for name in ("n_steps", "n_modes"):
            v = getattr(self, name)
            if v & (v - 1):
                log.warning("%s = %d is not a power of two", name, v)
        return self

    def g_list(self) -> list[str]:
        return [str(g) for g in self.sweep_g] or [self.g_kind]

    def problem(self, g: str | None = None, n_steps: int | None = None, n_modes: int | None = None) -> ProblemSpec:
        return ProblemSpec(
            half_width=self.half_width,
            g=coefficient(self.g_kind if g is None else g, self.half_width),
            t_final=self.t_final,
            n_steps=self.n_steps if n_steps is None else n_steps,
            n_modes=self.n_modes if n_modes is None else n_modes,
            c_radius=self.c_radius,
        )


PRESETS = {
    "airy_g0": dict(g_kind="0", t_final=2.0, n_steps=2048, n_modes=256, snapshot_times=[0.0, 0.5, 1.0, 2.0]),
    "const_g": dict(g_kind="6", t_final=2.0, n_steps=16384, n_modes=256, snapshot_times=[0.0, 0.5, 1.0, 2.0]),
    "variable_g": dict(g_kind="cosine", t_final=1.0, n_steps=8192, n_modes=256, snapshot_times=[0.0, 0.5, 1.0]),
    "kernels_dump": dict(g_kind="0", t_final=2.0, n_steps=2048, snapshot_times=[]),
    "converge_space": dict(t_final=0.5, n_steps=8192, sweep_g=["0", "6", "-6", "cosine"], snapshot_times=[]),
    "converge_time": dict(t_final=0.5, n_modes=64, sweep_g=["0", "6", "-6", "cosine"], snapshot_times=[]),
}


def coefficient(g: str, half_width: float) -> Coefficient:
    g = str(g).strip()
    if g.lower() == "cosine":
        return Coefficient.cosine(half_width)
    try:
        return Coefficient.constant(float(g))
    except ValueError:
        raise ConfigError(f"g must be a number or 'cosine', got {g!r}") from None


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_LISTS = {"snapshot_times": float, "sweep_g": str, "sweep_modes": int, "sweep_steps": int}


def convert(key: str, raw: str):
    """Parse a raw string for config ``key``."""
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    raw = raw.strip()
    try:
        if key in _LISTS:
            return [_LISTS[key](v) for v in raw.replace(",", " ").split()]
        if key == "c_radius":
            return None if raw.lower() in ("", "none", "auto") else float(raw)
        typ = _FIELDS[key].type
        if typ in ("int", int):
            return int(raw)
        if typ in ("float", float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None


def read_config_file(path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        values[key] = convert(key, raw)
    return values


def build_config(experiment: str | None = None, file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the experiment preset, then file values, then overrides."""
    values: dict = {}
    file_values = dict(file_values or {})
    overrides = dict(overrides or {})
    exp = overrides.get("experiment") or experiment or file_values.get("experiment") or "airy_g0"
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; choose from {EXPERIMENTS}")
    values.update(PRESETS.get(exp, {}))
    values.update(file_values)
    values.update(overrides)
    values["experiment"] = exp
    return RunConfig(**values).validate()


def manifest_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)
