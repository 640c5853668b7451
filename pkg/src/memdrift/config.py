"""Experiment configuration: structured key-value config files with sections
[device], [grid], [time], [bias], [output]; missing keys fall back to the
standard oxide-device defaults."""

import os
from dataclasses import dataclass, field, fields

from .device import (BiasProgram, DeviceConfig, Grid, ScalingBlock,
                     build_uniform_grid, scaled_debye_length)
from .errors import ConfigError
from .solver import TimeGrid

EXPERIMENTS = ("transient-full", "transient-reduced", "steady", "limit-study",
               "de-sweep", "bias-sweep", "iv-sweep", "verify-lemmas")


@dataclass
class DeviceBlock:
    lambda2: float = None  # None: computed from the scaling block
    eps: float = 1e-2
    A: float = 0.25
    D_init: float = 2.5
    D_e: float = 25.0
    eps_s: float = 8.85e-13
    U_T: float = 0.026
    q: float = 1.6e-19
    L: float = 5e-6
    n_i: float = 2e19
    J0: float = 400.0


@dataclass
class GridBlock:
    N: int = 501


@dataclass
class TimeBlock:
    T_f: float = 0.1
    M: int = 200
    max_halvings: int = 10


@dataclass
class BiasBlock:
    kind: str = "constant"
    U0: float = 0.0
    UL: float = 0.0
    UL_end: float = 0.0
    amplitude: float = 100.0
    periods: float = 3.0


@dataclass
class OutputBlock:
    dir: str = "out"
    stride: int = 1


@dataclass
class ExperimentConfig:
    experiment: str = None
    device: DeviceBlock = field(default_factory=DeviceBlock)
    grid: GridBlock = field(default_factory=GridBlock)
    time: TimeBlock = field(default_factory=TimeBlock)
    bias: BiasBlock = field(default_factory=BiasBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    # keys given explicitly (config file or CLI flag), as "section.key"
    explicit: set = field(default_factory=set, compare=False)

    def is_explicit(self, section: str, key: str) -> bool:
        return f"{section}.{key}" in self.explicit

    def scaling(self) -> ScalingBlock:
        d = self.device
        return ScalingBlock(eps_s=d.eps_s, U_T=d.U_T, q=d.q, L=d.L,
                            n_i=d.n_i, J0=d.J0)

    def lambda2(self) -> float:
        if self.device.lambda2 is not None:
            return self.device.lambda2
        return scaled_debye_length(self.scaling())

    def build_grid(self) -> Grid:
        return build_uniform_grid(self.grid.N)

    def build_device(self, grid: Grid = None, eps: float = None,
                     d_e: float = None) -> DeviceConfig:
        grid = grid or self.build_grid()
        d = self.device
        return DeviceConfig.with_constant_doping(
            grid, d_init=d.D_init, a=d.A,
            d_e=d.D_e if d_e is None else d_e,
            eps=d.eps if eps is None else eps,
            lambda2=self.lambda2(), scaling=self.scaling())

    def build_bias(self) -> BiasProgram:
        b = self.bias
        if b.kind == "constant":
            return BiasProgram.constant(b.U0, b.UL)
        if b.kind == "ramp":
            return BiasProgram.ramp(b.U0, b.UL, b.UL_end, self.time.T_f)
        return BiasProgram.sinusoidal(b.amplitude, b.periods, self.time.T_f,
                                      u0=b.U0)

    def build_timegrid(self) -> TimeGrid:
        return TimeGrid(self.time.T_f, self.time.M, self.time.max_halvings)


_SECTIONS = {
    "device": DeviceBlock,
    "grid": GridBlock,
    "time": TimeBlock,
    "bias": BiasBlock,
    "output": OutputBlock,
}

_STR_KEYS = {("bias", "kind"), ("output", "dir")}
_INT_KEYS = {("grid", "N"), ("time", "M"), ("time", "max_halvings"),
             ("output", "stride")}


def _convert(section: str, key: str, raw: str, line: int):
    if (section, key) in _STR_KEYS:
        return raw
    try:
        if (section, key) in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError:
        kind = "integer" if (section, key) in _INT_KEYS else "number"
        raise ConfigError(f"expected {kind} for {section}.{key}, got {raw!r}",
                          line=line) from None


def _validate(cfg: ExperimentConfig):
    d = cfg.device
    if d.lambda2 is not None and d.lambda2 <= 0:
        raise ConfigError("device.lambda2 must be positive")
    if d.eps <= 0:
        raise ConfigError("device.eps must be positive")
    if d.A < 0 or d.D_init < 0 or d.D_e < 0:
        raise ConfigError("doping concentrations must be nonnegative")
    for name in ("eps_s", "U_T", "q", "L", "n_i", "J0"):
        if getattr(d, name) <= 0:
            raise ConfigError(f"device.{name} must be positive")
    if cfg.grid.N < 3:
        raise ConfigError("grid.N must be at least 3")
    if cfg.time.T_f < 0 or cfg.time.M < 1 or cfg.time.max_halvings < 0:
        raise ConfigError("invalid [time] block")
    if cfg.bias.kind not in ("constant", "ramp", "sinusoidal"):
        raise ConfigError(f"unknown bias kind {cfg.bias.kind!r}")
    if cfg.output.stride < 1:
        raise ConfigError("output.stride must be at least 1")
    return cfg


def parse_config_text(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    section = None
    block = None
    known = {}
    for s_name, s_type in _SECTIONS.items():
        known[s_name] = {f.name for f in fields(s_type)}

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            block = getattr(cfg, section)
            continue
        if "=" not in line:
            raise ConfigError(f"malformed line {raw_line.strip()!r}", line=lineno)
        if section is None:
            raise ConfigError("key outside of any section", line=lineno)
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in known[section]:
            raise ConfigError(f"unknown key {key!r} in section [{section}]",
                              line=lineno)
        setattr(block, key, _convert(section, key, raw_value, lineno))
        cfg.explicit.add(f"{section}.{key}")
    return _validate(cfg)


def parse_config(path) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for s_name, s_type in _SECTIONS.items():
        lines.append(f"[{s_name}]")
        block = getattr(cfg, s_name)
        for f in fields(s_type):
            value = getattr(block, f.name)
            if value is None:
                continue
            lines.append(f"{f.name} = {value}")
        lines.append("")
    return "\n".join(lines)
