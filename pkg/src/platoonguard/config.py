"""Flat key=value configuration.

One namespace for every tunable across simulation, injection, defense,
training, and the campaign matrix.  Values are typed by their defaults;
unknown keys are an error so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields


@dataclass
class Config:
    # Campaign matrix
    sizes: list = field(default_factory=lambda: [4, 8])
    ids_4: list = field(default_factory=lambda: [0, 1, 2])
    ids_8: list = field(default_factory=lambda: [0, 1, 2, 3, 4, 5, 6])
    ids_16: list = field(default_factory=lambda: [0, 7])
    repetitions: int = 10
    campaign_seed: int = 1000

    # Simulation
    duration: float = 120.0
    physics_step: float = 0.01
    beacon_interval: float = 0.1
    radar_noise: float = 0.0
    leader_speed: float = 27.778
    osc_amplitude: float = 1.389
    osc_frequency: float = 0.1
    leader_gain: float = 2.0
    vehicle_length: float = 4.0
    accel_min: float = -6.0
    accel_max: float = 2.5

    # Cooperative controller
    ploeg_headway: float = 0.5
    ploeg_kp: float = 0.2
    ploeg_kd: float = 0.7

    # Fallback controller and gap control
    acc_headway: float = 1.2
    acc_lambda: float = 0.1
    standstill: float = 2.0
    delta_g: float = 0.9
    delta_t_gap: float = 0.1

    # Training data generation
    gendata_seed: int = 2000
    gendata_runs_per_kind: int = 10
    gendata_regular_runs: int = 10

    # Detector training
    hidden_size: int = 32
    learning_rate: float = 0.001
    weight_decay: float = 0.004
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 64
    max_epochs: int = 100
    min_delta: float = 0.001
    patience: int = 10
    validation_fraction: float = 0.33
    train_seed: int = 42

    def ids_for_size(self, size):
        attr = f"ids_{size}"
        if not hasattr(self, attr):
            raise ValueError(f"no attacker ID list configured for platoon size {size}")
        return list(getattr(self, attr))


def _parse_value(raw, default):
    raw = raw.strip()
    if isinstance(default, bool):
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, list):
        if not raw:
            return []
        return [int(part.strip()) for part in raw.split(",")]
    return raw


def load_config(path=None):
    """Read key=value lines ('#' comments, blank lines ignored).

    Every key must match a Config field; values are parsed to the
    field's default type.  path=None returns pure defaults.
    """
    cfg = Config()
    if path is None:
        return cfg
    defaults = {f.name: getattr(cfg, f.name) for f in fields(Config)}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, raw = line.split("=", 1)
            key = key.strip()
            if key not in defaults:
                raise ValueError(f"{path}:{lineno}: unknown configuration key {key!r}")
            try:
                setattr(cfg, key, _parse_value(raw, defaults[key]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return cfg


def dump_config(cfg=None):
    """Render a Config as reloadable key=value text."""
    cfg = cfg or Config()
    lines = []
    for f in fields(Config):
        value = getattr(cfg, f.name)
        if isinstance(value, list):
            rendered = ",".join(str(v) for v in value)
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{f.name}={rendered}")
    return "\n".join(lines) + "\n"
