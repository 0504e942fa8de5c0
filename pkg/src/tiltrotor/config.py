"""Simulation configuration: YAML loading, validation and dumping."""

import dataclasses
import math
from dataclasses import dataclass, field, fields

import yaml

from .aero import AircraftParams, ModelFlags
from .control import ControlSettings, GainSet, ModeGains, PidGains
from .errors import ConfigParseError, ConfigValidationError
from .mission import MissionPlan, Segment
from .sensing import NoiseModel

# Per-mode gain keys follow the gain table: k_<p|i|d><axis> and omega_<axis>.
AXES = ("z", "x", "theta")
GAIN_TERMS = ("p", "i", "d")
MODES = ("hover", "transition", "forward")
TOP_LEVEL = ("aircraft", "gains", "control", "noise", "mission", "simulation", "flags")


@dataclass(frozen=True)
class SimFlags:
    literal_eq8: bool = False
    literal_eq9: bool = False
    literal_eq10: bool = False
    literal_eq36: bool = False

    @property
    def model(self):
        return ModelFlags(self.literal_eq8, self.literal_eq9, self.literal_eq10)


@dataclass(frozen=True)
class SimConfig:
    aircraft: AircraftParams = field(default_factory=AircraftParams)
    gains: GainSet = field(default_factory=GainSet)
    control: ControlSettings = field(default_factory=ControlSettings)
    noise: NoiseModel = field(default_factory=NoiseModel)
    mission: MissionPlan = field(default_factory=MissionPlan)
    dt: float = 0.1
    duration: float = 250.0
    output_path: str = "out"
    flags: SimFlags = field(default_factory=SimFlags)

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigValidationError("simulation.dt", "must be finite and > 0")
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ConfigValidationError("simulation.duration", "must be finite and >= 0")
        if self.control.literal_eq36 != self.flags.literal_eq36:
            object.__setattr__(self, "control",
                               dataclasses.replace(self.control, literal_eq36=self.flags.literal_eq36))

    def with_overrides(self, **changes):
        """Copy with top-level fields replaced (seed goes into the noise model)."""
        seed = changes.pop("seed", None)
        no_noise = changes.pop("no_noise", False)
        cfg = dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})
        noise = cfg.noise
        if seed is not None:
            noise = dataclasses.replace(noise, seed=seed)
        if no_noise:
            noise = dataclasses.replace(noise, kappa_z=0.0, kappa_x=0.0, kappa_theta=0.0)
        return dataclasses.replace(cfg, noise=noise)


# -- reading -----------------------------------------------------------------

def _mapping(value, where):
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigValidationError(where, "must be a mapping")
    return value


def _reject_unknown(data, allowed, where):
    for key in data:
        if key not in allowed:
            name = f"{where}.{key}" if where else str(key)
            raise ConfigValidationError(name, "unknown key")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(where, f"must be a number, got {value!r}")
    return float(value)


def _flag(value, where):
    if not isinstance(value, bool):
        raise ConfigValidationError(where, f"must be true or false, got {value!r}")
    return value


def _optional_number(value, where):
    return None if value is None else _number(value, where)


def _typed(cls, data, where, skip=()):
    """Build a flat dataclass from a mapping, checking keys and value types."""
    data = _mapping(data, where)
    names = [f.name for f in fields(cls) if f.name not in skip]
    _reject_unknown(data, names, where)
    defaults = cls()
    kwargs = {}
    for name, value in data.items():
        default = getattr(defaults, name)
        key = f"{where}.{name}"
        if isinstance(default, bool):
            kwargs[name] = _flag(value, key)
        elif isinstance(default, int) and not isinstance(default, bool) and name == "seed":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigValidationError(key, f"must be an integer, got {value!r}")
            kwargs[name] = value
        elif isinstance(default, tuple):
            if not isinstance(value, list):
                raise ConfigValidationError(key, "must be a list")
            kwargs[name] = tuple(_number(v, f"{key}[{i}]") for i, v in enumerate(value))
        else:
            kwargs[name] = _number(value, key)
    return cls(**kwargs)


def _mode_gains(data, mode, default):
    where = f"gains.{mode}"
    data = _mapping(data, where)
    uncontrolled = default.x is None
    allowed = [f"k_{t}{a}" for a in AXES for t in GAIN_TERMS] + [f"omega_{a}" for a in AXES]
    if uncontrolled:
        allowed = [k for k in allowed if not k.endswith("x")]
    _reject_unknown(data, allowed, where)

    def pid(axis):
        current = getattr(default, axis)
        values = [data.get(f"k_{t}{axis}", getattr(current, f"k{t}")) for t in GAIN_TERMS]
        return PidGains(*(_number(v, f"{where}.k_{t}{axis}") for t, v in zip(GAIN_TERMS, values)))

    def omega(axis):
        return _number(data.get(f"omega_{axis}", getattr(default, f"omega_{axis}")),
                       f"{where}.omega_{axis}")

    try:
        return ModeGains(
            z=pid("z"),
            x=None if uncontrolled else pid("x"),
            theta=pid("theta"),
            omega_z=omega("z"),
            omega_x=None if uncontrolled else omega("x"),
            omega_theta=omega("theta"),
        )
    except ConfigValidationError as exc:
        raise ConfigValidationError(f"{where}.{exc.field}", exc.constraint) from None


def _gains(data):
    data = _mapping(data, "gains")
    _reject_unknown(data, MODES, "gains")
    defaults = GainSet()
    return GainSet(**{mode: _mode_gains(data.get(mode), mode, getattr(defaults, mode))
                      for mode in MODES})


SEGMENT_KEYS = tuple(f.name for f in fields(Segment))


def _segment(data, index):
    where = f"mission.segments[{index}]"
    data = _mapping(data, where)
    _reject_unknown(data, SEGMENT_KEYS, where)
    if "name" not in data:
        raise ConfigValidationError(f"{where}.name", "required")
    kwargs = {"name": str(data["name"])}
    for key in ("directive", "event"):
        if key in data:
            value = data[key]
            if value is not None and not isinstance(value, str):
                raise ConfigValidationError(f"{where}.{key}", "must be a string")
            kwargs[key] = value
    if "event" in data and "time" not in data:
        kwargs["time"] = None
    for key in ("Z_d", "X_dot_d", "delay", "z_accel", "theta_d"):
        if key in data:
            kwargs[key] = _number(data[key], f"{where}.{key}")
    for key in ("time", "z_rate", "x_rate"):
        if key in data:
            kwargs[key] = _optional_number(data[key], f"{where}.{key}")
    return Segment(**kwargs)


def _mission(data):
    data = _mapping(data, "mission")
    _reject_unknown(data, ("segments",), "mission")
    if "segments" not in data:
        return MissionPlan()
    segments = data["segments"]
    if not isinstance(segments, list):
        raise ConfigValidationError("mission.segments", "must be a list")
    return MissionPlan(tuple(_segment(s, i) for i, s in enumerate(segments)))


def config_from_dict(data):
    data = _mapping(data, "config")
    _reject_unknown(data, TOP_LEVEL, "")
    sim = _mapping(data.get("simulation"), "simulation")
    _reject_unknown(sim, ("dt", "duration", "output"), "simulation")
    output = sim.get("output", "out")
    if not isinstance(output, str):
        raise ConfigValidationError("simulation.output", "must be a string")
    flags = _typed(SimFlags, data.get("flags"), "flags")
    control = _typed(ControlSettings, data.get("control"), "control", skip=("literal_eq36",))
    return SimConfig(
        aircraft=_typed(AircraftParams, data.get("aircraft"), "aircraft"),
        gains=_gains(data.get("gains")),
        control=dataclasses.replace(control, literal_eq36=flags.literal_eq36),
        noise=_typed(NoiseModel, data.get("noise"), "noise"),
        mission=_mission(data.get("mission")),
        dt=_number(sim.get("dt", 0.1), "simulation.dt"),
        duration=_number(sim.get("duration", 250.0), "simulation.duration"),
        output_path=output,
        flags=flags,
    )


def parse_config(text):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is None:
            raise ConfigParseError(str(exc)) from None
        problem = getattr(exc, "problem", None) or "invalid YAML"
        raise ConfigParseError(problem, mark.line + 1, mark.column + 1) from None
    return config_from_dict(data)


def load_config(path):
    """Read and validate a YAML configuration file.

    OSError propagates (the CLI maps it to the I/O exit code); YAML syntax
    problems raise ConfigParseError with a 1-based line and column.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text)


# -- writing -----------------------------------------------------------------

def _flat(obj, skip=()):
    out = {}
    for f in fields(obj):
        if f.name in skip:
            continue
        value = getattr(obj, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def _mode_gains_dict(mg):
    out = {}
    for axis in AXES:
        pid = getattr(mg, axis)
        if pid is None:
            continue
        for t in GAIN_TERMS:
            out[f"k_{t}{axis}"] = getattr(pid, f"k{t}")
    for axis in AXES:
        omega = getattr(mg, f"omega_{axis}")
        if omega is not None:
            out[f"omega_{axis}"] = omega
    return out


def config_to_dict(cfg):
    return {
        "simulation": {"dt": cfg.dt, "duration": cfg.duration, "output": cfg.output_path},
        "aircraft": _flat(cfg.aircraft),
        "gains": {mode: _mode_gains_dict(getattr(cfg.gains, mode)) for mode in MODES},
        "control": _flat(cfg.control, skip=("literal_eq36",)),
        "noise": _flat(cfg.noise),
        "mission": {"segments": [_flat(seg) for seg in cfg.mission.segments]},
        "flags": _flat(cfg.flags),
    }


def dump_config(cfg):
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=False)
