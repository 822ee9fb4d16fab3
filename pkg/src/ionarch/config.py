"""Flat ``key = value`` run configuration.

UTF-8 text, ``#`` comments, one dotted key per line (``device.gamma_hz = 20e6``).
Unknown keys are rejected before any run starts.  Precedence everywhere is
CLI flag > config file > documented default.
"""

from __future__ import annotations

from .arch import ArchLayout, layout_from_name
from .device import TWO_PI, DeviceParams
from .errors import ValidationError

_MICRO = 1e-6

# key -> (type, description)
KNOWN_KEYS = {
    "device.t_single_gate_us": float,
    "device.t_two_gate_us": float,
    "device.t_toffoli_us": float,
    "device.t_measure_us": float,
    "device.t_remote_entangle_us": float,
    "device.gamma_hz": float,             # linewidth over 2*pi, in Hz
    "device.repetition_rate_hz": float,
    "device.dark_rate_hz": float,
    "device.p_excite": float,
    "device.solid_angle_fraction": float,
    "device.detector_efficiency": float,
    "device.tau_decoherence_s": float,
    "device.reinit_time_us": float,
    "layout.arch": str,
    "layout.m_p": int,
    "layout.m_t": int,
    "run.seed": int,
    "run.samples": int,
    "run.pairs": int,
}


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        caster = KNOWN_KEYS[key]
        try:
            values[key] = caster(value) if caster is not str else value
        except ValueError:
            raise ValidationError(
                f"config line {lineno}: cannot parse {value!r} as {caster.__name__}") from None
    return values


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def device_from_config(cfg: dict, **overrides) -> DeviceParams:
    """Build DeviceParams from config values plus explicit overrides.

    ``overrides`` use DeviceParams field names with values in SI units and
    win over the config file; ``None`` overrides are ignored.
    """
    kwargs = {}
    mapping = {
        "device.t_single_gate_us": ("t_single_gate", _MICRO),
        "device.t_two_gate_us": ("t_two_gate", _MICRO),
        "device.t_toffoli_us": ("t_toffoli", _MICRO),
        "device.t_measure_us": ("t_measure", _MICRO),
        "device.t_remote_entangle_us": ("t_remote_entangle", _MICRO),
        "device.gamma_hz": ("gamma", TWO_PI),
        "device.repetition_rate_hz": ("repetition_rate", 1.0),
        "device.dark_rate_hz": ("dark_rate", 1.0),
        "device.p_excite": ("p_excite", 1.0),
        "device.solid_angle_fraction": ("solid_angle_fraction", 1.0),
        "device.detector_efficiency": ("detector_efficiency", 1.0),
        "device.tau_decoherence_s": ("tau_decoherence", 1.0),
        "device.reinit_time_us": ("reinit_time", _MICRO),
    }
    for key, (field, scale) in mapping.items():
        if key in cfg:
            kwargs[field] = cfg[key] * scale
    for field, value in overrides.items():
        if value is not None:
            kwargs[field] = value
    return DeviceParams(**kwargs)


def layout_from_config(cfg: dict, arch: str | None = None) -> ArchLayout:
    name = arch or cfg.get("layout.arch", "musiqc")
    return layout_from_name(name)


def resolve(flag_value, cfg: dict, key: str, default):
    """CLI flag > config value > default."""
    if flag_value is not None:
        return flag_value
    if key in cfg:
        return cfg[key]
    return default
