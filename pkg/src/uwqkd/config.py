"""Scenario files: INI sections of ``key = value`` with optional unit suffixes.

Bare numbers are read in the key's base unit (metres, seconds, degrees for
angles).  A suffix such as ``30 nm``, ``5 cm``, ``200 ps`` or ``6 deg`` is
converted.  Unknown sections and keys are errors.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .bb84 import Bb84Params, LinkSetup
from .channel import TURBULENCE_PRESETS, WATER_TYPES, LinkGeometry, TurbulenceParams, WaterType
from .decoy import DecoyParams
from .mc.phase import ScatterModel
from .mc.transport import DetectorSpec, McConfig
from .noise import Environment, ReceiverParams
from .numerics import DomainError

__all__ = [
    "ConfigError",
    "Scenario",
    "parse_config",
    "parse_text",
    "load_preset",
    "preset_names",
    "emit_canonical",
]


class ConfigError(ValueError):
    """Malformed or invalid scenario file."""


_LENGTH = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9, "km": 1e3}
_TIME = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12}
_ANGLE = {"deg": 1.0, "rad": 180.0 / math.pi}
_RATE = {"hz": 1.0, "khz": 1e3}
_UNITS = {"length": _LENGTH, "time": _TIME, "angle": _ANGLE, "rate": _RATE}
_BASE_UNIT = {"length": "m", "time": "s", "angle": "deg", "rate": "Hz"}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*([A-Za-z]*)\s*$")


@dataclass(frozen=True)
class _Key:
    kind: str  # length, time, angle, rate, float, int, str
    default: object


# Canonical schema.  Angles are kept in degrees here and converted when the
# domain objects are built.
SCHEMA: dict[str, dict[str, _Key]] = {
    "scenario": {
        "name": _Key("str", "custom"),
        "protocol": _Key("str", "bb84"),
    },
    "water": {
        "type": _Key("str", "clear_ocean"),
        "extinction": _Key("float", None),
        "correction_T": _Key("float", None),
    },
    "turbulence": {
        "regime": _Key("str", "none"),
        "chi_T": _Key("float", None),
        "epsilon": _Key("float", None),
        "omega": _Key("float", -2.2),
        "alpha_th": _Key("float", 2.56e-4),
        "d_r": _Key("float", 1.0),
        "kinematic_viscosity": _Key("float", 1.0576e-6),
        "prandtl_T": _Key("float", 7.0),
        "prandtl_S": _Key("float", 686.0),
        "prandtl_TS": _Key("float", 13.85),
    },
    "geometry": {
        "length": _Key("length", 100.0),
        "tx_diameter": _Key("length", 0.10),
        "rx_diameter": _Key("length", 0.10),
        "divergence": _Key("angle", 6.0),
        "wavelength": _Key("length", 530e-9),
        "relay_count": _Key("int", 0),
    },
    "receiver": {
        "fov": _Key("angle", 180.0),
        "filter_width": _Key("length", 30e-9),
        "bit_period": _Key("time", 35e-9),
        "gate_time": _Key("time", 200e-12),
        "dark_rate": _Key("rate", 60.0),
        "quantum_efficiency": _Key("float", 0.5),
        "bob_transmittance": _Key("float", 0.045),
        "aperture_diameter": _Key("length", None),
    },
    "environment": {
        "surface_irradiance": _Key("float", 1e-3),
        "diffuse_attenuation": _Key("float", 0.08),
        "depth": _Key("length", 100.0),
        "label": _Key("str", "clear night, full moon"),
    },
    "bb84": {
        "mean_photon_number": _Key("float", 1.0),
        "ldpc_rate": _Key("float", 0.5),
        "qber_threshold": _Key("float", 0.1071),
        "qber_security_limit": _Key("float", 0.11),
    },
    "decoy": {
        "signal_intensity": _Key("float", 0.48),
        "decoy_intensity": _Key("float", 0.05),
        "detector_error": _Key("float", 0.033),
        "noise_error": _Key("float", 0.5),
        "sift_factor": _Key("float", 0.5),
        "ec_efficiency": _Key("float", 1.22),
    },
    "relay": {
        "k_max": _Key("int", 10),
    },
    "mc": {
        "absorption": _Key("float", 0.114),
        "scattering": _Key("float", 0.037),
        "mean_cosine": _Key("float", 0.9675),
        "source_radius": _Key("length", 3e-3),
        "source_half_angle": _Key("angle", 20.0),
        "aperture_diameter": _Key("length", 0.20),
        "fov": _Key("angle", 180.0),
        "gate_time": _Key("time", math.inf),
        "plane_z": _Key("length", 10.0),
        "refractive_index": _Key("float", 1.33),
        "weight_threshold": _Key("float", 1e-4),
        "max_interactions": _Key("int", 10_000),
        "bit_period": _Key("time", 20e-9),
        "wavelength": _Key("length", 532e-9),
        "photons": _Key("int", 1_000_000),
        "partitions": _Key("int", 0),
        "hist_bins": _Key("int", 200),
        "gate_min": _Key("time", 1e-12),
        "gate_max": _Key("time", 1500e-12),
        "gate_step": _Key("time", 1e-12),
    },
    "sweep": {
        "variable": _Key("str", "distance"),
        "start": _Key("length", 1.0),
        "stop": _Key("length", 200.0),
        "step": _Key("length", 1.0),
    },
    "search": {
        "criterion": _Key("str", "qber"),
        "min": _Key("length", 1.0),
        "max": _Key("length", 400.0),
    },
    "wsf": {
        "regimes": _Key("str", "weak, moderate, strong"),
        "rho_min": _Key("length", 1e-3),
        "rho_max": _Key("length", 0.1),
        "points": _Key("int", 11),
        "length": _Key("length", 100.0),
    },
}

PROTOCOLS = ("bb84", "relay", "decoy", "mc")


def _convert(raw: str, key: _Key, where: str):
    text = raw.strip()
    if key.kind == "str":
        return text
    if text.lower() in ("none", ""):
        if key.default is None:
            return None
        raise ConfigError(f"{where}: a value is required")
    if key.kind == "int":
        try:
            return int(float(text))
        except ValueError:
            raise ConfigError(f"{where}: expected an integer, got {raw!r}") from None
    m = _NUMBER.match(text)
    if not m:
        raise ConfigError(f"{where}: expected a number, got {raw!r}")
    value = float(m.group(1))
    unit = m.group(2)
    if key.kind == "float":
        if unit:
            raise ConfigError(f"{where}: dimensionless value takes no unit, got {unit!r}")
        return value
    table = _UNITS[key.kind]
    if not unit:
        return value
    factor = table.get(unit.lower()) if key.kind == "rate" else table.get(unit)
    if factor is None:
        raise ConfigError(f"{where}: unit {unit!r} is not a {key.kind} unit ({', '.join(table)})")
    return value * factor


@dataclass(frozen=True)
class McSettings:
    config: McConfig
    photons: int
    partitions: int | None
    wavelength: float
    gate_grid: tuple[float, ...]


@dataclass(frozen=True)
class Scenario:
    name: str
    protocol: str
    values: dict = field(repr=False, compare=True)
    water: WaterType = None
    turbulence: TurbulenceParams | None = None
    geometry: LinkGeometry = None
    receiver: ReceiverParams = None
    environment: Environment = None
    bb84: Bb84Params = None
    decoy: DecoyParams = None

    def link_setup(self) -> LinkSetup:
        return LinkSetup(
            water=self.water,
            geometry=self.geometry,
            turbulence=self.turbulence,
            receiver=self.receiver,
            environment=self.environment,
            params=self.bb84,
        )

    def section(self, name: str) -> dict:
        return dict(self.values[name])

    @property
    def k_max(self) -> int:
        return self.values["relay"]["k_max"]

    def sweep_grid(self):
        s = self.values["sweep"]
        if s["variable"] != "distance":
            raise ConfigError("sweep.variable: only 'distance' sweeps are supported")
        n = int(math.floor((s["stop"] - s["start"]) / s["step"] + 1e-9)) + 1
        return [s["start"] + i * s["step"] for i in range(n)]

    def search_range(self) -> tuple[float, float]:
        s = self.values["search"]
        return s["min"], s["max"]

    def mc_settings(self) -> McSettings:
        v = self.values["mc"]
        model = ScatterModel.from_mean_cosine(v["absorption"], v["scattering"], v["mean_cosine"])
        det = DetectorSpec(
            aperture_radius=v["aperture_diameter"] / 2.0,
            fov=math.radians(v["fov"]),
            gate_time=v["gate_time"],
            plane_z=v["plane_z"],
            refractive_index=v["refractive_index"],
        )
        cfg = McConfig(
            model=model,
            detector=det,
            source_radius=v["source_radius"],
            source_half_angle=math.radians(v["source_half_angle"]),
            weight_threshold=v["weight_threshold"],
            max_interactions=v["max_interactions"],
            bit_period=v["bit_period"],
            hist_bins=v["hist_bins"],
        )
        n = int(math.floor((v["gate_max"] - v["gate_min"]) / v["gate_step"] + 1e-9)) + 1
        grid = tuple(v["gate_min"] + i * v["gate_step"] for i in range(n))
        return McSettings(cfg, v["photons"], v["partitions"] or None, v["wavelength"], grid)

    def mc_receiver(self) -> ReceiverParams:
        v = self.values["mc"]
        return replace(
            self.receiver,
            fov=math.radians(v["fov"]),
            bit_period=v["bit_period"],
            aperture_diameter=v["aperture_diameter"],
        )

    @property
    def hash(self) -> str:
        return hashlib.sha256(emit_canonical(self).encode()).hexdigest()


def _build(values: dict) -> Scenario:
    def bad(where, exc):
        return ConfigError(f"{where}: {exc}")

    sc = values["scenario"]
    if sc["protocol"] not in PROTOCOLS:
        raise ConfigError(f"scenario.protocol: must be one of {', '.join(PROTOCOLS)}")

    w = values["water"]
    try:
        if w["type"] in WATER_TYPES:
            base = WATER_TYPES[w["type"]]
            water = WaterType(
                base.name,
                w["extinction"] if w["extinction"] is not None else base.extinction,
                w["correction_T"],
            )
        elif w["type"] == "custom":
            if w["extinction"] is None:
                raise ConfigError("water.extinction: required for a custom water type")
            water = WaterType("custom", w["extinction"], w["correction_T"])
        else:
            raise ConfigError(f"water.type: unknown water type {w['type']!r}")
    except DomainError as exc:
        raise bad("water.extinction" if "extinction" in str(exc) else "water.correction_T", exc) from None

    t = values["turbulence"]
    turbulence = None
    if t["regime"] != "none":
        fields = {k: t[k] for k in ("omega", "alpha_th", "d_r", "kinematic_viscosity", "prandtl_T", "prandtl_S", "prandtl_TS")}
        if t["regime"] in TURBULENCE_PRESETS:
            p = TURBULENCE_PRESETS[t["regime"]]
            chi = t["chi_T"] if t["chi_T"] is not None else p.chi_T
            eps = t["epsilon"] if t["epsilon"] is not None else p.epsilon
        elif t["regime"] == "custom":
            chi, eps = t["chi_T"], t["epsilon"]
            if chi is None or eps is None:
                raise ConfigError("turbulence.chi_T/epsilon: required for a custom regime")
        else:
            raise ConfigError(f"turbulence.regime: unknown regime {t['regime']!r}")
        try:
            turbulence = TurbulenceParams(chi_T=chi, epsilon=eps, **fields)
        except DomainError as exc:
            raise bad("turbulence", exc) from None

    g = values["geometry"]
    try:
        geometry = LinkGeometry(
            length=g["length"],
            tx_diameter=g["tx_diameter"],
            rx_diameter=g["rx_diameter"],
            divergence=math.radians(g["divergence"]),
            wavelength=g["wavelength"],
            relay_count=g["relay_count"],
        )
    except DomainError as exc:
        raise bad("geometry", exc) from None

    r = dict(values["receiver"])
    r["fov"] = math.radians(r["fov"])
    if r["aperture_diameter"] is None:
        r["aperture_diameter"] = geometry.rx_diameter
    try:
        receiver = ReceiverParams(**r)
    except DomainError as exc:
        raise bad("receiver", exc) from None

    e = values["environment"]
    try:
        environment = Environment(e["surface_irradiance"], e["diffuse_attenuation"], e["depth"], e["label"])
    except DomainError as exc:
        raise bad("environment", exc) from None

    try:
        bb84 = Bb84Params(**values["bb84"])
    except DomainError as exc:
        raise bad("bb84", exc) from None
    try:
        decoy = DecoyParams(**values["decoy"])
    except DomainError as exc:
        raise bad("decoy", exc) from None

    if values["relay"]["k_max"] < 0:
        raise ConfigError("relay.k_max: must be non-negative")
    s = values["sweep"]
    if not s["step"] > 0 or s["stop"] < s["start"] or s["start"] <= 0:
        raise ConfigError("sweep: need 0 < start <= stop and step > 0")
    q = values["search"]
    if q["criterion"] not in ("qber", "skr"):
        raise ConfigError("search.criterion: must be 'qber' or 'skr'")
    if not 0 < q["min"] < q["max"]:
        raise ConfigError("search: need 0 < min < max")
    m = values["mc"]
    if m["photons"] < 0:
        raise ConfigError("mc.photons: must be non-negative")
    if not m["gate_step"] > 0 or m["gate_max"] < m["gate_min"]:
        raise ConfigError("mc.gate_*: need gate_min <= gate_max and gate_step > 0")

    scenario = Scenario(
        name=sc["name"],
        protocol=sc["protocol"],
        values=values,
        water=water,
        turbulence=turbulence,
        geometry=geometry,
        receiver=receiver,
        environment=environment,
        bb84=bb84,
        decoy=decoy,
    )
    if sc["protocol"] == "mc":
        try:
            scenario.mc_settings()
        except DomainError as exc:
            raise bad("mc", exc) from None
    return scenario


def _read(parser: configparser.ConfigParser, overrides=()) -> dict:
    values = {sec: {k: key.default for k, key in keys.items()} for sec, keys in SCHEMA.items()}
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        for k, raw in parser.items(sec):
            if k not in SCHEMA[sec]:
                raise ConfigError(f"{sec}.{k}: unknown key")
            values[sec][k] = _convert(raw, SCHEMA[sec][k], f"{sec}.{k}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        path, raw = item.split("=", 1)
        if "." not in path:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        sec, k = path.strip().split(".", 1)
        if sec not in SCHEMA or k not in SCHEMA[sec]:
            raise ConfigError(f"{sec}.{k}: unknown key")
        values[sec][k] = _convert(raw, SCHEMA[sec][k], f"{sec}.{k}")
    return values


def _parser() -> configparser.ConfigParser:
    p = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    p.optionxform = str  # keep key case (chi_T, prandtl_TS)
    return p


def parse_text(text: str, overrides=(), source: str = "<string>") -> Scenario:
    parser = _parser()
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return _build(_read(parser, overrides))


def parse_config(path, overrides=()) -> Scenario:
    """Read a scenario file, or a preset name, and validate it."""
    p = Path(path)
    if not p.exists() and str(path) in preset_names():
        return load_preset(str(path), overrides)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_text(text, overrides, source=str(path))


def preset_names() -> list[str]:
    folder = resources.files("uwqkd") / "presets"
    return sorted(f.name[:-4] for f in folder.iterdir() if f.name.endswith(".ini"))


def load_preset(name: str, overrides=()) -> Scenario:
    folder = resources.files("uwqkd") / "presets"
    f = folder / f"{name}.ini"
    if not f.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return parse_text(f.read_text(), overrides, source=f"preset:{name}")


def _format(value, key: _Key) -> str:
    if value is None:
        return "none"
    if key.kind == "str":
        return str(value)
    if key.kind == "int":
        return str(int(value))
    text = repr(float(value))
    if key.kind == "float":
        return text
    return f"{text} {_BASE_UNIT[key.kind]}"


def emit_canonical(scenario: Scenario) -> str:
    """Every key of every section in base units; parses back to the same scenario."""
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for k, key in keys.items():
            lines.append(f"{k} = {_format(scenario.values[sec][k], key)}")
        lines.append("")
    return "\n".join(lines)
