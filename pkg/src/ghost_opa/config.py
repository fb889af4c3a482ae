"""Run configuration: flat key-value files with SI unit suffixes.

A config file holds lines like

    d1 = 0.3 m
    T = 1.8 ns
    bandwidths = 1 nm, 10 nm

Unknown keys and malformed values raise UsageError naming the field.  The
same canonical echo format is written into the metadata block of every CSV,
so any emitted file can be parsed back into the RunConfig that produced it.
Defaults reproduce the reference experiment preset.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, fields, replace

from .errors import UsageError
from .optics import DoubleSlitAperture, OpticalGeometry
from .rates import DetectionSpec, SourceSpec, delta_from_bandwidth

# unit name -> (dimension family, scale to SI)
_UNITS = {
    "m": ("length", 1.0),
    "mm": ("length", 1e-3),
    "um": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "pm": ("length", 1e-12),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "us": ("time", 1e-6),
    "ns": ("time", 1e-9),
    "ps": ("time", 1e-12),
    "fs": ("time", 1e-15),
    "rad": ("angle", 1.0),
    "mrad": ("angle", 1e-3),
    "urad": ("angle", 1e-6),
    "rad/m": ("spatial_freq", 1.0),
    "1/m": ("spatial_freq", 1.0),
    "": ("none", 1.0),
}

_CANONICAL_UNIT = {
    "length": "m",
    "time": "s",
    "angle": "rad",
    "spatial_freq": "rad/m",
    "none": "",
}

# field -> (dimension family, value kind); kinds: float, int, float_list
_FIELD_SPECS = {
    "lambda_p": ("length", "float"),
    "a": ("length", "float"),
    "b": ("length", "float"),
    "slit_len": ("length", "float"),
    "d1": ("length", "float"),
    "d1p": ("length", "float"),
    "d2": ("length", "float"),
    "T": ("time", "float"),
    "rho2y": ("length", "float"),
    "qA_accept": ("spatial_freq", "float"),
    "qB_accept": ("spatial_freq", "float"),
    "detection_angle": ("angle", "float"),
    "xi": ("none", "float"),
    "bandwidth": ("length", "float"),
    "bandwidths": ("length", "float_list"),
    "xi_max": ("none", "float"),
    "xi_points": ("none", "int"),
    "rho2x_max": ("length", "float"),
    "scan_points": ("none", "int"),
    "qa_sweep_max": ("spatial_freq", "float"),
    "sweep_points": ("none", "int"),
    "mc_points": ("none", "int"),
    "mc_duration": ("time", "float"),
    "mc_peak_counts": ("none", "float"),
    "seed": ("none", "int"),
}

_NUM_UNIT_RE = re.compile(r"^\s*([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z/1]*)\s*$")


@dataclass(frozen=True)
class RunConfig:
    """All knobs of one CLI run, in SI units."""

    # geometry and aperture (reference preset)
    lambda_p: float = 351e-9
    a: float = 0.4e-3
    b: float = 0.165e-3
    slit_len: float = 10e-3
    d1: float = 0.3
    d1p: float = 1.0
    d2: float = 1.5
    # detection
    T: float = 1.8e-9
    rho2y: float = 0.0
    qA_accept: float = 250.0
    qB_accept: float = 250.0
    detection_angle: float = 15e-3
    # source
    xi: float = 0.1
    bandwidth: float = 1e-9  # wavelength band at the degenerate wavelength
    bandwidths: tuple = (1e-9, 10e-9)
    # grids
    xi_max: float = 10.0
    xi_points: int = 201
    rho2x_max: float = 5e-3
    scan_points: int = 401
    qa_sweep_max: float = 2.0e4
    sweep_points: int = 41
    # Monte Carlo
    mc_points: int = 17
    mc_duration: float = 1.0
    mc_peak_counts: float = 10000.0
    seed: int = 12345

    # -- construction of library objects ------------------------------------

    def geometry(self) -> OpticalGeometry:
        return OpticalGeometry(d1=self.d1, d1p=self.d1p, d2=self.d2, lambda_p=self.lambda_p)

    def aperture(self) -> DoubleSlitAperture:
        return DoubleSlitAperture(a=self.a, b=self.b, slit_len=self.slit_len)

    @property
    def lambda_signal(self) -> float:
        return 2.0 * self.lambda_p

    def delta_for(self, bandwidth: float) -> float:
        return delta_from_bandwidth(bandwidth, self.lambda_signal)

    def source(self, xi: float | None = None, bandwidth: float | None = None) -> SourceSpec:
        return SourceSpec(
            xi=self.xi if xi is None else xi,
            delta=self.delta_for(self.bandwidth if bandwidth is None else bandwidth),
        )

    def detection(self) -> DetectionSpec:
        return DetectionSpec(
            window_T=self.T,
            rho2=(0.0, self.rho2y),
            qA_accept=self.qA_accept,
            qB_accept=self.qB_accept,
        )

    # -- serialization -------------------------------------------------------

    def to_lines(self) -> list[str]:
        """Canonical `key = value unit` echo, one line per field."""
        out = []
        for f in fields(self):
            family, kind = _FIELD_SPECS[f.name]
            unit = _CANONICAL_UNIT[family]
            val = getattr(self, f.name)
            if kind == "float_list":
                body = ", ".join(f"{v!r} {unit}".strip() for v in val)
            elif kind == "int":
                body = str(val)
            else:
                body = f"{float(val)!r} {unit}".strip()
            out.append(f"{f.name} = {body}")
        return out

    def config_hash(self) -> str:
        digest = hashlib.sha256("\n".join(self.to_lines()).encode()).hexdigest()
        return digest[:12]

    def with_overrides(self, pairs: dict[str, str]) -> "RunConfig":
        updates = {key: _parse_field(key, text) for key, text in pairs.items()}
        return replace(self, **updates)


def _parse_scalar(key: str, text: str, family: str) -> float:
    m = _NUM_UNIT_RE.match(text)
    if not m:
        raise UsageError(f"config field {key!r}: cannot parse value {text!r}")
    number, unit = m.group(1), m.group(2)
    if unit not in _UNITS:
        raise UsageError(f"config field {key!r}: unknown unit {unit!r}")
    unit_family, scale = _UNITS[unit]
    if unit == "" and family != "none":
        raise UsageError(
            f"config field {key!r}: a {_CANONICAL_UNIT[family]} unit suffix is required"
        )
    if unit != "" and unit_family != family:
        raise UsageError(
            f"config field {key!r}: unit {unit!r} does not measure {family}"
        )
    try:
        value = float(number)
    except ValueError as exc:
        raise UsageError(f"config field {key!r}: bad number {number!r}") from exc
    return value * scale


def _parse_field(key: str, text: str):
    if key not in _FIELD_SPECS:
        raise UsageError(f"unknown config field {key!r}")
    family, kind = _FIELD_SPECS[key]
    text = text.strip()
    if kind == "float_list":
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        if not parts:
            raise UsageError(f"config field {key!r}: empty list")
        return tuple(_parse_scalar(key, p, family) for p in parts)
    if kind == "int":
        value = _parse_scalar(key, text, family)
        if value != int(value):
            raise UsageError(f"config field {key!r}: expected an integer")
        return int(value)
    return _parse_scalar(key, text, family)


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse config-file content (or a CSV metadata echo) into a RunConfig."""
    cfg = base or RunConfig()
    pairs = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line without '=': {raw!r}")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return cfg.with_overrides(pairs)


def parse_config_file(path: str, base: RunConfig | None = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, base)
