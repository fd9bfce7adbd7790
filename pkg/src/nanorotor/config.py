"""Configuration schema, file parsing and the reproducibility manifest.

Config files are flat UTF-8 key-value text with dotted keys and ``#``
comments::

    physical.radius_m = 1e-9
    sweep.axis1.name  = h_z      # first sweep axis

Every key has a default drawn from the benchmark parameter set, so an
empty file is a complete configuration.  Unknown keys are rejected with
the offending key named.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import __version__
from .errors import DomainError

_CHANNEL_KINDS = ("none", "cos_theta", "sin_theta", "cos_2theta", "sin_2theta",
                  "l_theta", "gas")
_AXIS_NAMES = ("v0", "h_x", "h_z", "radius_m", "plate_separation_m", "gamma",
               "temperature", "lambda_r")


def _positive(key):
    def check(v):
        if v <= 0.0:
            raise DomainError(f"{key} must be strictly positive")
    return check


def _non_negative(key):
    def check(v):
        if v < 0.0:
            raise DomainError(f"{key} must be non-negative")
    return check


def _choice(key, options):
    def check(v):
        if v not in options:
            raise DomainError(f"{key} must be one of {options}, got {v!r}")
    return check


def _int_min(key, lo):
    def check(v):
        if v < lo:
            raise DomainError(f"{key} must be >= {lo}")
    return check


# key -> (type, default, validator or None)
SCHEMA: dict[str, tuple] = {
    # experiment
    "physical.radius_m": (float, 1.0e-9, _positive("physical.radius_m")),
    "physical.plate_separation_m": (float, 8.4e-8, _positive("physical.plate_separation_m")),
    "physical.density_kg_m3": (float, 7.5e3, _positive("physical.density_kg_m3")),
    "physical.magnetization_A_m": (float, 1.0e6, _non_negative("physical.magnetization_A_m")),
    "physical.field_x_T": (float, 0.0, None),
    "physical.field_z_T": (float, 0.0, None),
    # optional direct dimensionless overrides (nan = derive from physical)
    "dimensionless.v0": (float, math.nan, None),
    "dimensionless.h_x": (float, math.nan, None),
    "dimensionless.h_z": (float, math.nan, None),
    # numerics
    "numerics.cutoff_unitary": (int, 200, _int_min("numerics.cutoff_unitary", 2)),
    "numerics.cutoff_dissipative": (int, 20, _int_min("numerics.cutoff_dissipative", 2)),
    "numerics.cutoff_map": (int, 20, _int_min("numerics.cutoff_map", 2)),
    "numerics.bohr_tolerance": (float, 1e-7, _positive("numerics.bohr_tolerance")),
    "numerics.step_safety": (float, 50.0, _positive("numerics.step_safety")),
    "numerics.visibility_periods": (float, 5.0, _positive("numerics.visibility_periods")),
    "numerics.samples_per_period": (int, 40, _int_min("numerics.samples_per_period", 8)),
    # environment channel for evolve / dec-map
    "channel.kind": (str, "none", _choice("channel.kind", _CHANNEL_KINDS)),
    "channel.rate_per_s": (float, 1.3e4, _non_negative("channel.rate_per_s")),
    "channel.temperature_K": (float, 3.2e-3, _non_negative("channel.temperature_K")),
    "channel.spectral": (str, "flat", _choice("channel.spectral",
                                              ("flat", "ohmic", "super_ohmic"))),
    "channel.gas_rate_per_s": (float, 9.7e-6, _non_negative("channel.gas_rate_per_s")),
    # evolve command
    "evolve.initial": (str, "doublet", _choice("evolve.initial", ("doublet", "gaussian"))),
    "evolve.sigma": (float, 0.3, _positive("evolve.sigma")),
    "evolve.periods": (float, 10.0, _positive("evolve.periods")),
    "evolve.samples": (int, 400, _int_min("evolve.samples", 16)),
    # sweep axes
    "sweep.axis1.name": (str, "v0", _choice("sweep.axis1.name", _AXIS_NAMES)),
    "sweep.axis1.min": (float, 0.0, None),
    "sweep.axis1.max": (float, 20.0, None),
    "sweep.axis1.count": (int, 200, _int_min("sweep.axis1.count", 2)),
    "sweep.axis1.scale": (str, "linear", _choice("sweep.axis1.scale", ("linear", "log"))),
    "sweep.axis2.name": (str, "h_x", _choice("sweep.axis2.name", _AXIS_NAMES)),
    "sweep.axis2.min": (float, -0.5, None),
    "sweep.axis2.max": (float, 0.5, None),
    "sweep.axis2.count": (int, 40, _int_min("sweep.axis2.count", 2)),
    "sweep.axis2.scale": (str, "linear", _choice("sweep.axis2.scale", ("linear", "log"))),
    "sweep.spectrum_levels": (int, 10, _int_min("sweep.spectrum_levels", 2)),
    # decoherence budget inputs (benchmark values)
    "budget.gas_mass_amu": (float, 4.0, _positive("budget.gas_mass_amu")),
    "budget.gas_density_m3": (float, 1.0e11, _non_negative("budget.gas_density_m3")),
    "budget.gas_temperature_K": (float, 3.2e-3, _non_negative("budget.gas_temperature_K")),
    "budget.gas_born_strength_J": (float, 1.0e-23, _non_negative("budget.gas_born_strength_J")),
    "budget.gas_roughness_rel": (float, 0.05, _non_negative("budget.gas_roughness_rel")),
    "budget.bath_temperature_K": (float, 3.2e-3, _non_negative("budget.bath_temperature_K")),
    "budget.plate_density_kg_m3": (float, 16.65e3, _positive("budget.plate_density_kg_m3")),
    "budget.sound_speed_l_m_s": (float, 4.146e3, _positive("budget.sound_speed_l_m_s")),
    "budget.sound_speed_t_m_s": (float, 2.032e3, _positive("budget.sound_speed_t_m_s")),
    "budget.seismic_sqrt_sz": (float, 1.0e-11, _non_negative("budget.seismic_sqrt_sz")),
    "budget.seismic_bandwidth_hz": (float, 1.0e3, _non_negative("budget.seismic_bandwidth_hz")),
    "budget.eddy_particle_conductivity_S_m": (float, 0.667e6,
                                              _non_negative("budget.eddy_particle_conductivity_S_m")),
    "budget.eddy_plate_conductivity_S_m": (float, 1.0e9,
                                           _non_negative("budget.eddy_plate_conductivity_S_m")),
    "budget.eddy_plate_london_depth_m": (float, 150e-9,
                                         _positive("budget.eddy_plate_london_depth_m")),
    "budget.eddy_plate_tc_K": (float, 4.0, _positive("budget.eddy_plate_tc_K")),
    "budget.eddy_plate_temperature_K": (float, 1.0e-3,
                                        _positive("budget.eddy_plate_temperature_K")),
    "budget.eddy_plate_i0_mode": (str, "fixed", _choice("budget.eddy_plate_i0_mode",
                                                        ("fixed", "quadrature"))),
    "budget.squid_splitting_hz": (float, 1.0e10, _positive("budget.squid_splitting_hz")),
    "budget.squid_current_A": (float, 0.5e-6, _positive("budget.squid_current_A")),
    "budget.squid_t1_s": (float, 1.0e-3, _positive("budget.squid_t1_s")),
    "budget.squid_t2_s": (float, 1.0e-3, _positive("budget.squid_t2_s")),
    "budget.squid_temperature_K": (float, 3.2e-3, _non_negative("budget.squid_temperature_K")),
    "budget.squid_flux_Wb": (float, 1.0e-22, _non_negative("budget.squid_flux_Wb")),
}


@dataclass
class RunManifest:
    """Everything needed to reproduce a run byte for byte.

    The wall time is tracked for operator feedback but excluded from
    serialized comment blocks so identical configurations produce
    identical output files.
    """

    config: dict
    version: str = __version__
    command: str = ""
    warnings: list[str] = field(default_factory=list)
    wall_time_s: float | None = None

    def comment_lines(self) -> list[str]:
        lines = [f"# nanorotor {self.version} manifest",
                 f"# command = {self.command}"]
        for key in sorted(self.config):
            lines.append(f"# {key} = {_format_value(self.config[key])}")
        return lines


def _format_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".9g")
    return str(v)


def _parse_scalar(key: str, text: str):
    kind = SCHEMA[key][0]
    try:
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError as exc:
        raise DomainError(f"{key}: cannot parse {text!r} as {kind.__name__}") from exc


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse key-value lines into a partial configuration dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise DomainError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = _parse_scalar(key, value)
    return out


def resolve_config(partial: dict | None = None, overrides: dict | None = None) -> dict:
    """Fill defaults, apply overrides, validate every entry."""
    config = {key: spec[1] for key, spec in SCHEMA.items()}
    for layer in (partial or {}), (overrides or {}):
        for key, value in layer.items():
            if key not in SCHEMA:
                raise DomainError(f"unknown key {key!r}")
            config[key] = value if not isinstance(value, str) \
                else _parse_scalar(key, value)
    for key, value in config.items():
        validator = SCHEMA[key][2]
        if validator is not None and not (isinstance(value, float) and math.isnan(value)):
            validator(value)
    return config


def load_config(path: str | None, overrides: dict | None = None) -> dict:
    partial = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            partial = parse_config_text(fh.read(), source=path)
    return resolve_config(partial, overrides)


def config_warnings(config: dict) -> list[str]:
    """Heuristic sanity warnings that do not block a run."""
    notes = []
    v0 = config["dimensionless.v0"]
    if math.isnan(v0):
        # rough scale of the derived barrier for the cutoff heuristic
        from .units import PhysicalParams, derive_scales
        v0 = derive_scales(physical_params(config)).v0
    for key in ("numerics.cutoff_dissipative", "numerics.cutoff_map",
                "numerics.cutoff_unitary"):
        n = config[key]
        needed = math.ceil(2.0 * math.sqrt(max(v0, 1.0)) + 5)
        if n < needed:
            notes.append(
                f"{key} = {n} is likely under-converged for v0 = {v0:.3g} "
                f"(suggest >= {needed}); the convergence self-check will flag it")
    return notes


def physical_params(config: dict):
    from .units import PhysicalParams
    return PhysicalParams(
        radius_m=config["physical.radius_m"],
        plate_separation_m=config["physical.plate_separation_m"],
        density_kg_m3=config["physical.density_kg_m3"],
        magnetization_A_m=config["physical.magnetization_A_m"],
        field_x_T=config["physical.field_x_T"],
        field_z_T=config["physical.field_z_T"],
    )


def dimensionless_config(config: dict, cutoff_key: str = "numerics.cutoff_dissipative"):
    """Dimensionless problem from the config: explicit overrides win over derived."""
    from .rotor import DimensionlessConfig
    from .units import derive_scales
    scales = derive_scales(physical_params(config))
    v0 = config["dimensionless.v0"]
    h_x = config["dimensionless.h_x"]
    h_z = config["dimensionless.h_z"]
    return DimensionlessConfig(
        v0=scales.v0 if math.isnan(v0) else v0,
        h_x=scales.h_x if math.isnan(h_x) else h_x,
        h_z=scales.h_z if math.isnan(h_z) else h_z,
        cutoff=config[cutoff_key],
    ), scales
