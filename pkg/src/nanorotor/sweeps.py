"""Parameter sweeps, time traces and budget assembly behind the CLI.

Grid evaluation uses a thread pool (the heavy work is inside BLAS/LAPACK
which releases the GIL); results are collected by grid index so worker
count never changes output ordering or values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channels as ch_mod
from .config import RunManifest, _format_value, dimensionless_config, physical_params
from .constants import ATOMIC_MASS
from .dynamics import doublet_state, evolve, gaussian_packet, visibility
from .errors import DomainError
from .lindblad import (DensityMatrix, LindbladChannel, build_jump_operators,
                       gas_dissipator, integrate_master_equation)
from .rotor import DimensionlessConfig, solve
from .units import PhysicalParams, derive_scales

_MIN_SPLITTING = 1e-9   # below this the doublet is frozen on any feasible window


@dataclass
class AxisSpec:
    name: str
    minimum: float
    maximum: float
    count: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.count < 2:
            raise DomainError(f"axis {self.name}: count must be >= 2")
        if self.scale == "log":
            if self.minimum <= 0.0 or self.maximum <= 0.0:
                raise DomainError(f"axis {self.name}: log scale needs positive bounds")
            return np.logspace(math.log10(self.minimum), math.log10(self.maximum),
                               self.count)
        return np.linspace(self.minimum, self.maximum, self.count)


def axis_from_config(config: dict, which: int) -> AxisSpec:
    prefix = f"sweep.axis{which}"
    return AxisSpec(name=config[f"{prefix}.name"], minimum=config[f"{prefix}.min"],
                    maximum=config[f"{prefix}.max"], count=config[f"{prefix}.count"],
                    scale=config[f"{prefix}.scale"])


def _apply_axis(config: dict, base_cfg: DimensionlessConfig, name: str, value: float,
                cutoff: int) -> DimensionlessConfig:
    """Dimensionless configuration with one swept parameter replaced."""
    if name == "v0":
        return DimensionlessConfig(value, base_cfg.h_x, base_cfg.h_z, cutoff)
    if name == "h_x":
        return DimensionlessConfig(base_cfg.v0, value, base_cfg.h_z, cutoff)
    if name == "h_z":
        return DimensionlessConfig(base_cfg.v0, base_cfg.h_x, value, cutoff)
    if name in ("radius_m", "plate_separation_m"):
        p = physical_params(config)
        kwargs = dict(radius_m=p.radius_m, plate_separation_m=p.plate_separation_m,
                      density_kg_m3=p.density_kg_m3,
                      magnetization_A_m=p.magnetization_A_m,
                      field_x_T=p.field_x_T, field_z_T=p.field_z_T)
        kwargs[name] = value
        scales = derive_scales(PhysicalParams(**kwargs))
        return DimensionlessConfig(scales.v0, scales.h_x, scales.h_z, cutoff)
    raise DomainError(f"axis {name!r} does not define a rotor configuration")


def _visibility_point(cfg: DimensionlessConfig, periods: float, per_period: int):
    """Visibility, splitting and regime flag of the closed doublet dynamics."""
    spec = solve(cfg)
    splitting = float(spec.energies[1] - spec.energies[0])
    barrier = cfg.v0 - abs(cfg.h_z)
    in_regime = bool(spec.energies[1] < barrier)
    if splitting < _MIN_SPLITTING:
        return {"visibility": 0.0, "splitting": splitting, "in_regime": in_regime}
    period = 2.0 * math.pi / splitting
    n = max(32, int(per_period * (periods + 1)))
    times = np.linspace(0.0, (periods + 1) * period, n)
    ts = evolve(doublet_state(spec), spec, times)
    return {"visibility": visibility(ts), "splitting": splitting,
            "in_regime": in_regime}


def _grid_eval(points, worker, threads: int):
    """Evaluate worker(point) over a list, preserving order, catching errors."""
    results = [None] * len(points)

    def run(i):
        try:
            results[i] = (worker(points[i]), "")
        except Exception as exc:   # per-point failure lands in the error column
            results[i] = (None, f"{type(exc).__name__}: {exc}")

    if threads <= 1:
        for i in range(len(points)):
            run(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(len(points))))
    return results


def run_spectrum(config: dict, threads: int = 1):
    """Eigenvalue scan over the axis-1 parameter (Fig.-2-style data)."""
    axis = axis_from_config(config, 1)
    if axis.name not in ("v0", "h_x", "h_z", "radius_m", "plate_separation_m"):
        raise DomainError("spectrum sweeps requires a rotor-parameter axis")
    base, _ = dimensionless_config(config, "numerics.cutoff_unitary")
    cutoff = config["numerics.cutoff_unitary"]
    levels = config["sweep.spectrum_levels"]

    def worker(value):
        cfg = _apply_axis(config, base, axis.name, value, cutoff)
        spec = solve(cfg)
        return {"energies": spec.energies[:levels], "barrier": cfg.v0 - abs(cfg.h_z)}

    values = axis.values()
    results = _grid_eval(list(values), worker, threads)
    header = [axis.name] + [f"e{i}" for i in range(levels)] + ["barrier"]
    rows = []
    for value, (res, err) in zip(values, results):
        if res is None:
            rows.append([value] + [math.nan] * levels + [math.nan])
        else:
            rows.append([value] + list(res["energies"]) + [res["barrier"]])
    return header, rows


def run_visibility_map(config: dict, threads: int = 1):
    """Visibility (and tunneling splitting) over a 2-axis rotor-parameter grid."""
    ax1 = axis_from_config(config, 1)
    ax2 = axis_from_config(config, 2)
    for ax in (ax1, ax2):
        if ax.name in ("gamma", "temperature", "lambda_r"):
            raise DomainError("vis-map axes must be rotor parameters; "
                              "use dec-map for channel sweeps")
    if ax1.name == ax2.name:
        raise DomainError("the two sweep axes must differ")
    base, _ = dimensionless_config(config, "numerics.cutoff_map")
    cutoff = config["numerics.cutoff_map"]
    periods = config["numerics.visibility_periods"]
    per_period = config["numerics.samples_per_period"]

    points = [(a, b) for a in ax1.values() for b in ax2.values()]

    def worker(point):
        cfg = _apply_axis(config, base, ax1.name, point[0], cutoff)
        cfg = _apply_axis(config, cfg, ax2.name, point[1], cutoff)
        return _visibility_point(cfg, periods, per_period)

    results = _grid_eval(points, worker, threads)
    header = [ax1.name, ax2.name, "visibility", "splitting", "in_regime", "error"]
    rows = []
    for (a, b), (res, err) in zip(points, results):
        if res is None:
            rows.append([a, b, math.nan, math.nan, "", err])
        else:
            rows.append([a, b, res["visibility"], res["splitting"],
                         int(res["in_regime"]), err])
    return header, rows


def _channel_from_config(config: dict, gamma: float | None = None,
                         temperature: float | None = None) -> LindbladChannel:
    return LindbladChannel(
        kind=config["channel.kind"],
        rate_per_s=config["channel.rate_per_s"] if gamma is None else gamma,
        temperature_K=config["channel.temperature_K"] if temperature is None
        else temperature,
        spectral=config["channel.spectral"],
    )


def _dissipative_visibility(config: dict, spec, scales, gamma=None, temperature=None,
                            lambda_r=None):
    splitting = float(spec.energies[1] - spec.energies[0])
    if splitting < _MIN_SPLITTING:
        return 0.0
    period = 2.0 * math.pi / splitting
    periods = config["numerics.visibility_periods"]
    per_period = config["numerics.samples_per_period"]
    n = max(32, int(per_period * (periods + 1)))
    times = np.linspace(0.0, (periods + 1) * period, n)

    if config["channel.kind"] == "gas":
        jumps = gas_dissipator(config["channel.gas_rate_per_s"] if lambda_r is None
                               else lambda_r, spec.config.cutoff)
    else:
        channel = _channel_from_config(config, gamma, temperature)
        jumps = build_jump_operators(spec, channel, scales.rate_scale_per_s,
                                     omega_tol=config["numerics.bohr_tolerance"])
    psi = doublet_state(spec)
    rho0 = DensityMatrix.from_state(spec.vectors.conj().T @ psi, basis="energy")
    traj = integrate_master_equation(rho0, spec, jumps, times,
                                     scales.rate_scale_per_s,
                                     step_safety=config["numerics.step_safety"])
    return visibility(traj.series)


def run_decoherence_map(config: dict, threads: int = 1):
    """Visibility vs channel strength (and temperature) at fixed rotor parameters.

    Thermal channels sweep (gamma, temperature) on axes 1 and 2; the gas
    channel sweeps its localization rate on axis 1 alone.
    """
    kind = config["channel.kind"]
    if kind == "none":
        raise DomainError("dec-map needs channel.kind set (thermal kind or 'gas')")
    cfg, scales = dimensionless_config(config, "numerics.cutoff_dissipative")
    spec = solve(cfg)

    if kind == "gas":
        ax1 = axis_from_config(config, 1)
        if ax1.name != "lambda_r":
            raise DomainError("gas dec-map sweeps axis1 name 'lambda_r'")
        points = list(ax1.values())

        def worker(lam):
            return _dissipative_visibility(config, spec, scales, lambda_r=lam)

        results = _grid_eval(points, worker, threads)
        header = ["lambda_r", "visibility", "error"]
        rows = [[lam, math.nan if res is None else res, err]
                for lam, (res, err) in zip(points, results)]
        return header, rows

    ax1 = axis_from_config(config, 1)
    ax2 = axis_from_config(config, 2)
    if ax1.name != "gamma" or ax2.name != "temperature":
        raise DomainError("thermal dec-map sweeps axis1 'gamma' and axis2 'temperature'")
    points = [(g, t) for g in ax1.values() for t in ax2.values()]

    def worker(point):
        return _dissipative_visibility(config, spec, scales, gamma=point[0],
                                       temperature=point[1])

    results = _grid_eval(points, worker, threads)
    header = ["gamma", "temperature", "visibility", "error"]
    rows = [[g, t, math.nan if res is None else res, err]
            for (g, t), (res, err) in zip(points, results)]
    return header, rows


def run_evolve(config: dict):
    """Single time trace: p_+, purity and trace error, unitary or dissipative."""
    kind = config["channel.kind"]
    cutoff_key = "numerics.cutoff_unitary" if kind == "none" \
        else "numerics.cutoff_dissipative"
    cfg, scales = dimensionless_config(config, cutoff_key)
    spec = solve(cfg)
    splitting = float(spec.energies[1] - spec.energies[0])
    if splitting < _MIN_SPLITTING:
        raise DomainError("doublet splitting is numerically zero; no tunneling window")
    period = 2.0 * math.pi / splitting

    if config["evolve.initial"] == "gaussian":
        psi = gaussian_packet(config["evolve.sigma"], cfg.cutoff)
    else:
        psi = doublet_state(spec)

    times = np.linspace(0.0, config["evolve.periods"] * period,
                        config["evolve.samples"])
    header = ["time_s", "time_dimensionless", "p_plus", "purity", "trace_error"]
    rows = []
    if kind == "none":
        ts = evolve(psi, spec, times)
        for i, tau in enumerate(ts.times):
            norm = ts.norm[i]
            rows.append([tau / scales.rate_scale_per_s, tau, ts.p_plus[i],
                         norm**2, abs(norm - 1.0)])
    else:
        if kind == "gas":
            jumps = gas_dissipator(config["channel.gas_rate_per_s"], cfg.cutoff)
        else:
            jumps = build_jump_operators(spec, _channel_from_config(config),
                                         scales.rate_scale_per_s,
                                         omega_tol=config["numerics.bohr_tolerance"])
        rho0 = DensityMatrix.from_state(spec.vectors.conj().T @ psi, basis="energy")
        traj = integrate_master_equation(rho0, spec, jumps, times,
                                         scales.rate_scale_per_s,
                                         step_safety=config["numerics.step_safety"])
        for i, tau in enumerate(traj.series.times):
            rows.append([tau / scales.rate_scale_per_s, tau, traj.series.p_plus[i],
                         traj.purity[i], traj.trace_error[i]])
    return header, rows


def run_budget(config: dict):
    """Ranked physical decoherence budget from the configured channel inputs."""
    from .rotor import tunneling_observables
    cfg, scales = dimensionless_config(config, "numerics.cutoff_dissipative")
    spec = solve(cfg)
    f_t = tunneling_observables(spec, scales)["frequency_Hz"]
    p = physical_params(config)

    gas = None
    if config["budget.gas_density_m3"] > 0.0:
        gas = ch_mod.GasParams(
            molecule_mass_kg=config["budget.gas_mass_amu"] * ATOMIC_MASS,
            number_density_m3=config["budget.gas_density_m3"],
            temperature_K=config["budget.gas_temperature_K"],
            born_strength_J=config["budget.gas_born_strength_J"],
            roughness_b1_m3=ch_mod.roughness_to_b1(config["budget.gas_roughness_rel"],
                                                   p.radius_m),
        )
    elastic = ch_mod.ElasticParams(
        density_kg_m3=config["budget.plate_density_kg_m3"],
        sound_speed_l_m_s=config["budget.sound_speed_l_m_s"],
        sound_speed_t_m_s=config["budget.sound_speed_t_m_s"],
    )
    squid = ch_mod.SquidParams(
        level_splitting_rad_s=2.0 * math.pi * config["budget.squid_splitting_hz"],
        persistent_current_A=config["budget.squid_current_A"],
        t1_s=config["budget.squid_t1_s"],
        t2_s=config["budget.squid_t2_s"],
        temperature_K=config["budget.squid_temperature_K"],
        flux_amplitude_Wb=config["budget.squid_flux_Wb"],
    )
    fraction = ch_mod.quasiparticle_fraction(config["budget.eddy_plate_temperature_K"],
                                             config["budget.eddy_plate_tc_K"])
    report = ch_mod.decoherence_budget(
        tunneling_frequency_hz=f_t,
        gas=gas,
        elastic=elastic,
        barrier_J=scales.barrier_J,
        plate_separation_m=p.plate_separation_m,
        bath_temperature_K=config["budget.bath_temperature_K"],
        seismic_sqrt_sz=config["budget.seismic_sqrt_sz"],
        seismic_bandwidth_hz=config["budget.seismic_bandwidth_hz"],
        eddy_particle_inputs={"scales": scales,
                              "conductivity_S_m": config["budget.eddy_particle_conductivity_S_m"],
                              "radius_m": p.radius_m,
                              "plate_separation_m": p.plate_separation_m,
                              "magnetization_A_m": p.magnetization_A_m},
        eddy_plate_inputs={"scales": scales,
                           "normal_conductivity_S_m": config["budget.eddy_plate_conductivity_S_m"],
                           "london_depth_m": config["budget.eddy_plate_london_depth_m"],
                           "fraction": fraction,
                           "radius_m": p.radius_m,
                           "plate_separation_m": p.plate_separation_m,
                           "magnetization_A_m": p.magnetization_A_m,
                           "i0_mode": config["budget.eddy_plate_i0_mode"]},
        squid=squid,
    )
    return report


def budget_rows(report: ch_mod.RateReport):
    header = ["rank", "channel", "rate_per_s", "ratio_to_angular_tunneling",
              "ratio_to_gas", "formula", "configured"]
    rows = []
    rank_of = {name: i + 1 for i, name in enumerate(report.ranking)}
    ordered = sorted(report.entries,
                     key=lambda e: rank_of.get(e.channel, len(rank_of) + 1))
    for entry in ordered:
        ratio_gas = report.ratio_to_gas(entry.channel)
        rows.append([rank_of.get(entry.channel, ""), entry.channel, entry.rate_per_s,
                     report.ratio_to_tunneling(entry.channel),
                     "" if ratio_gas is None else ratio_gas,
                     entry.formula, 1])
    for name in report.not_configured:
        rows.append(["", name, "", "", "", "not_configured", 0])
    return header, rows


def budget_text(report: ch_mod.RateReport) -> str:
    lines = [f"decoherence budget (tunneling frequency {report.tunneling_frequency_hz:.4g} Hz)"]
    rank_of = {name: i + 1 for i, name in enumerate(report.ranking)}
    for entry in sorted(report.entries,
                        key=lambda e: rank_of.get(e.channel, len(rank_of) + 1)):
        ratio = report.ratio_to_tunneling(entry.channel)
        lines.append(f"  {rank_of.get(entry.channel, '-')!s:>2}  {entry.channel:<20} "
                     f"{entry.rate_per_s:12.4e} 1/s   rate/(2 pi f_T) = {ratio:10.3e}")
    if report.not_configured:
        lines.append("  not configured: " + ", ".join(report.not_configured))
    return "\n".join(lines)


def write_csv(path: str, header: list[str], rows: list[list], manifest: RunManifest):
    """CSV with the manifest embedded as leading comment lines, 9 sig digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in manifest.comment_lines():
            fh.write(line + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(cell) for cell in row) + "\n")


def _format_cell(cell) -> str:
    if isinstance(cell, float):
        return _format_value(cell)
    if isinstance(cell, (np.floating,)):
        return _format_value(float(cell))
    return str(cell)
