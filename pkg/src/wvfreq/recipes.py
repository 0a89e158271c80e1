"""Experiment recipes behind the CLI subcommands.

Each recipe runs one of the canonical measurements end to end on a resolved
configuration and returns plain data plus CSV text. Sweep points are seeded
``seed + point_index`` so sweeps can be scheduled in any order (or in
parallel) without changing the result.
"""

from dataclasses import dataclass

import numpy as np

from .calibration import (
    fit_scan_calibration,
    load_reference_lines,
    propagate_calibration_error,
)
from .config import resolve, resolved_metadata
from .errors import SimulationError, ValidationError
from .interferometer import amplification_factor
from .noise import (
    ideal_sensitivity,
    measured_sensitivity,
    photon_number,
    shot_noise_snr,
    usable_range,
    SensitivityReport,
)
from .signal_chain import (
    FilterSpec,
    ModulationConfig,
    NoiseExtensions,
    bandpass,
    extract_peaks,
    power_spectrum,
    slope_fit,
    synthesize_run,
    timeseries_to_csv,
)
from .units import fmt


def _filter_spec(config):
    return FilterSpec(
        center=config.filter_center,
        stages=config.filter_stages,
        gain=config.filter_gain,
    )


def _extensions(config):
    return NoiseExtensions(
        electronic_noise=config.electronic_noise,
        dark_count_rate=config.dark_count_rate,
    )


def _measure_point(physics, dnu_peak, seed):
    """One sweep point: synthesize, filter, extract peaks, undo the gain."""
    cfg = physics.config
    cycle = 1.0 / cfg.mod_frequency
    duration = (cfg.n_cycles + cfg.settle_cycles) * cycle
    raw = synthesize_run(
        dnu_peak,
        duration,
        cfg.sample_rate,
        physics,
        physics.n_photons_per_sample(),
        seed,
        modulation=ModulationConfig(mod_frequency=cfg.mod_frequency, amplitude=dnu_peak),
        extensions=_extensions(cfg),
    )
    spec = _filter_spec(cfg)
    filtered = bandpass(raw, spec)
    mean, std_of_mean = extract_peaks(filtered, cycle, cfg.n_cycles)
    return mean / spec.gain, std_of_mean / spec.gain


@dataclass
class SlopeSweepResult:
    shifts: np.ndarray  # Hz
    deflections: np.ndarray  # m
    errors: np.ndarray  # m
    slope: float  # m/Hz
    slope_error: float  # m/Hz
    amplification: float
    metadata: dict


def run_slope_sweep(config):
    """Modulation-amplitude sweep with a weighted linear fit (deflection slope)."""
    physics = resolve(config)
    shifts = config.sweep_shifts()
    if shifts.size < 2:
        raise ValidationError("slope sweep needs at least two points")
    deflections = np.empty(shifts.size)
    errors = np.empty(shifts.size)
    for i, dnu in enumerate(shifts):
        try:
            deflections[i], errors[i] = _measure_point(physics, dnu, config.seed + i)
        except SimulationError as exc:
            raise type(exc)(f"sweep point {i} (dnu={dnu:.6g} Hz): {exc}") from exc
    slope, slope_error = slope_fit(shifts, deflections, errors)
    metadata = resolved_metadata(physics)
    metadata["fitted_slope_m_per_hz"] = slope
    metadata["fitted_slope_error_m_per_hz"] = slope_error
    return SlopeSweepResult(
        shifts=shifts,
        deflections=deflections,
        errors=errors,
        slope=slope,
        slope_error=slope_error,
        amplification=amplification_factor(physics.state),
        metadata=metadata,
    )


def slope_sweep_csv(result):
    lines = [f"# {key} = {fmt(value)}\n" for key, value in result.metadata.items()]
    lines.append("dnu_hz,deflection_m,std_of_mean_m\n")
    for dnu, y, e in zip(result.shifts, result.deflections, result.errors):
        lines.append(f"{dnu:.17g},{y:.17g},{e:.17g}\n")
    return "".join(lines)


def run_spectrum_pair(config):
    """Driven and undriven raw-signal spectra on a shared dB reference."""
    physics = resolve(config)
    cfg = config
    n_per_sample = physics.n_photons_per_sample()
    driven = synthesize_run(
        cfg.spectrum_dnu,
        cfg.spectrum_duration,
        cfg.sample_rate,
        physics,
        n_per_sample,
        cfg.seed,
        modulation=ModulationConfig(
            mod_frequency=cfg.mod_frequency, amplitude=cfg.spectrum_dnu
        ),
        extensions=_extensions(cfg),
    )
    undriven = synthesize_run(
        0.0,
        cfg.spectrum_duration,
        cfg.sample_rate,
        physics,
        n_per_sample,
        cfg.seed + 1,
        modulation=ModulationConfig(mod_frequency=cfg.mod_frequency),
        extensions=_extensions(cfg),
    )
    spec_driven = power_spectrum(driven, segments=cfg.spectrum_segments)
    spec_undriven = power_spectrum(undriven, segments=cfg.spectrum_segments)
    # Re-reference both traces to the driven fundamental (0 dB).
    fundamental = np.argmin(np.abs(spec_driven.frequencies - cfg.mod_frequency))
    ref_db = spec_driven.power_db[fundamental]
    ref_power = spec_driven.ref_power * 10.0 ** (ref_db / 10.0)
    driven_db = spec_driven.power_db - ref_db
    undriven_db = spec_undriven.power_db + 10.0 * np.log10(
        spec_undriven.ref_power / ref_power
    )
    metadata = resolved_metadata(physics)
    metadata["resolution_bw_hz"] = spec_driven.resolution_bw
    metadata["ref_power"] = ref_power
    return spec_driven.frequencies, driven_db, undriven_db, metadata


def spectrum_pair_csv(frequencies, driven_db, undriven_db, metadata):
    lines = [f"# {key} = {fmt(value)}\n" for key, value in metadata.items()]
    lines.append("frequency_hz,driven_db,undriven_db\n")
    for f, d, u in zip(frequencies, driven_db, undriven_db):
        lines.append(f"{f:.17g},{d:.17g},{u:.17g}\n")
    return "".join(lines)


def run_sensitivity(config):
    """Ideal and scaled sensitivities, SNR at the minimum sweep point, range."""
    physics = resolve(config)
    cfg = config
    if cfg.power <= 0:
        raise ValidationError("zero optical power: sensitivity is unreachable")
    ideal = ideal_sensitivity(cfg.power, physics.carrier, cfg.sigma, physics.prism)
    min_shift = cfg.sweep_min
    scaled = measured_sensitivity(min_shift, cfg.integration_time)
    slope = physics.deflection_slope()
    delta_min = slope * min_shift
    n_tau = photon_number(cfg.power, physics.carrier, cfg.integration_time)
    snr = shot_noise_snr(n_tau, physics.carrier.wavenumber, cfg.sigma, delta_min)
    span = usable_range(physics.carrier, cfg.sigma, physics.prism, cfg.range_threshold)
    return SensitivityReport(
        snr=snr,
        min_deflection=delta_min,
        min_frequency_shift=min_shift,
        integration_time=cfg.integration_time,
        sensitivity_per_rt_hz=scaled,
        ideal_sensitivity_per_rt_hz=ideal,
        usable_range_hz=span.frequency_span,
        range_clamped=span.clamped,
    ), resolved_metadata(physics)


def sensitivity_csv(report, metadata):
    lines = [f"# {key} = {fmt(value)}\n" for key, value in metadata.items()]
    lines.append(
        "snr,min_deflection_rad,min_frequency_shift_hz,integration_time_s,"
        "sensitivity_hz_rthz,ideal_sensitivity_hz_rthz,usable_range_hz,range_clamped\n"
    )
    lines.append(
        f"{report.snr:.17g},{report.min_deflection:.17g},"
        f"{report.min_frequency_shift:.17g},{report.integration_time:.17g},"
        f"{report.sensitivity_per_rt_hz:.17g},"
        f"{report.ideal_sensitivity_per_rt_hz:.17g},"
        f"{report.usable_range_hz:.17g},{int(report.range_clamped)}\n"
    )
    return "".join(lines)


def sensitivity_text(report):
    ratio = report.sensitivity_per_rt_hz / report.ideal_sensitivity_per_rt_hz
    flag = " (clamped to material validity window)" if report.range_clamped else ""
    return (
        f"shot-noise SNR at {report.min_frequency_shift / 1e3:.1f} kHz, "
        f"{report.integration_time * 1e3:.0f} ms: {report.snr:.3f}\n"
        f"minimum deflection: {report.min_deflection:.4e} rad\n"
        f"sensitivity (scaled to 1 s): "
        f"{report.sensitivity_per_rt_hz / 1e3:.1f} kHz/sqrt(Hz)\n"
        f"ideal shot-noise sensitivity: "
        f"{report.ideal_sensitivity_per_rt_hz / 1e3:.1f} kHz/sqrt(Hz)\n"
        f"ratio to shot-noise limit: {ratio:.2f}\n"
        f"usable range: {report.usable_range_hz / 1e12:.2f} THz{flag}\n"
    )


def run_range(config):
    physics = resolve(config)
    span = usable_range(
        physics.carrier, config.sigma, physics.prism, config.range_threshold
    )
    return span, resolved_metadata(physics)


def run_simulate(config, dnu_peak, duration):
    """Raw time-series dump at one modulation amplitude."""
    physics = resolve(config)
    series = synthesize_run(
        dnu_peak,
        duration,
        config.sample_rate,
        physics,
        physics.n_photons_per_sample(),
        config.seed,
        modulation=ModulationConfig(
            mod_frequency=config.mod_frequency, amplitude=dnu_peak
        ),
        extensions=_extensions(config),
    )
    metadata = resolved_metadata(physics)
    metadata["dnu_peak_hz"] = dnu_peak
    metadata["seed"] = config.seed
    return timeseries_to_csv(series, metadata)


def run_calibrate(positions_path, references_path=None, probe_value=None):
    """Fit a scan calibration from a positions file and a reference table."""
    positions = []
    with open(positions_path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if line and not line.startswith("#"):
                positions.append(float(line.split(",")[0]))
    references = load_reference_lines(references_path)
    calibration = fit_scan_calibration(positions, references)
    lines = [
        f"slope_hz_per_unit = {fmt(calibration.slope)}",
        f"intercept_hz = {fmt(calibration.intercept)}",
        f"residual_rms_hz = {fmt(calibration.residual_rms)}",
        f"slope_error_hz_per_unit = {fmt(calibration.slope_error)}",
        f"fractional_slope_error = {fmt(calibration.fractional_slope_error)}",
    ]
    if probe_value is not None:
        err = propagate_calibration_error(calibration, probe_value)
        lines.append(f"propagated_error_hz_on_{fmt(probe_value)} = {fmt(err)}")
    return calibration, "\n".join(lines) + "\n"
