"""Experiment configuration: defaults, file/flag parsing, resolution.

Defaults pin the published operating point: 780 nm carrier, 388 um beam,
27 cm interferometer, 2 mW locked power, 1.3% postselection and a prism
calibrated to a 9.1 pm/MHz unamplified deflection slope. Exactly one of
{phi, postselection} and one of {apex_angle, unamplified_slope} may be
supplied; the derived partner is recorded in the run metadata.

Config files are flat ``key = value`` text with '#' comments; values may
carry unit suffixes (see units.py). CLI flags override file values.
"""

import hashlib
from dataclasses import dataclass, fields, replace

import numpy as np

from . import dispersion, interferometer
from .errors import ValidationError
from .units import fmt, parse_quantity

# field name -> (dimension for the unit parser, help text)
CONFIG_FIELDS = {
    "wavelength": ("length", "carrier wavelength (default 780nm)"),
    "power": ("power", "optical power entering the interferometer (default 2mW)"),
    "sigma": ("length", "Gaussian beam intensity width (default 388um)"),
    "path_length": ("length", "interferometer path length (default 0.27m)"),
    "postselection": (None, "dark-port postselection probability (default 0.013)"),
    "phi": ("angle", "dark-port phase, alternative to postselection"),
    "apex_angle": ("angle", "prism apex angle, alternative to unamplified_slope"),
    "unamplified_slope": (
        None,
        "free-deflection slope in m/Hz used to calibrate the apex angle "
        "(default 9.1e-18, i.e. 9.1 pm/MHz)",
    ),
    "material": (None, "prism material name from the Sellmeier catalog"),
    "mod_frequency": ("frequency", "modulation frequency (default 10Hz)"),
    "sample_rate": ("frequency", "detector sampling rate (default 1kHz)"),
    "n_cycles": (None, "modulation cycles averaged per sweep point (default 25)"),
    "settle_cycles": (None, "extra cycles discarded for filter settling (default 5)"),
    "sweep_min": ("frequency", "smallest modulation amplitude (default 743kHz)"),
    "sweep_max": ("frequency", "largest modulation amplitude (default 7.4MHz)"),
    "sweep_points": (None, "number of sweep points (default 6)"),
    "filter_center": ("frequency", "bandpass center (default 10Hz)"),
    "filter_stages": (None, "bandpass stage count (default 2)"),
    "filter_gain": (None, "post-filter gain (default 1e4)"),
    "spectrum_duration": ("time", "record length for noise spectra (default 100s)"),
    "spectrum_dnu": ("frequency", "drive amplitude for the driven spectrum (default 7.4MHz)"),
    "spectrum_segments": (None, "averaged periodogram segments (default 16)"),
    "integration_time": ("time", "effective integration time per point (default 30ms)"),
    "range_threshold": (None, "k*sigma bound defining the usable range (default 0.5)"),
    "background_fraction": (None, "uniform stray-light fraction beta (default 0)"),
    "electronic_noise": ("length", "additive rms position noise per sample (default 0)"),
    "dark_count_rate": ("frequency", "detector dark-count rate (default 0)"),
    "seed": (None, "base random seed"),
}

_INT_FIELDS = {
    "n_cycles",
    "settle_cycles",
    "sweep_points",
    "filter_stages",
    "spectrum_segments",
    "seed",
}


@dataclass(frozen=True)
class ExperimentConfig:
    wavelength: float = 780e-9
    power: float = 2e-3
    sigma: float = 388e-6
    path_length: float = 0.27
    postselection: float | None = 0.013
    phi: float | None = None
    apex_angle: float | None = None
    unamplified_slope: float | None = 9.1e-18
    material: str = "fused_silica"
    mod_frequency: float = 10.0
    sample_rate: float = 1000.0
    n_cycles: int = 25
    settle_cycles: int = 5
    sweep_min: float = 0.743e6
    sweep_max: float = 7.4e6
    sweep_points: int = 6
    filter_center: float = 10.0
    filter_stages: int = 2
    filter_gain: float = 1e4
    spectrum_duration: float = 100.0
    spectrum_dnu: float = 7.4e6
    spectrum_segments: int = 16
    integration_time: float = 0.03
    range_threshold: float = 0.5
    background_fraction: float = 0.0
    electronic_noise: float = 0.0
    dark_count_rate: float = 0.0
    seed: int = 20100

    def sweep_shifts(self):
        return np.linspace(self.sweep_min, self.sweep_max, self.sweep_points)


def _coerce(name, raw):
    if name == "material":
        return str(raw)
    dimension = CONFIG_FIELDS[name][0]
    value = parse_quantity(raw, dimension) if isinstance(raw, str) else float(raw)
    if name in _INT_FIELDS:
        if value != int(value):
            raise ValidationError(f"{name} must be an integer, got {raw!r}")
        return int(value)
    return value


def config_from_mapping(mapping, base=None, explicit_pairs=True):
    """Build a config from a {key: value} mapping of strings or numbers.

    ``explicit_pairs`` enforces that at most one member of each
    {phi, postselection} / {apex_angle, unamplified_slope} pair is given;
    supplying one clears the default of the other.
    """
    base = base or ExperimentConfig()
    updates = {}
    for name, raw in mapping.items():
        if name not in CONFIG_FIELDS:
            known = ", ".join(sorted(CONFIG_FIELDS))
            raise ValidationError(f"unknown config key {name!r}; known keys: {known}")
        updates[name] = _coerce(name, raw)
    if explicit_pairs:
        for first, second in (("phi", "postselection"), ("apex_angle", "unamplified_slope")):
            if first in updates and second in updates:
                raise ValidationError(f"supply only one of {first!r} and {second!r}")
            if first in updates:
                updates.setdefault(second, None)
            if second in updates:
                updates.setdefault(first, None)
    return replace(base, **updates)


def config_from_file(path, base=None):
    """Parse a flat ``key = value`` config file."""
    mapping = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            mapping[key.strip()] = value.strip()
    return config_from_mapping(mapping, base=base)


@dataclass(frozen=True)
class ResolvedPhysics:
    """Config with every derived physical object materialized."""

    config: ExperimentConfig
    carrier: dispersion.OpticalCarrier
    material: dispersion.SellmeierModel
    prism: dispersion.Prism
    state: interferometer.InterferometerState

    @property
    def background_fraction(self):
        return self.config.background_fraction

    def kick_of_shift(self, frequency_shift):
        """Transverse momentum kick (rad/m) for a carrier frequency shift."""
        delta = dispersion.dispersive_deflection(
            self.prism, self.carrier.wavelength, frequency_shift
        )
        return dispersion.momentum_kick(delta, self.carrier)

    def deflection_slope(self, probe_shift=1e6):
        return dispersion.deflection_slope(self.prism, self.carrier, probe_shift)

    def n_photons_per_sample(self):
        from .noise import photon_number

        return photon_number(self.config.power, self.carrier, 1.0 / self.config.sample_rate)


def resolve(config):
    """Materialize carrier, prism and interferometer state from a config."""
    carrier = dispersion.OpticalCarrier(wavelength=config.wavelength)
    material = dispersion.get_material(config.material)

    if config.phi is not None and config.postselection is not None:
        raise ValidationError("supply only one of phi and postselection")
    if config.phi is not None:
        phi = config.phi
    elif config.postselection is not None:
        phi = interferometer.phi_for_postselection(config.postselection)
    else:
        raise ValidationError("one of phi or postselection is required")

    if config.apex_angle is not None and config.unamplified_slope is not None:
        raise ValidationError("supply only one of apex_angle and unamplified_slope")
    if config.apex_angle is not None:
        gamma = config.apex_angle
    elif config.unamplified_slope is not None:
        gamma = dispersion.calibrate_apex_angle(
            config.unamplified_slope, config.path_length, carrier, material
        )
    else:
        raise ValidationError("one of apex_angle or unamplified_slope is required")

    prism = dispersion.Prism(apex_angle=gamma, material=material)
    beam = interferometer.BeamProfile(sigma=config.sigma, carrier=carrier)
    state = interferometer.InterferometerState(
        phi=phi, path_length=config.path_length, beam=beam
    )
    return ResolvedPhysics(
        config=config, carrier=carrier, material=material, prism=prism, state=state
    )


def resolved_metadata(physics):
    """Flat mapping of the resolved run parameters, for output headers."""
    cfg = physics.config
    meta = {}
    for field_info in fields(cfg):
        value = getattr(cfg, field_info.name)
        if value is not None:
            meta[field_info.name] = value
    meta["derived_phi"] = physics.state.phi
    meta["derived_postselection"] = interferometer.postselection_probability(
        physics.state.phi
    )
    meta["derived_apex_angle"] = physics.prism.apex_angle
    meta["derived_unamplified_slope_m_per_hz"] = (
        cfg.path_length * physics.deflection_slope()
    )
    meta["derived_amplification"] = interferometer.amplification_factor(physics.state)
    meta["config_hash"] = config_hash(meta)
    return meta


def config_hash(meta):
    """Short digest of the resolved configuration; identical hash means an
    identical run."""
    payload = "\n".join(
        f"{key}={fmt(value) if isinstance(value, float) else value}"
        for key, value in sorted(meta.items())
        if key != "config_hash"
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:12]
