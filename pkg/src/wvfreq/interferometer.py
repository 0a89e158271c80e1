"""Sagnac weak measurement: weak value, postselection, dark-port statistics.

A vertical misalignment kick creates a relative phase phi between the
counter-propagating paths, so only a fraction sin^2(phi/2) of the light
exits the dark port. The prism kick +-k on the two paths makes the exact
dark-port intensity

    I(x) ~ sin^2(k x + phi/2) * exp(-x^2 / (2 sigma^2)),

with sigma the Gaussian intensity-profile standard deviation (field
amplitude ~ exp(-x^2/(4 sigma^2))). Linearizing in k*sigma gives the
amplified centroid shift 2 k sigma^2 cot(phi/2), i.e. the purely imaginary
weak value cot(phi/2) converts the momentum kick into a position shift.
``exact_dark_port_mean`` keeps the full sin^2 form and serves as the oracle
the linearized expressions are validated against.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .dispersion import OpticalCarrier
from .errors import (
    DarkPortEmptyError,
    DomainError,
    GrazingIncidenceError,
    ValidationError,
    WeakValueApproximationWarning,
    WeakValueValidityError,
)

# Linearization bookkeeping: warn above the soft bound, refuse above the hard one.
KICK_SIGMA_WARN = 0.1
KICK_SIGMA_LIMIT = 0.5

DEFAULT_GRID_POINTS = 4097
DEFAULT_GRID_HALF_WIDTH = 8.0  # in units of sigma; tail error ~ exp(-32)


@dataclass(frozen=True)
class BeamProfile:
    """Gaussian meter state: intensity-profile width sigma and its carrier."""

    sigma: float
    carrier: OpticalCarrier

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError(f"beam sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class InterferometerState:
    """Dark-port phase, path length and beam. phi in (0, pi]; the weak-value
    amplification ops additionally require phi < pi."""

    phi: float
    path_length: float
    beam: BeamProfile

    def __post_init__(self):
        if not 0.0 < self.phi <= np.pi:
            raise ValidationError(f"phi must lie in (0, pi], got {self.phi}")
        if not self.path_length > 0:
            raise ValidationError(
                f"path length must be positive, got {self.path_length}"
            )


def weak_value_magnitude(phi):
    """|A_w| = cot(phi/2); the weak value itself is purely imaginary, which is
    why the kick appears as a position (not momentum) shift at the detector."""
    if not 0.0 < phi < np.pi:
        raise DomainError(f"phi must lie in (0, pi) for amplification, got {phi}")
    return 1.0 / np.tan(phi / 2.0)


def postselection_probability(phi):
    """Fraction sin^2(phi/2) of the input light that exits the dark port."""
    if not 0.0 <= phi <= np.pi:
        raise DomainError(f"phi must lie in [0, pi], got {phi}")
    return np.sin(phi / 2.0) ** 2


def phi_for_postselection(p_ps):
    """Dark-port phase giving postselection probability ``p_ps``."""
    if not 0.0 < p_ps <= 1.0:
        raise DomainError(f"postselection probability must lie in (0, 1], got {p_ps}")
    return 2.0 * np.arcsin(np.sqrt(p_ps))


def _check_kick_validity(k, sigma):
    ks = np.max(np.abs(k)) * sigma
    if ks > KICK_SIGMA_LIMIT:
        raise WeakValueValidityError(
            f"weak value condition k*sigma << 1 violated: k*sigma = {ks:.3g} "
            f"> {KICK_SIGMA_LIMIT}"
        )
    if ks > KICK_SIGMA_WARN:
        warnings.warn(
            f"k*sigma = {ks:.3g} exceeds {KICK_SIGMA_WARN}; linearized deflection "
            "is a degraded approximation",
            WeakValueApproximationWarning,
            stacklevel=3,
        )


def amplified_deflection(k, state):
    """Linearized dark-port centroid shift 2 k sigma^2 cot(phi/2) in meters."""
    sigma = state.beam.sigma
    _check_kick_validity(k, sigma)
    return 2.0 * k * sigma**2 * weak_value_magnitude(state.phi)


def amplified_deflection_closed_form(dn, gamma, n, phi, sigma, k0):
    """Small-phi closed form 8 k0 sigma^2 (dn/phi) / sqrt(sin(gamma/2)**-2 - n^2).

    Uses the small-angle weak value 2/phi instead of cot(phi/2); relative to
    ``amplified_deflection`` the substitution error is about phi^2/12.
    """
    radicand = np.sin(gamma / 2.0) ** -2 - n**2
    if radicand <= 0.0:
        raise GrazingIncidenceError(
            f"sin(gamma/2)**-2 - n^2 = {radicand:.3e} <= 0 in closed-form deflection"
        )
    return 8.0 * k0 * sigma**2 * (dn / phi) / np.sqrt(radicand)


def unamplified_deflection(k, path_length, k0):
    """Free-space deflection l*k/k0 = l*delta of the un-postselected beam."""
    return path_length * k / k0


def amplification_factor(state):
    """Ratio of amplified to unamplified deflection, 2 k0 sigma^2 cot(phi/2) / l.

    The prism kick cancels, so the factor depends only on the interferometer.
    """
    k0 = state.beam.carrier.wavenumber
    return (
        2.0
        * k0
        * state.beam.sigma**2
        * weak_value_magnitude(state.phi)
        / state.path_length
    )


def dark_port_grid(state, n_points=DEFAULT_GRID_POINTS, half_width=DEFAULT_GRID_HALF_WIDTH):
    """Symmetric detector-plane grid covering +-half_width*sigma."""
    span = half_width * state.beam.sigma
    return np.linspace(-span, span, n_points)


def _dark_port_intensity_rows(k_values, state, x_grid, background_fraction=0.0):
    """Normalized dark-port profiles, one row per kick value.

    A nonzero ``background_fraction`` beta mixes in a uniform floor carrying
    beta of the input light (relative to the sin^2(phi/2) dark-port share),
    standing in for stray light from imperfect optics.
    """
    if background_fraction < 0:
        raise ValidationError("background fraction must be >= 0")
    sigma = state.beam.sigma
    k_col = np.atleast_1d(np.asarray(k_values, dtype=float))[:, None]
    envelope = np.exp(-(x_grid**2) / (2.0 * sigma**2))
    intensity = np.sin(k_col * x_grid + state.phi / 2.0) ** 2 * envelope
    norm = trapezoid(intensity, x_grid, axis=1)
    if np.any(norm <= 0.0):
        raise DarkPortEmptyError("dark-port intensity vanished on the grid")
    intensity /= norm[:, None]
    if background_fraction > 0.0:
        p_ps = postselection_probability(state.phi)
        uniform = 1.0 / (x_grid[-1] - x_grid[0])
        w_dark = p_ps / (p_ps + background_fraction)
        intensity = w_dark * intensity + (1.0 - w_dark) * uniform
    return intensity


def dark_port_profile(k, state, x_grid, background_fraction=0.0):
    """Normalized dark-port intensity samples on ``x_grid`` (unit trapezoid
    integral)."""
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.ndim != 1 or x_grid.size < 2 or np.any(np.diff(x_grid) <= 0):
        raise ValidationError("x_grid must be a strictly increasing 1-D array")
    return _dark_port_intensity_rows(k, state, x_grid, background_fraction)[0]


def exact_dark_port_mean(
    k,
    state,
    n_points=DEFAULT_GRID_POINTS,
    half_width=DEFAULT_GRID_HALF_WIDTH,
    empty_floor=1e-14,
):
    """First moment of the exact dark-port intensity, by trapezoid quadrature.

    Valid beyond k*sigma << 1; this is the oracle against which the
    linearized ``amplified_deflection`` is checked. Raises DarkPortEmptyError
    when essentially no light reaches the dark port (phi ~ 0 and k ~ 0).
    """
    sigma = state.beam.sigma
    x = dark_port_grid(state, n_points, half_width)
    intensity = np.sin(k * x + state.phi / 2.0) ** 2 * np.exp(
        -(x**2) / (2.0 * sigma**2)
    )
    norm = trapezoid(intensity, x)
    # Compare against the bright-beam normalization sqrt(2*pi)*sigma.
    if norm / (np.sqrt(2.0 * np.pi) * sigma) < empty_floor:
        raise DarkPortEmptyError(
            f"dark-port occupancy {norm / (np.sqrt(2 * np.pi) * sigma):.3e} below "
            f"floor {empty_floor:.3e}"
        )
    return trapezoid(x * intensity, x) / norm
