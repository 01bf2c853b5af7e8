"""Two-photon photoionization loading rate.

The chain runs from two-photon transition amplitudes (or a tabulated
generalized cross-section) to the per-pulse ionization probability and the
volume-averaged loading rate of a trap sitting in a thermal atomic vapor.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .physcore import (
    AtomicVapor,
    DomainError,
    GaussianFocus,
    IntensityConvention,
    PulsedLaser,
    cm4w_to_m4w,
    peak_intensity,
    photon_energy,
    vapor_density,
)

# sigma'[cm^4/W] = AMPLITUDE_TO_CM4W * sum_j |T_j|^2, T in atomic units
AMPLITUDE_TO_CM4W = 5.7466e-35

#: Peak generalized cross-section on the Sr autoionizing resonance, cm^4/W.
DEFAULT_SIGMA_CM4W = 1e-26
#: Trapping-volume length used when none is given, m.
DEFAULT_TRAP_LENGTH = 1e-3
#: P_ion above which lowest-order perturbation theory is not trusted.
PERTURBATIVE_LIMIT = 0.1

ALLOWED_J = (0, 2)


class PerturbativeValidityWarning(UserWarning):
    """Per-pulse ionization probability too large for lowest-order theory."""


class RayleighLengthWarning(UserWarning):
    """Trapping-volume length exceeds the Rayleigh length of the focus."""


@dataclass(frozen=True)
class TwoPhotonAmplitudeSet:
    """Two-photon amplitudes ``(J, T)`` into final states of total J.

    Linearly polarized light reaches J = 0 and J = 2 only.
    """

    amplitudes: tuple[tuple[int, complex], ...] = ()

    def __post_init__(self):
        amps = tuple((int(j), complex(t)) for j, t in self.amplitudes)
        for j, _ in amps:
            if j not in ALLOWED_J:
                raise ValueError(f"final-state J={j} not reachable with linear polarization")
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class CrossSection:
    """Generalized two-photon cross-section sigma' in m^4/W."""

    sigma_prime: float

    def __post_init__(self):
        if not self.sigma_prime >= 0:
            raise ValueError("sigma_prime must be non-negative")

    @classmethod
    def from_cm4_per_w(cls, value: float) -> "CrossSection":
        return cls(cm4w_to_m4w(value))


DEFAULT_CROSS_SECTION = CrossSection.from_cm4_per_w(DEFAULT_SIGMA_CM4W)


@dataclass(frozen=True)
class InteractionGeometry:
    focus: GaussianFocus
    trap_length: float = DEFAULT_TRAP_LENGTH

    def __post_init__(self):
        if not self.trap_length > 0:
            raise ValueError("trap_length must be positive")
        if self.trap_length > self.focus.rayleigh_length:
            warnings.warn(
                f"trap length {self.trap_length:.3g} m exceeds the Rayleigh length "
                f"{self.focus.rayleigh_length:.3g} m; the rate formula assumes a "
                "collimated interaction volume",
                RayleighLengthWarning,
                stacklevel=3,
            )

    @property
    def within_rayleigh(self) -> bool:
        return self.trap_length <= self.focus.rayleigh_length


def total_cross_section(amps: TwoPhotonAmplitudeSet) -> CrossSection:
    """Sum |T_j|^2 over final J and convert to sigma' (returned in m^4/W)."""
    total = math.fsum(abs(t) ** 2 for _, t in amps.amplitudes)
    return CrossSection.from_cm4_per_w(AMPLITUDE_TO_CM4W * total)


def ionization_probability_per_pulse(
    intensity: float, sigma: CrossSection, photon_e: float, tau: float
) -> float:
    """Probability that one atom in the focus is ionized by a single pulse.

    ``(I^2 sigma' / (hbar omega)) tau``. The result is not clamped; values
    above ``PERTURBATIVE_LIMIT`` raise a :class:`PerturbativeValidityWarning`.
    """
    if photon_e == 0:
        raise DomainError("photon energy must be non-zero")
    if intensity < 0 or tau < 0 or photon_e < 0:
        raise DomainError("intensity, photon energy and pulse length must be non-negative")
    p = intensity**2 * sigma.sigma_prime / photon_e * tau
    if p > PERTURBATIVE_LIMIT:
        warnings.warn(
            f"P_ion = {p:.3g} per pulse exceeds {PERTURBATIVE_LIMIT}; "
            "lowest-order perturbation theory is not valid here",
            PerturbativeValidityWarning,
            stacklevel=2,
        )
    return p


def loading_rate(
    p_ion: float, density: float, geom: InteractionGeometry, rep_period: float
) -> float:
    """Ions loaded per second, ``P_ion (n0 w0 / 8T) (2 pi w0 L)``."""
    if not rep_period > 0:
        raise DomainError("rep_period must be positive")
    if p_ion < 0 or density < 0:
        raise DomainError("p_ion and density must be non-negative")
    w0 = geom.focus.waist_radius
    return p_ion * (density * w0 / (8.0 * rep_period)) * (2.0 * math.pi * w0 * geom.trap_length)


@dataclass(frozen=True)
class RateReport:
    convention: IntensityConvention
    intensity: float  # W/m^2
    photon_energy: float  # J
    sigma_prime: float  # m^4/W
    p_ion: float
    density: float  # m^-3
    trap_length: float  # m
    rayleigh_length: float  # m
    rep_period: float  # s
    rate: float  # s^-1
    warnings: tuple[str, ...] = field(default=())

    def as_row(self) -> dict[str, float]:
        return {
            "convention_id": 0.0 if self.convention is IntensityConvention.PEAK else 1.0,
            "intensity_w_m2": self.intensity,
            "photon_energy_j": self.photon_energy,
            "sigma_prime_m4_w": self.sigma_prime,
            "p_ion": self.p_ion,
            "density_m3": self.density,
            "trap_length_m": self.trap_length,
            "rayleigh_length_m": self.rayleigh_length,
            "rep_period_s": self.rep_period,
            "rate_s": self.rate,
        }


def rate_report(
    laser: PulsedLaser,
    focus: GaussianFocus,
    vapor: AtomicVapor,
    sigma: CrossSection,
    geom: InteractionGeometry,
    convention: IntensityConvention,
) -> RateReport:
    """Evaluate the whole loading chain and keep every intermediate."""
    convention = IntensityConvention(convention)
    if geom.focus != focus:
        raise ValueError("geom.focus must be the focus used for the intensity")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        intensity = peak_intensity(laser, focus, convention)
        e_photon = photon_energy(laser.wavelength)
        p_ion = ionization_probability_per_pulse(intensity, sigma, e_photon, laser.pulse_duration)
        n0 = vapor_density(vapor)
        rate = loading_rate(p_ion, n0, geom, laser.period)
    notes = [str(w.message) for w in caught]
    if not geom.within_rayleigh:
        notes.append("trap length exceeds Rayleigh length")
    for w in caught:
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return RateReport(
        convention=convention,
        intensity=intensity,
        photon_energy=e_photon,
        sigma_prime=sigma.sigma_prime,
        p_ion=p_ion,
        density=n0,
        trap_length=geom.trap_length,
        rayleigh_length=focus.rayleigh_length,
        rep_period=laser.period,
        rate=rate,
        warnings=tuple(notes),
    )
