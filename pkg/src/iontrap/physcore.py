"""Physical constants, unit conversions and shared domain types.

Everything inside the package is SI. Lab units (Torr, nm, Vpp, cm^4/W, ...)
are converted only at the configuration boundary using the helpers below.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class DomainError(ValueError):
    """An argument lies outside the domain of a physical formula."""


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values, SI units."""

    elementary_charge: float = 1.602176634e-19  # C
    atomic_mass_unit: float = 1.66053906660e-27  # kg
    boltzmann: float = 1.380649e-23  # J/K
    planck_reduced: float = 1.054571817e-34  # J s
    speed_of_light: float = 299792458.0  # m/s
    vacuum_permittivity: float = 8.8541878128e-12  # F/m
    electron_mass: float = 9.1093837015e-31  # kg

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def planck(self) -> float:
        return 2.0 * math.pi * self.planck_reduced


CONSTANTS = PhysicalConstants()

E_CHARGE = CONSTANTS.elementary_charge
AMU = CONSTANTS.atomic_mass_unit
K_B = CONSTANTS.boltzmann
HBAR = CONSTANTS.planck_reduced
H_PLANCK = CONSTANTS.planck
C_LIGHT = CONSTANTS.speed_of_light
EPS0 = CONSTANTS.vacuum_permittivity
M_ELECTRON = CONSTANTS.electron_mass

# ---------------------------------------------------------------------------
# unit conversions (boundary only)

PA_PER_TORR = 101325.0 / 760.0
M4_PER_W_PER_CM4_PER_W = 1e-8


def torr_to_pa(p):
    return p * PA_PER_TORR


def pa_to_torr(p):
    return p / PA_PER_TORR


def nm_to_m(x):
    return x * 1e-9


def m_to_nm(x):
    return x * 1e9


def vpp_to_amplitude(vpp):
    """Peak-to-peak voltage to zero-to-peak amplitude (V_amp = V_pp / 2)."""
    return vpp / 2.0


def amplitude_to_vpp(v):
    return 2.0 * v


def cm4w_to_m4w(sigma):
    return sigma * M4_PER_W_PER_CM4_PER_W


def m4w_to_cm4w(sigma):
    return sigma / M4_PER_W_PER_CM4_PER_W


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Transition:
    """Optical transition used for cooling or repumping.

    ``branching_loss`` is the fraction of spontaneous decays that leave the
    cycling manifold (e.g. P1/2 -> D3/2 for the Sr+ cooling line).
    """

    label: str
    wavelength: float
    lifetime: float
    branching_loss: float = 0.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not self.lifetime > 0:
            raise ValueError("lifetime must be positive")
        if not 0.0 <= self.branching_loss < 1.0:
            raise ValueError("branching_loss must lie in [0, 1)")

    @property
    def linewidth(self) -> float:
        """Natural decay rate Gamma = 1/lifetime in s^-1."""
        return 1.0 / self.lifetime

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class IonSpecies:
    name: str
    mass: float
    charge: float
    transitions: tuple[Transition, ...] = ()

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        n = self.charge / E_CHARGE
        if not (round(n) >= 1 and abs(n - round(n)) < 1e-9):
            raise ValueError("charge must be a positive integer multiple of e")
        object.__setattr__(self, "transitions", tuple(self.transitions))

    def transition(self, label: str) -> Transition:
        for t in self.transitions:
            if t.label == label:
                return t
        raise KeyError(label)


# Sr-88 atomic mass in u; the ion is one electron lighter.
SR88_ATOMIC_MASS_U = 87.9056122571

# The cooling-line lifetime is stored in ns. A dipole-allowed line with a
# 7.87 s lifetime would not be usable for cooling.
SR88_COOLING = Transition("S1/2-P1/2", 422e-9, 7.87e-9, branching_loss=1.0 / 13.0)
SR88_REPUMP = Transition("D3/2-P1/2", 1092e-9, 7.87e-9)
SR88_CLOCK = Transition("S1/2-D5/2", 674e-9, 1.0 / 3.0)
SR88_QUENCH = Transition("D5/2-P3/2", 1033e-9, 7e-9)


def strontium88_ion() -> IonSpecies:
    """88Sr+ with the transitions driven in the experiment."""
    return IonSpecies(
        name="88Sr+",
        mass=SR88_ATOMIC_MASS_U * AMU - M_ELECTRON,
        charge=E_CHARGE,
        transitions=(SR88_COOLING, SR88_REPUMP, SR88_CLOCK, SR88_QUENCH),
    )


SR88_ION = strontium88_ion()


@dataclass(frozen=True)
class PulsedLaser:
    """Mode-locked laser. ``average_power`` may be zero (laser off)."""

    wavelength: float
    average_power: float
    rep_rate: float
    pulse_duration: float

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not self.average_power >= 0:
            raise ValueError("average_power must be non-negative")
        if not self.rep_rate > 0 or not self.pulse_duration > 0:
            raise ValueError("rep_rate and pulse_duration must be positive")
        if not self.pulse_duration < 1.0 / self.rep_rate:
            raise ValueError("pulse_duration must be shorter than the pulse period")

    @property
    def period(self) -> float:
        """Time between consecutive pulses."""
        return 1.0 / self.rep_rate

    @property
    def pulse_energy(self) -> float:
        return self.average_power / self.rep_rate


@dataclass(frozen=True)
class GaussianFocus:
    waist_radius: float
    wavelength: float

    def __post_init__(self):
        if not self.waist_radius > 0 or not self.wavelength > 0:
            raise ValueError("waist_radius and wavelength must be positive")

    @property
    def rayleigh_length(self) -> float:
        return math.pi * self.waist_radius**2 / self.wavelength


@dataclass(frozen=True)
class AtomicVapor:
    pressure: float
    temperature: float

    def __post_init__(self):
        if not self.pressure >= 0:
            raise ValueError("pressure must be non-negative")
        if not self.temperature > 0:
            raise DomainError("temperature must be positive")


class IntensityConvention(str, enum.Enum):
    """How the pulsed-laser intensity entering a two-photon rate is defined."""

    PEAK = "peak"
    TIME_AVERAGED = "time-averaged"


# ---------------------------------------------------------------------------
# operations


def vapor_density(vapor: AtomicVapor) -> float:
    """Ideal-gas number density p / (k_B T) in m^-3."""
    if not vapor.temperature > 0:
        raise DomainError("temperature must be positive")
    return vapor.pressure / (K_B * vapor.temperature)


def peak_intensity(
    laser: PulsedLaser, focus: GaussianFocus, convention: IntensityConvention
) -> float:
    """On-axis intensity of a Gaussian focus, W/m^2.

    With ``PEAK`` the power is the pulse peak power ``E_pulse / tau``; with
    ``TIME_AVERAGED`` it is the average power. Both carry the Gaussian
    on-axis factor ``2 / (pi w0^2)``.
    """
    convention = IntensityConvention(convention)
    if convention is IntensityConvention.PEAK:
        power = laser.average_power / (laser.rep_rate * laser.pulse_duration)
    else:
        power = laser.average_power
    return 2.0 * power / (math.pi * focus.waist_radius**2)


def photon_energy(wavelength: float) -> float:
    """h c / lambda in J."""
    if not wavelength > 0:
        raise DomainError("wavelength must be positive")
    return H_PLANCK * C_LIGHT / wavelength


__all__ = [
    "AMU",
    "AtomicVapor",
    "C_LIGHT",
    "CONSTANTS",
    "DomainError",
    "E_CHARGE",
    "EPS0",
    "GaussianFocus",
    "HBAR",
    "H_PLANCK",
    "IntensityConvention",
    "IonSpecies",
    "K_B",
    "PhysicalConstants",
    "PulsedLaser",
    "SR88_ION",
    "Transition",
    "peak_intensity",
    "photon_energy",
    "strontium88_ion",
    "vapor_density",
]
