"""Laser frequency stabilization chain.

Cavity line shapes, error-signal discriminators (Haensch-Couillaud,
Pound-Drever-Hall, dither, reference-vapor absorption), a discrete PI
servo loop and the optical-feedback linewidth narrowing estimate.

Every discriminator is normalized to peak magnitude 1 and, for the cavity
discriminators, has positive slope through resonance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import jv


@dataclass(frozen=True)
class OpticalCavity:
    """Lossless, impedance-matched cavity model.

    ``finesse`` is defined by the exact FWHM, ``linewidth = fsr / finesse``.
    ``input_transmission`` is the input-coupler power transmission.
    """

    finesse: float
    fsr: float  # Hz
    input_transmission: float = 0.03

    def __post_init__(self):
        if not self.finesse > 1:
            raise ValueError("finesse must exceed 1")
        if not self.fsr > 0:
            raise ValueError("fsr must be positive")
        if not 0.0 < self.input_transmission < 1.0:
            raise ValueError("input_transmission must lie in (0, 1)")

    @property
    def linewidth(self) -> float:
        return self.fsr / self.finesse

    @property
    def coefficient_of_finesse(self) -> float:
        """Airy coefficient that puts the half maximum at exactly fsr / (2F)."""
        return 1.0 / math.sin(math.pi / (2.0 * self.finesse)) ** 2

    @property
    def round_trip_amplitude(self) -> float:
        """Round-trip field amplitude r with ``4r / (1-r)^2`` equal to the Airy coefficient."""
        s = math.sin(math.pi / (2.0 * self.finesse))
        return 1.0 + 2.0 * s * s - 2.0 * s * math.sqrt(1.0 + s * s)


# paper cavities
TRIANGULAR_CAVITY = OpticalCavity(finesse=200.0, fsr=1e9)
ULE_CAVITY = OpticalCavity(finesse=2e5, fsr=299792458.0 / (2 * 0.10))
DOUBLING_CAVITY = OpticalCavity(finesse=60.0, fsr=299792458.0 / 0.45, input_transmission=0.03)


def airy_transmission(cavity: OpticalCavity, detuning):
    """Transmitted power fraction ``1 / (1 + C sin^2(pi delta / fsr))``."""
    s = np.sin(np.pi * np.asarray(detuning, dtype=float) / cavity.fsr)
    out = 1.0 / (1.0 + cavity.coefficient_of_finesse * s * s)
    return out if np.ndim(out) else float(out)


def _hc_raw(cavity: OpticalCavity, detuning):
    r = cavity.round_trip_amplitude
    phi = 2.0 * np.pi * np.asarray(detuning, dtype=float) / cavity.fsr
    return cavity.input_transmission * r * np.sin(phi) / ((1.0 - r) ** 2 + 4.0 * r * np.sin(0.5 * phi) ** 2)


def _hc_peak(cavity: OpticalCavity) -> float:
    # extremum of sin(phi) / (A + B (1 - cos phi)) sits at cos(phi) = B / (A + B)
    r = cavity.round_trip_amplitude
    A, B = (1.0 - r) ** 2, 2.0 * r
    c = B / (A + B)
    return cavity.input_transmission * r * math.sqrt(1.0 - c * c) / (A + B - B * c)


def hc_error(cavity: OpticalCavity, detuning, polarization_split: float = 0.5):
    """Haensch-Couillaud polarization-analyzer error signal.

    ``polarization_split`` is the fraction of input power in the polarization
    rejected by the intracavity polarizer; it scales the signal by
    ``2 sqrt(s (1 - s))`` so that an even split gives peak magnitude 1.
    """
    if not 0.0 <= polarization_split <= 1.0:
        raise ValueError("polarization_split must lie in [0, 1]")
    scale = 2.0 * math.sqrt(polarization_split * (1.0 - polarization_split))
    out = scale * _hc_raw(cavity, detuning) / _hc_peak(cavity)
    return out if np.ndim(out) else float(out)


def reflection_coefficient(cavity: OpticalCavity, detuning):
    """Field reflection ``F = rho (e^{i phi} - 1) / (1 - rho^2 e^{i phi})`` of a symmetric cavity."""
    rho = math.sqrt(cavity.round_trip_amplitude)
    e = np.exp(1j * 2.0 * np.pi * np.asarray(detuning, dtype=float) / cavity.fsr)
    return rho * (e - 1.0) / (1.0 - rho * rho * e)


MAX_MOD_DEPTH = 1.2


def _pdh_raw(cavity, detuning, mod_frequency, mod_depth):
    d = np.asarray(detuning, dtype=float)
    F0 = reflection_coefficient(cavity, d)
    Fp = reflection_coefficient(cavity, d + mod_frequency)
    Fm = reflection_coefficient(cavity, d - mod_frequency)
    x = F0 * np.conj(Fp) - np.conj(F0) * Fm
    return -2.0 * jv(0, mod_depth) * jv(1, mod_depth) * x.imag


class _Hashable:
    # lets normalization peaks be cached per (shape, parameters)
    def __init__(self, fn, key):
        self.fn, self.key = fn, key

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return isinstance(other, _Hashable) and self.key == other.key

    def __call__(self, x):
        return self.fn(x)


@lru_cache(maxsize=64)
def _peak_abs(fn: Callable[[float], float], lo: float, hi: float, n: int = 4001) -> float:
    """max |fn| on [lo, hi]: dense scan then bounded refinement."""
    grid = np.linspace(lo, hi, n)
    vals = np.abs(fn(grid))
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
    res = minimize_scalar(lambda x: -abs(float(fn(x))), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12 * max(abs(a), abs(b), 1.0)})
    return max(float(vals[i]), -float(res.fun))


def pdh_error(cavity: OpticalCavity, detuning, mod_frequency: float, mod_depth: float = 1.08):
    """Pound-Drever-Hall error signal with first-order sidebands.

    ``Im[F(d) F*(d + f_m) - F*(d) F(d - f_m)]`` weighted by J0 J1 and signed
    for positive slope at resonance; peak magnitude 1.
    """
    if not 0.0 < mod_depth <= MAX_MOD_DEPTH:
        raise ValueError(f"mod_depth must lie in (0, {MAX_MOD_DEPTH}] rad")
    if not mod_frequency > 0:
        raise ValueError("mod_frequency must be positive")
    fm, depth = float(mod_frequency), float(mod_depth)
    shape = _Hashable(lambda d: _pdh_raw(cavity, d, fm, depth), ("pdh", cavity, fm, depth))
    span = min(1.5 * mod_frequency, 0.5 * cavity.fsr)
    # the extremum lies within a linewidth of resonance; scan there finely
    near = min(4.0 * cavity.linewidth, span)
    peak = max(_peak_abs(shape, 0.0, near), _peak_abs(shape, 0.0, span))
    out = shape(detuning) / peak
    return out if np.ndim(out) else float(out)


def _dither_raw(cavity, detuning, h):
    d = np.asarray(detuning, dtype=float)
    return -(airy_transmission(cavity, d + h) - airy_transmission(cavity, d - h)) / (2.0 * h)


def dither_error(cavity: OpticalCavity, detuning, dither_amplitude: float | None = None):
    """Lock-in (dither) error: minus the symmetric difference of the Airy line.

    Demodulating a small dither of amplitude ``h`` yields
    ``-(T(d + h) - T(d - h)) / 2h``; default ``h`` is a tenth of the linewidth.
    """
    h = float(0.1 * cavity.linewidth if dither_amplitude is None else dither_amplitude)
    shape = _Hashable(lambda d: _dither_raw(cavity, d, h), ("dither", cavity, h))
    out = shape(detuning) / _peak_abs(shape, 0.0, 2.0 * cavity.linewidth)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# atomic reference


@dataclass(frozen=True)
class ReferenceProfile:
    """Absorption profile of the reference vapor as a sum of Gaussians.

    ``components`` are ``(center offset Hz, depth, fwhm Hz)`` relative to the
    target transition. ``aom_shift`` is the frequency downshift of the second
    probe beam.
    """

    components: tuple[tuple[float, float, float], ...]
    aom_shift: float = 400e6

    def __post_init__(self):
        comps = tuple(tuple(float(x) for x in c) for c in self.components)
        for _, depth, fwhm in comps:
            if not 0.0 < depth <= 1.0:
                raise ValueError("component depth must lie in (0, 1]")
            if not fwhm > 0:
                raise ValueError("component fwhm must be positive")
        object.__setattr__(self, "components", comps)

    def absorption(self, nu):
        nu = np.asarray(nu, dtype=float)
        total = np.zeros_like(nu)
        for center, depth, fwhm in self.components:
            total = total + depth * np.exp(-4.0 * math.log(2.0) * ((nu - center) / fwhm) ** 2)
        return total


# central Rb component only; the side components are not characterized
RB_REFERENCE = ReferenceProfile(components=((-500e6, 1.0, 1.3e9),), aom_shift=400e6)


def rb_error(ref: ReferenceProfile, laser_offset):
    """Difference of the unshifted and AOM-downshifted absorptions, ``A(nu) - A(nu - shift)``."""
    out = ref.absorption(laser_offset) - ref.absorption(np.asarray(laser_offset, dtype=float) - ref.aom_shift)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# servo


@dataclass
class PiServo:
    """Proportional-integral controller with clamping anti-windup.

    Output ``kp e + I`` with ``I += ki e dt``; while the output is pinned at a
    limit the integrator is frozen.
    """

    kp: float
    ki: float
    output_limits: tuple[float, float] = (-math.inf, math.inf)
    integrator: float = 0.0

    def __post_init__(self):
        if self.ki < 0:
            raise ValueError("ki must be non-negative")
        lo, hi = self.output_limits
        if not lo < hi:
            raise ValueError("output_limits must be (low, high) with low < high")

    def reset(self):
        self.integrator = 0.0

    def update(self, error: float, dt: float) -> float:
        lo, hi = self.output_limits
        candidate = self.integrator + self.ki * error * dt
        out = self.kp * error + candidate
        if lo <= out <= hi:
            self.integrator = candidate
            return out
        # saturated: keep the integrator unless the step pulls it back inside
        out_frozen = self.kp * error + self.integrator
        if (out > hi and candidate < self.integrator) or (out < lo and candidate > self.integrator):
            self.integrator = candidate
            out_frozen = self.kp * error + candidate
        return min(max(out_frozen, lo), hi)


PAPER_SERVO_GAINS = (0.5, 1e6)


@dataclass(frozen=True)
class ServoPlant:
    """Laser plus discriminator seen by the servo.

    ``discriminator`` maps true detuning (Hz) to the normalized error.
    ``actuator_gain`` converts servo output units to laser frequency (Hz per
    unit). The free-running laser offset is
    ``initial_detuning + drift t + white noise``; the servo output is
    subtracted from it.
    """

    discriminator: Callable[[float], float]
    drift: float = 0.0  # Hz/s
    noise_rms: float = 0.0  # Hz
    actuator_gain: float = 1e6  # Hz per unit
    initial_detuning: float = 0.0  # Hz
    capture_range: float | None = None  # Hz
    cavity: OpticalCavity | None = None

    def slope(self, step: float | None = None) -> float:
        """Discriminator slope at resonance, 1/Hz (central difference)."""
        h = step if step is not None else (1e-4 * self.cavity.linewidth if self.cavity else 1.0)
        return (float(self.discriminator(h)) - float(self.discriminator(-h))) / (2.0 * h)

    def loop_slope(self) -> float:
        """Dimensionless loop slope: actuator gain times discriminator slope."""
        return self.actuator_gain * self.slope()


def cavity_plant(cavity: OpticalCavity, kind: str = "hc", mod_frequency: float = 20e6,
                 mod_depth: float = 1.08, **kwargs) -> ServoPlant:
    """Plant locked to ``cavity`` with an ``hc``, ``pdh`` or ``dither`` discriminator."""
    if kind == "hc":
        disc = lambda d: hc_error(cavity, d)  # noqa: E731
        capture = cavity.fsr / 2.0
    elif kind == "pdh":
        disc = lambda d: pdh_error(cavity, d, mod_frequency, mod_depth)  # noqa: E731
        capture = mod_frequency
    elif kind == "dither":
        disc = lambda d: dither_error(cavity, d)  # noqa: E731
        capture = 2.0 * cavity.linewidth
    else:
        raise ValueError(f"unknown discriminator {kind!r}")
    kwargs.setdefault("capture_range", capture)
    return ServoPlant(discriminator=disc, cavity=cavity, **kwargs)


@dataclass
class ServoTrace:
    times: np.ndarray
    error: np.ndarray
    actuator: np.ndarray  # Hz applied to the laser
    detuning: np.ndarray  # Hz, true laser-cavity detuning
    lock_lost_at: float | None = None
    servo: PiServo | None = field(default=None, repr=False)

    @property
    def locked(self) -> bool:
        return self.lock_lost_at is None


GROWTH_FACTOR = 10.0
GROWTH_WINDOW = 10
GROWTH_FLOOR = 1e-3


def servo_run(plant: ServoPlant, servo: PiServo, duration: float, dt: float, rng_seed: int = 0) -> ServoTrace:
    """Simulate the sampled closed loop.

    At each sample the true detuning is the free-running offset minus the
    actuator set at the previous sample; the servo then updates from the
    new error. The servo passed in is copied and reset, so runs never share
    integrator state.

    The loop is declared lost (and the run stops) when ``|error|`` grows by
    ten over any ten consecutive samples while above 1e-3, or when the
    detuning leaves ``plant.capture_range``.
    """
    if not dt > 0 or not duration > 0:
        raise ValueError("duration and dt must be positive")
    if not dt * servo.ki < 0.5:
        raise ValueError(f"dt*ki = {dt * servo.ki:.3g} violates the discrete stability guard (< 0.5)")
    servo = replace(servo, integrator=0.0)
    n = int(round(duration / dt)) + 1
    rng = np.random.default_rng(rng_seed)
    noise = rng.normal(0.0, plant.noise_rms, n) if plant.noise_rms > 0 else np.zeros(n)
    times = np.arange(n) * dt
    err = np.zeros(n)
    act = np.zeros(n)
    det = np.zeros(n)
    u = 0.0
    lost_at = None
    last = n
    for k in range(n):
        free = plant.initial_detuning + plant.drift * times[k] + noise[k]
        d = free - u
        e = float(plant.discriminator(d))
        u = plant.actuator_gain * servo.update(e, dt)
        det[k], err[k], act[k] = d, e, u
        grew = (k >= GROWTH_WINDOW and abs(e) > GROWTH_FLOOR
                and abs(e) > GROWTH_FACTOR * abs(err[k - GROWTH_WINDOW]))
        escaped = plant.capture_range is not None and abs(d) > plant.capture_range
        if grew or escaped:
            lost_at = float(times[k])
            last = k + 1
            break
    return ServoTrace(times[:last], err[:last], act[:last], det[:last], lost_at, servo)


@dataclass(frozen=True)
class ErrorTrace:
    """A discriminator sampled on a strictly increasing detuning axis (Hz)."""

    detunings: np.ndarray
    signal: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.detunings, dtype=float)
        e = np.asarray(self.signal, dtype=float)
        if d.shape != e.shape or d.ndim != 1:
            raise ValueError("detunings and signal must be 1-D and of equal length")
        if d.size > 1 and not np.all(np.diff(d) > 0):
            raise ValueError("detunings must be strictly increasing")
        object.__setattr__(self, "detunings", d)
        object.__setattr__(self, "signal", e)

    def zero_crossings(self) -> np.ndarray:
        """Linearly interpolated sign changes, rising or falling."""
        d, e = self.detunings, self.signal
        idx = np.nonzero(np.signbit(e[:-1]) != np.signbit(e[1:]))[0]
        return d[idx] - e[idx] * (d[idx + 1] - d[idx]) / (e[idx + 1] - e[idx])


def error_trace(discriminator: Callable, detunings) -> ErrorTrace:
    d = np.asarray(detunings, dtype=float)
    return ErrorTrace(d, np.asarray(discriminator(d), dtype=float))


# ---------------------------------------------------------------------------
# optical-feedback narrowing


@dataclass(frozen=True)
class EcdlFeedbackGeometry:
    delta_nu_ecdl: float  # Hz
    beta: float
    l_path: float  # m
    l_ecdl: float  # m
    finesse_cavity: float
    finesse_ecdl: float

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive")


def narrowed_linewidth(g: EcdlFeedbackGeometry) -> float:
    """``dnu_ecdl / (beta (L_p / L_ecdl * F_tc / F_ecdl)^2)`` in Hz."""
    ratio = (g.l_path / g.l_ecdl) * (g.finesse_cavity / g.finesse_ecdl)
    return g.delta_nu_ecdl / (g.beta * ratio**2)


# Placeholder geometry: the ECDL length and finesse and beta are not known.
# It maps a 1 MHz free-running width below 10 kHz.
EXAMPLE_FEEDBACK = EcdlFeedbackGeometry(
    delta_nu_ecdl=1e6, beta=1.0, l_path=0.10, l_ecdl=0.02, finesse_cavity=200.0, finesse_ecdl=50.0
)
