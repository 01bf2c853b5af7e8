"""Time-domain dynamics of N ions in an RF trap.

Each ion feels the ideal time-dependent quadrupole field (expressed through
its Mathieu parameters), the Coulomb repulsion of the others and, when
cooling beams are given, the Doppler scattering force. The integrator is a
drift-kick-drift leapfrog with the RF field sampled at the half step; the
inner loop lives in :mod:`iontrap.kernels`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.ndimage import uniform_filter1d

from . import kernels
from .physcore import EPS0, HBAR, IonSpecies, Transition
from .trapmodel import (
    DcUnstableAxis,
    TrapDrive,
    TrapGeometry,
    chain_equilibrium,
    mathieu_params,
    secular_frequencies,
)

DEFAULT_STEPS_PER_RF = 100
MIN_STEPS_PER_RF = 20
LOSS_RADIUS_FACTOR = 10.0
_CHUNK = 1 << 14


class ConfigError(ValueError):
    """Simulation settings rejected before integration."""


@dataclass(frozen=True)
class CoolingModel:
    """One Doppler-cooling beam.

    ``detuning`` is in rad/s (negative is red). ``duty_factor`` is the fraction
    of time the ion scatters on the cycling transition; by default
    ``1 - branching_loss`` of the transition.
    """

    transition: Transition
    saturation: float
    detuning: float
    direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    duty_factor: float | None = None

    def __post_init__(self):
        if not self.saturation >= 0:
            raise ValueError("saturation must be non-negative")
        d = np.asarray(self.direction, dtype=float)
        norm = np.linalg.norm(d)
        if d.shape != (3,) or not norm > 0:
            raise ValueError("direction must be a non-zero 3-vector")
        object.__setattr__(self, "direction", tuple(float(x) for x in d / norm))
        if self.duty_factor is None:
            object.__setattr__(self, "duty_factor", 1.0 - self.transition.branching_loss)
        if not 0.0 < self.duty_factor <= 1.0:
            raise ValueError("duty_factor must lie in (0, 1]")

    @property
    def gamma(self) -> float:
        return self.transition.linewidth

    @property
    def k(self) -> float:
        return self.transition.wavenumber

    def scattering_rate(self, velocity) -> float:
        kv = self.k * float(np.dot(self.direction, velocity))
        z = 2.0 * (self.detuning - kv) / self.gamma
        return 0.5 * self.gamma * self.duty_factor * self.saturation / (1.0 + self.saturation + z * z)

    def reversed(self) -> "CoolingModel":
        return CoolingModel(self.transition, self.saturation, self.detuning,
                            tuple(-x for x in self.direction), self.duty_factor)


def doppler_force(cooling: CoolingModel, velocity) -> np.ndarray:
    """Scattering force ``hbar k R(v)`` along the beam, in N.

    ``R = (Gamma/2) duty s0 / (1 + s0 + (2 (delta - k.v) / Gamma)^2)``.
    """
    return HBAR * cooling.k * cooling.scattering_rate(velocity) * np.asarray(cooling.direction)


def counterpropagating_pair(transition: Transition, saturation: float, detuning: float,
                            direction=(1.0, 1.0, 1.0)) -> tuple[CoolingModel, CoolingModel]:
    """Two opposed beams; their radiation pressure cancels at rest."""
    beam = CoolingModel(transition, saturation, detuning, direction)
    return beam, beam.reversed()


@dataclass(frozen=True)
class SimConfig:
    duration: float
    time_step: float
    rng_seed: int = 0
    recoil_heating: bool = False
    sample_every: int = 1

    def __post_init__(self):
        if not self.duration > 0 or not self.time_step > 0:
            raise ConfigError("duration and time_step must be positive")
        if self.sample_every < 1:
            raise ConfigError("sample_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.time_step))

    @classmethod
    def per_rf_cycle(cls, rf_frequency: float, cycles: float, steps_per_cycle: int = DEFAULT_STEPS_PER_RF,
                     **kwargs) -> "SimConfig":
        dt = 2.0 * math.pi / rf_frequency / steps_per_cycle
        return cls(duration=cycles * steps_per_cycle * dt, time_step=dt, **kwargs)


@dataclass(frozen=True)
class IonLoss:
    time: float
    ion_index: int


@dataclass
class Trajectory:
    """Sampled simulation output on a uniform time grid.

    ``positions`` and ``velocities`` have shape (n_samples, n_ions, 3).
    If an ion escaped, ``loss`` names it and the arrays stop at that time.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    total_energy_series: np.ndarray
    rf_frequency: float
    loss: IonLoss | None = None
    notes: dict = field(default_factory=dict)

    @property
    def n_ions(self) -> int:
        return self.positions.shape[1]

    @property
    def sample_interval(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


def _beam_table(beams: Sequence[CoolingModel], mass: float) -> np.ndarray:
    rows = []
    for b in beams:
        rows.append([*b.direction, b.k, b.gamma, b.detuning, b.saturation,
                     0.5 * b.gamma * b.duty_factor * b.saturation, HBAR * b.k / mass])
    return np.array(rows, dtype=np.float64).reshape(-1, 9)


def _default_positions(n_ions, species, params, omega_rf):
    if n_ions == 1:
        return np.array([[1e-6, 0.0, 0.0]])
    wz = secular_frequencies(params, omega_rf)[2]
    if isinstance(wz, DcUnstableAxis) or wz == 0:
        raise ConfigError("default initial positions need axial confinement")
    chain = chain_equilibrium(n_ions, species, wz)
    pos = np.zeros((n_ions, 3))
    # stretched string, slightly off axis, so cooling has work to do
    pos[:, 2] = 1.2 * np.asarray(chain.positions)
    pos[:, 0] = 1e-7
    return pos


def secular_energy(times, positions, velocities, species, params, omega_rf):
    """Energy of the secular motion with lowest-order micromotion removed, J.

    Along each axis ``x = X (1 - (q/2) cos(Omega t))``; the secular
    coordinate X and its velocity enter ``m/2 (Xdot^2 + omega^2 X^2)`` with
    the pseudopotential frequency omega. Coulomb energy is added for
    several ions. Arrays are (n_samples, n_ions, 3).
    """
    m = species.mass
    t = np.asarray(times, dtype=float)[:, None, None]
    q = np.asarray(params.q)
    w2 = 0.25 * omega_rf**2 * (np.asarray(params.a) + 0.5 * q * q)
    mod = 1.0 - 0.5 * q * np.cos(omega_rf * t)
    X = positions / mod
    Xdot = (velocities - X * (0.5 * q * omega_rf) * np.sin(omega_rf * t)) / mod
    energy = 0.5 * m * np.sum(Xdot**2 + w2 * X**2, axis=(-1, -2))
    n = positions.shape[-2]
    if n > 1:
        kc = species.charge**2 / (4.0 * math.pi * EPS0)
        iu, ju = np.triu_indices(n, 1)
        r = np.linalg.norm(X[..., iu, :] - X[..., ju, :], axis=-1)
        energy = energy + kc * np.sum(1.0 / r, axis=-1)
    return energy


def simulate(
    species: IonSpecies,
    geom: TrapGeometry,
    drive: TrapDrive,
    n_ions: int,
    cooling: CoolingModel | Sequence[CoolingModel] | None,
    config: SimConfig,
    initial_positions=None,
    initial_velocities=None,
    start_time: float = 0.0,
) -> Trajectory:
    """Integrate the equations of motion of ``n_ions`` identical ions.

    Parameters
    ----------
    cooling
        A beam, several beams, or ``None`` for an undamped run.
    config
        ``time_step`` must resolve the RF period by at least 20 steps.
    initial_positions, initial_velocities : (n_ions, 3) arrays, optional
        Defaults: a single ion 1 um off centre along x; several ions on a
        stretched version of their equilibrium string. Velocities default
        to zero.

    Returns
    -------
    Trajectory
        ``total_energy_series`` is the secular energy averaged over one RF
        period (centred moving average). If an ion leaves a sphere of ten
        times the radial scale, ``loss`` is set and the run stops there.
    """
    if n_ions < 1:
        raise ConfigError("n_ions must be >= 1")
    omega = drive.rf_frequency
    if not config.time_step < 2.0 * math.pi / (MIN_STEPS_PER_RF * omega):
        raise ConfigError(
            f"time_step {config.time_step:.3g} s does not resolve the RF period "
            f"with {MIN_STEPS_PER_RF} steps"
        )
    params = mathieu_params(species, geom, drive)
    beams = [] if cooling is None else ([cooling] if isinstance(cooling, CoolingModel) else list(cooling))

    pos = (np.array(initial_positions, dtype=np.float64) if initial_positions is not None
           else _default_positions(n_ions, species, params, omega))
    vel = (np.array(initial_velocities, dtype=np.float64) if initial_velocities is not None
           else np.zeros((n_ions, 3)))
    if pos.shape != (n_ions, 3) or vel.shape != (n_ions, 3):
        raise ConfigError("initial state must have shape (n_ions, 3)")
    pos = np.ascontiguousarray(pos)
    vel = np.ascontiguousarray(vel)

    ka = [0.25 * omega**2 * a for a in params.a]
    kq = [0.5 * omega**2 * q for q in params.q]
    kc = species.charge**2 / (4.0 * math.pi * EPS0 * species.mass)
    table = _beam_table(beams, species.mass)
    loss_r2 = (LOSS_RADIUS_FACTOR * geom.radial_scale) ** 2
    dt = config.time_step
    every = config.sample_every
    n_steps = config.n_steps
    n_samples = n_steps // every
    samples = np.empty((n_samples + 1, n_ions, 6))
    samples[0, :, :3] = pos
    samples[0, :, 3:] = vel

    rng = np.random.default_rng(config.rng_seed)
    chunk = max(every, (_CHUNK // every) * every)
    done = 0
    lost = -1
    while done < n_steps and lost < 0:
        steps = min(chunk, n_steps - done)
        uniforms = None
        if config.recoil_heating and beams:
            uniforms = rng.random((steps, n_ions, kernels.UNIFORMS_PER_ION))
        row0 = done // every + 1
        out = samples[row0: row0 + steps // every]
        t0 = start_time + done * dt
        ran, lost = kernels.verlet_run(pos, vel, t0, dt, steps, every, ka, kq, omega, kc,
                                       table, uniforms, loss_r2, out)
        done += ran
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise FloatingPointError(f"non-finite state at t={start_time + done * dt:.6g} s")

    loss = None
    if lost >= 0:
        loss = IonLoss(time=start_time + done * dt, ion_index=int(lost))
        samples = samples[: done // every + 1]
    times = start_time + np.arange(samples.shape[0]) * (every * dt)
    positions = samples[:, :, :3]
    velocities = samples[:, :, 3:]
    inst = secular_energy(times, positions, velocities, species, params, omega)
    window = max(1, int(round(2.0 * math.pi / omega / (every * dt))))
    energy = uniform_filter1d(inst, size=window, mode="nearest") if len(inst) > window else inst
    return Trajectory(
        times=times,
        positions=positions,
        velocities=velocities,
        total_energy_series=energy,
        rf_frequency=omega,
        loss=loss,
        notes={"mathieu_a": params.a, "mathieu_q": params.q, "backend": kernels.BACKEND},
    )


def spectral_peak(traj: Trajectory, axis: int, ion: int = 0, max_frequency: float | None = None) -> float | None:
    """Angular frequency of the strongest spectral line of one coordinate.

    Searches below ``max_frequency`` (default: half the RF frequency, the
    upper edge of the secular band) using a Hann-windowed FFT with
    parabolic interpolation on the log magnitude of the peak bin. Returns
    ``None`` when the signal has no AC content.
    """
    x = np.asarray(traj.positions[:, ion, axis], dtype=float)
    return spectral_peak_of(x, traj.sample_interval,
                            0.5 * traj.rf_frequency if max_frequency is None else max_frequency)


def spectral_peak_of(signal, sample_interval: float, max_frequency: float | None = None) -> float | None:
    x = np.asarray(signal, dtype=float)
    if len(x) < 1024:
        raise ValueError("need at least 1024 samples")
    x = x - x.mean()
    if not np.any(np.abs(x) > 1e-12 * np.max(np.abs(signal))):
        return None
    spec = np.abs(np.fft.rfft(x * np.hanning(len(x))))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(len(x), sample_interval)
    band = freqs < (max_frequency if max_frequency is not None else np.inf)
    band[0] = False
    if not np.any(band) or not np.any(spec[band] > 0):
        return None
    idx = np.flatnonzero(band)[np.argmax(spec[band])]
    if 0 < idx < len(spec) - 1 and spec[idx - 1] > 0 and spec[idx + 1] > 0:
        lm, l0, lp = np.log(spec[idx - 1: idx + 2])
        denom = lm - 2.0 * l0 + lp
        shift = 0.5 * (lm - lp) / denom if denom != 0 else 0.0
    else:
        shift = 0.0
    return float(freqs[idx] + shift * (freqs[1] - freqs[0]))
