"""Paul-trap operating points.

Mathieu parameters from electrode geometry and drive, Floquet stability,
pseudopotential secular frequencies and depths, and the equilibrium of a
linear ion string.

Mathieu convention: along each axis ``u'' + (a - 2 q cos 2t) u = 0`` with
``t = Omega t_lab / 2``; in lab time the trap acceleration is
``-(Omega^2 / 4)(a - 2 q cos Omega t) u``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .physcore import EPS0, K_B, IonSpecies


class NumericalError(RuntimeError):
    """A solver or integrator failed to produce a trustworthy answer."""


class ConvergenceError(NumericalError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class TrapKind(str, enum.Enum):
    RING = "ring"
    LINEAR = "linear"


DEFAULT_AXIAL_EFFICIENCY = {TrapKind.RING: 1.0, TrapKind.LINEAR: 0.3}


@dataclass(frozen=True)
class TrapGeometry:
    """Electrode geometry.

    ``radial_scale`` is r0 for the ring trap and the axis-to-rod distance R
    for the linear trap. ``axial_efficiency`` (kappa) scales how much of the
    endcap voltage reaches the trap centre as a harmonic potential; ``None``
    selects the per-kind default.
    """

    kind: TrapKind
    radial_scale: float
    axial_half_length: float
    axial_efficiency: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", TrapKind(self.kind))
        if not self.radial_scale > 0 or not self.axial_half_length > 0:
            raise ValueError("radial_scale and axial_half_length must be positive")
        if self.axial_efficiency is None:
            object.__setattr__(self, "axial_efficiency", DEFAULT_AXIAL_EFFICIENCY[self.kind])
        if not 0.0 < self.axial_efficiency <= 1.0:
            raise ValueError("axial_efficiency must lie in (0, 1]")


@dataclass(frozen=True)
class TrapDrive:
    """Electrode voltages.

    ``rf_amplitude`` is zero-to-peak (half the Vpp reading). ``dc_offsets``
    holds extra DC on the RF electrodes: ``(U_a, U_b)`` on the two rod pairs
    of a linear trap, ``(U_ring,)`` for a ring trap, or empty.
    """

    rf_amplitude: float
    rf_frequency: float  # rad/s
    dc_endcap: float = 0.0
    dc_offsets: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.rf_frequency > 0:
            raise ValueError("rf_frequency must be positive")
        if not self.rf_amplitude >= 0:
            raise ValueError("rf_amplitude must be non-negative")
        object.__setattr__(self, "dc_offsets", tuple(float(u) for u in self.dc_offsets))


@dataclass(frozen=True)
class MathieuParams:
    a: tuple[float, float, float]
    q: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        if len(self.a) != 3 or len(self.q) != 3:
            raise ValueError("a and q need one entry per axis")


def mathieu_params(species: IonSpecies, geom: TrapGeometry, drive: TrapDrive) -> MathieuParams:
    """Per-axis (a, q) for an ideal quadrupole of the given kind.

    Linear trap::

        q_x = -q_y = 2 Q V / (m Omega^2 R^2),   q_z = 0
        a_z = 8 kappa Q U_end / (m Omega^2 z0^2)
        a_x = -a_z / 2 + a_rod,  a_y = -a_z / 2 - a_rod,
        a_rod = 4 Q (U_a - U_b) / (m Omega^2 R^2)

    Ring trap, with ``d^2 = r0^2 + 2 z0^2`` and ``U = U_ring - kappa U_end``::

        q_z = -2 q_r = -8 Q V / (m Omega^2 d^2)
        a_z = -2 a_r = -16 Q U / (m Omega^2 d^2)
    """
    Q, m, Om2 = species.charge, species.mass, drive.rf_frequency**2
    V, kappa = drive.rf_amplitude, geom.axial_efficiency
    if geom.kind is TrapKind.LINEAR:
        if len(drive.dc_offsets) not in (0, 2):
            raise ValueError("linear trap takes dc_offsets=(U_a, U_b) or none")
        R2, z02 = geom.radial_scale**2, geom.axial_half_length**2
        qx = 2.0 * Q * V / (m * Om2 * R2)
        az = 8.0 * kappa * Q * drive.dc_endcap / (m * Om2 * z02)
        u_rod = drive.dc_offsets[0] - drive.dc_offsets[1] if drive.dc_offsets else 0.0
        a_rod = 4.0 * Q * u_rod / (m * Om2 * R2)
        return MathieuParams(a=(-az / 2 + a_rod, -az / 2 - a_rod, az), q=(qx, -qx, 0.0))
    if len(drive.dc_offsets) not in (0, 1):
        raise ValueError("ring trap takes dc_offsets=(U_ring,) or none")
    d2 = geom.radial_scale**2 + 2.0 * geom.axial_half_length**2
    u = (drive.dc_offsets[0] if drive.dc_offsets else 0.0) - kappa * drive.dc_endcap
    qr = 4.0 * Q * V / (m * Om2 * d2)
    ar = 8.0 * Q * u / (m * Om2 * d2)
    return MathieuParams(a=(ar, ar, -2.0 * ar), q=(qr, qr, -2.0 * qr))


# ---------------------------------------------------------------------------
# Floquet stability


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


FLOQUET_STEPS = 2000
_DET_TOLERANCE = 1e-6


@lru_cache(maxsize=8)
def _cos_table(n_steps: int) -> np.ndarray:
    h = math.pi / n_steps
    return np.array([math.cos(k * h) for k in range(2 * n_steps + 1)])


def monodromy_trace(a, q, n_steps: int = FLOQUET_STEPS) -> np.ndarray:
    """Trace of the one-period monodromy matrix for each (a, q) pair.

    Fixed-step RK4 with step pi/n_steps. Raises :class:`NumericalError` if
    any result is non-finite or violates det M = 1 (Liouville) by more than
    1e-6, which signals an unresolved solution.
    """
    a_arr, q_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(q, dtype=float))
    shape = a_arr.shape
    trace, det = kernels.mathieu_monodromy(
        a_arr.ravel(), q_arr.ravel(), _cos_table(n_steps), math.pi / n_steps
    )
    bad = ~np.isfinite(trace) | ~(np.abs(det - 1.0) <= _DET_TOLERANCE * np.maximum(1.0, np.abs(trace)))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NumericalError(
            f"Floquet integration did not converge at a={a_arr.ravel()[i]:g}, "
            f"q={q_arr.ravel()[i]:g} (det M = {det[i]:.6g})"
        )
    return trace.reshape(shape)


def is_stable(a, q, n_steps: int = FLOQUET_STEPS):
    """Boolean stability verdict, ``|trace M| <= 2``, vectorised over (a, q)."""
    return np.abs(monodromy_trace(a, q, n_steps)) <= 2.0


def floquet_stability(params: MathieuParams, n_steps: int = FLOQUET_STEPS) -> tuple[Stability, ...]:
    """Per-axis verdict from the monodromy matrix of the Mathieu equation."""
    flags = is_stable(np.array(params.a), np.array(params.q), n_steps)
    return tuple(Stability.STABLE if f else Stability.UNSTABLE for f in flags)


def stability_grid(a_values, q_values, n_steps: int = FLOQUET_STEPS) -> np.ndarray:
    """Stability flags on the outer product grid, shape (len(a), len(q))."""
    A, Qg = np.meshgrid(np.asarray(a_values, float), np.asarray(q_values, float), indexing="ij")
    return is_stable(A, Qg, n_steps)


def first_instability_q(a: float = 0.0, q_lo: float = 0.0, q_hi: float = 1.2,
                        tol: float = 1e-6, n_steps: int = FLOQUET_STEPS) -> float:
    """Bisect for the q where the first stability region ends at fixed a.

    ``q_lo`` must be stable and ``q_hi`` unstable.
    """
    if not is_stable(a, q_lo, n_steps) or is_stable(a, q_hi, n_steps):
        raise ValueError("bracket must go from a stable to an unstable q")
    while q_hi - q_lo > tol:
        mid = 0.5 * (q_lo + q_hi)
        if is_stable(a, mid, n_steps):
            q_lo = mid
        else:
            q_hi = mid
    return 0.5 * (q_lo + q_hi)


# ---------------------------------------------------------------------------
# pseudopotential


@dataclass(frozen=True)
class DcUnstableAxis:
    """Axis whose radicand a + q^2/2 is negative: no secular confinement."""

    radicand: float


def secular_frequencies(params: MathieuParams, rf_frequency: float) -> tuple[float | DcUnstableAxis, ...]:
    """Lowest-order secular angular frequencies ``(Omega/2) sqrt(a + q^2/2)``.

    Reliable for |q| below about 0.4; beyond that the exact Floquet exponent
    drifts above this estimate.
    """
    out = []
    for a, q in zip(params.a, params.q):
        rad = a + 0.5 * q * q
        out.append(DcUnstableAxis(rad) if rad < 0 else 0.5 * rf_frequency * math.sqrt(rad))
    return tuple(out)


@dataclass(frozen=True)
class TrapDepth:
    joules: tuple[float, float, float]

    @property
    def kelvin(self) -> tuple[float, float, float]:
        return tuple(d / K_B for d in self.joules)

    @property
    def electron_volts(self) -> tuple[float, float, float]:
        from .physcore import E_CHARGE

        return tuple(d / E_CHARGE for d in self.joules)


def trap_depth(params: MathieuParams, drive: TrapDrive, species: IonSpecies, geom: TrapGeometry) -> TrapDepth:
    """Pseudopotential well depth ``|q| V Q / 8`` per axis.

    The DC contribution is ignored (a = 0 estimate); axes without RF
    confinement report zero. ``geom`` is accepted for interface symmetry.
    """
    del geom
    return TrapDepth(tuple(abs(q) * drive.rf_amplitude * species.charge / 8.0 for q in params.q))


# ---------------------------------------------------------------------------
# linear ion string


@dataclass(frozen=True)
class IonChain:
    n_ions: int
    axial_frequency: float
    positions: tuple[float, ...]  # m
    length_scale: float  # m
    scaled_positions: tuple[float, ...] = field(default=())
    residual: float = 0.0


def chain_length_scale(species: IonSpecies, axial_frequency: float) -> float:
    """``(Q^2 / (4 pi eps0 m omega_z^2))^(1/3)``."""
    return (species.charge**2 / (4.0 * math.pi * EPS0 * species.mass * axial_frequency**2)) ** (1.0 / 3.0)


def _force_balance(u):
    """Residual and Jacobian of ``u_m - sum_{n<m} d^-2 + sum_{n>m} d^-2``."""
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, 1.0)
    inv2 = np.sign(d) / d**2
    np.fill_diagonal(inv2, 0.0)
    res = u - inv2.sum(axis=1)
    inv3 = 2.0 / np.abs(d) ** 3
    np.fill_diagonal(inv3, 0.0)
    jac = -inv3
    np.fill_diagonal(jac, 1.0 + inv3.sum(axis=1))
    return res, jac


def _newton(u, tol=1e-12, max_iter=200):
    res, jac = _force_balance(u)
    norm = np.max(np.abs(res))
    for _ in range(max_iter):
        if norm < tol:
            return u, norm
        step = np.linalg.solve(jac, -res)
        lam = 1.0
        while lam > 1e-6:
            trial = u + lam * step
            if np.all(np.diff(trial) > 0):
                r_t, j_t = _force_balance(trial)
                n_t = np.max(np.abs(r_t))
                if n_t < norm:
                    break
            lam *= 0.5
        else:
            return u, norm
        u, res, jac, norm = trial, r_t, j_t, n_t
    return u, norm


def equilibrium_positions(n: int, tol: float = 1e-12) -> np.ndarray:
    """Dimensionless equilibrium positions of an n-ion string (units of the length scale).

    Damped Newton from an equally spaced guess; on failure, continue from the
    (n-1)-ion solution with one ion appended.
    """
    if n < 1:
        raise ValueError("need at least one ion")
    if n == 1:
        return np.zeros(1)
    spacing = 2.018 / n**0.559
    guess = spacing * (np.arange(n) - (n - 1) / 2.0)
    u, norm = _newton(guess, tol)
    if norm >= tol:
        prev = equilibrium_positions(n - 1, tol)
        guess = np.append(prev, prev[-1] + (prev[-1] - prev[-2] if n > 2 else 1.0))
        guess -= guess.mean()
        u, norm = _newton(guess, tol)
        if norm >= tol:
            raise ConvergenceError(f"ion-chain equilibrium for n={n} did not converge", norm)
    # enforce exact mirror symmetry left by rounding
    u = 0.5 * (u - u[::-1])
    return u


def chain_equilibrium(n: int, species: IonSpecies, axial_frequency: float) -> IonChain:
    """Axial equilibrium of ``n`` ions in a harmonic well of ``axial_frequency`` (rad/s)."""
    if not axial_frequency > 0:
        raise ValueError("axial_frequency must be positive")
    u = equilibrium_positions(n)
    res, _ = _force_balance(u) if n > 1 else (np.zeros(1), None)
    scale = chain_length_scale(species, axial_frequency)
    return IonChain(
        n_ions=n,
        axial_frequency=axial_frequency,
        positions=tuple(float(x) for x in u * scale),
        length_scale=scale,
        scaled_positions=tuple(float(x) for x in u),
        residual=float(np.max(np.abs(res))),
    )
