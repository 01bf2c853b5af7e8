"""Scenario runner: flat ``key = value`` config in, CSV out.

Usage::

    iontrap <scenario> --config run.cfg [--out result.csv] [--seed N]

Keys carry their unit in the name (``rf_voltage_vpp``, ``pressure_torr``,
``waist_um``) and are converted to SI when the file is parsed. Every
effective parameter, defaults included, is echoed as a ``#`` comment at the
top of the CSV.

Exit status: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from .iondyn import ConfigError as SimConfigError
from .iondyn import SimConfig, counterpropagating_pair, simulate
from .lockmodel import (
    OpticalCavity,
    PiServo,
    ReferenceProfile,
    airy_transmission,
    cavity_plant,
    dither_error,
    hc_error,
    pdh_error,
    rb_error,
    servo_run,
)
from .photoion import CrossSection, InteractionGeometry, rate_report
from .physcore import (
    AMU,
    E_CHARGE,
    SR88_COOLING,
    SR88_ION,
    AtomicVapor,
    GaussianFocus,
    IntensityConvention,
    IonSpecies,
    PulsedLaser,
    cm4w_to_m4w,
    torr_to_pa,
    vpp_to_amplitude,
)
from .trapmodel import (
    DcUnstableAxis,
    NumericalError,
    TrapDrive,
    TrapGeometry,
    TrapKind,
    chain_equilibrium,
    floquet_stability,
    mathieu_params,
    secular_frequencies,
    stability_grid,
    trap_depth,
)

SCENARIOS = ("rate", "stability", "secular", "chain", "lock", "servo", "dynamics")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class ConfigErrors(ValueError):
    """All problems found in a config file."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


# ---------------------------------------------------------------------------
# key registry


@dataclass(frozen=True)
class Key:
    kind: str  # float | int | choice | bool | path
    default: Any
    scenarios: tuple[str, ...]
    to_si: float | Callable[[float], float] = 1.0
    choices: tuple[str, ...] = ()
    unit: str = ""

    def convert(self, value):
        if self.kind != "float":
            return value
        return self.to_si(value) if callable(self.to_si) else value * self.to_si


_TRAP = ("secular", "dynamics")
_SPECIES = ("secular", "chain", "dynamics")
_CAVITY = ("lock", "servo")
_ALL = SCENARIOS

KEYS: dict[str, Key] = {
    "seed": Key("int", 0, _ALL),
    "output": Key("path", "-", _ALL),
    # species
    "ion_mass_amu": Key("float", SR88_ION.mass / AMU, _SPECIES, AMU, unit="kg"),
    "ion_charge_e": Key("int", 1, _SPECIES),
    # rate
    "wavelength_nm": Key("float", 431.0, ("rate",), 1e-9, unit="m"),
    "avg_power_mw": Key("float", 50.0, ("rate",), 1e-3, unit="W"),
    "rep_rate_mhz": Key("float", 82.0, ("rate",), 1e6, unit="Hz"),
    "pulse_fs": Key("float", 100.0, ("rate",), 1e-15, unit="s"),
    "waist_um": Key("float", 10.0, ("rate",), 1e-6, unit="m"),
    "pressure_torr": Key("float", 1e-9, ("rate",), torr_to_pa, unit="Pa"),
    "temperature_k": Key("float", 300.0, ("rate",), unit="K"),
    "sigma_cm4_per_w": Key("float", 1e-26, ("rate",), cm4w_to_m4w, unit="m^4/W"),
    "trap_length_mm": Key("float", 1.0, ("rate",), 1e-3, unit="m"),
    "convention": Key("choice", "both", ("rate",), choices=("both", "peak", "time-averaged")),
    # stability grid
    "a_min": Key("float", -0.1, ("stability",)),
    "a_max": Key("float", 0.1, ("stability",)),
    "a_steps": Key("int", 100, ("stability",)),
    "q_min": Key("float", 0.0, ("stability",)),
    "q_max": Key("float", 1.2, ("stability",)),
    "q_steps": Key("int", 100, ("stability",)),
    "floquet_steps": Key("int", 2000, ("stability",)),
    # trap
    "trap_kind": Key("choice", "linear", _TRAP, choices=("linear", "ring")),
    "radial_scale_mm": Key("float", None, _TRAP, 1e-3, unit="m"),
    "axial_half_length_mm": Key("float", None, _TRAP, 1e-3, unit="m"),
    "axial_efficiency": Key("float", None, _TRAP),
    "rf_voltage_vpp": Key("float", 300.0, _TRAP, vpp_to_amplitude, unit="V amplitude"),
    "rf_freq_mhz": Key("float", 7.0, _TRAP, lambda f: 2.0 * math.pi * f * 1e6, unit="rad/s"),
    "dc_endcap_v": Key("float", 50.0, _TRAP, unit="V"),
    "dc_offset_a_v": Key("float", 0.0, _TRAP, unit="V"),
    "dc_offset_b_v": Key("float", 0.0, _TRAP, unit="V"),
    # chain
    "n_ions": Key("int", 3, ("chain", "dynamics")),
    "axial_freq_khz": Key("float", 100.0, ("chain",), lambda f: 2.0 * math.pi * f * 1e3, unit="rad/s"),
    # cavity
    "finesse": Key("float", 200.0, _CAVITY),
    "fsr_mhz": Key("float", 1000.0, _CAVITY, 1e6, unit="Hz"),
    "input_transmission": Key("float", 0.03, _CAVITY),
    "mod_freq_mhz": Key("float", 20.0, _CAVITY, 1e6, unit="Hz"),
    "mod_depth_rad": Key("float", 1.08, _CAVITY),
    # lock traces
    "trace": Key("choice", "cavity", ("lock",), choices=("cavity", "rb")),
    "polarization_split": Key("float", 0.5, ("lock",)),
    "span_mhz": Key("float", None, ("lock",), 1e6, unit="Hz"),
    "points": Key("int", 601, ("lock",)),
    "rb_center_mhz": Key("float", -500.0, ("lock",), 1e6, unit="Hz"),
    "rb_fwhm_mhz": Key("float", 1300.0, ("lock",), 1e6, unit="Hz"),
    "rb_depth": Key("float", 1.0, ("lock",)),
    "aom_shift_mhz": Key("float", 400.0, ("lock",), 1e6, unit="Hz"),
    # servo
    "discriminator": Key("choice", "hc", ("servo",), choices=("hc", "pdh", "dither")),
    "kp": Key("float", 0.5, ("servo",)),
    "ki_per_s": Key("float", 1e6, ("servo",), unit="1/s"),
    "actuator_gain_mhz": Key("float", 1.0, ("servo",), 1e6, unit="Hz per unit"),
    "output_limit": Key("float", 1e3, ("servo",), unit="servo units"),
    "drift_mhz_per_s": Key("float", 1.0, ("servo",), 1e6, unit="Hz/s"),
    "noise_rms_hz": Key("float", 0.0, ("servo",), unit="Hz"),
    "initial_detuning_hz": Key("float", 0.0, ("servo",), unit="Hz"),
    "duration_us": Key("float", 50.0, ("servo",), 1e-6, unit="s"),
    "dt_ns": Key("float", 10.0, ("servo",), 1e-9, unit="s"),
    # dynamics
    "rf_cycles": Key("float", 200.0, ("dynamics",)),
    "steps_per_rf": Key("int", 100, ("dynamics",)),
    "sample_every": Key("int", 10, ("dynamics",)),
    "cooling": Key("bool", True, ("dynamics",)),
    "saturation": Key("float", 1.0, ("dynamics",)),
    "detuning_gamma": Key("float", -0.5, ("dynamics",), unit="Gamma"),
    "recoil": Key("bool", False, ("dynamics",)),
}

# geometry defaults that depend on trap_kind (user units)
TRAP_DEFAULTS = {
    "linear": {"radial_scale_mm": 0.75, "axial_half_length_mm": 3.0, "axial_efficiency": 0.3},
    "ring": {"radial_scale_mm": math.sqrt(2.0), "axial_half_length_mm": 1.0, "axial_efficiency": 1.0},
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass
class RunConfig:
    """Validated configuration.

    ``raw`` holds the user-unit values of every applicable key (defaults
    filled in), ``values`` the same in SI, ``explicit`` the keys that were set
    in the file.
    """

    scenario: str
    raw: dict[str, Any]
    values: dict[str, Any]
    explicit: frozenset[str] = field(default_factory=frozenset)

    @property
    def output_path(self) -> str:
        return self.raw["output"]

    def __getitem__(self, key):
        return self.values[key]

    def with_override(self, key: str, value) -> "RunConfig":
        raw = dict(self.raw)
        raw[key] = value
        return _finish(self.scenario, raw, self.explicit | {key})


def _parse_value(name: str, key: Key, text: str):
    if key.kind == "float":
        v = float(text)
        if math.isnan(v):
            raise ValueError
        return v
    if key.kind == "int":
        return int(text)
    if key.kind == "bool":
        t = text.lower()
        if t in _TRUE:
            return True
        if t in _FALSE:
            return False
        raise ValueError
    if key.kind == "choice":
        if text not in key.choices:
            raise ValueError
        return text
    return text


def _finish(scenario: str, given: dict[str, Any], explicit) -> RunConfig:
    raw: dict[str, Any] = {}
    for name, key in KEYS.items():
        if scenario in key.scenarios:
            raw[name] = given.get(name, key.default)
    if "trap_kind" in raw:
        for name, default in TRAP_DEFAULTS[raw["trap_kind"]].items():
            if raw[name] is None:
                raw[name] = default
    if scenario == "lock" and raw["span_mhz"] is None:
        raw["span_mhz"] = 2000.0 if raw["trace"] == "rb" else 1.5 * raw["mod_freq_mhz"]
    values = {name: KEYS[name].convert(v) for name, v in raw.items()}
    return RunConfig(scenario, raw, values, frozenset(explicit))


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; raise :class:`ConfigErrors` listing every problem."""
    errors: list[str] = []
    given: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        name, value = (s.strip() for s in line.split("=", 1))
        if name in given:
            errors.append(f"line {lineno}: duplicate key '{name}' (first on line {lines[name]})")
            continue
        given[name] = value
        lines[name] = lineno

    scenario = given.pop("scenario", None)
    if scenario is None:
        errors.append("scenario missing")
    elif scenario not in SCENARIOS:
        errors.append(f"scenario '{scenario}' unknown (expected one of {', '.join(SCENARIOS)})")
        scenario = None

    parsed: dict[str, Any] = {}
    for name, text_value in given.items():
        key = KEYS.get(name)
        where = f"line {lines[name]}"
        if key is None:
            errors.append(f"{where}: unknown key '{name}'")
            continue
        if scenario is not None and scenario not in key.scenarios:
            errors.append(f"{where}: key '{name}' is not used by scenario '{scenario}'")
            continue
        try:
            parsed[name] = _parse_value(name, key, text_value)
        except ValueError:
            expect = f"one of {', '.join(key.choices)}" if key.kind == "choice" else f"a {key.kind}"
            errors.append(f"{where}: key '{name}': cannot parse '{text_value}' as {expect}")

    if errors:
        raise ConfigErrors(errors)
    return _finish(scenario, parsed, parsed.keys())


def _format_raw(value) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize(config: RunConfig) -> str:
    """Config text that parses back to an equivalent :class:`RunConfig`."""
    lines = [f"scenario = {config.scenario}"]
    for name in KEYS:
        if name in config.explicit:
            lines.append(f"{name} = {_format_raw(config.raw[name])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class CsvTable:
    columns: list[str]
    rows: list[list]
    comments: list[str] = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("rows must match the header width")

    def to_text(self) -> str:
        out = [f"# {c}" if c else "#" for c in self.comments]
        out.append(",".join(self.columns))
        out.extend(",".join(_fmt(v) for v in row) for row in self.rows)
        return "\n".join(out) + "\n"


@dataclass
class RunResult:
    table: CsvTable
    exit_code: int = EXIT_OK
    message: str = ""


def _provenance(config: RunConfig) -> list[str]:
    lines = [f"iontrap {__version__}", f"scenario = {config.scenario}"]
    for name in KEYS:
        if name not in config.raw or name == "output":
            continue
        key = KEYS[name]
        tag = "set" if name in config.explicit else "default"
        si = ""
        if key.kind == "float" and key.unit and key.to_si != 1.0:
            si = f"  [= {_fmt(config.values[name])} {key.unit}]"
        lines.append(f"{name} = {_format_raw(config.raw[name])} ({tag}){si}")
    return lines


# ---------------------------------------------------------------------------
# scenarios


def _species(c: RunConfig) -> IonSpecies:
    return IonSpecies(name="ion", mass=c["ion_mass_amu"], charge=c["ion_charge_e"] * E_CHARGE,
                      transitions=SR88_ION.transitions)


def _trap(c: RunConfig):
    geom = TrapGeometry(TrapKind(c["trap_kind"]), c["radial_scale_mm"], c["axial_half_length_mm"],
                        c["axial_efficiency"])
    if geom.kind is TrapKind.LINEAR:
        offsets = (c["dc_offset_a_v"], c["dc_offset_b_v"])
    else:
        if c["dc_offset_b_v"] != 0.0:
            raise ConfigErrors(["key 'dc_offset_b_v' has no electrode in a ring trap"])
        offsets = (c["dc_offset_a_v"],)
    drive = TrapDrive(c["rf_voltage_vpp"], c["rf_freq_mhz"], c["dc_endcap_v"], offsets)
    return geom, drive


RATE_NOTE = [
    "note: a loading rate of about 10 ions/s is commonly quoted for these parameters,",
    "note: but the rate formula evaluated here with either intensity convention does",
    "note: not reproduce it (peak: ~7e6 /s, time-averaged: ~5e-4 /s). The intensity",
    "note: convention, vapor density at the trap and trap length behind that figure",
    "note: are unspecified; all intermediates are listed so the gap can be audited.",
    "note: convention_id 0 = peak intensity, 1 = time-averaged intensity",
]


def _run_rate(c: RunConfig) -> RunResult:
    laser = PulsedLaser(c["wavelength_nm"], c["avg_power_mw"], c["rep_rate_mhz"], c["pulse_fs"])
    focus = GaussianFocus(c["waist_um"], c["wavelength_nm"])
    vapor = AtomicVapor(c["pressure_torr"], c["temperature_k"])
    sigma = CrossSection(c["sigma_cm4_per_w"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        geom = InteractionGeometry(focus, c["trap_length_mm"])
        conv = c["convention"]
        kinds = [IntensityConvention.PEAK, IntensityConvention.TIME_AVERAGED] if conv == "both" \
            else [IntensityConvention(conv)]
        reports = [rate_report(laser, focus, vapor, sigma, geom, k) for k in kinds]
    columns = list(reports[0].as_row())
    notes = list(RATE_NOTE)
    for r in reports:
        notes += [f"warning ({r.convention.value}): {w}" for w in r.warnings]
    return RunResult(CsvTable(columns, [list(r.as_row().values()) for r in reports], notes))


def _run_stability(c: RunConfig) -> RunResult:
    if c["a_steps"] < 1 or c["q_steps"] < 1:
        raise ConfigErrors(["a_steps and q_steps must be >= 1"])
    a = np.linspace(c["a_min"], c["a_max"], c["a_steps"])
    q = np.linspace(c["q_min"], c["q_max"], c["q_steps"])
    flags = stability_grid(a, q, c["floquet_steps"])
    rows = [[float(a[i]), float(q[j]), bool(flags[i, j])] for i in range(len(a)) for j in range(len(q))]
    return RunResult(CsvTable(["a", "q", "stable_flag"], rows, ["rows: a outer, q inner"]))


def _run_secular(c: RunConfig) -> RunResult:
    species = _species(c)
    geom, drive = _trap(c)
    params = mathieu_params(species, geom, drive)
    omega = secular_frequencies(params, drive.rf_frequency)
    stable = floquet_stability(params)
    depth = trap_depth(params, drive, species, geom)
    rows = []
    for i in range(3):
        w = omega[i]
        dc_ok = not isinstance(w, DcUnstableAxis)
        rows.append([i, params.a[i], params.q[i], w if dc_ok else math.nan,
                     w / (2 * math.pi) if dc_ok else math.nan, dc_ok,
                     stable[i].value == "stable", depth.joules[i], depth.kelvin[i]])
    cols = ["axis", "a", "q", "omega_rad_s", "freq_hz", "dc_stable_flag", "floquet_stable_flag",
            "depth_j", "depth_k"]
    return RunResult(CsvTable(cols, rows, ["axis 0 = x, 1 = y, 2 = z (trap axis)"]))


def _run_chain(c: RunConfig) -> RunResult:
    if c["n_ions"] < 1:
        raise ConfigErrors(["n_ions must be >= 1"])
    chain = chain_equilibrium(c["n_ions"], _species(c), c["axial_freq_khz"])
    rows = [[i, x, u] for i, (x, u) in enumerate(zip(chain.positions, chain.scaled_positions))]
    notes = [f"length_scale_m = {_fmt(chain.length_scale)}", f"residual = {_fmt(chain.residual)}"]
    return RunResult(CsvTable(["ion", "position_m", "position_scaled"], rows, notes))


def _cavity(c: RunConfig) -> OpticalCavity:
    return OpticalCavity(c["finesse"], c["fsr_mhz"], c["input_transmission"])


def _run_lock(c: RunConfig) -> RunResult:
    if c["points"] < 2:
        raise ConfigErrors(["points must be >= 2"])
    d = np.linspace(-c["span_mhz"], c["span_mhz"], c["points"])
    if c["trace"] == "rb":
        ref = ReferenceProfile(((c["rb_center_mhz"], c["rb_depth"], c["rb_fwhm_mhz"]),), c["aom_shift_mhz"])
        e = rb_error(ref, d)
        a = ref.absorption(d)
        rows = [[d[i], a[i], e[i]] for i in range(len(d))]
        return RunResult(CsvTable(["laser_offset_hz", "absorption", "rb_error"], rows,
                                  ["laser offset relative to the Sr transition"]))
    cav = _cavity(c)
    cols = {
        "detuning_hz": d,
        "airy_transmission": airy_transmission(cav, d),
        "hc_error": hc_error(cav, d, c["polarization_split"]),
        "pdh_error": pdh_error(cav, d, c["mod_freq_mhz"], c["mod_depth_rad"]),
        "dither_error": dither_error(cav, d),
    }
    rows = [[cols[k][i] for k in cols] for i in range(len(d))]
    return RunResult(CsvTable(list(cols), rows, [f"cavity linewidth_hz = {_fmt(cav.linewidth)}"]))


def _run_servo(c: RunConfig) -> RunResult:
    cav = _cavity(c)
    plant = cavity_plant(cav, c["discriminator"], mod_frequency=c["mod_freq_mhz"],
                         mod_depth=c["mod_depth_rad"], drift=c["drift_mhz_per_s"],
                         noise_rms=c["noise_rms_hz"], actuator_gain=c["actuator_gain_mhz"],
                         initial_detuning=c["initial_detuning_hz"])
    lim = c["output_limit"]
    servo = PiServo(c["kp"], c["ki_per_s"], (-lim, lim))
    try:
        trace = servo_run(plant, servo, c["duration_us"], c["dt_ns"], c["seed"])
    except ValueError as exc:
        raise ConfigErrors([str(exc)]) from exc
    slope = plant.loop_slope()
    notes = [f"loop_slope = {_fmt(slope)}",
             f"predicted_steady_state_hz = {_fmt(c['drift_mhz_per_s'] / (c['ki_per_s'] * slope))}"]
    rows = [[trace.times[i], trace.error[i], trace.actuator[i], trace.detuning[i]]
            for i in range(len(trace.times))]
    table = CsvTable(["time_s", "error", "actuator_hz", "detuning_hz"], rows, notes)
    if trace.lock_lost_at is not None:
        table.comments.append(f"lock lost at t = {_fmt(trace.lock_lost_at)} s")
        return RunResult(table, EXIT_NUMERICAL, f"lock lost at t = {trace.lock_lost_at:.6g} s")
    return RunResult(table)


def _run_dynamics(c: RunConfig) -> RunResult:
    species = _species(c)
    geom, drive = _trap(c)
    if c["n_ions"] < 1 or c["steps_per_rf"] < 1 or c["sample_every"] < 1:
        raise ConfigErrors(["n_ions, steps_per_rf and sample_every must be >= 1"])
    beams = None
    if c["cooling"]:
        gamma = SR88_COOLING.linewidth
        beams = counterpropagating_pair(SR88_COOLING, c["saturation"], c["detuning_gamma"] * gamma)
    try:
        cfg = SimConfig.per_rf_cycle(drive.rf_frequency, c["rf_cycles"], c["steps_per_rf"],
                                     rng_seed=c["seed"], recoil_heating=c["recoil"],
                                     sample_every=c["sample_every"])
        traj = simulate(species, geom, drive, c["n_ions"], beams, cfg)
    except SimConfigError as exc:
        raise ConfigErrors([str(exc)]) from exc
    cols = ["time_s", "energy_j"]
    for i in range(traj.n_ions):
        cols += [f"ion{i}_x_m", f"ion{i}_y_m", f"ion{i}_z_m"]
    rows = []
    for k in range(len(traj.times)):
        rows.append([traj.times[k], traj.total_energy_series[k], *traj.positions[k].ravel()])
    notes = ["cooling: counter-propagating pair along (1,1,1)" if beams else "cooling: off",
             "energy_j: secular energy, micromotion removed, averaged over one RF period"]
    table = CsvTable(cols, rows, notes)
    if traj.loss is not None:
        msg = f"ion {traj.loss.ion_index} lost at t = {traj.loss.time:.6g} s"
        table.comments.append(msg)
        return RunResult(table, EXIT_NUMERICAL, msg)
    return RunResult(table)


RUNNERS = {
    "rate": _run_rate,
    "stability": _run_stability,
    "secular": _run_secular,
    "chain": _run_chain,
    "lock": _run_lock,
    "servo": _run_servo,
    "dynamics": _run_dynamics,
}


def run(config: RunConfig) -> RunResult:
    """Dispatch ``config`` and return the CSV table with provenance comments."""
    try:
        result = RUNNERS[config.scenario](config)
    except (NumericalError, FloatingPointError) as exc:
        raise NumericalError(f"{config.scenario}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigErrors):
            raise
        raise ConfigErrors([f"{config.scenario}: {exc}"]) from exc
    result.table.comments = _provenance(config) + result.table.comments
    return result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="iontrap", description=__doc__.split("\n")[0])
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", required=True, help="path to the key = value config file")
    parser.add_argument("--out", help="CSV output path (default: config 'output' key, else stdout)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    args = parser.parse_args(argv)

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = parse_config(text)
        if config.scenario != args.scenario:
            raise ConfigErrors([f"config scenario '{config.scenario}' does not match '{args.scenario}'"])
        if args.seed is not None:
            config = config.with_override("seed", args.seed)
        result = run(config)
    except ConfigErrors as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    out = args.out or config.output_path
    text = result.table.to_text()
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if result.message:
        print(result.message, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
