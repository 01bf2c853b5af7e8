import io
import math
import os
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iontrap import __version__, cli
from iontrap.trapmodel import equilibrium_positions

GOLDEN = Path(__file__).parent / "golden"
SCENARIOS = cli.SCENARIOS


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(list(argv))
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_golden_byte_identity(scenario, tmp_path):
    out = tmp_path / f"{scenario}.csv"
    code, _, _ = invoke(scenario, "--config", str(GOLDEN / f"{scenario}.cfg"), "--out", str(out))
    assert code == 0
    if os.environ.get("IONTRAP_REGEN_GOLDEN"):
        (GOLDEN / f"{scenario}.csv").write_bytes(out.read_bytes())
    assert out.read_bytes() == (GOLDEN / f"{scenario}.csv").read_bytes()


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_csv_format(scenario):
    text = (GOLDEN / f"{scenario}.csv").read_bytes().decode("ascii")
    assert "\r" not in text and text.endswith("\n")
    lines = text[:-1].split("\n")
    assert lines[0] == f"# iontrap {__version__}"
    body = [ln for ln in lines if not ln.startswith("#")]
    width = len(body[0].split(","))
    assert all(len(ln.split(",")) == width for ln in body)
    for ln in body[1:]:
        for field in ln.split(","):
            float(field)
            digits = field.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(digits) <= 17


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_provenance_lists_every_default(scenario):
    config = cli.parse_config((GOLDEN / f"{scenario}.cfg").read_text())
    header = [ln for ln in (GOLDEN / f"{scenario}.csv").read_text().splitlines() if ln.startswith("#")]
    for key in config.raw:
        if key == "output":
            continue
        tag = "set" if key in config.explicit else "default"
        assert any(ln.startswith(f"# {key} = ") and f"({tag})" in ln for ln in header), key


def test_csv_round_trip_precision():
    assert cli._fmt(0.1) == "0.10000000000000001"
    assert float(cli._fmt(1 / 3)) == 1 / 3
    assert cli._fmt(True) == "1" and cli._fmt(np.int64(4)) == "4"
    with pytest.raises(ValueError):
        cli.CsvTable(["a", "b"], [[1.0]])


def test_parse_example_chain():
    c = cli.parse_config("scenario = chain\nn_ions = 3\naxial_freq_khz = 100")
    assert c.scenario == "chain"
    assert c["n_ions"] == 3
    assert c["axial_freq_khz"] == pytest.approx(2 * math.pi * 1e5)


def test_si_conversion_at_parse():
    c = cli.parse_config("scenario = rate\npressure_torr = 1e-9\nwaist_um = 10\nsigma_cm4_per_w = 1e-26")
    assert c["pressure_torr"] == pytest.approx(1e-9 * 101325 / 760)
    assert c["waist_um"] == pytest.approx(1e-5)
    assert c["sigma_cm4_per_w"] == pytest.approx(1e-34)
    s = cli.parse_config("scenario = secular\nrf_voltage_vpp = 300")
    assert s["rf_voltage_vpp"] == 150.0


def test_parse_errors_are_collected():
    with pytest.raises(cli.ConfigErrors) as exc:
        cli.parse_config("")
    assert exc.value.errors == ["scenario missing"]
    with pytest.raises(cli.ConfigErrors) as exc:
        cli.parse_config("rf_voltage_vpp = abc")
    assert any("rf_voltage_vpp" in e for e in exc.value.errors)
    assert "scenario missing" in exc.value.errors
    text = "scenario = secular\nrf_voltge_vpp = 3\nrf_freq_mhz = abc\nfinesse = 3\nnonsense\nrf_freq_mhz = 7\n"
    with pytest.raises(cli.ConfigErrors) as exc:
        cli.parse_config(text)
    errs = exc.value.errors
    assert len(errs) == 5
    assert any("unknown key 'rf_voltge_vpp'" in e for e in errs)
    assert any("'rf_freq_mhz'" in e and "abc" in e for e in errs)
    assert any("'finesse' is not used" in e for e in errs)
    assert any("duplicate" in e for e in errs)
    with pytest.raises(cli.ConfigErrors):
        cli.parse_config("scenario = warp")
    with pytest.raises(cli.ConfigErrors):
        cli.parse_config("scenario = dynamics\ncooling = maybe")


def test_comments_and_whitespace():
    c = cli.parse_config("# header\n\n  scenario=chain   # trailing\n\tn_ions =  5 \n")
    assert c["n_ions"] == 5 and c.explicit == frozenset({"n_ions"})


def _value_strategy(key):
    if key.kind == "float":
        return st.floats(allow_nan=False, width=64)
    if key.kind == "int":
        return st.integers(-10**6, 10**6)
    if key.kind == "bool":
        return st.booleans()
    if key.kind == "choice":
        return st.sampled_from(key.choices)
    return st.from_regex(r"[A-Za-z0-9_./-]{1,20}", fullmatch=True)


@st.composite
def configs(draw):
    scenario = draw(st.sampled_from(SCENARIOS))
    keys = [k for k, v in cli.KEYS.items() if scenario in v.scenarios]
    chosen = draw(st.lists(st.sampled_from(keys), unique=True, max_size=len(keys)))
    lines = [f"scenario = {scenario}"]
    for k in chosen:
        v = draw(_value_strategy(cli.KEYS[k]))
        lines.append(f"{k} = {cli._format_raw(v)}")
    return "\n".join(lines)


@settings(max_examples=150, deadline=None)
@given(configs())
def test_serialize_round_trip(text):
    c = cli.parse_config(text)
    again = cli.parse_config(cli.serialize(c))
    assert again.scenario == c.scenario
    assert again.explicit == c.explicit
    assert again.raw == c.raw
    assert again.values == c.values


def test_stability_full_grid_rows(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("scenario = stability\n")
    out = tmp_path / "s.csv"
    assert invoke("stability", "--config", str(cfg), "--out", str(out))[0] == 0
    body = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert body[0] == "a,q,stable_flag"
    assert len(body) - 1 == 10_000
    first = body[1].split(",")
    assert float(first[0]) == -0.1 and float(first[1]) == 0.0


def test_chain_rows_match_analytic(tmp_path):
    code, out, _ = invoke("chain", "--config", str(GOLDEN / "chain.cfg"))
    assert code == 0
    body = [ln.split(",") for ln in out.splitlines() if not ln.startswith("#")][1:]
    assert len(body) == 3
    u = [float(r[2]) for r in body]
    assert u == pytest.approx(list(equilibrium_positions(3)), abs=1e-12)
    assert u[2] == pytest.approx(1.25 ** (1 / 3), abs=1e-12)


def test_rate_has_both_conventions_and_note():
    text = (GOLDEN / "rate.csv").read_text()
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert len(body) == 3
    assert "10 ions/s" in text and "not reproduce" in text


def test_seed_override_changes_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = str(GOLDEN / "dynamics.cfg")
    assert invoke("dynamics", "--config", cfg, "--out", str(a))[0] == 0
    assert invoke("dynamics", "--config", cfg, "--out", str(b), "--seed", "4")[0] == 0
    assert a.read_bytes() != b.read_bytes()
    assert "# seed = 4 (set)" in b.read_text()


def test_stdout_default(tmp_path):
    code, out, _ = invoke("chain", "--config", str(GOLDEN / "chain.cfg"))
    assert code == 0 and out == (GOLDEN / "chain.csv").read_text()


def test_config_error_exit_lists_all(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("scenario = secular\nrf_voltge_vpp = 3\nrf_freq_mhz = abc\n")
    code, out, err = invoke("secular", "--config", str(cfg))
    assert code == 1 and out == ""
    assert "rf_voltge_vpp" in err and "rf_freq_mhz" in err
    assert len(err.strip().splitlines()) == 2


def test_config_error_exit_cases(tmp_path):
    empty = tmp_path / "empty.cfg"
    empty.write_text("")
    code, _, err = invoke("chain", "--config", str(empty))
    assert code == 1 and "scenario missing" in err
    assert invoke("chain", "--config", str(tmp_path / "missing.cfg"))[0] == 1
    assert invoke("secular", "--config", str(GOLDEN / "chain.cfg"))[0] == 1
    dt = tmp_path / "dt.cfg"
    dt.write_text("scenario = dynamics\nsteps_per_rf = 10\n")
    assert invoke("dynamics", "--config", str(dt))[0] == 1
    guard = tmp_path / "guard.cfg"
    guard.write_text("scenario = servo\ndt_ns = 1000\n")
    assert invoke("servo", "--config", str(guard))[0] == 1


def test_numerical_failure_exit(tmp_path):
    cfg = tmp_path / "lost.cfg"
    cfg.write_text("scenario = dynamics\nrf_voltage_vpp = 3000\nrf_freq_mhz = 1\nrf_cycles = 50\n")
    out = tmp_path / "lost.csv"
    code, _, err = invoke("dynamics", "--config", str(cfg), "--out", str(out))
    assert code == 2 and "lost" in err
    assert "lost at" in out.read_text()
    unstable = tmp_path / "servo.cfg"
    unstable.write_text("scenario = servo\nkp = 5\ninitial_detuning_hz = 1e5\n")
    assert invoke("servo", "--config", str(unstable))[0] == 2


def test_ring_trap_secular():
    c = cli.parse_config("scenario = secular\ntrap_kind = ring\ndc_endcap_v = 0\n")
    assert c.raw["radial_scale_mm"] == pytest.approx(math.sqrt(2))
    assert c.raw["axial_efficiency"] == 1.0
    rows = cli.run(c).table.rows
    assert rows[2][2] == pytest.approx(-2 * rows[0][2])
    bad = cli.parse_config("scenario = secular\ntrap_kind = ring\ndc_offset_b_v = 1\n")
    with pytest.raises(cli.ConfigErrors):
        cli.run(bad)


def test_lock_rb_trace():
    c = cli.parse_config("scenario = lock\ntrace = rb\npoints = 401\n")
    table = cli.run(c).table
    assert table.columns == ["laser_offset_hz", "absorption", "rb_error"]
    d = np.array([r[0] for r in table.rows])
    e = np.array([r[2] for r in table.rows])
    i = np.nonzero(np.signbit(e[:-1]) != np.signbit(e[1:]))[0]
    assert len(i) == 1 and abs(d[i[0]] + 300e6) < 10e6


def test_run_is_deterministic():
    c = cli.parse_config((GOLDEN / "servo.cfg").read_text())
    assert cli.run(c).table.to_text() == cli.run(c).table.to_text()
