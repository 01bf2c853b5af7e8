import math

import numpy as np
import pytest

from iontrap import kernels
from iontrap.trapmodel import _cos_table

needs_ext = pytest.mark.skipif("compiled" not in kernels.available_backends(),
                               reason="compiled kernels not built")


def test_backend_selection():
    assert kernels.BACKEND in ("compiled", "python")
    assert kernels.get_backend("python").__name__.endswith("_reference")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def monodromy_args(n=400):
    rng = np.random.default_rng(0)
    a = rng.uniform(-0.2, 0.2, 25)
    q = rng.uniform(0.0, 1.0, 25)
    return a, q, _cos_table(n), math.pi / n


def test_reference_monodromy_is_symplectic():
    trace, det = kernels.get_backend("python").mathieu_monodromy(*monodromy_args())
    assert np.allclose(det, 1.0, atol=1e-8)


@needs_ext
def test_monodromy_bitwise_equal():
    args = monodromy_args()
    t_py, d_py = kernels.get_backend("python").mathieu_monodromy(*args)
    t_c, d_c = kernels.get_backend("compiled").mathieu_monodromy(*args)
    assert np.array_equal(t_py, t_c) and np.array_equal(d_py, d_c)


def verlet_case(backend, uniforms, n_steps=300, every=3):
    omega = 2 * math.pi * 7e6
    pos = np.array([[1e-6, 2e-7, -9e-6], [1e-7, 0.0, 0.0], [-1e-7, 1e-7, 9e-6]])
    vel = np.array([[0.5, -0.2, 0.1], [0.0, 0.3, 0.0], [0.1, 0.0, -0.4]])
    ka = [-0.25 * omega**2 * 0.004, -0.25 * omega**2 * 0.004, 0.25 * omega**2 * 0.008]
    kq = [0.5 * omega**2 * 0.3, -0.5 * omega**2 * 0.3, 0.0]
    kc = 1.6e-19**2 / (4 * math.pi * 8.854e-12 * 1.46e-25)
    g = 1 / 7.87e-9
    k = 2 * math.pi / 422e-9
    d = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
    beams = np.array([[*d, k, g, -g / 2, 1.0, 0.5 * g * 12 / 13, 1.05e-34 * k / 1.46e-25],
                      [*-d, k, g, -g / 2, 1.0, 0.5 * g * 12 / 13, 1.05e-34 * k / 1.46e-25]])
    out = np.empty((n_steps // every, 3, 6))
    res = kernels.get_backend(backend).verlet_run(pos, vel, 0.0, 2 * math.pi / omega / 100, n_steps, every,
                                                  ka, kq, omega, kc, beams, uniforms, 1e-4, out)
    return res, pos, vel, out


@needs_ext
@pytest.mark.parametrize("recoil", [False, True])
def test_verlet_bitwise_equal(recoil):
    u = np.random.default_rng(1).random((300, 3, kernels.UNIFORMS_PER_ION)) if recoil else None
    r_py, p_py, v_py, o_py = verlet_case("python", u)
    r_c, p_c, v_c, o_c = verlet_case("compiled", u)
    assert tuple(r_py) == tuple(r_c)
    assert np.array_equal(p_py, p_c) and np.array_equal(v_py, v_c) and np.array_equal(o_py, o_c)


def test_verlet_stops_on_loss():
    omega = 2 * math.pi * 7e6
    pos = np.array([[1e-6, 0.0, 0.0]])
    vel = np.zeros((1, 3))
    kq = [0.5 * omega**2 * 1.5, -0.5 * omega**2 * 1.5, 0.0]  # far outside the stable region
    out = np.empty((1000, 1, 6))
    done, lost = kernels.verlet_run(pos, vel, 0.0, 2 * math.pi / omega / 100, 1000, 1, [0.0] * 3, kq,
                                    omega, 0.0, np.zeros((0, 9)), None, (7.5e-3) ** 2, out)
    assert lost == 0 and done < 1000


@needs_ext
def test_simulate_identical_on_fallback(monkeypatch):
    from iontrap import iondyn as dyn
    from iontrap import trapmodel as tm
    from iontrap.physcore import SR88_COOLING, SR88_ION

    omega = 2 * math.pi * 7e6
    geom = tm.TrapGeometry("linear", 0.75e-3, 3e-3)
    drive = tm.TrapDrive(150.0, omega, 50.0)
    beams = dyn.counterpropagating_pair(SR88_COOLING, 1.0, -SR88_COOLING.linewidth / 2)
    cfg = dyn.SimConfig.per_rf_cycle(omega, 20, rng_seed=5, recoil_heating=True, sample_every=10)
    fast = dyn.simulate(SR88_ION, geom, drive, 3, beams, cfg)
    monkeypatch.setattr(kernels, "verlet_run", kernels.get_backend("python").verlet_run)
    slow = dyn.simulate(SR88_ION, geom, drive, 3, beams, cfg)
    assert np.array_equal(fast.positions, slow.positions)
    assert np.array_equal(fast.total_energy_series, slow.total_energy_series)


def test_benchmark_smoke(capsys):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    bench.main(["--quick", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "monodromy" in out and "False" not in out
