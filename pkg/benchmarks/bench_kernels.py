"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Times the Floquet monodromy over an (a, q) grid and the N-ion leapfrog
integrator, checks the two backends agree bit for bit, and prints the
speedup. Without a compiled build only the Python timings are shown.
"""
import argparse
import math
import timeit

import numpy as np

from iontrap import kernels
from iontrap.trapmodel import FLOQUET_STEPS, _cos_table


def monodromy_case(n_points):
    side = int(math.sqrt(n_points))
    a, q = np.meshgrid(np.linspace(-0.1, 0.1, side), np.linspace(0, 1.2, side), indexing="ij")
    args = (a.ravel().copy(), q.ravel().copy(), _cos_table(FLOQUET_STEPS), math.pi / FLOQUET_STEPS)
    return lambda backend: backend.mathieu_monodromy(*args)


def verlet_case(n_ions, n_steps, recoil):
    omega = 2 * math.pi * 7e6
    rng = np.random.default_rng(0)
    pos0 = np.zeros((n_ions, 3))
    pos0[:, 2] = np.linspace(-10e-6, 10e-6, n_ions)
    pos0[:, 0] = 1e-7
    ka = [-0.25 * omega**2 * 0.004, -0.25 * omega**2 * 0.004, 0.25 * omega**2 * 0.008]
    kq = [0.5 * omega**2 * 0.3, -0.5 * omega**2 * 0.3, 0.0]
    kc = 1.602e-19**2 / (4 * math.pi * 8.854e-12 * 1.46e-25)
    g, k = 1 / 7.87e-9, 2 * math.pi / 422e-9
    d = np.ones(3) / math.sqrt(3)
    row = [k, g, -g / 2, 1.0, 0.5 * g * 12 / 13, 1.0546e-34 * k / 1.46e-25]
    beams = np.array([[*d, *row], [*-d, *row]])
    uniforms = rng.random((n_steps, n_ions, kernels.UNIFORMS_PER_ION)) if recoil else None
    dt = 2 * math.pi / omega / 100

    def call(backend):
        pos, vel = pos0.copy(), np.zeros((n_ions, 3))
        out = np.empty((n_steps // 10, n_ions, 6))
        backend.verlet_run(pos, vel, 0.0, dt, n_steps, 10, ka, kq, omega, kc, beams, uniforms, 1.0, out)
        return pos, vel, out

    return call


def same(x, y):
    if isinstance(x, tuple):
        return all(same(a, b) for a, b in zip(x, y))
    return np.array_equal(np.asarray(x), np.asarray(y))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)

    scale = 0.1 if args.quick else 1.0
    cases = [
        (f"monodromy {int(1e4 * scale)} points", monodromy_case(int(1e4 * scale))),
        (f"leapfrog 3 ions x {int(2e4 * scale)} steps", verlet_case(3, int(2e4 * scale), False)),
        (f"leapfrog 3 ions x {int(2e4 * scale)} steps, recoil", verlet_case(3, int(2e4 * scale), True)),
        (f"leapfrog 10 ions x {int(1e4 * scale)} steps", verlet_case(10, int(1e4 * scale), False)),
    ]
    names = kernels.available_backends()
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'case':<40}" + "".join(f"{n + ' [s]':>16}" for n in names) + ("  speedup  identical" if len(names) == 2 else ""))
    for label, fn in cases:
        times, results = [], []
        for n in names:
            backend = kernels.get_backend(n)
            results.append(fn(backend))
            times.append(min(timeit.repeat(lambda: fn(backend), number=1, repeat=args.repeat)))
        line = f"{label:<40}" + "".join(f"{t:>16.4f}" for t in times)
        if len(names) == 2:
            line += f"  {times[1] / times[0]:7.1f}x  {same(results[0], results[1])!s:>9}"
        print(line)


if __name__ == "__main__":
    main()
