"""Pure-Python kernels.

Operation order mirrors ``_ext.pyx`` exactly so the two backends produce
bit-identical results. Edit both files together.
"""
import math

import numpy as np

# cap on spontaneous-emission events drawn per ion per step
MAX_EVENTS = 6
UNIFORMS_PER_ION = 1 + 2 * MAX_EVENTS


def mathieu_monodromy(a, q, cos_table, h):
    """Trace and determinant of the Mathieu monodromy matrix.

    Integrates ``u'' + (a - 2 q cos 2t) u = 0`` with classical RK4 for the
    two fundamental initial conditions. ``cos_table[k] = cos(k h)`` holds
    ``cos 2t`` at the half-step grid ``t = k h / 2``.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    n_steps = (len(cos_table) - 1) // 2
    h2 = 0.5 * h
    h6 = h / 6.0
    twoq = 2.0 * q
    # columns: solution started at (1, 0) and at (0, 1)
    y1 = np.ones_like(a)
    p1 = np.zeros_like(a)
    y2 = np.zeros_like(a)
    p2 = np.ones_like(a)
    for s in range(n_steps):
        w0 = a - twoq * cos_table[2 * s]
        wm = a - twoq * cos_table[2 * s + 1]
        w1 = a - twoq * cos_table[2 * s + 2]
        y1, p1 = _rk4(y1, p1, w0, wm, w1, h, h2, h6)
        y2, p2 = _rk4(y2, p2, w0, wm, w1, h, h2, h6)
    trace = y1 + p2
    det = y1 * p2 - p1 * y2
    return trace, det


def _rk4(y, p, w0, wm, w1, h, h2, h6):
    k1y = p
    k1p = -(w0 * y)
    k2y = p + h2 * k1p
    k2p = -(wm * (y + h2 * k1y))
    k3y = p + h2 * k2p
    k3p = -(wm * (y + h2 * k2y))
    k4y = p + h * k3p
    k4p = -(w1 * (y + h * k3y))
    y_new = y + h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    p_new = p + h6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return y_new, p_new


def verlet_run(pos, vel, t0, dt, n_steps, sample_every, ka, kq, omega, kc,
               beams, uniforms, loss_r2, out):
    """Advance N ions through ``n_steps`` drift-kick-drift steps.

    Parameters
    ----------
    pos, vel : (N, 3) float64 arrays
        State at ``t0``; updated in place.
    ka, kq : length-3 sequences
        Per-axis trap coefficients; the trap acceleration along axis i is
        ``(-ka[i] + kq[i] cos(omega t)) x_i``.
    kc : float
        Coulomb coefficient ``Q^2 / (4 pi eps0 m)``.
    beams : (B, 9) float64 array
        Cooling beams: direction (3), k, Gamma, detuning, s0,
        rate prefactor ``duty s0 Gamma / 2``, recoil velocity ``hbar k / m``.
    uniforms : (n_steps, N, 1 + 2 MAX_EVENTS) array or None
        Random numbers for recoil kicks; ``None`` disables recoil.
    loss_r2 : float
        Squared escape radius.
    out : (n_steps // sample_every, N, 6) float64 array
        Receives positions and velocities after every ``sample_every`` steps.

    Returns
    -------
    steps_done, lost_ion : int, int
        ``lost_ion`` is -1 unless an ion crossed the escape radius, in which
        case integration stops after that step.
    """
    n = pos.shape[0]
    x = pos.tolist()
    v = vel.tolist()
    ka0, ka1, ka2 = float(ka[0]), float(ka[1]), float(ka[2])
    kq0, kq1, kq2 = float(kq[0]), float(kq[1]), float(kq[2])
    beam_rows = [tuple(float(c) for c in row) for row in beams]
    recoil = uniforms is not None
    half = 0.5 * dt
    lost = -1
    steps_done = 0
    acc = [[0.0, 0.0, 0.0] for _ in range(n)]
    xh = [[0.0, 0.0, 0.0] for _ in range(n)]
    rate = [0.0] * n
    cos = math.cos
    sqrt = math.sqrt
    for step in range(n_steps):
        th = t0 + (step + 0.5) * dt
        c = cos(omega * th)
        f0 = -ka0 + kq0 * c
        f1 = -ka1 + kq1 * c
        f2 = -ka2 + kq2 * c
        for i in range(n):
            xi = x[i]
            vi = v[i]
            hx = xi[0] + half * vi[0]
            hy = xi[1] + half * vi[1]
            hz = xi[2] + half * vi[2]
            xh[i][0] = hx
            xh[i][1] = hy
            xh[i][2] = hz
            ai = acc[i]
            ai[0] = f0 * hx
            ai[1] = f1 * hy
            ai[2] = f2 * hz
        for i in range(n):
            xa = xh[i]
            aa = acc[i]
            for j in range(i + 1, n):
                xb = xh[j]
                ab = acc[j]
                rx = xa[0] - xb[0]
                ry = xa[1] - xb[1]
                rz = xa[2] - xb[2]
                d2 = rx * rx + ry * ry + rz * rz
                s = kc / (d2 * sqrt(d2))
                aa[0] += s * rx
                aa[1] += s * ry
                aa[2] += s * rz
                ab[0] -= s * rx
                ab[1] -= s * ry
                ab[2] -= s * rz
        for i in range(n):
            vi = v[i]
            ai = acc[i]
            total = 0.0
            for b in beam_rows:
                kv = b[3] * (b[0] * vi[0] + b[1] * vi[1] + b[2] * vi[2])
                z = 2.0 * (b[5] - kv) / b[4]
                r = b[7] / (1.0 + b[6] + z * z)
                ai[0] += b[8] * r * b[0]
                ai[1] += b[8] * r * b[1]
                ai[2] += b[8] * r * b[2]
                total += r
            rate[i] = total
        for i in range(n):
            vi = v[i]
            ai = acc[i]
            vi[0] = vi[0] + dt * ai[0]
            vi[1] = vi[1] + dt * ai[1]
            vi[2] = vi[2] + dt * ai[2]
            if recoil and beam_rows:
                u = uniforms[step, i].tolist()
                lam = rate[i] * dt
                p = math.exp(-lam)
                cdf = p
                k = 0
                while u[0] > cdf and k < MAX_EVENTS:
                    k += 1
                    p = p * lam / k
                    cdf += p
                vr = beam_rows[0][8]
                for e in range(k):
                    ct = 2.0 * u[1 + 2 * e] - 1.0
                    st = sqrt(max(0.0, 1.0 - ct * ct))
                    ph = 2.0 * math.pi * u[2 + 2 * e]
                    vi[0] += vr * st * cos(ph)
                    vi[1] += vr * st * math.sin(ph)
                    vi[2] += vr * ct
            xi = x[i]
            xa = xh[i]
            xi[0] = xa[0] + half * vi[0]
            xi[1] = xa[1] + half * vi[1]
            xi[2] = xa[2] + half * vi[2]
        steps_done = step + 1
        for i in range(n):
            xi = x[i]
            if xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] > loss_r2:
                lost = i
                break
        if steps_done % sample_every == 0:
            row = out[steps_done // sample_every - 1]
            for i in range(n):
                row[i, 0:3] = x[i]
                row[i, 3:6] = v[i]
        if lost >= 0:
            break
    pos[:, :] = x
    vel[:, :] = v
    return steps_done, lost
