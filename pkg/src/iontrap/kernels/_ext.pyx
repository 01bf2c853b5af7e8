# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; see ``_reference.py`` for the documented twin."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, exp, M_PI

cnp.import_array()

DEF MAX_EVENTS = 6
MAX_EVENTS_PY = MAX_EVENTS
UNIFORMS_PER_ION = 1 + 2 * MAX_EVENTS


def mathieu_monodromy(a, q, cos_table, double h):
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef double[::1] ct = np.ascontiguousarray(cos_table, dtype=np.float64)
    cdef Py_ssize_t m = av.shape[0]
    trace = np.empty(m, dtype=np.float64)
    det = np.empty(m, dtype=np.float64)
    cdef double[::1] tr = trace
    cdef double[::1] dt_ = det
    cdef Py_ssize_t n_steps = (ct.shape[0] - 1) // 2
    cdef double h2 = 0.5 * h
    cdef double h6 = h / 6.0
    cdef Py_ssize_t idx, s
    cdef double aa, twoq, w0, wm, w1
    cdef double y1, p1, y2, p2
    with nogil:
        for idx in range(m):
            aa = av[idx]
            twoq = 2.0 * qv[idx]
            y1 = 1.0
            p1 = 0.0
            y2 = 0.0
            p2 = 1.0
            for s in range(n_steps):
                w0 = aa - twoq * ct[2 * s]
                wm = aa - twoq * ct[2 * s + 1]
                w1 = aa - twoq * ct[2 * s + 2]
                _rk4(&y1, &p1, w0, wm, w1, h, h2, h6)
                _rk4(&y2, &p2, w0, wm, w1, h, h2, h6)
            tr[idx] = y1 + p2
            dt_[idx] = y1 * p2 - p1 * y2
    return trace, det


cdef inline void _rk4(double* y, double* p, double w0, double wm, double w1,
                      double h, double h2, double h6) noexcept nogil:
    cdef double k1y = p[0]
    cdef double k1p = -(w0 * y[0])
    cdef double k2y = p[0] + h2 * k1p
    cdef double k2p = -(wm * (y[0] + h2 * k1y))
    cdef double k3y = p[0] + h2 * k2p
    cdef double k3p = -(wm * (y[0] + h2 * k2y))
    cdef double k4y = p[0] + h * k3p
    cdef double k4p = -(w1 * (y[0] + h * k3y))
    cdef double yn = y[0] + h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    cdef double pn = p[0] + h6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    y[0] = yn
    p[0] = pn


def verlet_run(double[:, ::1] pos, double[:, ::1] vel, double t0, double dt,
               Py_ssize_t n_steps, Py_ssize_t sample_every, ka, kq, double omega,
               double kc, beams_in, uniforms_in, double loss_r2,
               double[:, :, ::1] out):
    cdef Py_ssize_t n = pos.shape[0]
    cdef double ka0 = ka[0], ka1 = ka[1], ka2 = ka[2]
    cdef double kq0 = kq[0], kq1 = kq[1], kq2 = kq[2]
    cdef double[:, ::1] beams = np.ascontiguousarray(beams_in, dtype=np.float64).reshape(-1, 9)
    cdef Py_ssize_t nb = beams.shape[0]
    cdef bint recoil = uniforms_in is not None
    cdef double[:, :, ::1] uni
    if recoil:
        uni = np.ascontiguousarray(uniforms_in, dtype=np.float64)
    else:
        uni = np.zeros((1, 1, 1), dtype=np.float64)
    cdef double[:, ::1] xh = np.zeros((n, 3), dtype=np.float64)
    cdef double[:, ::1] acc = np.zeros((n, 3), dtype=np.float64)
    cdef double[::1] rate = np.zeros(n, dtype=np.float64)
    cdef double half = 0.5 * dt
    cdef Py_ssize_t lost = -1
    cdef Py_ssize_t steps_done = 0
    cdef Py_ssize_t step, i, j, b, e, k, row
    cdef double th, c, f0, f1, f2, rx, ry, rz, d2, s, kv, z, r, total
    cdef double lam, p, cdf, vr, ct, st, ph
    with nogil:
        for step in range(n_steps):
            th = t0 + (step + 0.5) * dt
            c = cos(omega * th)
            f0 = -ka0 + kq0 * c
            f1 = -ka1 + kq1 * c
            f2 = -ka2 + kq2 * c
            for i in range(n):
                xh[i, 0] = pos[i, 0] + half * vel[i, 0]
                xh[i, 1] = pos[i, 1] + half * vel[i, 1]
                xh[i, 2] = pos[i, 2] + half * vel[i, 2]
                acc[i, 0] = f0 * xh[i, 0]
                acc[i, 1] = f1 * xh[i, 1]
                acc[i, 2] = f2 * xh[i, 2]
            for i in range(n):
                for j in range(i + 1, n):
                    rx = xh[i, 0] - xh[j, 0]
                    ry = xh[i, 1] - xh[j, 1]
                    rz = xh[i, 2] - xh[j, 2]
                    d2 = rx * rx + ry * ry + rz * rz
                    s = kc / (d2 * sqrt(d2))
                    acc[i, 0] += s * rx
                    acc[i, 1] += s * ry
                    acc[i, 2] += s * rz
                    acc[j, 0] -= s * rx
                    acc[j, 1] -= s * ry
                    acc[j, 2] -= s * rz
            for i in range(n):
                total = 0.0
                for b in range(nb):
                    kv = beams[b, 3] * (beams[b, 0] * vel[i, 0] + beams[b, 1] * vel[i, 1]
                                        + beams[b, 2] * vel[i, 2])
                    z = 2.0 * (beams[b, 5] - kv) / beams[b, 4]
                    r = beams[b, 7] / (1.0 + beams[b, 6] + z * z)
                    acc[i, 0] += beams[b, 8] * r * beams[b, 0]
                    acc[i, 1] += beams[b, 8] * r * beams[b, 1]
                    acc[i, 2] += beams[b, 8] * r * beams[b, 2]
                    total += r
                rate[i] = total
            for i in range(n):
                vel[i, 0] = vel[i, 0] + dt * acc[i, 0]
                vel[i, 1] = vel[i, 1] + dt * acc[i, 1]
                vel[i, 2] = vel[i, 2] + dt * acc[i, 2]
                if recoil and nb > 0:
                    lam = rate[i] * dt
                    p = exp(-lam)
                    cdf = p
                    k = 0
                    while uni[step, i, 0] > cdf and k < MAX_EVENTS:
                        k += 1
                        p = p * lam / k
                        cdf += p
                    vr = beams[0, 8]
                    for e in range(k):
                        ct = 2.0 * uni[step, i, 1 + 2 * e] - 1.0
                        st = sqrt(max(0.0, 1.0 - ct * ct))
                        ph = 2.0 * M_PI * uni[step, i, 2 + 2 * e]
                        vel[i, 0] += vr * st * cos(ph)
                        vel[i, 1] += vr * st * sin(ph)
                        vel[i, 2] += vr * ct
                pos[i, 0] = xh[i, 0] + half * vel[i, 0]
                pos[i, 1] = xh[i, 1] + half * vel[i, 1]
                pos[i, 2] = xh[i, 2] + half * vel[i, 2]
            steps_done = step + 1
            for i in range(n):
                if pos[i, 0] * pos[i, 0] + pos[i, 1] * pos[i, 1] + pos[i, 2] * pos[i, 2] > loss_r2:
                    lost = i
                    break
            if steps_done % sample_every == 0:
                row = steps_done // sample_every - 1
                for i in range(n):
                    out[row, i, 0] = pos[i, 0]
                    out[row, i, 1] = pos[i, 1]
                    out[row, i, 2] = pos[i, 2]
                    out[row, i, 3] = vel[i, 0]
                    out[row, i, 4] = vel[i, 1]
                    out[row, i, 5] = vel[i, 2]
            if lost >= 0:
                break
    return steps_done, lost
