# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: the Dormand-Prince block integrator and the
closed-form block evaluation over a time grid.

Must stay behaviourally identical to ``_pykernels``.
"""
import numpy as np

from libc.math cimport sqrt, fabs, cos, sin, pow, fmin, fmax


cdef extern from "<complex.h>" nogil:
    double complex cexp(double complex)
    double complex csinh(double complex)
    double cabs(double complex)


# Dormand-Prince 5(4) tableau.
cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40

cdef double SAFE = 0.9, FACL = 0.2, FACR = 10.0, BETA = 0.04
# Error per unit step: err/h scales like h**4.
cdef double EXPO1 = 0.25 - BETA * 0.75


cdef inline void _rhs(double t, double complex* y, double complex* out,
                      double al, double be, double l2, double J, double D) noexcept nogil:
    cdef double complex e = cos(D * t) + 1j * sin(D * t)
    cdef double complex ec = e.conjugate()
    cdef double complex s = y[1] + y[2]
    cdef double complex mid = al * ec * y[0] + be * e * y[3]
    out[0] = -1j * (al * e * s + J * y[0])
    out[1] = -1j * (mid + l2 * y[2] - J * y[1])
    out[2] = -1j * (mid + l2 * y[1] - J * y[2])
    out[3] = -1j * (be * ec * s + J * y[3])


cdef int _dp5(double al, double be, double l2, double J, double D,
              double complex* y, const double* grid, Py_ssize_t ng,
              double complex* out, double rtol, double atol, double max_step,
              long max_steps, long* nsteps) noexcept nogil:
    cdef double complex k1[4], k2[4], k3[4], k4[4], k5[4], k6[4], k7[4]
    cdef double complex yt[4], yn[4]
    cdef double t = 0.0, h, hprop, target, err, sk, fac, fac11, facold = 1e-4, hnew
    cdef double d, ay, an
    cdef Py_ssize_t g, i
    cdef long steps = 0
    cdef bint clipped

    hprop = fmin(max_step, 1e-3)
    _rhs(t, y, k1, al, be, l2, J, D)
    for g in range(ng):
        target = grid[g]
        while t < target:
            h = fmin(hprop, max_step)
            clipped = False
            if t + h >= target or target - (t + h) < 1e-12 * fmax(1.0, target):
                h = target - t
                clipped = True
            if h <= 1e-14 * fmax(1.0, fabs(t)):
                nsteps[0] = steps
                return 2
            steps += 1
            if steps > max_steps:
                nsteps[0] = steps
                return 1
            for i in range(4):
                yt[i] = y[i] + h * A21 * k1[i]
            _rhs(t + C2 * h, yt, k2, al, be, l2, J, D)
            for i in range(4):
                yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
            _rhs(t + C3 * h, yt, k3, al, be, l2, J, D)
            for i in range(4):
                yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            _rhs(t + C4 * h, yt, k4, al, be, l2, J, D)
            for i in range(4):
                yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            _rhs(t + C5 * h, yt, k5, al, be, l2, J, D)
            for i in range(4):
                yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                                    + A65 * k5[i])
            _rhs(t + h, yt, k6, al, be, l2, J, D)
            for i in range(4):
                yn[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i]
                                    + B6 * k6[i])
            _rhs(t + h, yn, k7, al, be, l2, J, D)
            err = 0.0
            for i in range(4):
                ay = cabs(y[i])
                an = cabs(yn[i])
                sk = h * (atol + rtol * fmax(ay, an))
                d = cabs(h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                              + E6 * k6[i] + E7 * k7[i])) / sk
                err += d * d
            err = sqrt(err / 4.0)
            fac11 = pow(err, EXPO1)
            if err <= 1.0:
                fac = fac11 / pow(facold, BETA)
                fac = fmax(1.0 / FACR, fmin(1.0 / FACL, fac / SAFE))
                hnew = h / fac
                facold = fmax(err, 1e-4)
                t = target if clipped else t + h
                for i in range(4):
                    y[i] = yn[i]
                    k1[i] = k7[i]
                hprop = fmax(hnew, hprop) if clipped else hnew
            else:
                hprop = h / fmin(1.0 / FACL, fac11 / SAFE)
        for i in range(4):
            out[4 * g + i] = y[i]
    nsteps[0] = steps
    return 0


def dp5_block(double al, double be, double l2, double J, double D,
              y0, grid, double rtol, double atol, double max_step, long max_steps):
    """Integrate one block from tau=0 and sample it on ``grid``.

    Returns ``(out, status, nsteps)``; status 0 is success, 1 means the step
    budget ran out, 2 means the step size underflowed.
    """
    cdef double complex[::1] y = np.array(y0, dtype=np.complex128)
    cdef const double[::1] gr = np.ascontiguousarray(grid, dtype=np.float64)
    out_arr = np.zeros((gr.shape[0], 4), dtype=np.complex128)
    if gr.shape[0] == 0:
        return out_arr, 0, 0
    cdef double complex[:, ::1] out = out_arr
    cdef long nsteps = 0
    cdef int status
    with nogil:
        status = _dp5(al, be, l2, J, D, &y[0], &gr[0], gr.shape[0], &out[0, 0],
                      rtol, atol, max_step, max_steps, &nsteps)
    return out_arr, status, nsteps


cdef inline double complex _phi1(double complex z) noexcept nogil:
    # (exp(z) - 1) / z without cancellation
    cdef double complex w = 0.5 * z
    if cabs(w) < 1e-8:
        return cexp(w) * (1.0 + w * w / 6.0)
    return cexp(w) * csinh(w) / w


def analytic_grid(m, delta, init, alpha, beta, double l2, double J, double D, tau):
    """Closed-form amplitudes of N blocks at T times, shape ``(T, N, 4)``.

    ``m`` and ``delta`` are ``(N, 3)``; ``init`` is ``(N, 4)`` block data at
    tau=0; ``alpha``/``beta`` are the per-block couplings.
    """
    cdef const double complex[:, ::1] mv = np.ascontiguousarray(m, dtype=np.complex128)
    cdef const double complex[:, ::1] dv = np.ascontiguousarray(delta, dtype=np.complex128)
    cdef const double complex[:, ::1] y0 = np.ascontiguousarray(init, dtype=np.complex128)
    cdef const double[::1] al = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef const double[::1] be = np.ascontiguousarray(beta, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(tau, dtype=np.float64)
    cdef Py_ssize_t nt = tv.shape[0], nb = mv.shape[0], it, ib, j
    out_arr = np.empty((nt, nb, 4), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef double t
    cdef double complex eJ, eLJ, sa, sd, s, dif, zA, zD
    with nogil:
        for it in range(nt):
            t = tv[it]
            eJ = cos(J * t) - 1j * sin(J * t)
            eLJ = cos((l2 + J) * t) + 1j * sin((l2 + J) * t)
            for ib in range(nb):
                sa = 0
                sd = 0
                s = 0
                for j in range(3):
                    zA = mv[ib, j] + 1j * (D + J)
                    zD = mv[ib, j] + 1j * (J - D)
                    sa = sa + dv[ib, j] * _phi1(zA * t)
                    sd = sd + dv[ib, j] * _phi1(zD * t)
                    s = s + dv[ib, j] * cexp(mv[ib, j] * t)
                dif = (y0[ib, 1] - y0[ib, 2]) * eLJ
                out[it, ib, 0] = eJ * (y0[ib, 0] - 1j * al[ib] * t * sa)
                out[it, ib, 1] = 0.5 * (s + dif)
                out[it, ib, 2] = 0.5 * (s - dif)
                out[it, ib, 3] = eJ * (y0[ib, 3] - 1j * be[ib] * t * sd)
    return out_arr
