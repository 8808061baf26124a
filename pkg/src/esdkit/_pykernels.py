"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built, or when ``ESDKIT_PURE_PYTHON=1``.
"""
import math

import numpy as np

# Dormand-Prince 5(4) tableau.
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)

SAFE, FACL, FACR, BETA = 0.9, 0.2, 10.0, 0.04
# Error per unit step: err/h scales like h**4.
EXPO1 = 0.25 - BETA * 0.75


def _rhs(t, y, al, be, l2, J, D):
    e = complex(math.cos(D * t), math.sin(D * t))
    ec = e.conjugate()
    s = y[1] + y[2]
    mid = al * ec * y[0] + be * e * y[3]
    return (-1j * (al * e * s + J * y[0]),
            -1j * (mid + l2 * y[2] - J * y[1]),
            -1j * (mid + l2 * y[1] - J * y[2]),
            -1j * (be * ec * s + J * y[3]))


def dp5_block(al, be, l2, J, D, y0, grid, rtol, atol, max_step, max_steps):
    grid = np.asarray(grid, dtype=float)
    out = np.zeros((len(grid), 4), dtype=complex)
    y = [complex(v) for v in y0]
    t = 0.0
    hprop = min(max_step, 1e-3)
    facold = 1e-4
    steps = 0
    k1 = _rhs(t, y, al, be, l2, J, D)
    for g, target in enumerate(grid):
        target = float(target)
        while t < target:
            h = min(hprop, max_step)
            clipped = False
            if t + h >= target or target - (t + h) < 1e-12 * max(1.0, target):
                h = target - t
                clipped = True
            if h <= 1e-14 * max(1.0, abs(t)):
                return out, 2, steps
            steps += 1
            if steps > max_steps:
                return out, 1, steps
            yt = [y[i] + h * A21 * k1[i] for i in range(4)]
            k2 = _rhs(t + C2 * h, yt, al, be, l2, J, D)
            yt = [y[i] + h * (A31 * k1[i] + A32 * k2[i]) for i in range(4)]
            k3 = _rhs(t + C3 * h, yt, al, be, l2, J, D)
            yt = [y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in range(4)]
            k4 = _rhs(t + C4 * h, yt, al, be, l2, J, D)
            yt = [y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
                  for i in range(4)]
            k5 = _rhs(t + C5 * h, yt, al, be, l2, J, D)
            yt = [y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                              + A65 * k5[i]) for i in range(4)]
            k6 = _rhs(t + h, yt, al, be, l2, J, D)
            yn = [y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
                  for i in range(4)]
            k7 = _rhs(t + h, yn, al, be, l2, J, D)
            err = 0.0
            for i in range(4):
                sk = h * (atol + rtol * max(abs(y[i]), abs(yn[i])))
                d = abs(h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                             + E6 * k6[i] + E7 * k7[i])) / sk
                err += d * d
            err = math.sqrt(err / 4.0)
            fac11 = err ** EXPO1
            if err <= 1.0:
                fac = fac11 / facold ** BETA
                fac = max(1.0 / FACR, min(1.0 / FACL, fac / SAFE))
                hnew = h / fac
                facold = max(err, 1e-4)
                t = target if clipped else t + h
                y = yn
                k1 = k7
                hprop = max(hnew, hprop) if clipped else hnew
            else:
                hprop = h / min(1.0 / FACL, fac11 / SAFE)
        out[g] = y
    return out, 0, steps


def _phi1(z):
    """``(exp(z) - 1) / z`` evaluated without cancellation."""
    w = 0.5 * z
    small = np.abs(w) < 1e-8
    safe = np.where(small, 1.0, w)
    return np.exp(w) * np.where(small, 1.0 + w * w / 6.0, np.sinh(safe) / safe)


def analytic_grid(m, delta, init, alpha, beta, l2, J, D, tau):
    m = np.asarray(m, dtype=complex)
    delta = np.asarray(delta, dtype=complex)
    init = np.asarray(init, dtype=complex)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    t = np.asarray(tau, dtype=float)[:, None, None]  # (T, 1, 1)
    zt_a = (m + 1j * (D + J)) * t
    zt_d = (m + 1j * (J - D)) * t
    sa = np.sum(delta * _phi1(zt_a), axis=2)
    sd = np.sum(delta * _phi1(zt_d), axis=2)
    s = np.sum(delta * np.exp(m * t), axis=2)
    t = t[:, :, 0]
    eJ = np.exp(-1j * J * t)
    dif = (init[:, 1] - init[:, 2]) * np.exp(1j * (l2 + J) * t)
    out = np.empty(s.shape + (4,), dtype=complex)
    out[..., 0] = eJ * (init[:, 0] - 1j * alpha * t * sa)
    out[..., 1] = 0.5 * (s + dif)
    out[..., 2] = 0.5 * (s - dif)
    out[..., 3] = eJ * (init[:, 3] - 1j * beta * t * sd)
    return out
