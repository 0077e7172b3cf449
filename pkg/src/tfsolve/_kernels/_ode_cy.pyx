# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ode_python.integrate.

Same Dormand-Prince tableau, same operation order, same event handling.
Compiled with -ffp-contract=off so results are bit-identical to the
Python fallback.
"""
from libc.math cimport sqrt, pow, fabs

import numpy as np

REACHED_END = 0
HIT_ZERO = 1
TURNED_UP = 2
DECAYED = 3
STEP_UNDERFLOW = 4

cdef double _A21 = 1.0 / 5.0
cdef double _A31 = 3.0 / 40.0, _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0, _A42 = -56.0 / 15.0, _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0, _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0, _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0, _A62 = -355.0 / 33.0
cdef double _A63 = 46732.0 / 5247.0, _A64 = 49.0 / 176.0
cdef double _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0, _B3 = 500.0 / 1113.0, _B4 = 125.0 / 192.0
cdef double _B5 = -2187.0 / 6784.0, _B6 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0, _E3 = -71.0 / 16695.0, _E4 = 71.0 / 1920.0
cdef double _E5 = -17253.0 / 339200.0, _E6 = 22.0 / 525.0, _E7 = -1.0 / 40.0
cdef double _C2 = 1.0 / 5.0, _C3 = 3.0 / 10.0, _C4 = 4.0 / 5.0, _C5 = 8.0 / 9.0


cdef inline double _f2(double x, double y) nogil:
    if y > 0.0:
        return y * sqrt(y) / sqrt(x)
    return 0.0


cdef inline double _hermite(double s, double h, double ya, double da,
                            double yb, double db) nogil:
    cdef double s2 = s * s
    cdef double s3 = s2 * s
    return ((2.0 * s3 - 3.0 * s2 + 1.0) * ya + (s3 - 2.0 * s2 + s) * h * da
            + (-2.0 * s3 + 3.0 * s2) * yb + (s3 - s2) * h * db)


cdef inline double _hermite_deriv(double s, double h, double ya, double da,
                                  double yb, double db) nogil:
    cdef double s2 = s * s
    return ((6.0 * s2 - 6.0 * s) * ya / h + (3.0 * s2 - 4.0 * s + 1.0) * da
            + (-6.0 * s2 + 6.0 * s) * yb / h + (3.0 * s2 - 2.0 * s) * db)


def integrate(double x0, double y0, double yp0, double x1, double rtol,
              double atol, double h0, double hmax, double y_small=0.0,
              bint stop_on_zero=False, bint stop_on_turn=False,
              bint record=False):
    """See ode_python.integrate; identical contract and results."""
    cdef double direction = 1.0 if x1 >= x0 else -1.0
    cdef double x = x0, y = y0, yp = yp0
    cdef double h = fabs(h0) * direction
    cdef double hmn
    cdef double k1y, k1p, k2y, k2p, k3y, k3p, k4y, k4p, k5y, k5p, k6y, k6p
    cdef double k7y, k7p, ay, ap, ynew, ypnew, erry, errp, sy, sp, ey, ep
    cdef double err, fac, xa, ya_, da, yprev, ypprev, lo, hi, mid, s, xr, ypr
    cdef long nstep = 0, cap = 0
    cdef long i

    hmax = fabs(hmax)
    hmn = fabs(x1 - x0) * 1e-15 + 1e-300

    cdef list xs = None, ys = None, yps = None
    if record:
        xs = [x]
        ys = [y]
        yps = [yp]

    k1y = yp
    k1p = _f2(x, y)
    while (x1 - x) * direction > 0.0:
        nstep += 1
        if nstep > 10000000:
            return STEP_UNDERFLOW, x, y, yp, xs, ys, yps
        if fabs(h) > hmax:
            h = hmax * direction
        if (x + h - x1) * direction > 0.0:
            h = x1 - x

        ay = y + h * (_A21 * k1y)
        ap = yp + h * (_A21 * k1p)
        k2y = ap
        k2p = _f2(x + _C2 * h, ay)

        ay = y + h * (_A31 * k1y + _A32 * k2y)
        ap = yp + h * (_A31 * k1p + _A32 * k2p)
        k3y = ap
        k3p = _f2(x + _C3 * h, ay)

        ay = y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y)
        ap = yp + h * (_A41 * k1p + _A42 * k2p + _A43 * k3p)
        k4y = ap
        k4p = _f2(x + _C4 * h, ay)

        ay = y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y)
        ap = yp + h * (_A51 * k1p + _A52 * k2p + _A53 * k3p + _A54 * k4p)
        k5y = ap
        k5p = _f2(x + _C5 * h, ay)

        ay = y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y
                      + _A65 * k5y)
        ap = yp + h * (_A61 * k1p + _A62 * k2p + _A63 * k3p + _A64 * k4p
                       + _A65 * k5p)
        k6y = ap
        k6p = _f2(x + h, ay)

        ynew = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y
                        + _B6 * k6y)
        ypnew = yp + h * (_B1 * k1p + _B3 * k3p + _B4 * k4p + _B5 * k5p
                          + _B6 * k6p)
        k7y = ypnew
        k7p = _f2(x + h, ynew)

        erry = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y
                    + _E6 * k6y + _E7 * k7y)
        errp = h * (_E1 * k1p + _E3 * k3p + _E4 * k4p + _E5 * k5p
                    + _E6 * k6p + _E7 * k7p)
        sy = atol + rtol * (fabs(y) if fabs(y) > fabs(ynew) else fabs(ynew))
        sp = atol + rtol * (fabs(yp) if fabs(yp) > fabs(ypnew) else fabs(ypnew))
        ey = erry / sy
        ep = errp / sp
        err = sqrt(0.5 * (ey * ey + ep * ep))

        if err <= 1.0:
            xa = x
            ya_ = y
            da = yp
            x = x + h
            yprev = y
            ypprev = yp
            y = ynew
            yp = ypnew
            k1y = k7y
            k1p = k7p

            if stop_on_zero and y <= 0.0 < yprev:
                lo = 0.0
                hi = 1.0
                for i in range(60):
                    mid = 0.5 * (lo + hi)
                    if _hermite(mid, h, ya_, da, y, yp) > 0.0:
                        lo = mid
                    else:
                        hi = mid
                s = 0.5 * (lo + hi)
                xr = xa + s * h
                ypr = _hermite_deriv(s, h, ya_, da, y, yp)
                if record:
                    xs.append(xr)
                    ys.append(0.0)
                    yps.append(ypr)
                return HIT_ZERO, xr, 0.0, ypr, xs, ys, yps
            if record:
                xs.append(x)
                ys.append(y)
                yps.append(yp)
            if stop_on_turn and yp >= 0.0 and y > 0.0:
                return TURNED_UP, x, y, yp, xs, ys, yps
            if y_small > 0.0 and 0.0 < y < y_small and yp < 0.0:
                return DECAYED, x, y, yp, xs, ys, yps
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                if fac < 0.2:
                    fac = 0.2
                elif fac > 5.0:
                    fac = 5.0
        else:
            fac = 0.9 * pow(err, -0.2)
            if fac < 0.2:
                fac = 0.2
        h *= fac
        if fabs(h) < hmn:
            return STEP_UNDERFLOW, x, y, yp, xs, ys, yps
    return REACHED_END, x, y, yp, xs, ys, yps
