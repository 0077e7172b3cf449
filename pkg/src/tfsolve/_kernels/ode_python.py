"""Pure-Python integrator for y'' = y^{3/2} / sqrt(x).

Dormand-Prince 5(4) with FSAL, adaptive steps, and the event handling the
shooting solver needs (zero crossing of y, upward turn of y', decay below a
threshold).  The compiled twin in ``_ode_cy.pyx`` implements the same
arithmetic in the same order; with ``-ffp-contract=off`` the two produce
bit-identical trajectories.
"""
import math

# status codes (shared with the compiled kernel)
REACHED_END = 0
HIT_ZERO = 1
TURNED_UP = 2
DECAYED = 3
STEP_UNDERFLOW = 4

# Dormand-Prince coefficients
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0,
                                71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0


def _f2(x, y):
    """Second-derivative right-hand side, clamped for transiently negative y."""
    if y > 0.0:
        return y * math.sqrt(y) / math.sqrt(x)
    return 0.0


def _hermite(s, h, ya, da, yb, db):
    """Cubic Hermite value at fraction s of a step of width h."""
    s2 = s * s
    s3 = s2 * s
    return ((2.0 * s3 - 3.0 * s2 + 1.0) * ya + (s3 - 2.0 * s2 + s) * h * da
            + (-2.0 * s3 + 3.0 * s2) * yb + (s3 - s2) * h * db)


def _hermite_deriv(s, h, ya, da, yb, db):
    s2 = s * s
    return ((6.0 * s2 - 6.0 * s) * ya / h + (3.0 * s2 - 4.0 * s + 1.0) * da
            + (-6.0 * s2 + 6.0 * s) * yb / h + (3.0 * s2 - 2.0 * s) * db)


def integrate(x0, y0, yp0, x1, rtol, atol, h0, hmax,
              y_small=0.0, stop_on_zero=False, stop_on_turn=False,
              record=False):
    """Integrate from (x0, y0, yp0) toward x1 (either direction).

    Returns ``(status, x, y, yp, xs, ys, yps)``; the trajectory lists are
    ``None`` unless ``record``.  On ``HIT_ZERO`` the endpoint is the zero
    crossing, located by bisection on the step's Hermite interpolant.
    """
    direction = 1.0 if x1 >= x0 else -1.0
    x, y, yp = x0, y0, yp0
    h = abs(h0) * direction
    hmax = abs(hmax)
    hmin = abs(x1 - x0) * 1e-15 + 1e-300

    xs = [x] if record else None
    ys = [y] if record else None
    yps = [yp] if record else None

    k1y = yp
    k1p = _f2(x, y)
    nstep = 0
    while (x1 - x) * direction > 0.0:
        nstep += 1
        if nstep > 10_000_000:
            return STEP_UNDERFLOW, x, y, yp, xs, ys, yps
        if abs(h) > hmax:
            h = hmax * direction
        if (x + h - x1) * direction > 0.0:
            h = x1 - x

        # stages (y and y' advanced together)
        ay = y + h * (_A21 * k1y)
        ap = yp + h * (_A21 * k1p)
        k2y, k2p = ap, _f2(x + _C2 * h, ay)

        ay = y + h * (_A31 * k1y + _A32 * k2y)
        ap = yp + h * (_A31 * k1p + _A32 * k2p)
        k3y, k3p = ap, _f2(x + _C3 * h, ay)

        ay = y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y)
        ap = yp + h * (_A41 * k1p + _A42 * k2p + _A43 * k3p)
        k4y, k4p = ap, _f2(x + _C4 * h, ay)

        ay = y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y)
        ap = yp + h * (_A51 * k1p + _A52 * k2p + _A53 * k3p + _A54 * k4p)
        k5y, k5p = ap, _f2(x + _C5 * h, ay)

        ay = y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y
                      + _A65 * k5y)
        ap = yp + h * (_A61 * k1p + _A62 * k2p + _A63 * k3p + _A64 * k4p
                       + _A65 * k5p)
        k6y, k6p = ap, _f2(x + h, ay)

        ynew = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y
                        + _B6 * k6y)
        ypnew = yp + h * (_B1 * k1p + _B3 * k3p + _B4 * k4p + _B5 * k5p
                          + _B6 * k6p)
        k7y, k7p = ypnew, _f2(x + h, ynew)

        erry = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y
                    + _E6 * k6y + _E7 * k7y)
        errp = h * (_E1 * k1p + _E3 * k3p + _E4 * k4p + _E5 * k5p
                    + _E6 * k6p + _E7 * k7p)
        sy = atol + rtol * max(abs(y), abs(ynew))
        sp = atol + rtol * max(abs(yp), abs(ypnew))
        ey = erry / sy
        ep = errp / sp
        err = math.sqrt(0.5 * (ey * ey + ep * ep))

        if err <= 1.0:
            xa, ya_, da = x, y, yp
            x = x + h
            yprev, ypprev = y, yp
            y, yp = ynew, ypnew
            k1y, k1p = k7y, k7p  # FSAL

            if stop_on_zero and y <= 0.0 < yprev:
                # refine the crossing on the cubic Hermite interpolant
                lo, hi = 0.0, 1.0
                for _ in range(60):
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
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
        if abs(h) < hmin:
            return STEP_UNDERFLOW, x, y, yp, xs, ys, yps
    return REACHED_END, x, y, yp, xs, ys, yps
