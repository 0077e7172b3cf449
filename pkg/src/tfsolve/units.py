"""Units convention and the constants it fixes.

Everything in the suite uses the convention hbar^2/2m = 1 and e = 1, so the
energy functional reads

    E[rho] = (3/5) GAMMA * int rho^{5/3}  -  int V rho
             + (1/2) double-int rho(x) rho(y)/|x-y|  +  U

with GAMMA = (3 pi^2)^(2/3) exactly as printed, and no unit conversion
anywhere.  Lengths and energies below are in these units; the Bohr radius
equals 2 in them.
"""
import numpy as np

#: kinetic coefficient gamma = (3 pi^2)^(2/3)
GAMMA = (3.0 * np.pi**2) ** (2.0 / 3.0)

#: atomic length coefficient: the dimensionless reduction Phi = (Z/r) y(r/a)
#: of the neutral equation forces a = LENGTH_COEF * Z^(-1/3) with
#: LENGTH_COEF = gamma (4 pi)^(-2/3) = (3 pi / 4)^(2/3).
LENGTH_COEF = (3.0 * np.pi / 4.0) ** (2.0 / 3.0)

#: universal large-radius limit of r^6 rho(r) for a neutral atom:
#: gamma^3 (3/pi)^3 = 9 pi^4 * 27 / pi^3 = 243 pi.
TAIL_LIMIT = 243.0 * np.pi

#: decay exponent of admissible perturbations about the exact far-field
#: profile y = 144/x^3: linearising y'' = y^{3/2}/sqrt(x) about it gives
#: v ~ x^m with m(m-1) = 18, and the admissible branch has
#: m = (1 - sqrt(73))/2, i.e. a relative decay x^(-TAIL_EXPONENT).
TAIL_EXPONENT = (np.sqrt(73.0) - 7.0) / 2.0


def tf_length(Z: float) -> float:
    """Length scale a(Z) of the atomic problem, r = a(Z) * x."""
    return LENGTH_COEF * Z ** (-1.0 / 3.0)
