"""Closed forms for qubit systems under U(1) and SU(2) symmetry.

The U(1) value function is the three-region piecewise expression for the
min-entropy optimum against a qubit reference; the SU(2) one is piecewise
linear in the overlap of the (y-flipped) reference Bloch vector with the
input's.  Both are cross-validated against the SDP in the test suite.
"""

from dataclasses import dataclass

import numpy as np

from .channels import CovariantChannel
from .linalg import vec

_TINY = 1e-300


@dataclass(frozen=True)
class QubitStateParams:
    """Energy-basis qubit state [[p, c], [conj(c), 1-p]]."""

    p: float
    c: complex

    def __post_init__(self):
        if not -1e-12 <= self.p <= 1 + 1e-12:
            raise ValueError(f"population {self.p} outside [0, 1]")
        if abs(self.c) ** 2 > self.p * (1 - self.p) + 1e-12:
            raise ValueError(f"coherence {self.c} violates positivity")

    def matrix(self):
        return np.array([[self.p, self.c], [np.conj(self.c), 1 - self.p]])


def qubit_params(rho):
    rho = np.asarray(rho, dtype=complex)
    return QubitStateParams(p=float(rho[0, 0].real), c=complex(rho[0, 1]))


def bloch3(rho):
    """(x, y, z) Bloch vector of a qubit state."""
    rho = np.asarray(rho, dtype=complex)
    return np.array([2 * rho[0, 1].real, -2 * rho[0, 1].imag,
                     (rho[0, 0] - rho[1, 1]).real])


def state_from_bloch3(v):
    x, y, z = v
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def phi_u1_qubit(tau, x, y, z):
    """Min-entropy optimum 2^(-H) for a qubit reference at Bloch (x, y, z).

    ``tau`` is a QubitStateParams for the input state; broadcasting over
    array-valued coordinates is supported.  Region dispatch uses the signed
    ratio sqrt(x^2+y^2)/(2z): the inner formulas apply near the poles, the
    linear one in the equatorial band (including z = 0).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    p = float(tau.p)
    ac = abs(tau.c)
    r2 = x * x + y * y
    r = np.sqrt(r2)
    top = (z > 0) & (r * ac <= 2 * z * (1 - p))
    bot = (z < 0) & (r * ac <= -2 * z * p)
    z_safe = np.where(z == 0, 1.0, z)
    coef_top = (ac * ac) / max(1 - p, _TINY) if ac > 0 else 0.0
    coef_bot = (ac * ac) / max(p, _TINY) if ac > 0 else 0.0
    val_top = coef_top * r2 / (4 * z_safe) + z / 2 + 0.5
    val_bot = -coef_bot * r2 / (4 * z_safe) - z / 2 + 0.5
    val_mid = (p - 0.5) * z + ac * r + 0.5
    out = np.where(top, val_top, np.where(bot, val_bot, val_mid))
    return float(out) if out.ndim == 0 else out


def phi_su2_qubit(r_tau, x_eta):
    """Min-entropy optimum for SU(2)-covariant qubit maps.

    r_tau and x_eta are Bloch vectors of the input and reference; with
    xbar = (x, -y, z) the value is (1 + xbar.r)/2 above the plane
    xbar.r = 0 and (1 - xbar.r/3)/2 below it.
    """
    r_tau = np.asarray(r_tau, dtype=float)
    x_eta = np.asarray(x_eta, dtype=float)
    xbar = x_eta * np.array([1.0, -1.0, 1.0])
    s = np.asarray(xbar @ r_tau)
    out = np.where(s >= 0, 0.5 * (1 + s), 0.5 * (1 - s / 3))
    return float(out) if out.ndim == 0 else out


def u1_qubit_feasible_margin(rho, sigma):
    """Signed margin of the two-population/coherence conditions (>= 0: feasible).

    Conditions in cross-multiplied form, finite for boundary populations:
    |c_s|^2 (1-p_r) <= |c_r|^2 (1-p_s)  and  |c_s|^2 p_r <= |c_r|^2 p_s.
    """
    cr2 = abs(rho.c) ** 2
    cs2 = abs(sigma.c) ** 2
    m1 = cr2 * (1 - sigma.p) - cs2 * (1 - rho.p)
    m2 = cr2 * sigma.p - cs2 * rho.p
    return min(m1, m2)


def u1_qubit_feasible(rho, sigma):
    """Exact reachability of sigma from rho under time-covariant qubit maps."""
    return u1_qubit_feasible_margin(rho, sigma) >= 0


def su2_qubit_channel(lam):
    """Bloch-vector scaling channel rho -> (I + lam r.sigma)/2.

    Completely positive exactly for lam in [-1/3, 1]; every member commutes
    with the full unitary group on the qubit.
    """
    if not -1 / 3 - 1e-12 <= lam <= 1 + 1e-12:
        raise ValueError(f"scaling {lam} outside [-1/3, 1]")
    eye = np.eye(2, dtype=complex)
    s = lam * np.eye(4, dtype=complex) \
        + (1 - lam) * 0.5 * np.outer(vec(eye), vec(eye).conj())
    return CovariantChannel(superoperator=s, dim_in=2, dim_out=2,
                            provenance="bloch_scaling")
