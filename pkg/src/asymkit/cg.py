"""Exact Clebsch-Gordan coefficients and spin operators.

Spins are passed as doubled integers (two_j = 2j) so half-integer arithmetic
stays exact.  Coefficients follow the Condon-Shortley phase convention and
are computed from the Racah factorial formula with exact rationals before the
final square root.  Basis ordering inside a spin-j block is m = +j ... -j
(descending), so the spin-1/2 block reproduces the computational qubit basis
with Jz = diag(1/2, -1/2).
"""

from fractions import Fraction
from math import factorial, sqrt

import numpy as np


def _fact2(two_x):
    """(two_x/2)! for an even nonnegative doubled integer."""
    if two_x < 0 or two_x % 2:
        raise ValueError(f"factorial argument {two_x}/2 invalid")
    return factorial(two_x // 2)


def clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_j, two_m):
    """<j1 m1; j2 m2 | J M> with Condon-Shortley phases."""
    if two_m1 + two_m2 != two_m:
        return 0.0
    if abs(two_m1) > two_j1 or abs(two_m2) > two_j2 or abs(two_m) > two_j:
        return 0.0
    if (two_j1 + two_m1) % 2 or (two_j2 + two_m2) % 2 or (two_j + two_m) % 2:
        return 0.0
    if two_j < abs(two_j1 - two_j2) or two_j > two_j1 + two_j2:
        return 0.0
    if (two_j1 + two_j2 + two_j) % 2:
        return 0.0

    pref = Fraction(two_j + 1)
    pref *= _fact2(two_j + two_j1 - two_j2)
    pref *= _fact2(two_j - two_j1 + two_j2)
    pref *= _fact2(two_j1 + two_j2 - two_j)
    pref /= _fact2(two_j1 + two_j2 + two_j + 2)
    pref *= _fact2(two_j + two_m) * _fact2(two_j - two_m)
    pref *= _fact2(two_j1 - two_m1) * _fact2(two_j1 + two_m1)
    pref *= _fact2(two_j2 - two_m2) * _fact2(two_j2 + two_m2)

    k_min = max(0, (two_j1 + two_m2 - two_j) // 2, (two_j2 - two_m1 - two_j) // 2)
    k_max = min((two_j1 + two_j2 - two_j) // 2,
                (two_j1 - two_m1) // 2,
                (two_j2 + two_m2) // 2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        den = (factorial(k)
               * _fact2(two_j1 + two_j2 - two_j - 2 * k)
               * _fact2(two_j1 - two_m1 - 2 * k)
               * _fact2(two_j2 + two_m2 - 2 * k)
               * _fact2(two_j - two_j1 - two_m2 + 2 * k)
               * _fact2(two_j - two_j2 + two_m1 + 2 * k))
        total += Fraction(-1 if k % 2 else 1, den)
    return sqrt(float(pref)) * float(total)


def spin_matrices(two_j):
    """(Jx, Jy, Jz) in the |j, m> basis with m descending from +j."""
    dim = two_j + 1
    m_vals = np.array([(two_j - 2 * i) / 2.0 for i in range(dim)])
    jz = np.diag(m_vals).astype(complex)
    jp = np.zeros((dim, dim), dtype=complex)
    j = two_j / 2.0
    for i in range(1, dim):
        m = m_vals[i]
        jp[i - 1, i] = sqrt(j * (j + 1) - m * (m + 1))
    jm = jp.conj().T
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    return jx, jy, jz


def rotation_unitary(two_j, axis, angle):
    """exp(-i * angle * n.J) for a unit axis n on the spin-j block."""
    jx, jy, jz = spin_matrices(two_j)
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    h = n[0] * jx + n[1] * jy + n[2] * jz
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


# Rotations of the octahedral group (24 elements) as (axis, angle) pairs; a
# fixed sampling grid dense enough to catch sign and transpose errors in
# covariance checks without quadrature.
_OCTAHEDRAL = []
_OCTAHEDRAL.append(((0, 0, 1), 0.0))
for _ax in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
    for _ang in (np.pi / 2, np.pi, 3 * np.pi / 2):
        _OCTAHEDRAL.append((_ax, _ang))
for _ax in [(1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1)]:
    for _ang in (2 * np.pi / 3, 4 * np.pi / 3):
        _OCTAHEDRAL.append((_ax, _ang))
for _ax in [(1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1)]:
    _OCTAHEDRAL.append((_ax, np.pi))


def su2_sample_rotations():
    """The fixed 24-element (axis, angle) grid used for covariance tests."""
    return list(_OCTAHEDRAL)
