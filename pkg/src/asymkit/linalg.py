"""Dense complex-Hermitian matrix substrate.

Everything downstream (twirls, tensor-operator bases, SDPs) works with plain
``numpy`` complex arrays; this module collects the shared primitives:
eigendecomposition with validation, partial traces, matrix powers restricted
to the support, norms/distances, and the generalized Gell-Mann coordinate
system used for reference-frame states.
"""

import numpy as np

HERM_TOL = 1e-10
DENSITY_HERM_TOL = 1e-12
DENSITY_EIG_TOL = 1e-10
DENSITY_TRACE_TOL = 1e-10
RANK_TOL = 1e-9


def kron(a, b):
    """Kronecker product (first factor indexes the slow/outer subsystem)."""
    return np.kron(np.asarray(a), np.asarray(b))


def dagger(m):
    return np.conj(np.asarray(m)).T


def vec(m):
    """Column-stacking vectorization."""
    return np.asarray(m).flatten(order="F")


def unvec(v, rows, cols=None):
    if cols is None:
        cols = rows
    return np.asarray(v).reshape((rows, cols), order="F")


def herm_part(m):
    m = np.asarray(m)
    return 0.5 * (m + dagger(m))


def partial_trace(m, dims, keep):
    """Trace out one factor of a bipartite operator on ``H_R (x) H_A``.

    dims = (d_R, d_A); keep is "R" or "A".
    """
    d_r, d_a = dims
    m = np.asarray(m)
    if m.shape != (d_r * d_a, d_r * d_a):
        raise ValueError(f"matrix shape {m.shape} incompatible with dims {dims}")
    t = m.reshape(d_r, d_a, d_r, d_a)
    if keep == "R":
        return np.einsum("ikjk->ij", t)
    if keep == "A":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"keep must be 'R' or 'A', got {keep!r}")


def eig_hermitian(m):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Returns (w, v) with m = v @ diag(w) @ v^dagger.  Raises on inputs that
    are not Hermitian within HERM_TOL (relative to the largest entry).
    """
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, np.abs(m).max()) if m.size else 1.0
    defect = np.abs(m - dagger(m)).max() if m.size else 0.0
    if defect > HERM_TOL * scale:
        raise ValueError(f"matrix not Hermitian: defect {defect:.3e}")
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    return w, v


def power_on_support(m, exponent, rank_tol=RANK_TOL):
    """Raise a PSD matrix to a real power on its support.

    Eigenvalues below ``rank_tol`` (relative to the largest eigenvalue) are
    mapped to zero, giving pseudo-inverse semantics for negative exponents.
    A negative eigenvalue below the tolerance band raises.
    """
    w, v = eig_hermitian(m)
    scale = max(w[-1], 0.0) if w.size else 0.0
    cut = rank_tol * max(scale, 1e-300)
    if w.size and w[0] < -cut:
        raise ValueError(f"matrix not PSD: eigenvalue {w[0]:.3e}")
    powered = np.zeros_like(w)
    on = w > cut
    powered[on] = w[on] ** exponent
    return (v * powered) @ dagger(v)


def support_projector(m, rank_tol=RANK_TOL):
    """Orthogonal projector onto the support of a PSD matrix."""
    w, v = eig_hermitian(m)
    cut = rank_tol * max(w[-1] if w.size else 0.0, 1e-300)
    on = w > cut
    return v[:, on] @ dagger(v[:, on])


def trace_norm(m):
    """Schatten-1 norm; uses eigenvalues for Hermitian inputs, SVD otherwise."""
    m = np.asarray(m, dtype=complex)
    if np.abs(m - dagger(m)).max() <= HERM_TOL * max(1.0, np.abs(m).max()):
        w = np.linalg.eigvalsh(herm_part(m))
        return float(np.abs(w).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def op_norm(m):
    """Spectral norm (largest singular value)."""
    m = np.asarray(m, dtype=complex)
    if np.abs(m - dagger(m)).max() <= HERM_TOL * max(1.0, np.abs(m).max()):
        w = np.linalg.eigvalsh(herm_part(m))
        return float(np.abs(w).max()) if w.size else 0.0
    return float(np.linalg.svd(m, compute_uv=False).max())


def frob_norm(m):
    return float(np.linalg.norm(np.asarray(m)))


def hs_inner(a, b):
    """Hilbert-Schmidt inner product tr(a^dagger b)."""
    return complex(np.vdot(np.asarray(a).ravel(), np.asarray(b).ravel()))


def generalized_trace_distance(a, b):
    """0.5*||a-b||_1 + 0.5*|tr a - tr b| for Hermitian a, b."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * trace_norm(a - b) + 0.5 * abs(complex(np.trace(a) - np.trace(b)).real)


def check_density_matrix(rho, name="state", herm_tol=DENSITY_HERM_TOL,
                         eig_tol=DENSITY_EIG_TOL, trace_tol=DENSITY_TRACE_TOL):
    """Validate a density matrix, raising with the violated invariant.

    Returns the (Hermitian-symmetrized) input on success.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name}: not a square matrix, shape {rho.shape}")
    defect = np.abs(rho - dagger(rho)).max()
    if defect > herm_tol * max(1.0, np.abs(rho).max()):
        raise ValueError(f"{name}: not Hermitian, defect {defect:.3e}")
    tr = complex(np.trace(rho)).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"{name}: trace {tr!r} differs from 1")
    w = np.linalg.eigvalsh(herm_part(rho))
    if w[0] < -eig_tol:
        raise ValueError(f"{name}: negative eigenvalue {w[0]:.3e}")
    return herm_part(rho)


def is_density_matrix(rho, **kw):
    try:
        check_density_matrix(rho, **kw)
        return True
    except ValueError:
        return False


def gell_mann_basis(d):
    """Orthogonal Hermitian basis {X_k} of traceless d x d matrices.

    Generalized Gell-Mann matrices rescaled so every element has spectral
    norm 1/d, ordered as (symmetric off-diagonal, antisymmetric
    off-diagonal, diagonal), each family in ascending index order.  For
    d = 2 this is exactly (sigma_x/2, sigma_y/2, sigma_z/2), so the
    coordinates of a qubit state are its Bloch vector.
    """
    basis = []
    for i in range(d):
        for j in range(i + 1, d):
            x = np.zeros((d, d), dtype=complex)
            x[i, j] = x[j, i] = 1.0 / d
            basis.append(x)
    for i in range(d):
        for j in range(i + 1, d):
            x = np.zeros((d, d), dtype=complex)
            x[i, j] = -1j / d
            x[j, i] = 1j / d
            basis.append(x)
    for l in range(1, d):
        x = np.zeros((d, d), dtype=complex)
        x[np.arange(l), np.arange(l)] = 1.0
        x[l, l] = -float(l)
        basis.append(x / (d * l))  # spectral norm of diag(1,..,1,-l) is l
    return basis


def bloch_from_state(rho, basis=None):
    """Coordinates x with rho = I/d + sum_k x_k X_k (real, length d^2-1)."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if basis is None:
        basis = gell_mann_basis(d)
    dev = rho - np.eye(d) / d
    return np.array([hs_inner(x, dev).real / hs_inner(x, x).real for x in basis])


def state_from_bloch(x, d, basis=None, check=True, eig_tol=DENSITY_EIG_TOL):
    """Reconstruct I/d + sum_k x_k X_k, flagging coordinates outside the state body."""
    x = np.asarray(x, dtype=float)
    if x.shape != (d * d - 1,):
        raise ValueError(f"expected {d * d - 1} coordinates, got shape {x.shape}")
    if basis is None:
        basis = gell_mann_basis(d)
    rho = np.eye(d, dtype=complex) / d
    for xk, bk in zip(x, basis):
        rho = rho + xk * bk
    if check:
        w = np.linalg.eigvalsh(herm_part(rho))
        if w[0] < -eig_tol:
            raise ValueError(f"coordinates outside the state body: eigenvalue {w[0]:.3e}")
    return rho


def random_density_matrix(d, rng, rank=None):
    """Ginibre-induced random state (full rank unless ``rank`` is given)."""
    r = rank if rank is not None else d
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(d, rng, traceless=False):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = herm_part(g)
    if traceless:
        h = h - np.eye(d) * (np.trace(h).real / d)
    return h


def random_pure_state(d, rng):
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())
