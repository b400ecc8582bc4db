"""Small dense complex SDPs in equality-constrained conic form.

Problems are stated over a complex Hermitian variable::

    min/max  <C, X>   s.t.  <A_i, X> = b_i,  X >= 0

and solved by a homogeneous self-dual embedded primal-dual path-following
method with Nesterov-Todd scaling and Mehrotra predictor-corrector steps,
applied to the realified problem.  Everything is deterministic: fixed
initialization, no randomized pivoting, so identical inputs give identical
iterate sequences.

Realification maps a Hermitian H = P + iQ to 0.5 * [[P, -Q], [Q, P]] for the
objective and every constraint matrix while keeping b, which makes the
optimal values of the two problems coincide and keeps the dual multipliers
of the complex problem equal to those of the real one.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import dagger, herm_part

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200
HERM_INPUT_TOL = 1e-12
INFEAS_RATIO = 1e-8
STEP_FRACTION = 0.98


@dataclass(eq=False)
class SdpProblem:
    """min/max <C, X> subject to <A_i, X> = b_i and X PSD."""

    c: np.ndarray
    constraints: list        # [(A_i, b_i)]
    sense: str = "min"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=complex)
        n = self.c.shape[0]
        if self.c.shape != (n, n):
            raise ValueError("objective matrix must be square")
        checked = []
        for k, (a, b) in enumerate(self.constraints):
            a = np.asarray(a, dtype=complex)
            if a.shape != (n, n):
                raise ValueError(f"constraint {k} has shape {a.shape}")
            if np.abs(a - dagger(a)).max() > HERM_INPUT_TOL * max(1.0, np.abs(a).max()):
                raise ValueError(f"constraint {k} is not Hermitian")
            checked.append((a, float(b)))
        if np.abs(self.c - dagger(self.c)).max() > HERM_INPUT_TOL * max(1.0, np.abs(self.c).max()):
            raise ValueError("objective matrix is not Hermitian")
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        self.constraints = checked

    @property
    def dim(self):
        return self.c.shape[0]


@dataclass(eq=False)
class SdpSolution:
    status: str                      # optimal | infeasible | numerical_failure
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    primal_value: float = np.nan
    dual_value: float = np.nan
    gap: float = np.nan
    iterations: int = 0
    mu_history: tuple = ()
    certificate: dict | None = None


def _embed(h):
    """Hermitian complex -> scaled real symmetric embedding."""
    p, q = h.real, h.imag
    top = np.hstack([p, -q])
    bot = np.hstack([q, p])
    return 0.5 * np.vstack([top, bot])


def _unembed(xr, n):
    """Inverse of the embedding after symmetrizing over the embedding's automorphism."""
    j = np.zeros_like(xr)
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    xs = 0.5 * (xr + j @ xr @ j.T)
    return xs[:n, :n] + 1j * xs[n:, :n]


def realify(problem):
    """Equivalent real symmetric SDP (same optimal value, same multipliers)."""
    cons = [(_embed(a), b) for a, b in problem.constraints]
    return SdpProblem(c=_embed(problem.c), constraints=cons, sense=problem.sense)


def _check_constraint_rank(a_stack, m):
    if m == 0:
        return
    rows = a_stack.reshape(m, -1)
    rank = np.linalg.matrix_rank(rows, tol=1e-10 * max(1.0, np.abs(rows).max()))
    if rank < m:
        raise ValueError(f"constraints linearly dependent: rank {rank} < {m}")


def _nt_scaling(x, z):
    wx, vx = np.linalg.eigh(x)
    wx = np.clip(wx, 1e-300, None)
    xh = (vx * np.sqrt(wx)) @ vx.T
    mid = xh @ z @ xh
    wm, vm = np.linalg.eigh(0.5 * (mid + mid.T))
    wm = np.clip(wm, 1e-300, None)
    mid_inv_h = (vm / np.sqrt(wm)) @ vm.T
    return xh @ mid_inv_h @ xh


def _max_step(s, ds):
    """Largest alpha with s + alpha*ds >= 0, via the Cholesky-whitened spectrum."""
    w, v = np.linalg.eigh(s)
    w = np.clip(w, 1e-300, None)
    root = (v / np.sqrt(w)) @ v.T
    m = root @ ds @ root.T
    lam = np.linalg.eigvalsh(0.5 * (m + m.T))[0]
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def solve(problem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Solve to relative duality gap <= tol; see module docstring for the method."""
    flip = problem.sense == "max"
    real = realify(problem)
    c = real.c if not flip else -real.c
    mats = [a for a, _ in real.constraints]
    b = np.array([bi for _, bi in real.constraints])
    m = len(mats)
    nr = c.shape[0]
    n = problem.dim
    a_stack = np.stack(mats) if m else np.zeros((0, nr, nr))
    _check_constraint_rank(a_stack, m)

    def a_of(x):
        return np.einsum("ijk,jk->i", a_stack, x) if m else np.zeros(0)

    def a_adj(y):
        return np.einsum("i,ijk->jk", y, a_stack) if m else np.zeros((nr, nr))

    mu0 = 1.0 + (np.abs(b).max() if m else 0.0) + np.abs(c).max()
    x = mu0 * np.eye(nr)
    z = mu0 * np.eye(nr)
    y = np.zeros(m)
    tau, kappa = 1.0, 1.0
    mu_history = []
    status = "numerical_failure"
    certificate = None
    it = 0

    for it in range(1, max_iter + 1):
        rp = a_of(x) - b * tau
        rd = c * tau - a_adj(y) - z
        rg = (b @ y if m else 0.0) - float(np.sum(c * x)) - kappa
        mu = (float(np.sum(x * z)) + tau * kappa) / (nr + 1)
        mu_history.append(mu)

        # convergence on the tau-scaled iterate
        pobj = float(np.sum(c * x)) / tau
        dobj = (b @ y / tau) if m else 0.0
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        pres = (np.abs(a_of(x) / tau - b).max() if m else 0.0) / (1 + (np.abs(b).max() if m else 0.0))
        dres = np.abs(c - a_adj(y) / tau - z / tau).max() / (1 + np.abs(c).max())
        if relgap <= tol and pres <= tol and dres <= tol:
            status = "optimal"
            break
        if tau <= INFEAS_RATIO * kappa:
            by = b @ y if m else 0.0
            cx = float(np.sum(c * x))
            if by > 1e-10:
                certificate = {"kind": "primal_infeasible", "y": y / by,
                               "data": "A*(y) <= 0 with <b, y> = 1"}
            elif cx < -1e-10:
                certificate = {"kind": "dual_infeasible",
                               "x_ray": _unembed(x / max(-cx, 1e-300), n),
                               "data": "A(x) = 0, <C, x> = -1, x >= 0"}
            else:
                certificate = {"kind": "ill_posed"}
            status = "infeasible"
            break

        w = _nt_scaling(x, z)
        z_inv = np.linalg.inv(z)

        wa = np.einsum("ab,ibc,cd->iad", w, a_stack, w) if m else a_stack
        schur = np.einsum("iab,jab->ij", a_stack, wa) if m else np.zeros((0, 0))
        if m:
            # slight regularization keeps the factorization alive near the end
            schur = schur + np.eye(m) * (1e-14 * max(1.0, np.abs(schur).max()))
            try:
                schur_cho = np.linalg.cholesky(schur)
            except np.linalg.LinAlgError:
                schur = schur + np.eye(m) * (1e-10 * max(1.0, np.abs(schur).max()))
                try:
                    schur_cho = np.linalg.cholesky(schur)
                except np.linalg.LinAlgError:
                    break

        def schur_solve(v):
            if not m:
                return np.zeros(0)
            t = np.linalg.solve(schur_cho, v)
            return np.linalg.solve(schur_cho.T, t)

        wcw = w @ c @ w
        h1 = b + a_of(wcw) if m else np.zeros(0)
        g1 = schur_solve(h1)
        q = a_of(wcw)
        c_wcw = float(np.sum(c * wcw))

        def direction(rc, rt):
            wrdw = w @ rd @ w
            h2 = -rp - a_of(rc) + a_of(wrdw) if m else np.zeros(0)
            g2 = schur_solve(h2)
            denom = ((b @ g1 if m else 0.0) + c_wcw - (q @ g1 if m else 0.0)
                     + kappa / tau)
            rhs = (-rg - (b @ g2 if m else 0.0) + float(np.sum(c * rc))
                   + (q @ g2 if m else 0.0) - float(np.sum(c * wrdw)) + rt / tau)
            dtau = rhs / denom
            dy = g1 * dtau + g2
            dz = c * dtau - a_adj(dy) + rd
            dx = rc - w @ dz @ w
            dx = 0.5 * (dx + dx.T)
            dkappa = (rt - kappa * dtau) / tau
            return dx, dy, dz, dtau, dkappa

        # predictor
        dxa, dya, dza, dta, dka = direction(-x, -tau * kappa)
        alpha = min(_max_step(x, dxa), _max_step(z, dza), 1.0)
        if dta < 0:
            alpha = min(alpha, -tau / dta)
        if dka < 0:
            alpha = min(alpha, -kappa / dka)
        alpha = min(1.0, 0.99 * alpha)
        mu_aff = ((float(np.sum((x + alpha * dxa) * (z + alpha * dza)))
                   + (tau + alpha * dta) * (kappa + alpha * dka)) / (nr + 1))
        sigma = min(1.0, max((mu_aff / mu) ** 3, 1e-10))

        # corrector
        corr = 0.5 * (dxa @ dza @ w + w @ dza @ dxa)
        rc = sigma * mu * z_inv - x - corr
        rt = sigma * mu - tau * kappa - dta * dka
        dx, dy, dz, dtau, dkappa = direction(rc, rt)

        alpha = min(_max_step(x, dx), _max_step(z, dz))
        if dtau < 0:
            alpha = min(alpha, -tau / dtau)
        if dkappa < 0:
            alpha = min(alpha, -kappa / dkappa)
        alpha = min(1.0, STEP_FRACTION * alpha)
        if not np.isfinite(alpha) or alpha <= 1e-14:
            break

        x = 0.5 * ((x + alpha * dx) + (x + alpha * dx).T)
        z = 0.5 * ((z + alpha * dz) + (z + alpha * dz).T)
        y = y + alpha * dy
        tau += alpha * dtau
        kappa += alpha * dkappa

    if status == "optimal":
        xc = herm_part(_unembed(x / tau, n))
        zc = herm_part(_unembed(z / tau, n))
        yv = y / tau
        pv = float(np.real(np.sum(np.conj(problem.c) * xc)))
        if flip:
            yv = -yv
            dv = float(b @ yv) if m else 0.0
        else:
            dv = float(b @ yv) if m else 0.0
        return SdpSolution(status="optimal", x=xc, y=yv, z=zc,
                           primal_value=pv, dual_value=dv, gap=abs(pv - dv),
                           iterations=it, mu_history=tuple(mu_history))
    if status == "infeasible":
        return SdpSolution(status="infeasible", iterations=it,
                           mu_history=tuple(mu_history), certificate=certificate)
    return SdpSolution(status="numerical_failure", iterations=it,
                       mu_history=tuple(mu_history))


def check_kkt(problem, solution):
    """Residual report for an optimal solution (primal, dual, complementarity)."""
    if solution.status != "optimal":
        raise ValueError("KKT check requires an optimal solution")
    x, y, z = solution.x, solution.y, solution.z
    primal = max((abs(float(np.real(np.sum(np.conj(a) * x))) - b)
                  for a, b in problem.constraints), default=0.0)
    sign = -1.0 if problem.sense == "max" else 1.0
    adj = sum(yi * a for yi, (a, _) in zip(y, problem.constraints)) if problem.constraints \
        else np.zeros_like(problem.c)
    # min: C = A*(y) + Z ; max: C = A*(y) - Z
    dual = np.abs(problem.c - adj - sign * z).max()
    comp = np.abs(x @ z).max()
    return {"primal_residual": float(primal), "dual_residual": float(dual),
            "complementarity": float(comp)}
