"""Deciding covariant state interconversion.

Four entry points:

* ``choi_feasibility``  -- exact oracle: a phase-I SDP over Choi operators
  that are twirl-invariant, trace-preserving and map the input to the target;
* ``surface_check``     -- necessary-condition screen sampling reference
  states on a closed shell around the maximally mixed state;
* ``smoothed_check``    -- finite epsilon-net classification with the
  continuity margin r(eps) = 2 d_R^2 eps / ln 2;
* ``local_min_probe``   -- small-radius directional probe of the value
  difference at the maximally mixed reference (the conical regime).

Only ``choi_feasibility`` and the r(eps) branch of ``smoothed_check`` ever
declare a transformation feasible; finite samples of the reference surface
can only refute.
"""

from dataclasses import dataclass, field

import numpy as np

from .channels import channel_from_choi, covariance_defect
from .linalg import (dagger, kron, op_norm, random_hermitian, trace_norm,
                     unvec, vec)
from .minentropy import delta_h, delta_phi, phi_eta, state_from_bloch
from .sdp import SdpProblem, solve
from .symmetry import dual_representation, joint_twirl

INFEASIBLE_DH = -1e-8
DEFAULT_CHOI_TOL = 1e-7
NET_CARDINALITY_CAP = 500_000


@dataclass(eq=False)
class SurfaceSpec:
    """Shell of reference states eta = (I + radius * A)/d around I/d.

    kind 'infinity_shell' normalizes directions A in spectral norm, kind
    'frobenius_sphere' in Frobenius norm; radius <= 1 keeps every emitted
    state positive.  sampler 'random' draws seeded directions, 'net' uses
    the deterministic epsilon-net construction.
    """

    kind: str = "infinity_shell"
    radius: float = 1.0
    sampler: str = "random"
    count: int = 64
    epsilon: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("infinity_shell", "frobenius_sphere"):
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.sampler not in ("random", "net"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if not 0 < self.radius <= 1:
            raise ValueError("radius must lie in (0, 1] to keep states positive")


@dataclass(eq=False)
class FeasibilityReport:
    verdict: str                      # feasible | infeasible | borderline
    witness_choi: np.ndarray | None = None
    witness_eta: np.ndarray | None = None
    witness_delta_h: float | None = None
    borderline_etas: list = field(default_factory=list)
    margins: dict = field(default_factory=dict)

    @property
    def feasible(self):
        return self.verdict == "feasible"

    @property
    def infeasible(self):
        return self.verdict == "infeasible"


def _hvec(h):
    """Isometric real vectorization of a Hermitian matrix."""
    d = h.shape[0]
    iu = np.triu_indices(d, k=1)
    return np.concatenate([np.real(np.diag(h)),
                           np.sqrt(2) * np.real(h[iu]),
                           np.sqrt(2) * np.imag(h[iu])])


def _unhvec(v, d):
    n_off = d * (d - 1) // 2
    h = np.zeros((d, d), dtype=complex)
    h[np.diag_indices(d)] = v[:d]
    iu = np.triu_indices(d, k=1)
    h[iu] = (v[d:d + n_off] + 1j * v[d + n_off:]) / np.sqrt(2)
    return h + np.triu(h, k=1).conj().T


def _reduce_rows(rows, vals, tol=1e-9):
    """SVD-prune linear functionals; returns (reduced rows, vals, residual)."""
    r = np.stack(rows)
    b = np.asarray(vals, dtype=float)
    u, s, vt = np.linalg.svd(r, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    coeff = u[:, :rank].T @ b
    residual = float(np.linalg.norm(b - u[:, :rank] @ coeff))
    reduced = vt[:rank] * s[:rank, None]
    scale = np.abs(reduced).max(axis=1)
    return reduced / scale[:, None], coeff / scale, residual


def _choi_constraint_rows(rho, sigma, rep_a, rep_b):
    d_a, d_b = rep_a.dim, rep_b.dim
    dim = d_a * d_b
    rows, vals = [], []

    def add(h, val):
        rows.append(_hvec(h))
        vals.append(val)

    from .minentropy import _hermitian_basis
    for f in _hermitian_basis(d_a):                       # tr_B J = I_A
        add(kron(f, np.eye(d_b)), float(np.trace(f).real))
    for g in _hermitian_basis(d_b):                       # output state
        add(kron(rho.T, g), float(np.real(np.trace(g @ sigma))))
    s_tw = joint_twirl(dual_representation(rep_a), rep_b).superoperator
    resid = s_tw - np.eye(dim * dim)
    for k in range(dim * dim):                            # twirl invariance
        f = unvec(resid[k], dim)
        h1 = 0.5 * (np.conj(f) + f.T)
        h2 = (np.conj(f) - f.T) / 2j
        if np.abs(h1).max() > 1e-14:
            add(h1, 0.0)
        if np.abs(h2).max() > 1e-14:
            add(h2, 0.0)
    return rows, vals


def choi_feasibility(rho, sigma, rep_a, rep_b, tol=DEFAULT_CHOI_TOL,
                     sdp_tol=1e-9, find_eta_witness=False, witness_seed=0):
    """Exact reachability oracle via a phase-I Choi SDP.

    Minimizes t subject to J + t I >= 0 and the linear families (twirl
    invariance, trace preservation, correct output); the transformation is
    feasible iff the optimum is <= tol.  An inconsistent linear system short
    circuits to infeasible before any SDP is solved.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    d_a, d_b = rep_a.dim, rep_b.dim
    dim = d_a * d_b
    rows, vals = _choi_constraint_rows(rho, sigma, rep_a, rep_b)
    reduced, coeff, residual = _reduce_rows(rows, vals)
    margins = {"linear_residual": residual, "n_constraints": len(coeff)}
    if residual > tol:
        margins["reason"] = "equality system inconsistent"
        return FeasibilityReport(verdict="infeasible", margins=margins)

    cons = []
    for row, val in zip(reduced, coeff):
        h = _unhvec(row, dim)
        big = np.zeros((dim + 2, dim + 2), dtype=complex)
        big[:dim, :dim] = h
        tr_h = float(np.trace(h).real)
        big[dim, dim] = -tr_h
        big[dim + 1, dim + 1] = tr_h
        cons.append((big, val))
    c = np.zeros((dim + 2, dim + 2), dtype=complex)
    c[dim, dim] = 1.0
    c[dim + 1, dim + 1] = -1.0
    sol = solve(SdpProblem(c=c, constraints=cons, sense="min"), tol=sdp_tol)

    if sol.status == "numerical_failure":
        margins["reason"] = "solver failure"
        return FeasibilityReport(verdict="borderline", margins=margins)
    if sol.status == "infeasible":
        margins["reason"] = "phase-I SDP infeasible"
        return FeasibilityReport(verdict="infeasible", margins=margins)

    t_star = sol.primal_value
    margins["phase1_t"] = t_star
    if t_star <= tol:
        t_shift = float(np.real(sol.x[dim, dim] - sol.x[dim + 1, dim + 1]))
        j = sol.x[:dim, :dim] - t_shift * np.eye(dim)
        chan = channel_from_choi(j, d_a, d_b)
        margins["output_error"] = trace_norm(chan(rho) - sigma)
        margins["covariance_defect"] = covariance_defect(chan, rep_a, rep_b)
        return FeasibilityReport(verdict="feasible", witness_choi=j,
                                 margins=margins)

    report = FeasibilityReport(verdict="infeasible", margins=margins)
    if find_eta_witness:
        spec = SurfaceSpec(sampler="random", count=256, seed=witness_seed)
        probe = surface_check(rho, sigma, rep_a, rep_b, spec)
        if probe.verdict == "infeasible":
            report.witness_eta = probe.witness_eta
            report.witness_delta_h = probe.witness_delta_h
    return report


def _shell_directions_random(d, kind, count, rng):
    out = []
    for _ in range(count):
        a = random_hermitian(d, rng, traceless=True)
        norm = op_norm(a) if kind == "infinity_shell" else np.linalg.norm(a)
        out.append(a / norm)
    return out


def surface_samples(spec, d):
    """Reference states on the requested shell."""
    if spec.sampler == "net":
        etas = generate_epsilon_net(d, spec.epsilon, spec.seed)
        if spec.kind != "infinity_shell":
            raise ValueError("net sampler is defined on the infinity shell")
        if spec.radius != 1.0:
            eye = np.eye(d) / d
            etas = [eye + spec.radius * (eta - eye) for eta in etas]
        return etas
    rng = np.random.default_rng(spec.seed)
    dirs = _shell_directions_random(d, spec.kind, spec.count, rng)
    return [(np.eye(d) + spec.radius * a) / d for a in dirs]


def _u1_qubit_both(rep_a, rep_b):
    from .minentropy import _u1_qubit_pattern
    rep_r = dual_representation(rep_b)
    return _u1_qubit_pattern(rep_r, rep_a) and _u1_qubit_pattern(rep_r, rep_b)


def _delta_h_many(etas, rho, sigma, rep_a, rep_b, method="auto"):
    """Entropy differences for a batch of references, vectorized on qubits."""
    if method != "sdp" and _u1_qubit_both(rep_a, rep_b) and len(etas) > 8:
        from .qubit import bloch3, qubit_params
        rep_r = dual_representation(rep_b)
        coords = np.array([bloch3(e) for e in etas])
        x, y, z = coords[:, 0], coords[:, 1], coords[:, 2]
        from .qubit import phi_u1_qubit
        if rep_a.weights[0] < rep_a.weights[1]:
            sx = np.array([[0, 1], [1, 0]], dtype=complex)
            pr = qubit_params(sx @ rho @ sx)
            ps = qubit_params(sx @ sigma @ sx)
            x, y, z = x, -y, -z
        else:
            pr = qubit_params(rho)
            ps = qubit_params(sigma)
        phi_r = phi_u1_qubit(pr, x, y, z)
        phi_s = phi_u1_qubit(ps, x, y, z)
        return np.log2(phi_r) - np.log2(phi_s)
    return np.array([delta_h(eta, rho, sigma, rep_a, rep_b, method=method)
                     for eta in etas])


def surface_check(rho, sigma, rep_a, rep_b, surface=None, method="auto"):
    """Screen Delta_H over a sampled shell of reference states.

    A strictly negative value refutes reachability (witness attached); a
    clean sweep only reports the margin, never "feasible", since finite
    samples cannot certify the universally quantified condition.
    """
    surface = surface or SurfaceSpec()
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    rep_r = dual_representation(rep_b)
    etas = surface_samples(surface, rep_r.dim)
    if not etas:
        raise ValueError("empty reference sample set")
    dhs = _delta_h_many(etas, rho, sigma, rep_a, rep_b, method=method)
    k = int(np.argmin(dhs))
    margins = {"min_delta_h": float(dhs[k]), "n_samples": len(etas)}
    if dhs[k] < INFEASIBLE_DH:
        return FeasibilityReport(verdict="infeasible", witness_eta=etas[k],
                                 witness_delta_h=float(dhs[k]), margins=margins)
    return FeasibilityReport(verdict="borderline", margins=margins)


def _fibonacci_sphere(n):
    k = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * k / n)
    theta = np.pi * (1 + np.sqrt(5)) * k
    return np.stack([np.sin(phi) * np.cos(theta),
                     np.sin(phi) * np.sin(theta),
                     np.cos(phi)], axis=1)


def net_cardinality_bound(d, eps):
    return (1 + 1 / eps) ** (d * d - 1)


def generate_epsilon_net(d, eps, seed=0, cardinality_cap=NET_CARDINALITY_CAP):
    """Finite net of shell states eta = (I + A)/d, ||A||_inf = 1, covering the
    shell to radius eps in generalized trace distance.

    Uses spectral-norm separation delta = 2*eps; the emitted set is
    delta-separated, so its cardinality respects the (1 + 1/eps)^(d^2-1)
    packing bound.  Qubits use a Fibonacci sphere (the shell is exactly the
    Bloch sphere); higher dimensions grow a greedy maximal packing from a
    seeded candidate stream.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    bound = net_cardinality_bound(d, eps)
    if bound > cardinality_cap:
        raise ValueError(
            f"epsilon {eps} too small: cardinality bound {bound:.3e} exceeds "
            f"the cap {cardinality_cap}")
    delta = 2 * eps
    eye = np.eye(d, dtype=complex)
    if d == 2:
        n = max(8, int(np.ceil((3.5 / delta) ** 2)))
        n = min(n, int(np.ceil(bound)))
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
        sz = np.array([[1, 0], [0, -1]], dtype=complex)
        return [(eye + v[0] * sx + v[1] * sy + v[2] * sz) / 2
                for v in _fibonacci_sphere(n)]
    rng = np.random.default_rng(seed)
    kept = []
    stack = None
    rejections = 0
    while rejections < max(400, 40 * (len(kept) + 1)) and len(kept) < bound:
        a = random_hermitian(d, rng, traceless=True)
        a = a / op_norm(a)
        if kept:
            dists = np.abs(np.linalg.eigvalsh(stack - a[None, :, :])).max(axis=(1, 2))
            if dists.min() < delta:
                rejections += 1
                continue
        kept.append(a)
        stack = np.stack(kept)
        rejections = 0
    return [(eye + a) / d for a in kept]


def smoothing_margin(d_r, eps):
    """Continuity allowance r(eps) = 2 d_R^2 eps / ln 2 (bits)."""
    return 2 * d_r * d_r * eps / np.log(2)


def smoothed_check(rho, sigma, rep_a, rep_b, eps, seed=0, method="auto"):
    """Three-way classification over a finite net of reference states.

    Any strictly negative entropy difference refutes; all values clearing
    the continuity margin r(eps) certifies feasibility; anything landing in
    [0, r(eps)) is reported as borderline with the undecided net states.
    """
    rep_r = dual_representation(rep_b)
    etas = generate_epsilon_net(rep_r.dim, eps, seed)
    dhs = _delta_h_many(etas, rho, sigma, rep_a, rep_b, method=method)
    r_eps = smoothing_margin(rep_r.dim, eps)
    k = int(np.argmin(dhs))
    margins = {"min_delta_h": float(dhs[k]), "r_eps": r_eps, "net_size": len(etas)}
    if dhs[k] < INFEASIBLE_DH:
        return FeasibilityReport(verdict="infeasible", witness_eta=etas[k],
                                 witness_delta_h=float(dhs[k]), margins=margins)
    if dhs[k] >= r_eps:
        return FeasibilityReport(verdict="feasible", margins=margins)
    border = [(etas[i], float(dhs[i])) for i in np.flatnonzero(dhs < r_eps)]
    return FeasibilityReport(verdict="borderline", borderline_etas=border,
                             margins=margins)


@dataclass(eq=False)
class LocalProbeReport:
    min_delta_phi: float
    witness_eta: np.ndarray | None
    directions_checked: int
    radius: float

    @property
    def refutes(self):
        return self.min_delta_phi < INFEASIBLE_DH


def local_min_probe(rho, sigma, rep_a, rep_b, radius=1e-3, count=500, seed=0,
                    method="auto"):
    """Directional probe of the value difference at the maximally mixed
    reference.

    Near I/d the entropy difference grows linearly along each ray, so its
    sign is decided by the difference of the two value functions evaluated
    at small radius.  A negative minimum refutes reachability; a nonnegative
    sweep is (sampling) evidence for it.
    """
    rep_r = dual_representation(rep_b)
    d = rep_r.dim
    rng = np.random.default_rng(seed)
    n_coord = d * d - 1
    etas = []
    for _ in range(count):
        u = rng.normal(size=n_coord)
        u /= np.linalg.norm(u)
        try:
            etas.append(state_from_bloch(radius * u, d))
        except ValueError as exc:
            raise ValueError(f"radius {radius} too large for the state body: {exc}")
    best = np.inf
    witness = None
    for eta in etas:
        val = delta_phi(eta, rho, sigma, rep_a, rep_b, method=method)
        if val < best:
            best, witness = val, eta
    return LocalProbeReport(min_delta_phi=float(best),
                            witness_eta=witness if best < INFEASIBLE_DH else None,
                            directions_checked=count, radius=radius)
