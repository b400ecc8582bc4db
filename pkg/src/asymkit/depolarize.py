"""Closed sufficiency conditions for covariant reachability under
depolarization, built from per-mode coefficients of the input and target.

For input rho and target sigma the per-mode data are

    f^lam_j(rho) = tr[rho^lam_j G(rho)^(-1/2) (rho^lam_j)^dag G(rho)^(-1/2)]
    g^lam_j(sigma) = sum_alpha |<X^(lam,alpha)_j, sigma>|

and the reachability test for sigma_p = (1-p) sigma + p I/d compares
f against n * g / (lambda_min + p / (d (1-p))) for every nontrivial mode,
where lambda_min is the smallest nonzero eigenvalue of the twirled target
and n sums the dimensions of the distinct nontrivial irreps acting on the
(truncated) output operator space.  A pretty-good-measurement channel
realizes the transformation whenever the test passes.
"""

from dataclasses import dataclass, field

import numpy as np

from .channels import CovariantChannel
from .linalg import (dagger, eig_hermitian, frob_norm, hs_inner, kron, op_norm,
                     power_on_support, support_projector, trace_norm, vec)
from .modes import build_ito_basis, decompose_modes
from .symmetry import Representation, finite_rep, su2_layout, su2_rep, twirl, u1_rep

RANK_TOL = 1e-9
MODE_LEAK_TOL = 1e-9


@dataclass(eq=False)
class DepolReport:
    """Per-mode rows and the verdict of a sufficiency inequality check."""

    verdict: bool
    p: float
    rows: list = field(default_factory=list)   # dicts: lam, j, f, g, threshold
    lambda_min: float = np.nan
    n_irreps: int = 0
    dim_out: int = 0
    q: float | None = None
    sigma_p: np.ndarray | None = None          # target on the original output space
    note: str = ""


def f_coefficient(rho, basis, lam, j):
    """Input-side mode coefficient; pseudo-inverse on the twirl's support."""
    rho = np.asarray(rho, dtype=complex)
    g_rho = twirl(basis.rep)(rho)
    ginv_half = power_on_support(g_rho, -0.5, RANK_TOL)
    proj = support_projector(g_rho, RANK_TOL)
    mode = decompose_modes(rho, basis).mode(lam, j)
    scale = max(frob_norm(mode), 1e-30)
    leak = frob_norm(mode - proj @ mode @ proj)
    if leak > MODE_LEAK_TOL * max(1.0, scale):
        raise ValueError(f"mode ({lam}, {j}) leaks outside the twirl support "
                         f"by {leak:.3e}; instance ill posed")
    return float(np.real(np.trace(mode @ ginv_half @ dagger(mode) @ ginv_half)))


def d2_divergence(x, sigma, rank_tol=RANK_TOL):
    """Sandwiched alpha=2 divergence log2 tr[(s^-1/4 X s^-1/4)^dag (...)],
    extended to arbitrary operators X; +inf outside the support of sigma."""
    x = np.asarray(x, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    proj = support_projector(sigma, rank_tol)
    scale = max(frob_norm(x), 1e-30)
    if frob_norm(x - proj @ x @ proj) > 1e-9 * max(1.0, scale):
        return np.inf
    quarter = power_on_support(sigma, -0.25, rank_tol)
    y = quarter @ x @ quarter
    return float(np.log2(np.real(np.trace(dagger(y) @ y))))


def _u1_truncation(g_sigma, rep_b, rank_tol):
    cols, weights = [], []
    for w in sorted(set(rep_b.weights.tolist())):
        idx = np.flatnonzero(rep_b.weights == w)
        block = g_sigma[np.ix_(idx, idx)]
        vals, vecs = eig_hermitian(block)
        cut = rank_tol * max(vals[-1] if vals.size else 0.0, 1e-300)
        for k in np.flatnonzero(vals > cut):
            col = np.zeros(rep_b.dim, dtype=complex)
            col[idx] = vecs[:, k]
            cols.append(col)
            weights.append(w)
    if not cols:
        raise ValueError("twirled target has empty support")
    order = np.argsort(np.array(weights), kind="stable")
    v = np.stack([cols[i] for i in order], axis=1)
    return u1_rep([weights[i] for i in order]), v


def _su2_truncation(g_sigma, rep_b, rank_tol):
    layout = su2_layout(rep_b)
    spins, col_groups = [], []
    for two_j in sorted({tj for tj, _ in layout}):
        copies = [off for tj, off in layout if tj == two_j]
        n = two_j + 1
        k = np.zeros((len(copies), len(copies)), dtype=complex)
        for a, oa in enumerate(copies):
            for b, ob in enumerate(copies):
                k[a, b] = np.trace(g_sigma[oa:oa + n, ob:ob + n]) / n
        vals, vecs = eig_hermitian(k)
        cut = rank_tol * max(vals[-1] if vals.size else 0.0, 1e-300)
        kept = np.flatnonzero(vals > cut)
        if kept.size:
            spins.append((two_j / 2.0, int(kept.size)))
            for s in kept:
                for i in range(n):
                    col = np.zeros(rep_b.dim, dtype=complex)
                    for a, oa in enumerate(copies):
                        col[oa + i] = vecs[a, s]
                    col_groups.append(col)
    if not col_groups:
        raise ValueError("twirled target has empty support")
    v = np.stack(col_groups, axis=1)
    return su2_rep(spins, conj=rep_b.conj), v


def truncate_output(sigma, rep_b, rank_tol=RANK_TOL):
    """Restrict the output system to the support of the twirled target.

    Returns (rep_s, sigma_s, v) with v the isometry from the truncated space
    into the original one; reachability of sigma is unchanged by the cut.
    """
    sigma = np.asarray(sigma, dtype=complex)
    g_sigma = twirl(rep_b)(sigma)
    if rep_b.kind == "u1":
        rep_s, v = _u1_truncation(g_sigma, rep_b, rank_tol)
    elif rep_b.kind == "su2":
        rep_s, v = _su2_truncation(g_sigma, rep_b, rank_tol)
    else:
        vals, vecs = eig_hermitian(g_sigma)
        cut = rank_tol * max(vals[-1] if vals.size else 0.0, 1e-300)
        keep = np.flatnonzero(vals > cut)
        if keep.size == 0:
            raise ValueError("twirled target has empty support")
        v = vecs[:, keep]
        if keep.size == rep_b.dim:
            rep_s = rep_b
        else:
            rep_s = finite_rep([dagger(v) @ u @ v for u in rep_b.unitaries])
    return rep_s, dagger(v) @ sigma @ v, v


def _match_label(lam, basis_out, basis_in):
    """Map an output-basis irrep label onto the input basis (None if absent)."""
    if basis_out.label_characters is None:
        return lam if lam in basis_in.irrep_dims else None
    chi = np.asarray(basis_out.label_characters[lam])
    for cand, chars in basis_in.label_characters.items():
        if np.abs(chi - np.asarray(chars)).max() < 1e-6:
            return cand
    return None


def _nontrivial_irrep_sum(basis):
    return int(sum(d for lam, d in basis.irrep_dims.items() if lam != 0))


def _mode_rows(rho, basis_a, sigma_op, basis_s, denominator, n_sum):
    dec_sigma = decompose_modes(sigma_op, basis_s)
    rows = []
    verdict = True
    for lam in basis_s.labels():
        if lam == 0:
            continue
        lam_in = _match_label(lam, basis_s, basis_a)
        for j in basis_s.components(lam):
            g_val = sum(abs(dec_sigma.coefficient(lam, a, j))
                        for a in basis_s.families(lam))
            f_val = f_coefficient(rho, basis_a, lam_in, j) if lam_in is not None else 0.0
            if g_val <= 1e-14:
                threshold, ok = 0.0, True
            elif denominator <= 1e-14:
                threshold, ok = np.inf, False
            else:
                threshold = n_sum * g_val / denominator
                ok = f_val >= threshold
            rows.append({"lam": lam, "j": j, "f": f_val, "g": g_val,
                         "threshold": threshold, "margin": f_val - threshold})
            verdict = verdict and ok
    return rows, verdict


def depol_sufficient(rho, sigma, p, rep_a, rep_b):
    """Sufficiency test for reaching (1-p) sigma + p I/d covariantly.

    The output space is first truncated to the support of the twirled
    target (the uniform part of sigma_p is taken on that support), so
    lambda_min is its smallest nonzero twirled eigenvalue.  p = 1 short
    circuits: the uniform state is reachable by discard-and-prepare.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rep_s, sigma_s, v = truncate_output(sigma, rep_b, RANK_TOL)
    d_s = rep_s.dim
    sigma_p_s = (1 - p) * sigma_s + p * np.eye(d_s) / d_s
    sigma_p = v @ sigma_p_s @ dagger(v)
    if p == 1:
        return DepolReport(verdict=True, p=1.0, dim_out=d_s, sigma_p=sigma_p,
                           note="uniform target; reachable by discard-and-prepare")
    basis_s = build_ito_basis(rep_s)
    basis_a = build_ito_basis(rep_a)
    w, _ = eig_hermitian(twirl(rep_s)(sigma_s))
    cut = RANK_TOL * max(w[-1], 1e-300)
    lam_min = float(w[w > cut][0])
    n_sum = _nontrivial_irrep_sum(basis_s)
    denom = lam_min + p / (d_s * (1 - p))
    rows, verdict = _mode_rows(rho, basis_a, sigma_s, basis_s, denom, n_sum)
    return DepolReport(verdict=verdict, p=float(p), rows=rows, lambda_min=lam_min,
                       n_irreps=n_sum, dim_out=d_s, sigma_p=sigma_p)


def minimal_depolarization(rho, sigma, rep_a, rep_b, tol=1e-6, max_iter=60):
    """Smallest passing p by bisection (an upper bound on the true minimum).

    The acceptance region is monotone in p, so bisection on [0, 1) applies;
    returns 1.0 when even near-total depolarization fails the per-mode test.
    """
    if depol_sufficient(rho, sigma, 0.0, rep_a, rep_b).verdict:
        return 0.0
    hi = 1 - 1e-9
    if not depol_sufficient(rho, sigma, hi, rep_a, rep_b).verdict:
        return 1.0
    lo = 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if depol_sufficient(rho, sigma, mid, rep_a, rep_b).verdict:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            break
    return hi


def identity_mix_floor(rho, sigma_p, rep, tol=1e-9):
    """Smallest q in [0, 1] with G(sigma_p - (1 - q) rho) positive."""
    g = twirl(rep)
    rho = np.asarray(rho, dtype=complex)
    sigma_p = np.asarray(sigma_p, dtype=complex)

    def mineig(q):
        w, _ = eig_hermitian(g(sigma_p - (1 - q) * rho))
        return w[0]

    if mineig(0.0) >= -tol:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mineig(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def depol_sufficient_identity_mix(rho, sigma, p, q, rep):
    """Strengthened test for identical input/output systems.

    Mixes the identity channel in with weight (1 - q): the target shifts to
    sigma_p - (1 - q) rho and lambda_min becomes the smallest eigenvalue of
    its twirl (zero allowed only against vanishing g).  Requires the twirled
    sigma_p to be full rank and q above the positivity floor.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    d = rep.dim
    sigma_p = (1 - p) * sigma + p * np.eye(d) / d
    w, _ = eig_hermitian(twirl(rep)(sigma_p))
    if w[0] <= RANK_TOL * max(w[-1], 1e-300):
        raise ValueError("twirled depolarized target is rank deficient; "
                         "truncate the output system first")
    if trace_norm(rho - sigma_p) <= 1e-12:
        return DepolReport(verdict=True, p=float(p), q=float(q), dim_out=d,
                           sigma_p=sigma_p, note="target equals the input")
    q_floor = identity_mix_floor(rho, sigma_p, rep)
    if q <= q_floor - 1e-12 or not 0 < q <= 1:
        raise ValueError(f"q = {q} not in the admissible interval "
                         f"({q_floor}, 1]")
    shifted = sigma_p - (1 - q) * rho
    w_s, _ = eig_hermitian(twirl(rep)(shifted))
    lam_min = float(max(w_s[0], 0.0))
    basis = build_ito_basis(rep)
    n_sum = _nontrivial_irrep_sum(basis)
    rows, verdict = _mode_rows(rho, basis, shifted, basis, lam_min, n_sum)
    return DepolReport(verdict=verdict, p=float(p), q=float(q), rows=rows,
                       lambda_min=lam_min, n_irreps=n_sum, dim_out=d,
                       sigma_p=sigma_p)


def identity_mix_scan(rho, sigma, p, rep, n_grid=64):
    """True if any q on a uniform grid over (q_floor, 1] passes the mixed test."""
    d = rep.dim
    sigma_p = (1 - p) * sigma + p * np.eye(d) / d
    if trace_norm(rho - sigma_p) <= 1e-12:
        return True
    q_floor = identity_mix_floor(rho, sigma_p, rep)
    for q in np.linspace(1.0, max(q_floor + 1e-9, 1e-9), n_grid):
        if q <= q_floor:
            continue
        if depol_sufficient_identity_mix(rho, sigma, p, q, rep).verdict:
            return True
    return False


def pgm_channel(rho, tau_prepare, rep_a, rep_b):
    """Measure-and-prepare channel from the pretty good measurement on rho.

    The measurement resolves group elements encoded in rho; outcome g
    prepares the g-rotated copy of ``tau_prepare``.  The superoperator is
    assembled in closed form: finite groups by explicit averaging, connected
    groups through the Schur pairing of the two tensor-operator bases (same
    label, matched components).  Off the support of the twirled input the
    measurement is completed by a projector that prepares the twirled
    preparation state.
    """
    rho = np.asarray(rho, dtype=complex)
    tau = np.asarray(tau_prepare, dtype=complex)
    g_rho = twirl(rep_a)(rho)
    ginv_half = power_on_support(g_rho, -0.5, RANK_TOL)
    rho_bar = ginv_half @ rho @ ginv_half
    proj = support_projector(g_rho, RANK_TOL)
    d_a, d_b = rep_a.dim, rep_b.dim

    if rep_a.kind == "finite":
        s = np.zeros((d_b * d_b, d_a * d_a), dtype=complex)
        for ua, ub in zip(rep_a.unitaries, rep_b.unitaries):
            prep = ub @ tau @ dagger(ub)
            effect = ua @ rho_bar @ dagger(ua)
            s += np.outer(vec(prep), vec(effect).conj())
        s /= len(rep_a.unitaries)
    else:
        basis_a = build_ito_basis(rep_a)
        basis_b = build_ito_basis(rep_b)
        if basis_a.realization_conj or basis_b.realization_conj:
            raise ValueError("pgm channel expects direct (non-dual) representations")
        dec_t = decompose_modes(tau, basis_b)
        dec_r = decompose_modes(rho_bar, basis_a)
        s = np.zeros((d_b * d_b, d_a * d_a), dtype=complex)
        for lam in basis_b.labels():
            if lam not in basis_a.irrep_dims:
                continue
            comps = basis_b.components(lam)
            d_lam = basis_b.irrep_dims[lam]
            for a_out in basis_b.families(lam):
                for a_in in basis_a.families(lam):
                    weight = sum(dec_t.coefficient(lam, a_out, j)
                                 * np.conj(dec_r.coefficient(lam, a_in, j))
                                 for j in comps)
                    if abs(weight) < 1e-16:
                        continue
                    block = sum(np.outer(vec(basis_b.element(lam, a_out, i).op),
                                         vec(basis_a.element(lam, a_in, i).op).conj())
                                for i in comps)
                    s += (weight / d_lam) * block
    tau_fix = twirl(rep_b)(tau)
    s += np.outer(vec(tau_fix), vec(np.eye(d_a) - proj).conj())
    return CovariantChannel(superoperator=s, dim_in=d_a, dim_out=d_b,
                            provenance="pgm")


def trace_norm_sufficient(rho, sigma, rep_a, rep_b):
    """Norm form of the p = 0 test: n^-1 ||rho_bar^lam_j||_2^2 must beat the
    trace norm of every nontrivial mode of sigma / lambda_min."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    rep_s, sigma_s, _ = truncate_output(sigma, rep_b, RANK_TOL)
    basis_s = build_ito_basis(rep_s)
    basis_a = build_ito_basis(rep_a)
    w, _ = eig_hermitian(twirl(rep_s)(sigma_s))
    lam_min = float(w[w > RANK_TOL * max(w[-1], 1e-300)][0])
    n_sum = _nontrivial_irrep_sum(basis_s)
    g_rho = twirl(rep_a)(rho)
    quarter = power_on_support(g_rho, -0.25, RANK_TOL)
    dec_in = decompose_modes(rho, basis_a)
    dec_out = decompose_modes(sigma_s, basis_s)
    for lam in basis_s.labels():
        if lam == 0:
            continue
        lam_in = _match_label(lam, basis_s, basis_a)
        for j in basis_s.components(lam):
            lhs = 0.0
            if lam_in is not None:
                bar = quarter @ dec_in.mode(lam_in, j) @ quarter
                lhs = float(np.real(np.trace(dagger(bar) @ bar)))
            rhs = trace_norm(dec_out.mode(lam, j)) / lam_min
            if lhs / n_sum < rhs - 1e-12:
                return False
    return True
