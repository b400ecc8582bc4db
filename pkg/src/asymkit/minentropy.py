"""Conditional min-entropy of twirled bipartite states.

The central quantity is

    phi(M) = inf { tr X : X >= 0, I_R (x) X - M >= 0 },

the exponential 2^(-Hmin) of the conditional min-entropy of a bipartite
operator M on R (x) A.  It is computed through the dual SDP

    max <M, Y>  s.t.  tr_R Y = I_A,  Y >= 0,

whose feasible set is compact and whose multipliers directly recover the
primal certificate X.  ``phi_eta`` evaluates it on the twirled product of a
reference state with an input state, dispatching to closed forms where they
exist (symmetric references; U(1) and SU(2) qubits).  Entropies are base-2
throughout.
"""

from dataclasses import dataclass

import numpy as np

from . import qubit as qb
from .channels import covariance_defect
from .linalg import eig_hermitian, kron, op_norm, state_from_bloch
from .sdp import SdpProblem, SdpSolution, solve
from .symmetry import dual_representation, is_symmetric, joint_twirl, twirl

SYMMETRIC_DISPATCH_TOL = 1e-9
PHI_SDP_TOL = 1e-10


@dataclass(eq=False)
class PhiEvaluation:
    phi: float
    h_min: float
    method: str                      # sdp | symmetric_closed_form | qubit_closed_form
    x_a: np.ndarray | None = None    # primal certificate (tr x_a = phi)
    y_dual: np.ndarray | None = None
    solution: SdpSolution | None = None


def _hermitian_basis(d):
    """Diagonal units then sym/antisym pairs; an orthogonal basis of Hermitians."""
    out = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        out.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[i, j] = s[j, i] = 1.0
            out.append(s)
            a = np.zeros((d, d), dtype=complex)
            a[i, j] = -1j
            a[j, i] = 1j
            out.append(a)
    return out


def phi_operator(m, dims, tol=PHI_SDP_TOL):
    """phi of a PSD bipartite operator on R (x) A via the dual SDP."""
    d_r, d_a = dims
    m = np.asarray(m, dtype=complex)
    if m.shape != (d_r * d_a, d_r * d_a):
        raise ValueError(f"operator shape {m.shape} incompatible with dims {dims}")
    basis_a = _hermitian_basis(d_a)
    eye_r = np.eye(d_r)
    cons = [(kron(eye_r, f), float(np.trace(f).real)) for f in basis_a]
    prob = SdpProblem(c=m, constraints=cons, sense="max")
    sol = solve(prob, tol=tol)
    if sol.status != "optimal":
        raise RuntimeError(f"min-entropy SDP failed with status {sol.status}")
    x_a = sum(yi * f for yi, f in zip(sol.y, basis_a))
    phi = sol.primal_value
    return PhiEvaluation(phi=phi, h_min=-np.log2(max(phi, 1e-300)), method="sdp",
                         x_a=x_a, y_dual=sol.x, solution=sol)


def _u1_qubit_pattern(rep_r, rep_a):
    return (rep_r.kind == "u1" and rep_a.kind == "u1"
            and rep_r.dim == 2 and rep_a.dim == 2
            and rep_a.weights[0] != rep_a.weights[1]
            and np.array_equal(rep_r.weights, -rep_a.weights))


def _su2_qubit_pattern(rep_r, rep_a):
    return (rep_r.kind == "su2" and rep_a.kind == "su2"
            and rep_r.blocks == ((1, 1),) and rep_a.blocks == ((1, 1),)
            and rep_r.conj and not rep_a.conj)


def _phi_u1_closed(eta, tau, rep_a):
    if rep_a.weights[0] > rep_a.weights[1]:
        params = qb.qubit_params(tau)
        x, y, z = qb.bloch3(eta)
    else:
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        params = qb.qubit_params(sx @ np.asarray(tau, dtype=complex) @ sx)
        x, y, z = qb.bloch3(eta)
        y, z = -y, -z
    return qb.phi_u1_qubit(params, x, y, z)


def phi_eta(eta, tau, rep_r, rep_a, method="auto", tol=PHI_SDP_TOL):
    """phi of the twirled product of a reference state with an input state.

    ``method``: "auto" uses closed forms when available (symmetric reference,
    U(1)/SU(2) qubit patterns), "sdp" forces the solver, "closed" requires a
    closed form and raises otherwise.
    """
    eta = np.asarray(eta, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    if rep_r.kind != rep_a.kind:
        raise ValueError("group variants differ between reference and input")
    if eta.shape != (rep_r.dim, rep_r.dim) or tau.shape != (rep_a.dim, rep_a.dim):
        raise ValueError("state dimensions incompatible with representations")

    if method in ("auto", "closed"):
        if _u1_qubit_pattern(rep_r, rep_a):
            phi = _phi_u1_closed(eta, tau, rep_a)
            return PhiEvaluation(phi=phi, h_min=-np.log2(phi),
                                 method="qubit_closed_form")
        if _su2_qubit_pattern(rep_r, rep_a):
            phi = qb.phi_su2_qubit(qb.bloch3(tau), qb.bloch3(eta))
            return PhiEvaluation(phi=phi, h_min=-np.log2(phi),
                                 method="qubit_closed_form")
        if is_symmetric(rep_r, eta, SYMMETRIC_DISPATCH_TOL):
            g_eta = twirl(rep_r)(eta)
            w, _ = eig_hermitian(g_eta)
            phi = float(w[-1])
            g_tau = twirl(rep_a)(tau)
            return PhiEvaluation(phi=phi, h_min=-np.log2(phi),
                                 method="symmetric_closed_form",
                                 x_a=phi * g_tau)
        if method == "closed":
            raise ValueError("no closed form applies to this instance")

    omega = joint_twirl(rep_r, rep_a)(kron(eta, tau))
    return phi_operator(omega, (rep_r.dim, rep_a.dim), tol=tol)


def reference_representation(rep_b):
    """The reference-system representation paired with an output system."""
    return dual_representation(rep_b)


def delta_h(eta, rho, sigma, rep_a, rep_b, rep_r=None, method="auto", tol=PHI_SDP_TOL):
    """Entropy difference H_eta(sigma) - H_eta(rho); >= 0 for all references
    on the dual of the output system iff sigma is covariantly reachable."""
    if rep_r is None:
        rep_r = dual_representation(rep_b)
    h_sigma = phi_eta(eta, sigma, rep_r, rep_b, method=method, tol=tol).h_min
    h_rho = phi_eta(eta, rho, rep_r, rep_a, method=method, tol=tol).h_min
    return h_sigma - h_rho


def delta_phi(eta, rho, sigma, rep_a, rep_b, rep_r=None, method="auto", tol=PHI_SDP_TOL):
    """phi_eta(rho) - phi_eta(sigma); same sign as delta_h and finite at
    symmetric references where the entropies flatten."""
    if rep_r is None:
        rep_r = dual_representation(rep_b)
    p_rho = phi_eta(eta, rho, rep_r, rep_a, method=method, tol=tol).phi
    p_sigma = phi_eta(eta, sigma, rep_r, rep_b, method=method, tol=tol).phi
    return p_rho - p_sigma


def phi_channel_lower_bound(eta, tau, channel, rep_in, rep_out,
                            covariance_tol=1e-8):
    """tr(eta^T E(tau)) for a covariant channel; a lower bound on phi_eta.

    The channel's covariance is verified on the sampling grid first.
    """
    defect = covariance_defect(channel, rep_in, rep_out)
    if defect > covariance_tol:
        raise ValueError(f"channel not covariant: defect {defect:.3e}")
    eta = np.asarray(eta, dtype=complex)
    out = channel(np.asarray(tau, dtype=complex))
    return float(np.real(np.trace(eta.T @ out)))


def phi_excess(x, tau, rep_r, rep_a, method="auto", tol=PHI_SDP_TOL):
    """phi at reference coordinates x, minus its value at the maximally mixed
    reference (1/d).  Nonnegative and positively homogeneous in x."""
    eta = state_from_bloch(np.asarray(x, dtype=float), rep_r.dim)
    val = phi_eta(eta, tau, rep_r, rep_a, method=method, tol=tol).phi
    return val - 1.0 / rep_r.dim
