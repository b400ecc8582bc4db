"""Quantum channels as explicit superoperators, with CPTP/covariance checks."""

from dataclasses import dataclass

import numpy as np

from .linalg import kron, unvec, vec
from .symmetry import sample_unitaries


@dataclass(eq=False)
class CovariantChannel:
    """Channel with a d_out^2 x d_in^2 superoperator (column-stacking)."""

    superoperator: np.ndarray
    dim_in: int
    dim_out: int
    provenance: str = "generic"

    def __call__(self, m):
        return unvec(self.superoperator @ vec(np.asarray(m, dtype=complex)),
                     self.dim_out)

    def choi(self):
        """Choi operator sum_ij E_ij (x) E(E_ij) on (input, output)."""
        da, db = self.dim_in, self.dim_out
        j = np.zeros((da * db, da * db), dtype=complex)
        for i in range(da):
            for k in range(da):
                e = np.zeros((da, da), dtype=complex)
                e[i, k] = 1.0
                j[i * db:(i + 1) * db, k * db:(k + 1) * db] = self(e)
        return j


def channel_from_choi(choi, dim_in, dim_out, provenance="choi"):
    s = np.zeros((dim_out * dim_out, dim_in * dim_in), dtype=complex)
    for i in range(dim_in):
        for k in range(dim_in):
            block = choi[i * dim_out:(i + 1) * dim_out, k * dim_out:(k + 1) * dim_out]
            s[:, k * dim_in + i] = vec(block)
    return CovariantChannel(superoperator=s, dim_in=dim_in, dim_out=dim_out,
                            provenance=provenance)


def identity_channel(d):
    return CovariantChannel(superoperator=np.eye(d * d, dtype=complex),
                            dim_in=d, dim_out=d, provenance="identity")


def twirl_channel(rep):
    from .symmetry import twirl
    tw = twirl(rep)
    return CovariantChannel(superoperator=tw.superoperator, dim_in=rep.dim,
                            dim_out=rep.dim, provenance="twirl")


def tp_defect(channel):
    """Trace preservation: S^dag vec(I_out) must equal vec(I_in)."""
    lhs = channel.superoperator.conj().T @ vec(np.eye(channel.dim_out))
    return float(np.abs(lhs - vec(np.eye(channel.dim_in))).max())


def cp_defect(channel):
    """Most negative Choi eigenvalue (0 when completely positive)."""
    w = np.linalg.eigvalsh(0.5 * (channel.choi() + channel.choi().conj().T))
    return float(max(0.0, -w[0]))


def covariance_defect(channel, rep_in, rep_out):
    """max_g || S K_in(g) - K_out(g) S || over the sampling grid."""
    worst = 0.0
    for u_in, u_out in zip(sample_unitaries(rep_in), sample_unitaries(rep_out)):
        k_in = kron(u_in.conj(), u_in)
        k_out = kron(u_out.conj(), u_out)
        worst = max(worst, np.abs(channel.superoperator @ k_in
                                  - k_out @ channel.superoperator).max())
    return float(worst)
