"""Group representations and exact twirl channels.

Three group variants are supported:

* ``u1``   -- weights (integer generator spectrum), twirl = weight-sector
  dephasing mask,
* ``su2``  -- direct sums of spin blocks, twirl = per-sector depolarization
  (Schur projection), joint twirls via the commutant kernel of the joint
  generators,
* ``finite`` -- an explicit list of unitaries closed under products, twirl =
  arithmetic group average.

All twirls are computed algebraically; nothing is approximated by numerical
quadrature over the group.  Superoperators use the column-stacking
convention, so conjugation by U is kron(conj(U), U).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cg import rotation_unitary, spin_matrices, su2_sample_rotations
from .linalg import dagger, kron, op_norm, unvec, vec

UNITARY_TOL = 1e-10
CLOSURE_TOL = 1e-8
U1_CIRCLE_SAMPLES = 16


@dataclass(eq=False)
class Representation:
    """A unitary representation of one of the supported group variants.

    ``weights`` (u1) is an integer vector; ``blocks`` (su2) is a tuple of
    (two_j, multiplicity) pairs in ascending two_j order, with ``conj`` set
    for the entrywise-conjugate (dual) representation; ``unitaries`` (finite)
    is the verified element list, with elements kept in construction order so
    dual representations pair elementwise.
    """

    kind: str
    dim: int
    weights: np.ndarray | None = None
    blocks: tuple | None = None
    conj: bool = False
    unitaries: list | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def describe(self):
        if self.kind == "u1":
            return f"u1(weights={list(self.weights)})"
        if self.kind == "su2":
            spins = ", ".join(f"j={Fraction(tj, 2)}x{m}" for tj, m in self.blocks)
            star = "*" if self.conj else ""
            return f"su2{star}({spins})"
        return f"finite({len(self.unitaries)} elements, dim={self.dim})"


def u1_rep(weights):
    """U(1) representation from the integer spectrum of its generator."""
    w = np.asarray(weights)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty 1-d sequence")
    if not np.allclose(w, np.round(w.astype(float)), atol=1e-12):
        raise ValueError(f"non-integer weight spectrum {list(w)}")
    w = np.round(w.astype(float)).astype(int)
    return Representation(kind="u1", dim=w.size, weights=w)


def su2_rep(spins, conj=False):
    """SU(2) representation from [(j, multiplicity), ...] with half-integer j."""
    blocks = {}
    for j, mult in spins:
        two_j = int(round(2 * float(j)))
        if abs(2 * float(j) - two_j) > 1e-12 or two_j < 0:
            raise ValueError(f"spin {j} is not a half-integer")
        if mult < 1:
            raise ValueError(f"multiplicity {mult} invalid")
        blocks[two_j] = blocks.get(two_j, 0) + int(mult)
    blocks = tuple(sorted(blocks.items()))
    dim = sum((tj + 1) * m for tj, m in blocks)
    return Representation(kind="su2", dim=dim, blocks=blocks, conj=bool(conj))


def finite_rep(unitaries):
    """Finite group from an explicit unitary list; verifies the group table."""
    els = [np.asarray(u, dtype=complex) for u in unitaries]
    if not els:
        raise ValueError("empty unitary list")
    d = els[0].shape[0]
    for i, u in enumerate(els):
        if u.shape != (d, d):
            raise ValueError(f"element {i} has shape {u.shape}, expected {(d, d)}")
        if op_norm(u @ dagger(u) - np.eye(d)) > UNITARY_TOL:
            raise ValueError(f"element {i} is not unitary to {UNITARY_TOL}")
    for i, a in enumerate(els):
        for j, b in enumerate(els):
            prod = a @ b
            if min(np.abs(prod - u).max() for u in els) > CLOSURE_TOL:
                raise ValueError(f"product of elements {i},{j} leaves the set: "
                                 "not closed under multiplication")
    return Representation(kind="finite", dim=d, unitaries=els)


def dual_representation(rep):
    """The reference-side representation: entrywise conjugate action.

    For u1 this negates the weights (same thing as conjugation); su2 keeps
    its blocks and flips the conj flag; finite conjugates each element.
    """
    if rep.kind == "u1":
        return Representation(kind="u1", dim=rep.dim, weights=-rep.weights)
    if rep.kind == "su2":
        return Representation(kind="su2", dim=rep.dim, blocks=rep.blocks,
                              conj=not rep.conj)
    return Representation(kind="finite", dim=rep.dim,
                          unitaries=[u.conj() for u in rep.unitaries])


def su2_layout(rep):
    """Expanded copy list [(two_j, offset), ...] for an su2 representation."""
    layout = []
    off = 0
    for two_j, mult in rep.blocks:
        for _ in range(mult):
            layout.append((two_j, off))
            off += two_j + 1
    return layout


def generators(rep):
    """Hermitian generators of the connected variants (u1: one, su2: three)."""
    if rep.kind == "u1":
        return [np.diag(rep.weights.astype(complex))]
    if rep.kind == "su2":
        gens = [np.zeros((rep.dim, rep.dim), dtype=complex) for _ in range(3)]
        for two_j, off in su2_layout(rep):
            for g, block in zip(gens, spin_matrices(two_j)):
                g[off:off + two_j + 1, off:off + two_j + 1] = block
        if rep.conj:
            gens = [-g.conj() for g in gens]
        return gens
    raise ValueError("finite representations have no Lie generators")


def sample_unitaries(rep, n_circle=U1_CIRCLE_SAMPLES):
    """Deterministic group-element grid used by covariance property checks."""
    if rep.kind == "u1":
        ts = 2 * np.pi * np.arange(n_circle) / n_circle
        return [np.diag(np.exp(1j * t * rep.weights)) for t in ts]
    if rep.kind == "su2":
        out = []
        for axis, angle in su2_sample_rotations():
            u = np.zeros((rep.dim, rep.dim), dtype=complex)
            for two_j, off in su2_layout(rep):
                u[off:off + two_j + 1, off:off + two_j + 1] = \
                    rotation_unitary(two_j, axis, angle)
            out.append(u.conj() if rep.conj else u)
        return out
    return list(rep.unitaries)


@dataclass(eq=False)
class TwirlChannel:
    """Group-average channel as an explicit d^2 x d^2 superoperator."""

    superoperator: np.ndarray
    dim: int

    def __call__(self, m):
        return unvec(self.superoperator @ vec(np.asarray(m, dtype=complex)), self.dim)


def _u1_mask_superop(weights):
    d = weights.size
    keep = (weights[:, None] == weights[None, :])  # entry (row, col) survives
    return np.diag(vec(keep).astype(complex))


def _su2_sector_superop(rep):
    d = rep.dim
    s = np.zeros((d * d, d * d), dtype=complex)
    layout = su2_layout(rep)
    for two_ja, off_a in layout:
        for two_jb, off_b in layout:
            if two_ja != two_jb:
                continue
            n = two_ja + 1
            for i in range(n):
                for k in range(n):
                    row = (off_b + i) * d + (off_a + i)
                    col = (off_b + k) * d + (off_a + k)
                    s[row, col] += 1.0 / n
    return s  # real entries: identical for the conjugate representation


def _finite_average_superop(unitaries):
    d = unitaries[0].shape[0]
    s = np.zeros((d * d, d * d), dtype=complex)
    for u in unitaries:
        s += kron(u.conj(), u)
    return s / len(unitaries)


def commutant_projector(gens):
    """Orthogonal projector onto {M : [J_k, M] = 0 for all k}.

    Built from the kernel of sum_k ad_k^dagger ad_k; the nonzero spectrum of
    that operator is bounded away from zero (integer-squared for u1 weights,
    k(k+1) >= 2 for su2), so the 0.5 threshold is safe.
    """
    d = gens[0].shape[0]
    k = np.zeros((d * d, d * d), dtype=complex)
    eye = np.eye(d)
    for g in gens:
        ad = kron(eye, g) - kron(g.T, eye)
        k += dagger(ad) @ ad
    w, v = np.linalg.eigh(0.5 * (k + dagger(k)))
    ker = v[:, w < 0.5]
    return ker @ dagger(ker)


def twirl(rep):
    """Exact projection onto the commutant of the representation."""
    if "twirl" not in rep._cache:
        if rep.kind == "u1":
            s = _u1_mask_superop(rep.weights)
        elif rep.kind == "su2":
            s = _su2_sector_superop(rep)
        else:
            s = _finite_average_superop(rep.unitaries)
        rep._cache["twirl"] = TwirlChannel(superoperator=s, dim=rep.dim)
    return rep._cache["twirl"]


def _pair_key(rep_r, rep_a):
    return (id(rep_r), id(rep_a))


_JOINT_CACHE = {}


def joint_twirl(rep_r, rep_a):
    """Twirl of the product representation g -> U_R(g) (x) U_A(g)."""
    if rep_r.kind != rep_a.kind:
        raise ValueError(f"group variants differ: {rep_r.kind} vs {rep_a.kind}")
    key = _pair_key(rep_r, rep_a)
    cached = _JOINT_CACHE.get(key)
    if cached is not None and cached[0]() is not None and cached[1]() is not None:
        return cached[2]
    if rep_r.kind == "u1":
        joint = (rep_r.weights[:, None] + rep_a.weights[None, :]).ravel()
        s = _u1_mask_superop(joint)
    elif rep_r.kind == "su2":
        eye_r = np.eye(rep_r.dim)
        eye_a = np.eye(rep_a.dim)
        gens = [kron(gr, eye_a) + kron(eye_r, ga)
                for gr, ga in zip(generators(rep_r), generators(rep_a))]
        s = commutant_projector(gens)
    else:
        if len(rep_r.unitaries) != len(rep_a.unitaries):
            raise ValueError("finite groups must enumerate the same elements")
        s = _finite_average_superop([kron(ur, ua) for ur, ua
                                     in zip(rep_r.unitaries, rep_a.unitaries)])
    chan = TwirlChannel(superoperator=s, dim=rep_r.dim * rep_a.dim)
    import weakref
    _JOINT_CACHE[key] = (weakref.ref(rep_r), weakref.ref(rep_a), chan)
    return chan


def is_symmetric(rep, m, tol=1e-9):
    """True iff the operator is invariant under the group twirl."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (rep.dim, rep.dim):
        raise ValueError(f"operator shape {m.shape} incompatible with dim {rep.dim}")
    return op_norm(twirl(rep)(m) - m) <= tol
