"""Irreducible tensor operator bases and modes of asymmetry.

An ITO basis of B(H) is an orthonormal operator basis whose families
transform irreducibly under conjugation by the group.  Labels are
(lam, alpha, j): ``lam`` identifies the irrep (0 is always the trivial one),
``alpha`` the multiplicity copy, ``j`` the component inside the irrep.

Construction per variant:

* u1:    matrix units grouped by weight difference; the weight-zero span is
         re-orthonormalized so the identity/sqrt(d) is the first element.
* su2:   spherical tensor operators from exact Clebsch-Gordan coupling of
         block pairs (entrywise conjugated for dual representations); the
         rank-zero span is re-orthonormalized around the identity.
* finite: numerical block diagonalization of the conjugation representation,
         with multiplicity copies aligned by averaged intertwiners and
         conjugate irrep families realized as daggers.

Component indices: j = 0 for u1 (one-dimensional irreps), j = 2q (doubled,
from -2k to +2k) for su2 rank-k tensors, j = 0..d_lam-1 for finite groups.
"""

from dataclasses import dataclass, field

import numpy as np

from .cg import clebsch_gordan
from .linalg import dagger, frob_norm, hs_inner, unvec, vec
from .symmetry import sample_unitaries, su2_layout

DEGENERACY_TOL = 1e-8
TRANSFORM_TOL = 1e-8


@dataclass(eq=False)
class ItoElement:
    lam: int
    alpha: int
    j: int
    op: np.ndarray


@dataclass(eq=False)
class ItoBasis:
    """Complete orthonormal ITO basis of B(H) for one representation."""

    rep: object
    elements: list
    conj_label: dict            # lam -> lam* (conjugate irrep label)
    irrep_dims: dict            # lam -> dimension of the irrep
    label_characters: dict | None = None   # finite groups only
    realization_conj: bool = False
    _families: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for el in self.elements:
            self._families.setdefault((el.lam, el.alpha), {})[el.j] = el

    @property
    def dim(self):
        return self.rep.dim

    def labels(self):
        return sorted(self.irrep_dims)

    def families(self, lam):
        """Multiplicity indices alpha present for an irrep label."""
        return sorted(a for (l, a) in self._families if l == lam)

    def components(self, lam):
        fams = [a for (l, a) in self._families if l == lam]
        return sorted(self._families[(lam, fams[0])]) if fams else []

    def element(self, lam, alpha, j):
        return self._families[(lam, alpha)][j]


def conjugate_basis(basis):
    """Entrywise conjugate basis, a valid ITO basis for the dual action."""
    els = [ItoElement(e.lam, e.alpha, e.j, e.op.conj()) for e in basis.elements]
    return ItoBasis(rep=basis.rep, elements=els, conj_label=dict(basis.conj_label),
                    irrep_dims=dict(basis.irrep_dims),
                    label_characters=basis.label_characters,
                    realization_conj=not basis.realization_conj)


def _orthonormalize_with_identity(d, candidates, expected, tol=1e-9):
    """Gram-Schmidt a Hermitian spanning set, forcing identity/sqrt(d) first."""
    out = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for c in candidates:
        v = c.astype(complex)
        for b in out:
            v = v - hs_inner(b, v) * b
        n = frob_norm(v)
        if n > tol:
            out.append(v / n)
    if len(out) != expected:
        raise ValueError(f"invariant span has dimension {len(out)}, expected {expected}")
    return out


def _hermitian_candidates(d, pairs):
    """Diagonal units plus symmetric/antisymmetric combinations of given pairs."""
    cands = []
    for m in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[m, m] = 1.0
        cands.append(e)
    for m, n in pairs:
        s = np.zeros((d, d), dtype=complex)
        s[m, n] = s[n, m] = 1.0
        cands.append(s / np.sqrt(2))
        a = np.zeros((d, d), dtype=complex)
        a[m, n] = -1j
        a[n, m] = 1j
        cands.append(a / np.sqrt(2))
    return cands


def _build_u1(rep):
    w = rep.weights
    d = rep.dim
    elements = []
    zero_pairs = [(m, n) for m in range(d) for n in range(m + 1, d) if w[m] == w[n]]
    for alpha, op in enumerate(_orthonormalize_with_identity(
            d, _hermitian_candidates(d, zero_pairs), len(zero_pairs) * 2 + d)):
        elements.append(ItoElement(0, alpha, 0, op))
    pos = {}
    for m in range(d):
        for n in range(d):
            lam = int(w[m] - w[n])
            if lam > 0:
                pos.setdefault(lam, []).append((m, n))
    for lam in sorted(pos):
        for alpha, (m, n) in enumerate(sorted(pos[lam])):
            op = np.zeros((d, d), dtype=complex)
            op[m, n] = 1.0
            elements.append(ItoElement(lam, alpha, 0, op))
            elements.append(ItoElement(-lam, alpha, 0, op.conj().T))
    labels = {e.lam for e in elements}
    return ItoBasis(rep=rep, elements=elements,
                    conj_label={lam: -lam for lam in labels},
                    irrep_dims={lam: 1 for lam in labels})


def _spherical_tensor(d, two_ja, off_a, two_jb, off_b, two_k, two_q):
    t = np.zeros((d, d), dtype=complex)
    for ia in range(two_ja + 1):
        two_ma = two_ja - 2 * ia
        two_mb = two_ma - two_q
        if abs(two_mb) > two_jb:
            continue
        ib = (two_jb - two_mb) // 2
        c = clebsch_gordan(two_jb, two_mb, two_k, two_q, two_ja, two_ma)
        if c != 0.0:
            t[off_a + ia, off_b + ib] = c
    n = frob_norm(t)
    if n < 1e-14:
        raise ValueError("empty spherical tensor component")
    return t / n


def _build_su2(rep):
    d = rep.dim
    layout = su2_layout(rep)
    elements = []
    rank_counts = {}
    zero_candidates = []
    for a, (two_ja, off_a) in enumerate(layout):
        for b, (two_jb, off_b) in enumerate(layout):
            for two_k in range(abs(two_ja - two_jb), two_ja + two_jb + 2, 2):
                if two_k == 0:
                    t = _spherical_tensor(d, two_ja, off_a, two_jb, off_b, 0, 0)
                    if a == b:
                        zero_candidates.append(t)
                    elif a < b:
                        u = _spherical_tensor(d, two_jb, off_b, two_ja, off_a, 0, 0)
                        zero_candidates.append((t + u) / np.sqrt(2))
                        zero_candidates.append((-1j * (t - u)) / np.sqrt(2))
                    continue
                alpha = rank_counts.get(two_k, 0)
                rank_counts[two_k] = alpha + 1
                for two_q in range(-two_k, two_k + 2, 2):
                    op = _spherical_tensor(d, two_ja, off_a, two_jb, off_b,
                                           two_k, two_q)
                    elements.append(ItoElement(two_k, alpha, two_q, op))
    n_zero = sum(1 for a, (tja, _) in enumerate(layout)
                 for b, (tjb, _) in enumerate(layout) if tja == tjb)
    for alpha, op in enumerate(_orthonormalize_with_identity(
            d, zero_candidates, n_zero)):
        elements.append(ItoElement(0, alpha, 0, op))
    if rep.conj:
        elements = [ItoElement(e.lam, e.alpha, e.j, e.op.conj()) for e in elements]
    labels = {e.lam for e in elements}
    return ItoBasis(rep=rep, elements=elements,
                    conj_label={lam: lam for lam in labels},
                    irrep_dims={lam: lam + 1 for lam in labels},
                    realization_conj=rep.conj)


def _family_realization(ops, unitaries):
    """Matrices v(g) with U X_j U^dag = sum_i v[i, j] X_i, plus the residual."""
    mats = []
    worst = 0.0
    for u in unitaries:
        rotated = [u @ x @ dagger(u) for x in ops]
        v = np.array([[hs_inner(xi, r) for r in rotated] for xi in ops])
        for col, r in enumerate(rotated):
            recon = sum(v[i, col] * ops[i] for i in range(len(ops)))
            worst = max(worst, frob_norm(r - recon))
        mats.append(v)
    return mats, worst


def _align_copy(v_ref, v_c, ops, rng):
    """Rotate a multiplicity copy so its realization matches the reference."""
    dim = len(ops)
    for _ in range(4):
        q = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        a = sum(vc @ q @ dagger(vr) for vr, vc in zip(v_ref, v_c)) / len(v_ref)
        if np.linalg.norm(a) > 1e-6:
            break
    u, _, vh = np.linalg.svd(a)
    a_u = u @ vh
    return [sum(a_u[i, jdx] * ops[i] for i in range(dim)) for jdx in range(dim)]


def _build_finite(rep):
    d = rep.dim
    els = rep.unitaries
    superops = [np.kron(u.conj(), u) for u in els]
    p_triv = sum(superops) / len(superops)
    triv_dim = int(round(np.trace(p_triv).real))

    zero_pairs = [(m, n) for m in range(d) for n in range(m + 1, d)]
    cands = [unvec(p_triv @ vec(c), d) for c in _hermitian_candidates(d, zero_pairs)]
    elements = [ItoElement(0, alpha, 0, op) for alpha, op in
                enumerate(_orthonormalize_with_identity(d, cands, triv_dim))]

    w_proj, v_proj = np.linalg.eigh(0.5 * (p_triv + dagger(p_triv)))
    rest = v_proj[:, w_proj < 0.5]
    rng = np.random.default_rng(0xA5F17)
    dmat = rng.normal(size=(d * d, d * d)) + 1j * rng.normal(size=(d * d, d * d))
    dmat = 0.5 * (dmat + dagger(dmat))
    k_op = sum(s @ dmat @ dagger(s) for s in superops) / len(superops)
    k_r = dagger(rest) @ k_op @ rest
    w, v = np.linalg.eigh(0.5 * (k_r + dagger(k_r)))

    clusters = []
    start = 0
    for i in range(1, w.size + 1):
        if i == w.size or w[i] - w[i - 1] > DEGENERACY_TOL:
            clusters.append(list(range(start, i)))
            start = i
    gaps = [w[c2[0]] - w[c1[-1]] for c1, c2 in zip(clusters, clusters[1:])]

    families = []   # (char_key, realization, ops)
    for cl in clusters:
        ops = [unvec(rest @ v[:, i], d) for i in cl]
        mats, worst = _family_realization(ops, els)
        if worst > TRANSFORM_TOL:
            min_gap = min(gaps) if gaps else float("inf")
            raise ValueError(
                "block diagonalization failed: transformation residual "
                f"{worst:.3e} exceeds {TRANSFORM_TOL}; smallest eigenvalue gap "
                f"between clusters is {min_gap:.3e}")
        char = np.array([np.trace(m) for m in mats])
        families.append([char, mats, ops])

    # group into irrep classes by character, align multiplicity copies
    class_reps = []   # (char, realization of first copy)
    class_members = []
    for fam in families:
        char, mats, ops = fam
        for idx, (c_ref, v_ref) in enumerate(class_reps):
            if np.abs(char - c_ref).max() < 1e-6:
                ops = _align_copy(v_ref, mats, ops, rng)
                class_members[idx].append(ops)
                break
        else:
            class_reps.append((char, mats))
            class_members.append([ops])

    # conjugate pairing; realize the partner class as daggers
    conj_label = {0: 0}
    chars = [c for c, _ in class_reps]
    done = set()
    for lam, char in enumerate(chars, start=1):
        if lam in done:
            continue
        partner = None
        for mu, other in enumerate(chars, start=1):
            if np.abs(np.conj(char) - other).max() < 1e-6:
                partner = mu
                break
        if partner is None:
            raise ValueError("no conjugate irrep class found; clustering failed")
        conj_label[lam] = partner
        conj_label[partner] = lam
        done.update((lam, partner))
        if partner != lam:
            class_members[partner - 1] = [
                [x.conj().T for x in ops] for ops in class_members[lam - 1]]

    irrep_dims = {0: 1}
    label_chars = {0: tuple(np.ones(len(els), dtype=complex))}
    for lam, members in enumerate(class_members, start=1):
        irrep_dims[lam] = len(members[0])
        label_chars[lam] = tuple(chars[lam - 1])
        for alpha, ops in enumerate(members):
            for j, op in enumerate(ops):
                elements.append(ItoElement(lam, alpha, j, op))
    return ItoBasis(rep=rep, elements=elements, conj_label=conj_label,
                    irrep_dims=irrep_dims, label_characters=label_chars)


def build_ito_basis(rep):
    """Complete orthonormal irreducible tensor operator basis for B(H)."""
    if "ito" not in rep._cache:
        if rep.kind == "u1":
            basis = _build_u1(rep)
        elif rep.kind == "su2":
            basis = _build_su2(rep)
        else:
            basis = _build_finite(rep)
        rep._cache["ito"] = basis
    return rep._cache["ito"]


@dataclass(eq=False)
class ModeDecomposition:
    """Coefficients <X, rho> grouped into per-(lam, j) mode operators."""

    basis: ItoBasis
    coefficients: dict          # (lam, alpha, j) -> complex

    def coefficient(self, lam, alpha, j):
        return self.coefficients.get((lam, alpha, j), 0.0)

    def mode(self, lam, j):
        """The (lam, j) mode operator, summed over multiplicities."""
        d = self.basis.dim
        out = np.zeros((d, d), dtype=complex)
        for alpha in self.basis.families(lam):
            el = self.basis.element(lam, alpha, j)
            out = out + self.coefficients[(lam, alpha, j)] * el.op
        return out

    def mode_items(self):
        for lam in self.basis.labels():
            for j in self.basis.components(lam):
                yield lam, j, self.mode(lam, j)

    def reconstruct(self):
        d = self.basis.dim
        out = np.zeros((d, d), dtype=complex)
        for el in self.basis.elements:
            out = out + self.coefficients[(el.lam, el.alpha, el.j)] * el.op
        return out


def decompose_modes(rho, basis):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (basis.dim, basis.dim):
        raise ValueError(f"operator shape {rho.shape} incompatible with basis dim {basis.dim}")
    coeffs = {(el.lam, el.alpha, el.j): hs_inner(el.op, rho) for el in basis.elements}
    return ModeDecomposition(basis=basis, coefficients=coeffs)


def mode_support(rho, basis, tol=1e-10):
    """Irrep labels whose coefficients are not all negligible."""
    dec = decompose_modes(rho, basis)
    out = set()
    for (lam, _, _), c in dec.coefficients.items():
        if abs(c) > tol:
            out.add(lam)
    return out


def g_coefficient(sigma, basis, lam, j):
    """Sum over multiplicities of |<X^(lam,alpha)_j, sigma>|."""
    if lam not in basis.irrep_dims:
        raise KeyError(f"unknown irrep label {lam!r}")
    sigma = np.asarray(sigma, dtype=complex)
    total = 0.0
    for alpha in basis.families(lam):
        el = basis.element(lam, alpha, j)
        total += abs(hs_inner(el.op, sigma))
    return total


def modal_match_product(eta, rho, basis_a):
    """Joint twirl of a product state from single-system mode data.

    The reference factor is decomposed in the entrywise-conjugate of
    ``basis_a`` (the dual action's basis); families with the same label and
    multiplicity pair through Schur orthogonality:

        G(eta (x) rho) = sum_lam (1/d_lam) sum_{a,b}
            [sum_j n^(lam,a)_j r^(lam,b)_j]
            [sum_i conj(X^(lam,a)_i) (x) X^(lam,b)_i]

    For one-dimensional irreps this collapses to the familiar pairing of an
    eta mode with the matching rho mode.
    """
    basis_r = conjugate_basis(basis_a)
    dec_eta = decompose_modes(eta, basis_r)
    dec_rho = decompose_modes(rho, basis_a)
    d = basis_a.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    for lam in basis_a.labels():
        d_lam = basis_a.irrep_dims[lam]
        comps = basis_a.components(lam)
        for a in basis_a.families(lam):
            for b in basis_a.families(lam):
                weight = sum(dec_eta.coefficient(lam, a, j)
                             * dec_rho.coefficient(lam, b, j) for j in comps)
                if abs(weight) < 1e-16:
                    continue
                block = np.zeros((d * d, d * d), dtype=complex)
                for i in comps:
                    xr = basis_r.element(lam, a, i).op
                    xa = basis_a.element(lam, b, i).op
                    block += np.kron(xr, xa)
                out += (weight / d_lam) * block
    return out
