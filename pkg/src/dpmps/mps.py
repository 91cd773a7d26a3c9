"""Canonical MPS data model, canonicalization, and energy evaluation.

A chain of n sites is stored as the boundary tensor Gamma^[1], the Schmidt
vector lambda^[2], the right-canonical interior tensors B^[2..n-1], and the
boundary tensor Gamma^[n].  Schmidt vectors for later bonds are not stored;
they are recovered from (lambda, B) pairs via `mu_of`.

Bond dimensions are the exact Schmidt ranks of the represented state,
capped at D.  Interior B tensors are indexed [alpha, i, beta] with alpha
the left bond; boundary tensors are indexed [alpha, i].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchmidtRankError, ShapeMismatchError, SizeGuardError

DENSE_SIZE_GUARD = 2**24
SVD_CUTOFF = 1e-12


@dataclass
class CanonicalMps:
    """Canonical-form MPS Gamma^[1] lambda^[2] B^[2] ... B^[n-1] Gamma^[n]."""

    n: int
    d: int
    D: int
    d_end: int
    gamma_left: np.ndarray          # (r2, d_end)
    lambda2: np.ndarray             # (r2,) nonnegative reals
    b_tensors: list                 # site j=2..n-1: (r_j, d, r_{j+1})
    gamma_right: np.ndarray         # (r_n, d_end)
    s: int = 1
    discarded_weight: float = 0.0   # squared weight dropped by truncation

    @property
    def dims(self) -> tuple:
        return (self.d_end,) + (self.d,) * (self.n - 2) + (self.d_end,)

    @property
    def bond_dims(self) -> tuple:
        """Effective bond ranks at cuts 2..n."""
        ranks = [self.gamma_left.shape[0]]
        for b in self.b_tensors:
            ranks.append(b.shape[2])
        return tuple(ranks)

    def site_tensors(self) -> list:
        """Uniform site-tensor view [(r_left, dim, r_right)] with lambda2
        absorbed into the first tensor."""
        m1 = (self.gamma_left * self.lambda2[:, None]).T[None, :, :]
        mn = self.gamma_right[:, :, None]
        return [m1] + list(self.b_tensors) + [mn]

    def derived_lambdas(self) -> list:
        """[lambda^[2], ..., lambda^[n]] with j >= 3 recovered via mu chains."""
        lams = [self.lambda2]
        for b in self.b_tensors:
            lams.append(mu_of(lams[-1], b))
        return lams


def mu_of(lam: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Right Schmidt vector of a (lambda, B) pair:
    mu_beta = (sum_{i,alpha} |lambda_alpha B^i_{alpha beta}|^2)^(1/2).

    Defined for non-canonical pairs as well.
    """
    lam = np.asarray(lam, dtype=float)
    b = np.asarray(b)
    if b.ndim != 3 or b.shape[0] != lam.shape[0]:
        raise ShapeMismatchError(
            f"lambda of length {lam.shape[0]} does not match B of shape {b.shape}"
        )
    w = np.abs(lam[:, None, None] * b) ** 2
    return np.sqrt(w.sum(axis=(0, 1)))


def canonicalize(state, n: int, d: int, D, d_end: int,
                 mode: str = "strict", s: int = 1) -> CanonicalMps:
    """Decompose a normalized dense state into canonical form by SVD sweeps.

    Singular values below 1e-12 are treated as zero.  If a cut has rank
    above D, strict mode raises; truncate mode keeps the D largest values,
    renormalizes, and records the discarded squared weight.  D=None means
    no cap.
    """
    if mode not in ("strict", "truncate"):
        raise ValueError(f"unknown mode {mode!r}")
    dims = [d_end] + [d] * (n - 2) + [d_end]
    v = np.asarray(state, dtype=complex).ravel()
    if v.size != int(np.prod(dims)):
        raise ShapeMismatchError(
            f"state of size {v.size} does not match dims {tuple(dims)}"
        )
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"input state norm {nrm} is not 1")
    v = v / nrm

    discarded = 0.0
    right_tensors = []   # site n down to site 2
    lam2 = None
    rem = v
    r = 1
    for j in range(n, 1, -1):
        m = rem.reshape(-1, dims[j - 1] * r)
        u, sv, vh = np.linalg.svd(m, full_matrices=False)
        keep = sv > SVD_CUTOFF
        sv, u, vh = sv[keep], u[:, keep], vh[keep]
        if D is not None and len(sv) > D:
            if mode == "strict":
                raise SchmidtRankError(
                    f"cut before site {j} has Schmidt rank {len(sv)} > D={D}"
                )
            discarded += float(np.sum(sv[D:] ** 2))
            sv, u, vh = sv[:D], u[:, :D], vh[:D]
            sv = sv / np.linalg.norm(sv)
        right_tensors.append(vh.reshape(len(sv), dims[j - 1], r))
        rem = u * sv
        r = len(sv)
        lam2 = sv
    gamma_left = (rem / lam2[None, :]).T        # rem = U diag(lam2)
    gamma_right = right_tensors[0][:, :, 0]
    b_tensors = [t for t in reversed(right_tensors[1:])]
    d_cap = max(len(lam2), max((b.shape[0] for b in right_tensors), default=1))
    return CanonicalMps(
        n=n, d=d, D=(D if D is not None else d_cap), d_end=d_end,
        gamma_left=gamma_left, lambda2=lam2.copy(),
        b_tensors=b_tensors, gamma_right=gamma_right,
        s=s, discarded_weight=discarded,
    )


def to_dense(m: CanonicalMps) -> np.ndarray:
    """Coefficient vector of the MPS, contracted left to right."""
    total = int(np.prod(m.dims))
    if total > DENSE_SIZE_GUARD:
        raise SizeGuardError(f"dense size {total} exceeds guard {DENSE_SIZE_GUARD}")
    tensors = m.site_tensors()
    acc = tensors[0]                        # (1, d_end, r)
    acc = acc.reshape(-1, acc.shape[2])
    for t in tensors[1:]:
        acc = np.tensordot(acc, t, axes=([1], [0]))
        acc = acc.reshape(-1, acc.shape[-1])
    return acc.reshape(-1)


@dataclass
class CanonicalReport:
    """Max deviations from the canonical conditions, per bond."""

    left: list = field(default_factory=list)      # per interior pair j=2..n-1
    right: list = field(default_factory=list)     # per B tensor
    boundary: list = field(default_factory=list)  # [left gamma, right gamma]
    norm: list = field(default_factory=list)      # per lambda^[j], j=2..n
    tol: float = 1e-10

    @property
    def max_residual(self) -> float:
        parts = self.left + self.right + self.boundary + self.norm
        return max(parts) if parts else 0.0

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tol


def check_canonical(m: CanonicalMps, tol: float = 1e-10) -> CanonicalReport:
    """Evaluate left/right/boundary/normalization residuals.

    The left-canonical residual of a (lambda, B) pair is the largest
    off-diagonal Gram entry of the (lambda B) columns.
    """
    rep = CanonicalReport(tol=tol)
    for g in (m.gamma_left, m.gamma_right):
        gram = g.conj() @ g.T
        rep.boundary.append(float(np.abs(gram - np.eye(g.shape[0])).max()))
    lams = m.derived_lambdas()
    for lam in lams:
        rep.norm.append(abs(float(np.linalg.norm(lam)) - 1.0))
    for lam, b in zip(lams, m.b_tensors):
        rl, _, rr = b.shape
        flat = b.reshape(rl, -1)
        gram = flat.conj() @ flat.T
        rep.right.append(float(np.abs(gram - np.eye(rl)).max()))
        cols = (lam[:, None, None] * b).reshape(-1, rr)
        g2 = cols.conj().T @ cols
        off = g2 - np.diag(np.diag(g2))
        rep.left.append(float(np.abs(off).max()) if rr > 1 else 0.0)
    return rep


def _check_hermitian(h: np.ndarray, tol: float = 1e-10):
    if np.abs(h - h.conj().T).max() > tol:
        raise ValueError("Hamiltonian term is not Hermitian")


def _window_value(w: np.ndarray, hterm: np.ndarray, d1: int, d2: int) -> float:
    """<W| hterm (x) I |W> for a window tensor with physical axes (i1, i2)
    in the middle and collapsed bond axes at the ends."""
    hw = hterm.reshape(d1, d2, d1, d2)
    val = np.einsum("aijb,ijkl,aklb->", w.conj(), hw, w, optimize=True)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"energy has non-negligible imaginary part {val.imag}")
    return float(val.real)


def local_energy(lam, b1, b2, hterm) -> float:
    """Energy of one interior term from the window lambda^[j-1] B^[j-1] B^[j],
    assuming canonical collapse on both sides of the window."""
    _check_hermitian(np.asarray(hterm))
    lam = np.asarray(lam, dtype=float)
    b1, b2 = np.asarray(b1), np.asarray(b2)
    w = np.einsum("a,aig,gjb->aijb", lam, b1, b2, optimize=True)
    return _window_value(w, np.asarray(hterm), b1.shape[1], b2.shape[1])


def local_energy_left(gamma1, lam2, b2, hterm) -> float:
    """Boundary variant for H_{1,2} from the window Gamma^[1] lambda^[2] B^[2]."""
    _check_hermitian(np.asarray(hterm))
    g = np.asarray(gamma1)
    w = np.einsum("ai,a,ajb->ijb", g, np.asarray(lam2, dtype=float),
                  np.asarray(b2), optimize=True)
    w = w[None, :, :, :]
    return _window_value(w, np.asarray(hterm), g.shape[1], b2.shape[1])


def local_energy_right(lam, b1, gamma_n, hterm) -> float:
    """Boundary variant for H_{n-1,n} from the window lambda^[n-1] B^[n-1] Gamma^[n]."""
    _check_hermitian(np.asarray(hterm))
    g = np.asarray(gamma_n)
    b1 = np.asarray(b1)
    w = np.einsum("a,aig,gj->aij", np.asarray(lam, dtype=float), b1, g,
                  optimize=True)
    w = w[:, :, :, None]
    return _window_value(w, np.asarray(hterm), b1.shape[1], g.shape[1])


def windowed_energy_sum(m: CanonicalMps, h) -> float:
    """Sum of windowed local energies over all terms, with lambda^[j] for
    j >= 3 recovered via mu chains.  Equals the true energy when the state
    is exactly canonical."""
    lams = m.derived_lambdas()
    terms = h.terms
    if len(terms) != m.n - 1:
        raise ShapeMismatchError("term count does not match site count")
    total = local_energy_left(m.gamma_left, m.lambda2, m.b_tensors[0], terms[0])
    for j in range(1, m.n - 2):
        total += local_energy(lams[j - 1], m.b_tensors[j - 1], m.b_tensors[j],
                              terms[j])
    total += local_energy_right(lams[m.n - 3], m.b_tensors[-1], m.gamma_right,
                                terms[-1])
    return total


def _transfer_envs(tensors):
    """Left and right bond environments of <psi|psi>."""
    n = len(tensors)
    left = [np.ones((1, 1), dtype=complex)]
    for t in tensors[:-1]:
        e = left[-1]
        e = np.einsum("ab,aic,bid->cd", e, t.conj(), t, optimize=True)
        left.append(e)
    right = [np.ones((1, 1), dtype=complex)]
    for t in reversed(tensors[1:]):
        e = right[0]
        e = np.einsum("aic,bid,cd->ab", t.conj(), t, e, optimize=True)
        right.insert(0, e)
    return left, right


def _two_site_value(tensors, left_env, right_env, op, site):
    """<psi| op on (site, site+1) |psi> without normalization (0-based site)."""
    t1, t2 = tensors[site], tensors[site + 1]
    d1, d2 = t1.shape[1], t2.shape[1]
    o = np.asarray(op).reshape(d1, d2, d1, d2)
    w = np.einsum("aib,bjc->aijc", t1, t2, optimize=True)
    return np.einsum("ab,aijc,ijkl,bklf,cf->", left_env, w.conj(), o, w,
                     right_env, optimize=True)


def expectation_full(m: CanonicalMps, h) -> float:
    """True energy <psi|H|psi>/<psi|psi> via transfer-matrix contraction.

    Makes no canonical assumption about the state.
    """
    tensors = m.site_tensors()
    if len(h.terms) != m.n - 1:
        raise ShapeMismatchError("term count does not match site count")
    for j, t in enumerate(tensors):
        if t.shape[1] != h.dims[j]:
            raise ShapeMismatchError(
                f"site {j} has physical dimension {t.shape[1]}, "
                f"Hamiltonian expects {h.dims[j]}"
            )
    left, right = _transfer_envs(tensors)
    overlap = np.einsum("ab,aic,bic->", left[-1], tensors[-1].conj(),
                        tensors[-1], optimize=True)
    num = 0.0 + 0.0j
    for j, term in enumerate(h.terms):
        num += _two_site_value(tensors, left[j], right[j + 1], term, j)
    val = num / overlap
    if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
        raise ValueError(f"energy has non-negligible imaginary part {val.imag}")
    return float(val.real)


def two_site_expectation(m: CanonicalMps, op, site: int) -> float:
    """Normalized expectation of a two-site operator on (site, site+1), 0-based."""
    tensors = m.site_tensors()
    left, right = _transfer_envs(tensors)
    overlap = np.einsum("ab,aic,bic->", left[-1], tensors[-1].conj(),
                        tensors[-1], optimize=True)
    val = _two_site_value(tensors, left[site], right[site + 1], op, site) / overlap
    return float(val.real)


def align_phase(v: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Rotate v by a global phase so its largest-overlap alignment with ref
    is real positive; used for phase-insensitive dense comparisons."""
    ov = np.vdot(ref, v)
    if abs(ov) < 1e-14:
        k = int(np.argmax(np.abs(v)))
        ph = v[k] / abs(v[k]) if abs(v[k]) > 0 else 1.0
        return v / ph
    return v * (ov.conjugate() / abs(ov))


def product_basis_state(n: int, d: int, d_end: int, indices) -> np.ndarray:
    """Dense computational basis state with the given per-site indices."""
    dims = [d_end] + [d] * (n - 2) + [d_end]
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    flat = 0
    for dim, k in zip(dims, indices):
        if not 0 <= k < dim:
            raise IndexError(f"basis index {k} out of range for dimension {dim}")
        flat = flat * dim + k
    v[flat] = 1.0
    return v


MPS_FORMAT_VERSION = 1


def _tensor_to_json(a: np.ndarray):
    if a.ndim == 0:
        z = complex(a)
        return [z.real, z.imag]
    return [_tensor_to_json(x) for x in a]


def _tensor_from_json(obj) -> np.ndarray:
    a = np.asarray(obj, dtype=float)
    if a.ndim < 1 or a.shape[-1] != 2:
        raise ValueError("tensor encoding must nest [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def mps_to_json(m: CanonicalMps) -> dict:
    """JSON document for the MPS file format."""
    return {
        "version": MPS_FORMAT_VERSION,
        "n": m.n, "d": m.d, "D": m.D, "d_end": m.d_end, "s": m.s,
        "gamma_left": _tensor_to_json(m.gamma_left),
        "lambda2": _tensor_to_json(m.lambda2.astype(complex)),
        "b_tensors": [_tensor_to_json(b) for b in m.b_tensors],
        "gamma_right": _tensor_to_json(m.gamma_right),
    }


def mps_from_json(doc: dict) -> CanonicalMps:
    if doc.get("version") != MPS_FORMAT_VERSION:
        raise ValueError(f"unsupported MPS format version {doc.get('version')}")
    lam2 = _tensor_from_json(doc["lambda2"])
    return CanonicalMps(
        n=int(doc["n"]), d=int(doc["d"]), D=int(doc["D"]),
        d_end=int(doc["d_end"]), s=int(doc["s"]),
        gamma_left=_tensor_from_json(doc["gamma_left"]),
        lambda2=lam2.real,
        b_tensors=[_tensor_from_json(b) for b in doc["b_tensors"]],
        gamma_right=_tensor_from_json(doc["gamma_right"]),
    )
