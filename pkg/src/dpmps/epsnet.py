"""Grid-based nets of orthonormal-row matrices and the MPS tensor nets.

The generator enumerates matrices over a finite grid of complex entries,
filters by row norm, renormalizes, filters by pairwise row inner products,
and finishes with Gram-Schmidt.  The certified per-row covering radius of
the output family is nu_cert = 59*b*delta for column count b.  Boundary
and interior tensor nets are thin wrappers assembling the family output
into canonical MPS building blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from .errors import EmptyNetError, NetSizeError
from .mps import mu_of

DEFAULT_CAP = 10**7
GS_DEGENERATE_TOL = 1e-7


def real_grid(delta: float) -> np.ndarray:
    """Points {(2j+1)*delta : j = 0..ceil(1/(2 delta))-2} plus {1-delta}.

    Every x in [0, 1] is within delta of some point.
    """
    if not 0.0 < delta <= 0.5:
        raise ValueError(f"delta must be in (0, 0.5], got {delta}")
    count = math.ceil(1.0 / (2.0 * delta)) - 1
    pts = [(2 * j + 1) * delta for j in range(count)]
    pts.append(1.0 - delta)
    return np.array(sorted(set(pts)), dtype=float)


def complex_grid(delta: float) -> np.ndarray:
    """Points {x * exp(2 pi i y)} over the real grid in modulus and phase."""
    r = real_grid(delta)
    return (r[:, None] * np.exp(2j * np.pi * r)[None, :]).ravel()


@dataclass
class NetCertificate:
    """Provenance and certified covering radius of one generated family."""

    a: int
    b: int
    delta: float
    real_nonneg: bool
    nu_cert: float
    candidate_count: int
    survivors_norm_filter: int
    survivors_overlap_filter: int
    dropped_degenerate: int
    size: int


def _enumerate_candidates(grid: np.ndarray, a: int, b: int,
                          cap: int) -> np.ndarray:
    """All a x b matrices over the grid, lexicographic over entry indices."""
    m = len(grid)
    total = m ** (a * b)
    if total > cap:
        raise NetSizeError(
            f"{total} grid candidates for a={a}, b={b} exceed cap {cap}"
        )
    idx = np.arange(total)
    cols = []
    for k in range(a * b):
        cols.append(grid[(idx // m ** (a * b - 1 - k)) % m])
    return np.stack(cols, axis=1).reshape(total, a, b)


def _gram_schmidt_rows(c: np.ndarray):
    """Vectorized Gram-Schmidt over the candidate axis.

    Returns (orthonormalized candidates, mask of candidates where every
    intermediate row kept norm above the degeneracy threshold).
    """
    a = c.shape[1]
    z = np.empty_like(c)
    ok = np.ones(c.shape[0], dtype=bool)
    # second pass reorthogonalizes to push residuals well below 1e-10
    for sweep in range(2):
        src = c if sweep == 0 else z.copy()
        for i in range(a):
            v = src[:, i, :].copy()
            for k in range(i):
                ov = np.einsum("nj,nj->n", z[:, k, :].conj(), v)
                v -= ov[:, None] * z[:, k, :]
            nrm = np.linalg.norm(v, axis=1)
            ok &= nrm > GS_DEGENERATE_TOL
            nrm = np.where(nrm > GS_DEGENERATE_TOL, nrm, 1.0)
            z[:, i, :] = v / nrm[:, None]
    return z, ok


def orthonormal_family(a: int, b: int, delta: float, real_nonneg: bool = False,
                       cap: int = DEFAULT_CAP):
    """Generate the family of a x b orthonormal-row matrices over the grid.

    Pipeline: enumerate grid matrices; drop any with a row norm outside
    [1 - 2 sqrt(b) delta, 1 + 2 sqrt(b) delta]; renormalize rows; drop any
    with an off-diagonal row inner product above 9 sqrt(b) delta in
    magnitude; orthonormalize rows by Gram-Schmidt.  Candidates whose rows
    become numerically dependent during Gram-Schmidt are dropped.

    Returns (list of matrices, NetCertificate).
    """
    if a > b:
        raise ValueError(f"need row count a <= column count b, got {a} > {b}")
    if real_nonneg and a != 1:
        raise ValueError("real nonnegative generation requires a = 1")
    grid = real_grid(delta) if real_nonneg else complex_grid(delta)
    cands = _enumerate_candidates(grid.astype(complex), a, b, cap)
    total = cands.shape[0]

    lo, hi = 1.0 - 2.0 * math.sqrt(b) * delta, 1.0 + 2.0 * math.sqrt(b) * delta
    norms = np.linalg.norm(cands, axis=2)
    keep = np.all((norms >= lo) & (norms <= hi), axis=1)
    cands, norms = cands[keep], norms[keep]
    n1 = cands.shape[0]

    cands = cands / norms[:, :, None]
    if a > 1:
        gram = np.einsum("nij,nkj->nik", cands.conj(), cands)
        off = np.abs(gram - np.eye(a)[None])
        keep = off.max(axis=(1, 2)) <= 9.0 * math.sqrt(b) * delta
        cands = cands[keep]
    n3 = cands.shape[0]

    out, ok = _gram_schmidt_rows(cands)
    out = out[ok]
    if real_nonneg:
        out = out.real.astype(complex)
    cert = NetCertificate(
        a=a, b=b, delta=delta, real_nonneg=real_nonneg,
        nu_cert=59.0 * b * delta, candidate_count=total,
        survivors_norm_filter=n1, survivors_overlap_filter=n3,
        dropped_degenerate=n3 - out.shape[0], size=out.shape[0],
    )
    if out.shape[0] == 0:
        raise EmptyNetError(
            f"all {total} candidates removed for a={a}, b={b}, delta={delta}"
        )
    return [out[i] for i in range(out.shape[0])], cert


@dataclass
class BoundaryNet:
    """Net of D x d_end boundary tensors with orthonormal rows."""

    tensors: list
    delta: float
    nu_cert: float

    @property
    def size(self) -> int:
        return len(self.tensors)


@dataclass
class PairElement:
    """One (lambda, B) net element with its cached right Schmidt vector."""

    lam: np.ndarray      # (D,) nonnegative, unit norm
    b: np.ndarray        # (D, d, D) right canonical
    mu: np.ndarray       # mu_of(lam, b)


@dataclass
class PairNet:
    """Net of canonical (lambda, B) pairs for interior sites."""

    pairs: list
    delta: float
    nu_cert_lambda: float
    nu_cert_b: float
    epsilon_cert: float
    epsilon_op: float
    filtered_out: int = 0

    @property
    def size(self) -> int:
        return len(self.pairs)


def build_end_net(D: int, d_end: int, delta: float,
                  cap: int = DEFAULT_CAP) -> BoundaryNet:
    """Boundary tensor net: family rows viewed as Gamma with Gamma^i_alpha
    = A[alpha, i]."""
    if D > d_end:
        raise ValueError(f"boundary net needs D <= d_end, got {D} > {d_end}")
    mats, cert = orthonormal_family(D, d_end, delta, real_nonneg=False, cap=cap)
    return BoundaryNet(tensors=mats, delta=delta, nu_cert=cert.nu_cert)


def left_gram_offdiag(lam: np.ndarray, b: np.ndarray) -> float:
    """max over beta != beta' of |<(lambda B)_beta | (lambda B)_beta'>|."""
    cols = (lam[:, None, None] * b).reshape(-1, b.shape[2])
    g = cols.conj().T @ cols
    off = g - np.diag(np.diag(g))
    return float(np.abs(off).max()) if b.shape[2] > 1 else 0.0


def build_pair_net(D: int, d: int, delta: float, epsilon_op: float,
                   cap: int = DEFAULT_CAP) -> PairNet:
    """Cartesian product of the lambda net (real nonnegative unit vectors)
    and the B net (right-canonical tensors from D x dD families), keeping
    pairs that are approximately left canonical at threshold 3*epsilon_op."""
    if epsilon_op <= 0:
        raise ValueError(f"epsilon_op must be positive, got {epsilon_op}")
    lam_mats, lam_cert = orthonormal_family(1, D, delta, real_nonneg=True,
                                            cap=cap)
    b_mats, b_cert = orthonormal_family(D, d * D, delta, real_nonneg=False,
                                        cap=cap)
    pairs = []
    dropped = 0
    for lm in lam_mats:
        lam = lm[0].real
        for bm in b_mats:
            # column index (i, beta) is row-major over the dD columns
            b = bm.reshape(D, d, D)
            if left_gram_offdiag(lam, b) > 3.0 * epsilon_op:
                dropped += 1
                continue
            pairs.append(PairElement(lam=lam, b=b, mu=mu_of(lam, b)))
    if not pairs:
        raise EmptyNetError(
            "left-canonical filter removed every pair; "
            f"epsilon_op={epsilon_op} too small for delta={delta}"
        )
    return PairNet(
        pairs=pairs, delta=delta,
        nu_cert_lambda=lam_cert.nu_cert, nu_cert_b=b_cert.nu_cert,
        epsilon_cert=2.0 * 59.0 * (d * D) * delta, epsilon_op=epsilon_op,
        filtered_out=dropped,
    )


def net_size_estimate(D: int, d: int, epsilon: float) -> int:
    """The theoretical net-size bound (144 d D / epsilon)^(D + 2 d D^2),
    evaluated overflow-safe as a big integer."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    base = Fraction(144 * d * D) / Fraction(epsilon).limit_denominator(10**9)
    k = D + 2 * d * D * D
    val = base**k
    return int(val) if val >= 1 else 0


PIPELINE_VERSION = 1


def family_to_json(mats: list, cert: NetCertificate) -> dict:
    """Cache document for a generated family, keyed by its parameters."""
    def enc(a):
        out = np.empty(a.shape + (2,))
        out[..., 0], out[..., 1] = a.real, a.imag
        return out.tolist()
    return {
        "a": cert.a, "b": cert.b, "delta": cert.delta,
        "real_nonneg": cert.real_nonneg,
        "pipeline_version": PIPELINE_VERSION,
        "matrices": [enc(m) for m in mats],
    }


def family_from_json(doc: dict):
    """Inverse of family_to_json; returns (matrices, certificate)."""
    if doc.get("pipeline_version") != PIPELINE_VERSION:
        raise ValueError(
            f"unsupported pipeline version {doc.get('pipeline_version')}"
        )
    mats = []
    for m in doc["matrices"]:
        arr = np.asarray(m, dtype=float)
        mats.append(arr[..., 0] + 1j * arr[..., 1])
    a, b, delta = int(doc["a"]), int(doc["b"]), float(doc["delta"])
    cert = NetCertificate(
        a=a, b=b, delta=delta, real_nonneg=bool(doc["real_nonneg"]),
        nu_cert=59.0 * b * delta, candidate_count=-1,
        survivors_norm_filter=-1, survivors_overlap_filter=-1,
        dropped_degenerate=-1, size=len(mats),
    )
    return mats, cert


@dataclass
class CoveringChain:
    """Distances along the pipeline for one rounded input matrix."""

    d_rounded: float          # max row distance from A to the grid rounding X
    d_renormalized: float     # max row distance from A to Y
    max_overlap: float        # largest off-diagonal row inner product of Y
    d_final: float            # max row distance from A to the Gram-Schmidt Z
    survived_norm_filter: bool
    survived_overlap_filter: bool


def _round_to_grid(a_mat: np.ndarray, grid: np.ndarray) -> np.ndarray:
    flat = a_mat.ravel()
    d2 = np.abs(flat[:, None] - grid[None, :])
    return grid[np.argmin(d2, axis=1)].reshape(a_mat.shape)


def _max_row_dist(a_mat: np.ndarray, b_mat: np.ndarray) -> float:
    return float(np.linalg.norm(a_mat - b_mat, axis=1).max())


def covering_chain(a_mat: np.ndarray, delta: float,
                   real_nonneg: bool = False) -> CoveringChain:
    """Round an orthonormal-row matrix to the grid and run it through the
    pipeline stages, reporting the distance achieved at each stage."""
    a_mat = np.asarray(a_mat, dtype=complex)
    a, b = a_mat.shape
    grid = (real_grid(delta) if real_nonneg else complex_grid(delta)).astype(complex)
    x = _round_to_grid(a_mat, grid)
    norms = np.linalg.norm(x, axis=1)
    lo, hi = 1.0 - 2.0 * math.sqrt(b) * delta, 1.0 + 2.0 * math.sqrt(b) * delta
    s1 = bool(np.all((norms >= lo) & (norms <= hi)))
    y = x / norms[:, None]
    gram = y.conj() @ y.T
    over = np.abs(gram - np.eye(a)).max() if a > 1 else 0.0
    s3 = bool(over <= 9.0 * math.sqrt(b) * delta)
    z, ok = _gram_schmidt_rows(y[None])
    z = z[0]
    return CoveringChain(
        d_rounded=_max_row_dist(a_mat, x),
        d_renormalized=_max_row_dist(a_mat, y),
        max_overlap=float(over),
        d_final=_max_row_dist(a_mat, z) if ok[0] else float("inf"),
        survived_norm_filter=s1,
        survived_overlap_filter=s3,
    )
