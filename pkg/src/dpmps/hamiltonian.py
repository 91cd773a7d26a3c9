"""Nearest-neighbor Hamiltonians: model catalog, boundary grouping, checks.

A Hamiltonian on n sites is a list of n-1 Hermitian two-site terms, term j
acting on sites (j, j+1), together with per-site physical dimensions.
Single-site fields are folded into bond terms so the two-site term list is
the complete description.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ConfigError, ShapeMismatchError, SizeGuardError

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

DENSE_DIM_GUARD = 2**14
HERMITICITY_TOL = 1e-10


@dataclass
class NnHamiltonian:
    """Sum of Hermitian nearest-neighbor terms with cached operator norm."""

    n: int
    dims: list                      # per-site physical dimensions
    terms: list                     # n-1 Hermitian matrices, term j on (j, j+1)
    J: float = field(default=0.0)
    s: int = 1

    def __post_init__(self):
        if self.n < 2 or len(self.dims) != self.n:
            raise ShapeMismatchError("dims length must equal site count")
        if len(self.terms) != self.n - 1:
            raise ShapeMismatchError("need exactly n-1 terms")
        for j, t in enumerate(self.terms):
            want = self.dims[j] * self.dims[j + 1]
            t = np.asarray(t, dtype=complex)
            if t.shape != (want, want):
                raise ShapeMismatchError(
                    f"term {j} has shape {t.shape}, expected ({want}, {want})"
                )
            if np.abs(t - t.conj().T).max() > HERMITICITY_TOL:
                raise ValueError(f"term {j} is not Hermitian")
            self.terms[j] = t
        self.J = max_term_norm(self)

    @property
    def d(self) -> int:
        return self.dims[1] if self.n > 2 else self.dims[0]

    @property
    def d_end(self) -> int:
        return self.dims[0]

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))


def max_term_norm(h) -> float:
    """Largest singular value over all terms."""
    best = 0.0
    for t in h.terms:
        sv = np.linalg.svd(np.asarray(t, dtype=complex), compute_uv=False)
        if sv.size:
            best = max(best, float(sv[0]))
    return best


def _fold_fields(bond_terms, fields, d):
    """Add single-site field terms to adjacent bond terms, half each for
    interior sites, whole for boundary sites."""
    n = len(fields)
    out = [t.copy() for t in bond_terms]
    eye = np.eye(d, dtype=complex)
    for i, f in enumerate(fields):
        if f is None:
            continue
        if i == 0:
            out[0] += np.kron(f, eye)
        elif i == n - 1:
            out[-1] += np.kron(eye, f)
        else:
            out[i - 1] += 0.5 * np.kron(eye, f)
            out[i] += 0.5 * np.kron(f, eye)
    return out


def _random_unitary(rng, d: int) -> np.ndarray:
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def build_model(name: str, params: dict | None, n: int,
                seed: int | None = None) -> NnHamiltonian:
    """Construct a catalog Hamiltonian on n ungrouped sites of dimension d.

    Models: zz_chain (terms Z(x)Z), transverse_ising (Z(x)Z plus folded
    transverse field g X), heisenberg (XX+YY+ZZ), random_hermitian (seeded
    dense terms), trap_model (bond penalty 2(I-Z(x)Z) plus folded up-spin
    penalty (I+Z)/2 per site), rotated_classical (diagonal_commuting
    conjugated by fixed random single-site unitaries), diagonal_commuting
    (seeded random diagonal terms).
    """
    params = dict(params or {})
    if n < 3:
        raise ConfigError(f"model {name!r} needs n >= 3, got {n}")
    rng = np.random.default_rng(seed)
    d = int(params.pop("d", 2))
    zz = np.kron(Z, Z)

    if name == "zz_chain":
        terms = [zz.copy() for _ in range(n - 1)]
    elif name == "transverse_ising":
        g = float(params.pop("g", 1.0))
        bonds = [zz.copy() for _ in range(n - 1)]
        terms = _fold_fields(bonds, [g * X] * n, 2)
    elif name == "heisenberg":
        hh = np.kron(X, X) + np.kron(Y, Y) + np.kron(Z, Z)
        terms = [hh.copy() for _ in range(n - 1)]
    elif name == "random_hermitian":
        terms = []
        for _ in range(n - 1):
            m = rng.standard_normal((d * d, d * d)) \
                + 1j * rng.standard_normal((d * d, d * d))
            terms.append((m + m.conj().T) / 2)
    elif name == "trap_model":
        up = (I2 + Z) / 2
        bonds = [2.0 * (np.eye(4, dtype=complex) - zz) for _ in range(n - 1)]
        terms = _fold_fields(bonds, [up] * n, 2)
    elif name == "diagonal_commuting":
        terms = [np.diag(rng.standard_normal(d * d)).astype(complex)
                 for _ in range(n - 1)]
    elif name == "rotated_classical":
        diag_terms = [np.diag(rng.standard_normal(d * d)).astype(complex)
                      for _ in range(n - 1)]
        us = [_random_unitary(rng, d) for _ in range(n)]
        terms = []
        for j, t in enumerate(diag_terms):
            u = np.kron(us[j], us[j + 1])
            terms.append(u @ t @ u.conj().T)
    else:
        raise ConfigError(f"unknown model name {name!r}")
    if params:
        raise ConfigError(f"unknown params for {name!r}: {sorted(params)}")
    return NnHamiltonian(n=n, dims=[d] * n, terms=terms, s=1)


def grouping_count(d: int, D: int) -> int:
    """s = max(1, smallest integer with d^s >= D)."""
    s = 1
    while d**s < D:
        s += 1
    return s


def _embed(term, left_dim: int, right_dim: int) -> np.ndarray:
    return np.kron(np.kron(np.eye(left_dim, dtype=complex), term),
                   np.eye(right_dim, dtype=complex))


def group_boundaries(h: NnHamiltonian, D: int) -> NnHamiltonian:
    """Merge s sites at each chain end into single boundary sites of
    dimension d_end = d^s, embedding the absorbed terms with identities.
    The energy spectrum is preserved exactly."""
    d = h.dims[0]
    if any(dim != d for dim in h.dims):
        raise ConfigError("grouping expects a uniform ungrouped chain")
    s = grouping_count(d, D)
    if h.n - 2 * s < 1:
        raise ConfigError(
            f"chain of {h.n} sites too short for boundary grouping s={s}"
        )
    if s == 1:
        return NnHamiltonian(n=h.n, dims=list(h.dims),
                             terms=[t.copy() for t in h.terms], s=1)
    d_end = d**s
    n_new = h.n - 2 * s + 2
    dims = [d_end] + [d] * (n_new - 2) + [d_end]
    # New first term on (block, site s+1): old terms i=1..s embedded.
    first = np.zeros((d_end * d, d_end * d), dtype=complex)
    for i in range(s):
        first += _embed(h.terms[i], d**i, d ** (s - 1 - i))
    # New last term on (site n-s, block): old terms i=n-s..n-1.
    last = np.zeros((d * d_end, d * d_end), dtype=complex)
    for i in range(s):
        last += _embed(h.terms[h.n - 1 - s + i], d**i, d ** (s - 1 - i))
    middle = [h.terms[j].copy() for j in range(s, h.n - 1 - s)]
    return NnHamiltonian(n=n_new, dims=dims, terms=[first] + middle + [last],
                         s=s)


def is_commuting(h: NnHamiltonian, tol: float = 1e-10) -> bool:
    """True iff every adjacent pair of terms commutes on the 3-site space."""
    for j in range(h.n - 2):
        d1, d2, d3 = h.dims[j], h.dims[j + 1], h.dims[j + 2]
        a = np.kron(h.terms[j], np.eye(d3, dtype=complex))
        b = np.kron(np.eye(d1, dtype=complex), h.terms[j + 1])
        if np.linalg.norm(a @ b - b @ a, 2) > tol:
            return False
    return True


def to_dense_hamiltonian(h: NnHamiltonian) -> np.ndarray:
    """Sum of identity-padded terms as one dense Hermitian matrix."""
    total = h.total_dim
    if total > DENSE_DIM_GUARD:
        raise SizeGuardError(f"Hilbert dimension {total} exceeds {DENSE_DIM_GUARD}")
    out = np.zeros((total, total), dtype=complex)
    for j, t in enumerate(h.terms):
        left = int(np.prod(h.dims[:j], dtype=object)) if j else 1
        right = int(np.prod(h.dims[j + 2:], dtype=object)) if j + 2 < h.n else 1
        out += _embed(t, left, right)
    return out
