"""Dynamic program over net elements with stitching, and its certificates.

Site by site, the solver keeps one best-so-far entry per surviving net
pair.  A transition from pair q at site j-1 to pair p at site j is
admissible when the cached right Schmidt vector mu_q is within
2*epsilon_op of lambda_p; its cost is the windowed energy of the term
between the two sites.  The returned sandwich bounds are

    e_alg - 6 J n eps  <=  e_exact  <=  e_true  <=  e_alg + 1.5 J D^2 n^2 eps.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import hashlib
import json
import time

import numpy as np

from .epsnet import BoundaryNet, PairNet, build_end_net, build_pair_net
from .errors import NoAdmissibleTransitionError
from .hamiltonian import NnHamiltonian
from .mps import CanonicalMps, expectation_full, mu_of

CHUNK = 256


@dataclass
class DpEntry:
    """One list entry: a net pair with its best accumulated energy."""

    pair_index: int
    tail: int | None        # index of the chosen entry in the previous list
    energy: float


@dataclass
class DefectMatrix:
    """Left-canonical defect Delta of a (lambda, B, lambda_next) triplet:
    the off-diagonal Gram matrix of the (lambda B) columns plus the
    diagonal mismatch |lambda_next|^2 - |mu|^2."""

    delta: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.delta).max())


@dataclass
class SolveResult:
    """Assembled minimizer with its certificates and diagnostics."""

    omega: CanonicalMps
    e_alg: float
    e_true: float
    lower_bound: float
    upper_slack: float
    epsilon_used: float
    epsilon_op: float
    delta_used: float
    N: int
    n_end: int
    assignment: list
    dropped: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        doc = {
            "e_alg": repr(self.e_alg),
            "assignment": self.assignment,
            "N": self.N, "n_end": self.n_end,
            "epsilon_op": repr(self.epsilon_op),
        }
        return hashlib.sha256(
            json.dumps(doc, sort_keys=True).encode()
        ).hexdigest()


def error_bounds(e_alg: float, J: float, n: int, D: int,
                 epsilon: float) -> tuple:
    """(lower bound on the exact ground energy, upper slack on e_true)."""
    return e_alg - 6.0 * J * n * epsilon, 1.5 * J * D * D * n * n * epsilon


def epsilon_for_target(target_error: float, J: float, D: int, n: int) -> float:
    """Net accuracy needed for a given additive energy error."""
    return target_error / (2.0 * J * D * D * n * n)


def left_defect(lam, b, lam_next) -> DefectMatrix:
    """Defect matrix of one DP junction."""
    lam = np.asarray(lam, dtype=float)
    b = np.asarray(b)
    lam_next = np.asarray(lam_next, dtype=float)
    cols = (lam[:, None, None] * b).reshape(-1, b.shape[2])
    g = cols.conj().T @ cols
    r = g - np.diag(np.diag(g))
    mu = mu_of(lam, b)
    return DefectMatrix(delta=r + np.diag(lam_next**2 - mu**2))


def _net_arrays(net: PairNet):
    lam = np.stack([p.lam for p in net.pairs])
    b = np.stack([p.b for p in net.pairs])
    mu = np.stack([p.mu for p in net.pairs])
    return lam, b, mu


def _chunked_matmul(g_flat, t2_flat, threads: int) -> np.ndarray:
    """g_flat @ t2_flat.T with fixed-size row chunks; chunk boundaries do
    not depend on the thread count, so results are bitwise identical."""
    rows = g_flat.shape[0]
    out = np.empty((rows, t2_flat.shape[0]), dtype=complex)
    spans = [(i, min(i + CHUNK, rows)) for i in range(0, rows, CHUNK)]

    def work(span):
        lo, hi = span
        out[lo:hi] = g_flat[lo:hi] @ t2_flat.T

    if threads <= 1 or len(spans) == 1:
        for sp in spans:
            work(sp)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, spans))
    return out


def transition_energies(net: PairNet, hterm: np.ndarray,
                        threads: int = 1) -> np.ndarray:
    """Matrix E[q, p] of windowed energies of the term between a pair q at
    the left site and a pair p at the right site."""
    lam, b, _ = _net_arrays(net)
    D, d = b.shape[1], b.shape[2]
    h = np.asarray(hterm).reshape(d, d, d, d)
    m = lam[:, :, None, None] * b
    t1 = np.einsum("qaix,qaky->qxiyk", m.conj(), m, optimize=True)
    t2 = np.einsum("pxjb,pylb->pxjyl", b.conj(), b, optimize=True)
    g = np.einsum("qxiyk,ijkl->qxjyl", t1, h, optimize=True)
    e = _chunked_matmul(g.reshape(len(net.pairs), -1),
                        t2.reshape(len(net.pairs), -1), threads)
    return e.real


def stitching_mask(net: PairNet, epsilon_op: float) -> np.ndarray:
    """Admissibility A[q, p]: ||mu_q - lambda_p|| <= 2*epsilon_op."""
    lam, _, mu = _net_arrays(net)
    dist = np.linalg.norm(mu[:, None, :] - lam[None, :, :], axis=2)
    return dist <= 2.0 * epsilon_op + 1e-14


def extend_list(prev: list, net: PairNet, hterm, epsilon_op: float,
                threads: int = 1) -> list:
    """One DP step: best admissible predecessor for every net pair.

    Ties at the argmin go to the predecessor with the lowest list index,
    which is the lowest net index since lists are index-sorted.
    """
    if not prev:
        raise NoAdmissibleTransitionError("previous DP list is empty")
    e_trans = transition_energies(net, hterm, threads)
    mask = stitching_mask(net, epsilon_op)
    q_idx = np.array([e.pair_index for e in prev])
    e_prev = np.array([e.energy for e in prev])
    cost = e_prev[:, None] + e_trans[q_idx]
    cost = np.where(mask[q_idx], cost, np.inf)
    best = cost.min(axis=0)
    tails = cost.argmin(axis=0)
    out = [DpEntry(pair_index=p, tail=int(tails[p]), energy=float(best[p]))
           for p in range(len(net.pairs)) if np.isfinite(best[p])]
    if not out:
        raise NoAdmissibleTransitionError(
            f"no admissible transition at epsilon_op={epsilon_op}"
        )
    return out


def _boundary_left_energies(end_net: BoundaryNet, net: PairNet,
                            hterm) -> np.ndarray:
    """E[g, p]: windowed energy of the first term for boundary tensor g
    and first interior pair p."""
    lam, b, _ = _net_arrays(net)
    d_end = end_net.tensors[0].shape[1]
    d = b.shape[2]
    h = np.asarray(hterm).reshape(d_end, d, d_end, d)
    out = np.empty((end_net.size, len(net.pairs)))
    for gi, gam in enumerate(end_net.tensors):
        w = np.einsum("ai,pa,pajb->pijb", gam, lam, b, optimize=True)
        val = np.einsum("pijb,ijkl,pklb->p", w.conj(), h, w, optimize=True)
        out[gi] = val.real
    return out


def _boundary_right_energies(net: PairNet, end_net: BoundaryNet,
                             hterm) -> np.ndarray:
    """E[q, g]: windowed energy of the last term for interior pair q and
    boundary tensor g."""
    lam, b, _ = _net_arrays(net)
    d = b.shape[2]
    d_end = end_net.tensors[0].shape[1]
    h = np.asarray(hterm).reshape(d, d_end, d, d_end)
    out = np.empty((len(net.pairs), end_net.size))
    for gi, gam in enumerate(end_net.tensors):
        w = np.einsum("pa,paig,gj->paij", lam, b, gam, optimize=True)
        val = np.einsum("paij,ijkl,pakl->p", w.conj(), h, w, optimize=True)
        out[:, gi] = val.real
    return out


def initial_list(end_net: BoundaryNet, net: PairNet, hterm) -> list:
    """First DP list: each pair keeps its best boundary tensor."""
    e0 = _boundary_left_energies(end_net, net, hterm)
    best = e0.min(axis=0)
    tails = e0.argmin(axis=0)
    return [DpEntry(pair_index=p, tail=int(tails[p]), energy=float(best[p]))
            for p in range(len(net.pairs))]


def solve(h: NnHamiltonian, D: int, delta: float,
          epsilon_op: float | None = None, cap: int = 10**7,
          threads: int = 1,
          end_net: BoundaryNet | None = None,
          pair_net: PairNet | None = None) -> SolveResult:
    """Run the full dynamic program on a boundary-grouped Hamiltonian.

    Nets may be passed in to share them across runs; otherwise they are
    built from (D, delta).  epsilon_op defaults to the certified epsilon
    of the pair net.
    """
    t0 = time.perf_counter()
    d_end, d, n = h.dims[0], h.dims[1], h.n
    if pair_net is None:
        eps_tmp = epsilon_op if epsilon_op is not None \
            else 2.0 * 59.0 * (d * D) * delta
        pair_net = build_pair_net(D, d, delta, eps_tmp, cap)
    if end_net is None:
        end_net = build_end_net(D, d_end, delta, cap)
    if epsilon_op is None:
        epsilon_op = pair_net.epsilon_cert
    t_net = time.perf_counter()

    lists = [initial_list(end_net, pair_net, h.terms[0])]
    dropped = []
    for j in range(3, n):
        nxt = extend_list(lists[-1], pair_net, h.terms[j - 2], epsilon_op,
                          threads)
        alive = {e.pair_index for e in nxt}
        dropped.append(sorted(set(range(pair_net.size)) - alive))
        lists.append(nxt)

    last = lists[-1]
    e_right = _boundary_right_energies(pair_net, end_net, h.terms[-1])
    q_idx = np.array([e.pair_index for e in last])
    e_prev = np.array([e.energy for e in last])
    total = e_prev[:, None] + e_right[q_idx]
    # scan boundary tensors in index order; strict improvement keeps the
    # lowest-index winner on ties
    best_val, best_g, best_q = np.inf, -1, -1
    for gi in range(end_net.size):
        col = total[:, gi]
        qi = int(col.argmin())
        if col[qi] < best_val:
            best_val, best_g, best_q = float(col[qi]), gi, qi
    t_dp = time.perf_counter()

    # walk the back-pointers
    chosen = []
    li, ei = len(lists) - 1, best_q
    while li >= 0:
        entry = lists[li][ei]
        chosen.append(entry.pair_index)
        ei = entry.tail
        li -= 1
    gamma1_idx = ei
    chosen.reverse()
    assignment = [int(gamma1_idx)] + [int(c) for c in chosen] + [int(best_g)]

    pairs = [pair_net.pairs[c] for c in chosen]
    omega = CanonicalMps(
        n=n, d=d, D=D, d_end=d_end, s=h.s,
        gamma_left=np.asarray(end_net.tensors[gamma1_idx]),
        lambda2=pairs[0].lam.copy(),
        b_tensors=[p.b.copy() for p in pairs],
        gamma_right=np.asarray(end_net.tensors[best_g]),
    )
    e_true = expectation_full(omega, h)
    eps_cert = pair_net.epsilon_cert
    lower, upper_slack = error_bounds(best_val, h.J, n, D, eps_cert)
    t_end = time.perf_counter()
    return SolveResult(
        omega=omega, e_alg=best_val, e_true=e_true,
        lower_bound=lower, upper_slack=upper_slack,
        epsilon_used=eps_cert, epsilon_op=epsilon_op, delta_used=delta,
        N=pair_net.size, n_end=end_net.size, assignment=assignment,
        dropped=dropped,
        timings={
            "net_ms": 1e3 * (t_net - t0),
            "dp_ms": 1e3 * (t_dp - t_net),
            "assemble_ms": 1e3 * (t_end - t_dp),
        },
    )
