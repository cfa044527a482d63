"""Semidefinite relaxations of vertex cover and an operator-splitting solver.

The single-graph model has one Gram variable per vertex plus a distinguished
index 0; every edge contributes the equality X[0,i] + X[0,j] - X[i,j] = 1.
The doubled-graph model applies the same equalities to both copies and to
every cross pair, with cross entries boxed to [-1, 1] instead of [0, 1].

The solver splits the feasible set into three blocks (equality subspace, box,
PSD cone) and runs consensus ADMM: each block is an exact projection, the
equality projection reusing a cached Cholesky factor of the constraint normal
matrix, and the PSD projection a full symmetric eigendecomposition with
negative eigenvalues clipped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ArgumentError, VcgapError
from .graph_core import DoubledGraph, Graph

TAU_FEAS = 1e-5
TAU_PSD = 1e-7
TAU_FACTOR = 1e-4
TAU_CMP = 1e-3
TAU_NORM = 1e-6


class ExtractionError(VcgapError):
    """Gram factorization failed to reproduce the matrix within tolerance."""


@dataclass(frozen=True)
class SdpProblem:
    """Edge equalities X[0,i]+X[0,j]-X[i,j]=1 over a boxed PSD matrix.

    con_i/con_j hold the matrix column indices (1-based within the matrix,
    index 0 being the distinguished vertex) of each constraint's pair.
    """

    dim: int
    con_i: np.ndarray
    con_j: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    labels: tuple[int, ...]

    @property
    def n_constraints(self) -> int:
        return len(self.con_i)


@dataclass(frozen=True)
class SolverConfig:
    tau_feas: float = TAU_FEAS
    tau_psd: float = TAU_PSD
    tau_obj: float = 1e-6
    max_iter: int = 50000
    step: float | None = None  # initial ADMM penalty; None picks a scale-based default
    over_relax: float = 1.8
    adapt_rho: bool = True
    check_every: int = 25
    eig_method: str = "lapack"  # "lapack" | "jacobi"


@dataclass
class GramSolution:
    matrix: np.ndarray
    objective_value: float
    max_equality_violation: float
    max_box_violation: float
    min_eigenvalue: float
    iterations: int
    converged: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.matrix.shape[0],
                "matrix": [float(x) for x in self.matrix.ravel()],
                "objective_value": self.objective_value,
                "max_equality_violation": self.max_equality_violation,
                "max_box_violation": self.max_box_violation,
                "min_eigenvalue": self.min_eigenvalue,
                "iterations": self.iterations,
                "converged": self.converged,
            }
        )


def gram_from_json(text: str) -> GramSolution:
    doc = json.loads(text)
    d = int(doc["dim"])
    return GramSolution(
        matrix=np.array(doc["matrix"], dtype=float).reshape(d, d),
        objective_value=float(doc["objective_value"]),
        max_equality_violation=float(doc["max_equality_violation"]),
        max_box_violation=float(doc["max_box_violation"]),
        min_eigenvalue=float(doc["min_eigenvalue"]),
        iterations=int(doc["iterations"]),
        converged=bool(doc["converged"]),
    )


def build_sdp_single(g: Graph) -> SdpProblem:
    """Relaxation on one graph: dim n+1, every entry boxed to [0,1], unit diagonal."""
    pos = {v: i + 1 for i, v in enumerate(g.vertices)}
    con_i = np.array([pos[u] for u, v in g.edges], dtype=int)
    con_j = np.array([pos[v] for u, v in g.edges], dtype=int)
    d = g.n + 1
    lo = np.zeros((d, d))
    hi = np.ones((d, d))
    np.fill_diagonal(lo, 1.0)
    return SdpProblem(d, con_i, con_j, lo, hi, labels=g.vertices)


def build_sdp_doubled(dg: DoubledGraph) -> SdpProblem:
    """Relaxation on the doubled graph: copy edges plus all cross pairs.

    Cross entries (one index in each copy) are boxed to [-1, 1]; everything
    else, including both copies' rows against index 0, stays in [0, 1].
    """
    comb = dg.combined
    n = dg.base.n
    pos = {v: i + 1 for i, v in enumerate(comb.vertices)}
    con_i = np.array([pos[u] for u, v in comb.edges], dtype=int)
    con_j = np.array([pos[v] for u, v in comb.edges], dtype=int)
    d = comb.n + 1
    lo = np.zeros((d, d))
    hi = np.ones((d, d))
    prime = np.array([pos[c] for c in dg.copy_ids("prime")], dtype=int)
    dprime = np.array([pos[c] for c in dg.copy_ids("double_prime")], dtype=int)
    lo[np.ix_(prime, dprime)] = -1.0
    lo[np.ix_(dprime, prime)] = -1.0
    np.fill_diagonal(lo, 1.0)
    return SdpProblem(d, con_i, con_j, lo, hi, labels=comb.vertices)


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues ascending, orthonormal eigenvector columns). Sweeps
    stop once the off-diagonal Frobenius mass falls below tol relative to the
    matrix norm.
    """
    A = np.array(a, dtype=float)
    d = A.shape[0]
    if A.shape != (d, d):
        raise ArgumentError("matrix must be square")
    if d > 1 and np.max(np.abs(A - A.T)) > 1e-9 * max(1.0, np.max(np.abs(A))):
        raise ArgumentError("matrix must be symmetric")
    A = (A + A.T) / 2.0
    V = np.eye(d)
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol * scale:
            break
        thresh = off / max(d, 1)
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) < 1e-300 or abs(apq) < 0.01 * thresh * 1e-6:
                    continue
                phi = 0.5 * math.atan2(2.0 * apq, A[q, q] - A[p, p])
                c, s = math.cos(phi), math.sin(phi)
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def _eigh(mat: np.ndarray, method: str):
    if method == "jacobi":
        return jacobi_eigh(mat)
    return np.linalg.eigh(mat)


def psd_project(mat: np.ndarray, method: str = "lapack") -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix: clip negative eigenvalues."""
    w, q = _eigh((mat + mat.T) / 2.0, method)
    if w[0] >= 0.0:
        return (mat + mat.T) / 2.0
    w = np.maximum(w, 0.0)
    out = (q * w) @ q.T
    return (out + out.T) / 2.0


def _normal_matrix_factor(p: SdpProblem):
    """Solver state for exact projection onto the equality subspace.

    Each constraint row touches the entries (0,i), (0,j), (i,j); two rows
    overlap only through shared (0,.) entries, so the normal matrix is
    I + B B^T with B the constraint/vertex incidence. Woodbury turns the
    m x m solve into a cached Cholesky solve of the (dim-1)-sized
    I + B^T B, leaving O(m + dim^2) work per projection.
    """
    m = p.n_constraints
    if m == 0:
        return None
    nv = p.dim - 1
    btb = np.eye(nv)
    iv = p.con_i - 1
    jv = p.con_j - 1
    np.add.at(btb, (iv, iv), 1.0)
    np.add.at(btb, (jv, jv), 1.0)
    np.add.at(btb, (iv, jv), 1.0)
    np.add.at(btb, (jv, iv), 1.0)
    return (cho_factor(btb), iv, jv)


def _project_affine(V: np.ndarray, p: SdpProblem, state) -> np.ndarray:
    if state is None:
        return V
    factor, iv, jv = state
    I, J = p.con_i, p.con_j
    nv = p.dim - 1
    r = V[0, I] + V[0, J] - V[I, J] - 1.0
    t = np.bincount(iv, weights=r, minlength=nv) + np.bincount(jv, weights=r, minlength=nv)
    y = cho_solve(factor, t)
    lam = r - (y[iv] + y[jv])
    out = V.copy()
    c0 = np.bincount(iv, weights=lam, minlength=nv) + np.bincount(jv, weights=lam, minlength=nv)
    out[0, 1:] -= c0
    out[1:, 0] -= c0
    # constraint pairs are unique, so fancy assignment has no collisions
    out[I, J] += lam
    out[J, I] += lam
    return out


def admm_solve(p: SdpProblem, cfg: SolverConfig = SolverConfig()) -> GramSolution:
    """Consensus ADMM over the equality subspace, the box, and the PSD cone.

    The returned matrix is the last PSD-block iterate, so its minimum
    eigenvalue is nonnegative up to roundoff; equality and box violations are
    reported on the same matrix. Hitting max_iter returns the best candidate
    flagged as nonconverged rather than raising.
    """
    d = p.dim
    if d == 1:
        return GramSolution(np.ones((1, 1)), 0.0, 0.0, 0.0, 1.0, 0, True)
    factor = _normal_matrix_factor(p)
    C = np.zeros((d, d))
    C[0, 1:] = 0.5
    C[1:, 0] = 0.5
    rho = cfg.step if cfg.step is not None else max(1.0, math.sqrt(d))
    alpha = cfg.over_relax

    Z = np.eye(d)
    U = [np.zeros((d, d)) for _ in range(3)]
    projections: list[Callable[[np.ndarray], np.ndarray]] = [
        lambda V: _project_affine(V, p, factor),
        lambda V: np.clip(V, p.lo, p.hi),
        lambda V: psd_project(V, cfg.eig_method),
    ]

    cand = Z
    prev_obj = math.inf
    last_req = last_rbox = math.inf
    converged = False
    it = 0
    while it < cfg.max_iter:
        it += 1
        Z_prev = Z
        X = [proj(Z - U[i]) for i, proj in enumerate(projections)]
        Xh = [alpha * X[i] + (1.0 - alpha) * Z_prev for i in range(3)]
        Z = (Xh[0] + U[0] + Xh[1] + U[1] + Xh[2] + U[2]) / 3.0 - C / (3.0 * rho)
        for i in range(3):
            U[i] += Xh[i] - Z

        # Asymmetric residual balancing: raising the penalty (less objective
        # pull) is cheap, lowering it too eagerly stalls feasibility.
        if cfg.adapt_rho and it % 25 == 0:
            primal = math.sqrt(sum(float(np.sum((X[i] - Z) ** 2)) for i in range(3)))
            dual = rho * math.sqrt(3.0) * float(np.linalg.norm(Z - Z_prev))
            if primal > 5.0 * dual and rho < 1e5:
                rho *= 2.0
                for i in range(3):
                    U[i] /= 2.0
            elif dual > 50.0 * primal and rho > 1e-3:
                rho /= 2.0
                for i in range(3):
                    U[i] *= 2.0

        if it % cfg.check_every == 0 or it == cfg.max_iter:
            cand = X[2]
            last_req, last_rbox = _residuals(cand, p)
            obj = float(cand[0, 1:].sum())
            if (
                last_req <= cfg.tau_feas
                and last_rbox <= cfg.tau_feas
                and abs(obj - prev_obj) <= cfg.tau_obj
            ):
                converged = True
                break
            prev_obj = obj

    w_min = float(np.linalg.eigvalsh((cand + cand.T) / 2.0)[0])
    return GramSolution(
        matrix=cand,
        objective_value=float(cand[0, 1:].sum()),
        max_equality_violation=last_req,
        max_box_violation=last_rbox,
        min_eigenvalue=w_min,
        iterations=it,
        converged=converged,
    )


def _residuals(M: np.ndarray, p: SdpProblem) -> tuple[float, float]:
    if p.n_constraints:
        r_eq = float(np.max(np.abs(M[0, p.con_i] + M[0, p.con_j] - M[p.con_i, p.con_j] - 1.0)))
    else:
        r_eq = 0.0
    r_box = float(max(np.max(p.lo - M, initial=0.0), np.max(M - p.hi, initial=0.0)))
    return r_eq, max(r_box, 0.0)


@dataclass(frozen=True)
class VectorEmbedding:
    """Unit vectors whose pairwise products reproduce a Gram matrix.

    Index 0 is the distinguished vector; labels map indices 1..dim-1 back to
    graph vertex ids.
    """

    vectors: np.ndarray  # dim x dim, row per index
    labels: tuple[int, ...]

    def products(self, i: int, j: int) -> float:
        return float(self.vectors[i] @ self.vectors[j])

    def index_of(self, label: int) -> int:
        return self.labels.index(label) + 1

    def product_with_origin(self, label: int) -> float:
        return float(self.vectors[0] @ self.vectors[self.index_of(label)])

    def origin_products(self) -> dict[int, float]:
        vals = self.vectors[1:] @ self.vectors[0]
        return {label: float(v) for label, v in zip(self.labels, vals)}

    def vector_for(self, label: int) -> np.ndarray:
        return self.vectors[self.index_of(label)]


def extract_vectors(
    gs: GramSolution,
    labels: tuple[int, ...] | None = None,
    tau_factor: float = TAU_FACTOR,
    eig_method: str = "lapack",
) -> VectorEmbedding:
    """Factor a converged Gram solution into unit vectors.

    Eigendecomposes, clips negative eigenvalues, scales the eigenbasis by the
    square roots, and renormalizes each row to unit length. Raises
    ExtractionError when the renormalized products stray from the Gram
    entries by more than tau_factor.
    """
    if not gs.converged:
        raise ArgumentError("refusing to factor a nonconverged Gram solution")
    M = (gs.matrix + gs.matrix.T) / 2.0
    d = M.shape[0]
    w, q = _eigh(M, eig_method)
    vectors = q * np.sqrt(np.maximum(w, 0.0))
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms < 0.5):
        raise ExtractionError(f"degenerate row norm {norms.min():.3g}; diagonal should be 1")
    vectors = vectors / norms[:, None]
    err = float(np.max(np.abs(vectors @ vectors.T - M)))
    if err > tau_factor:
        raise ExtractionError(f"reconstruction error {err:.3g} exceeds {tau_factor:g}")
    if labels is None:
        labels = tuple(range(d - 1))
    return VectorEmbedding(vectors, tuple(labels))


@dataclass(frozen=True)
class Lemma2Verdict:
    """Margins of the doubled-graph objective against its theoretical bracket."""

    z_single: float
    z_doubled: float
    z_exact: float
    lower_margin: float  # z_doubled - 2*z_single, should be >= -tau
    upper_margin: float  # 2*z_exact - z_doubled, should be >= -tau
    consistent: bool

    def to_dict(self) -> dict:
        return {
            "z_single": self.z_single,
            "z_doubled": self.z_doubled,
            "z_exact": self.z_exact,
            "lower_margin": self.lower_margin,
            "upper_margin": self.upper_margin,
            "consistent": self.consistent,
        }


def check_lemma2_bounds(z4: float, z6: float, z_exact: float, tau_cmp: float = TAU_CMP) -> Lemma2Verdict:
    """Check z6 >= 2*z4 and z6 <= 2*z_exact within tau_cmp; violations are
    reported in the verdict, never raised."""
    lower = z6 - 2.0 * z4
    upper = 2.0 * z_exact - z6
    return Lemma2Verdict(z4, z6, z_exact, lower, upper, lower >= -tau_cmp and upper >= -tau_cmp)
