"""Small dense semidefinite programming layer.

Problems are stated in the canonical LMI form

    minimize    c^T y
    subject to  F_0^(k) + sum_i y_i F_i^(k)  >= 0   for every block k
                y_i >= 0                            for i in nonneg_vars

with real symmetric block data. Complex Hermitian constraints enter through the
standard real embedding [[Re H, -Im H], [Im H, Re H]]. The numerical backend is
cvxopt's interior-point cone solver; this module owns the problem/solution
contracts, statuses and the Hermitian plumbing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from cvxopt import matrix as _cvxmat
from cvxopt import solvers as _cvxsolvers

__all__ = [
    "SdpStatus",
    "SdpBlock",
    "SdpProblem",
    "SdpSolution",
    "embed_hermitian",
    "hermitian_eig",
    "hermitian_basis",
    "solve_sdp",
    "dump_problem",
]


class SdpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


def embed_hermitian(H: np.ndarray) -> np.ndarray:
    """Real symmetric embedding of a Hermitian matrix.

    Preserves definiteness; every eigenvalue of H appears twice in the output,
    and x^H H x = xt^T Ht xt for xt = (Re x; Im x).
    """
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    scale = max(1.0, float(np.linalg.norm(H)))
    if not np.allclose(H, H.conj().T, atol=1e-12 * scale):
        raise ValueError("input is not Hermitian")
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


def hermitian_eig(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Returns (values, vectors) with vectors[:, i] the unit eigenvector of
    values[i].
    """
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    scale = max(1.0, float(np.linalg.norm(H)))
    if not np.allclose(H, H.conj().T, atol=1e-9 * scale):
        raise ValueError("input is not Hermitian")
    return np.linalg.eigh(H)


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Real-coordinate basis of the n x n Hermitian matrices.

    Ordering: n diagonal units, then for each p < q the real-part pair
    (E_pq + E_qp) and the imaginary-part pair i(E_pq - E_qp); n^2 matrices
    total. W[p, q] = y_re + 1j * y_im under this parametrization.
    """
    basis = []
    for p in range(n):
        B = np.zeros((n, n), dtype=complex)
        B[p, p] = 1.0
        basis.append(B)
    for p in range(n):
        for q in range(p + 1, n):
            B = np.zeros((n, n), dtype=complex)
            B[p, q] = 1.0
            B[q, p] = 1.0
            basis.append(B)
            B = np.zeros((n, n), dtype=complex)
            B[p, q] = 1.0j
            B[q, p] = -1.0j
            basis.append(B)
    return basis


@dataclass(frozen=True)
class SdpBlock:
    """One LMI block F_0 + sum_i y_i F_i >= 0.

    coeffs maps variable index -> symmetric matrix F_i; absent indices have a
    zero coefficient.
    """

    f0: np.ndarray
    coeffs: dict[int, np.ndarray]

    def __post_init__(self):
        f0 = np.atleast_2d(np.asarray(self.f0, dtype=float))
        dim = f0.shape[0]
        if f0.shape != (dim, dim) or not np.allclose(f0, f0.T, atol=1e-12 * max(1.0, np.linalg.norm(f0))):
            raise ValueError("f0 must be square symmetric")
        clean = {}
        for i, F in self.coeffs.items():
            F = np.atleast_2d(np.asarray(F, dtype=float))
            if F.shape != (dim, dim) or not np.allclose(F, F.T, atol=1e-12 * max(1.0, np.linalg.norm(F))):
                raise ValueError(f"coefficient {i} must be square symmetric of dim {dim}")
            clean[int(i)] = F
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "coeffs", clean)

    @property
    def dim(self) -> int:
        return self.f0.shape[0]

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        M = self.f0.copy()
        for i, F in self.coeffs.items():
            M += y[i] * F
        return M


@dataclass(frozen=True)
class SdpProblem:
    num_vars: int
    objective: np.ndarray
    blocks: tuple[SdpBlock, ...]
    nonneg_vars: tuple[int, ...] = ()

    def __post_init__(self):
        obj = np.asarray(self.objective, dtype=float)
        if obj.shape != (self.num_vars,):
            raise ValueError("objective length must equal num_vars")
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "nonneg_vars", tuple(int(i) for i in self.nonneg_vars))
        for blk in self.blocks:
            for i in blk.coeffs:
                if not 0 <= i < self.num_vars:
                    raise ValueError(f"coefficient index {i} out of range")


@dataclass(frozen=True)
class SdpSolution:
    y: np.ndarray
    objective_value: float
    status: SdpStatus
    duality_gap: float
    iterations: int = 0


def _solver_options(tol: float, max_iter: int) -> dict:
    return {
        "show_progress": False,
        "maxiters": int(max_iter),
        "abstol": tol,
        "reltol": tol,
        "feastol": min(1e-7, 10 * tol),
    }


def solve_sdp(problem: SdpProblem, tol: float = 1e-7, max_iter: int = 200) -> SdpSolution:
    """Solve an SdpProblem to the requested relative gap."""
    m = problem.num_vars
    gl_rows: list[np.ndarray] = []
    hl: list[float] = []
    for i in problem.nonneg_vars:
        row = np.zeros(m)
        row[i] = -1.0
        gl_rows.append(row)
        hl.append(0.0)
    gs, hs = [], []
    for blk in problem.blocks:
        if blk.dim == 1:
            # scalar LMI rows become linear inequalities
            row = np.zeros(m)
            for i, F in blk.coeffs.items():
                row[i] = -F[0, 0]
            gl_rows.append(row)
            hl.append(float(blk.f0[0, 0]))
        else:
            G = np.zeros((blk.dim * blk.dim, m))
            for i, F in blk.coeffs.items():
                G[:, i] = -F.flatten("F")
            gs.append(_cvxmat(G))
            hs.append(_cvxmat(blk.f0))
    Gl = _cvxmat(np.array(gl_rows)) if gl_rows else None
    hl_m = _cvxmat(np.array(hl)) if hl else None

    saved = dict(_cvxsolvers.options)
    _cvxsolvers.options.update(_solver_options(tol, max_iter))
    try:
        sol = _cvxsolvers.sdp(
            _cvxmat(problem.objective),
            Gl=Gl,
            hl=hl_m,
            Gs=gs or None,
            hs=hs or None,
        )
    except (ZeroDivisionError, ValueError, ArithmeticError):
        return SdpSolution(np.full(m, np.nan), np.nan, SdpStatus.NUMERICAL_FAILURE, np.inf)
    finally:
        _cvxsolvers.options.clear()
        _cvxsolvers.options.update(saved)

    raw_status = sol["status"]
    iterations = int(sol.get("iterations", 0))
    if raw_status == "optimal":
        y = np.array(sol["x"]).ravel()
        gap = float(sol["gap"]) if sol["gap"] is not None else 0.0
        return SdpSolution(y, float(problem.objective @ y), SdpStatus.OPTIMAL, gap, iterations)
    if raw_status == "primal infeasible":
        return SdpSolution(np.full(m, np.nan), np.nan, SdpStatus.INFEASIBLE, np.inf, iterations)
    if raw_status == "dual infeasible":
        return SdpSolution(np.full(m, np.nan), np.nan, SdpStatus.UNBOUNDED, np.inf, iterations)
    status = SdpStatus.MAX_ITERATIONS if iterations >= max_iter else SdpStatus.NUMERICAL_FAILURE
    if sol.get("x") is not None:
        y = np.array(sol["x"]).ravel()
        gap = float(sol["gap"]) if sol.get("gap") is not None else np.inf
        return SdpSolution(y, float(problem.objective @ y), status, gap, iterations)
    return SdpSolution(np.full(m, np.nan), np.nan, status, np.inf, iterations)


def dump_problem(problem: SdpProblem) -> str:
    """Self-describing text dump (dimensions, then matrices row-major) for cross-checking."""
    lines = [f"num_vars {problem.num_vars}"]
    lines.append("objective " + " ".join(repr(v) for v in problem.objective))
    lines.append("nonneg_vars " + " ".join(str(i) for i in problem.nonneg_vars))
    lines.append(f"num_blocks {len(problem.blocks)}")
    for k, blk in enumerate(problem.blocks):
        lines.append(f"block {k} dim {blk.dim} num_coeffs {len(blk.coeffs)}")
        lines.append("F0 " + " ".join(repr(v) for v in blk.f0.ravel()))
        for i in sorted(blk.coeffs):
            lines.append(f"F{i} " + " ".join(repr(v) for v in blk.coeffs[i].ravel()))
    return "\n".join(lines) + "\n"
