"""Exact t-SNE, written against the standard recipe.

Pairwise affinities use per-point Gaussian bandwidths found by binary search
to hit a target perplexity; the 2-D map minimizes KL(P || Q) with a Student-t
kernel (1 dof) by gradient descent with momentum and early exaggeration.
O(n^2) exact affinities throughout; deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_LOG2 = np.log(2.0)
_EPS = 1e-12


@dataclass(frozen=True)
class TsneParams:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch_iter: int = 250
    seed: int = 0

    def __post_init__(self):
        if self.perplexity <= 0:
            raise ValueError("perplexity must be positive")
        if self.iterations < 250:
            raise ValueError("iterations must be >= 250")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class TsneDiagnostics:
    kl_history: list[float] = field(default_factory=list)
    achieved_log2_perplexity: np.ndarray | None = None
    effective_perplexity: float = 0.0


def pairwise_sq_distances(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1, keepdims=True)
    d2 = sq + sq.T - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _row_affinities(d2_row: np.ndarray, i: int, beta: float) -> tuple[np.ndarray, float]:
    """Normalized Gaussian affinities of point i and their entropy in bits."""
    shifted = d2_row - d2_row.min(initial=np.inf, where=np.arange(d2_row.size) != i)
    p = np.exp(-beta * np.maximum(shifted, 0.0))
    p[i] = 0.0
    total = p.sum()
    p /= total
    with np.errstate(divide="ignore", invalid="ignore"):
        h_nats = -np.sum(np.where(p > 0, p * np.log(p), 0.0))
    return p, h_nats / _LOG2


def conditional_probabilities(
    d2: np.ndarray,
    perplexity: float,
    max_iter: int = 50,
    tol: float = 1e-5,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-row bandwidth binary search matching log2(perplexity) within tol.

    Returns the row-normalized conditional affinity matrix and the achieved
    log2-perplexity per row.
    """
    n = d2.shape[0]
    target = np.log2(perplexity)
    p_cond = np.zeros((n, n), np.float64)
    achieved = np.zeros(n, np.float64)
    for i in range(n):
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        row, h = _row_affinities(d2[i], i, beta)
        for _ in range(max_iter):
            diff = h - target
            if abs(diff) <= tol:
                break
            if diff > 0:  # entropy too high -> tighten the kernel
                beta_min = beta
                beta = beta * 2.0 if not np.isfinite(beta_max) else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if not np.isfinite(beta_min) else (beta + beta_min) / 2.0
            row, h = _row_affinities(d2[i], i, beta)
        p_cond[i] = row
        achieved[i] = h
    return p_cond, achieved


def joint_probabilities(x: np.ndarray, perplexity: float) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrized, normalized joint affinities P (zero diagonal, sum 1)."""
    d2 = pairwise_sq_distances(x)
    p_cond, achieved = conditional_probabilities(d2, perplexity)
    p = (p_cond + p_cond.T) / (2.0 * x.shape[0])
    np.fill_diagonal(p, 0.0)
    off = ~np.eye(x.shape[0], dtype=bool)
    p[off] = np.maximum(p[off], _EPS)
    p /= p.sum()
    return p, achieved


def student_t_affinities(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Q matrix (normalized, zero diagonal) and the unnormalized kernel."""
    qnum = 1.0 / (1.0 + pairwise_sq_distances(y))
    np.fill_diagonal(qnum, 0.0)
    q = qnum / qnum.sum()
    return q, qnum


def kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    q, _ = student_t_affinities(y)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], _EPS))))


def kl_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    q, qnum = student_t_affinities(y)
    pq = (p - q) * qnum
    return 4.0 * (np.diag(pq.sum(axis=1)) - pq) @ y


def _validate_vectors(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected an n x N matrix, got shape {x.shape}")
    n = x.shape[0]
    if n < 8:
        raise ValueError(f"need at least 8 vectors, got {n}")
    if not np.isfinite(x).all():
        raise ValueError("input vectors must be finite")
    _, counts = np.unique(x, axis=0, return_counts=True)
    if counts.max() > n - 3:
        raise ValueError(
            f"a vector repeats {counts.max()} times; at most n-3 = {n - 3} copies allowed"
        )
    return x


def run_tsne(vectors: np.ndarray, params: TsneParams = TsneParams()) -> tuple[np.ndarray, TsneDiagnostics]:
    """Full t-SNE returning coordinates plus convergence diagnostics."""
    x = _validate_vectors(vectors)
    n = x.shape[0]
    rng = np.random.default_rng([int(params.seed), 0x75E])

    # tiny seeded jitter keeps duplicate rows from collapsing the bandwidth search
    x = x + rng.normal(0.0, 1e-9, x.shape)

    eff_perp = min(params.perplexity, (n - 1) / 3.0)
    p, achieved = joint_probabilities(x, eff_perp)

    y = rng.normal(0.0, 1e-4, (n, 2))
    vel = np.zeros_like(y)
    gains = np.ones_like(y)  # standard per-coordinate adaptive gains
    diag = TsneDiagnostics(achieved_log2_perplexity=achieved, effective_perplexity=eff_perp)

    for it in range(params.iterations):
        if it == params.exaggeration_iters:
            # fresh optimizer state for the fine phase, as in the standard
            # two-stage schedule; avoids carrying exaggeration-scale momentum
            vel[:] = 0.0
            gains[:] = 1.0
        p_eff = p * params.early_exaggeration if it < params.exaggeration_iters else p
        q, qnum = student_t_affinities(y)
        pq = (p_eff - q) * qnum
        grad = 4.0 * (np.diag(pq.sum(axis=1)) - pq) @ y
        # decay-only gains: damp coordinates whose gradient keeps reversing,
        # never amplify; keeps the KL descent smooth at the default step size
        same_sign = np.sign(grad) == np.sign(vel)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.clip(gains, 0.01, 1.0, out=gains)
        momentum = params.momentum_early if it < params.momentum_switch_iter else params.momentum_late
        vel = momentum * vel - params.learning_rate * (gains * grad)
        y = y + vel
        y = y - y.mean(axis=0)
        diag.kl_history.append(kl_divergence(p, y))

    return y, diag


def tsne(vectors: np.ndarray, params: TsneParams = TsneParams()) -> np.ndarray:
    """Map n x N vectors to n x 2 coordinates."""
    coords, _ = run_tsne(vectors, params)
    return coords
