"""Two-dimensional t-SNE projection, self-contained and deterministic.

Input affinities are Gaussians whose per-point bandwidth is solved by
binary search so each conditional distribution hits the requested
perplexity (entropy tolerance 1e-5, at most 50 bisection steps). Output
affinities are Student-t with one degree of freedom. The KL divergence is
minimized by gradient descent with momentum 0.5 for the first 250
iterations and 0.8 after, early exaggeration x12 for the first 250
iterations, and the usual per-coordinate adaptive gains. Everything is
seeded: identical input and seed give identical positions.
"""

from __future__ import annotations

import numpy as np

ENTROPY_TOL = 1e-5
MAX_BISECTIONS = 50
EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
MOMENTUM_SWITCH_ITER = 250
INITIAL_MOMENTUM = 0.5
FINAL_MOMENTUM = 0.8
MIN_GAIN = 0.01
INIT_SIGMA = 1e-4
STEP_SHRINK = 0.8
MIN_STEP_SCALE = 0.05
_EPS = 1e-12


def _squared_distances(points: np.ndarray) -> np.ndarray:
    sq = np.sum(points ** 2, axis=1)
    d = sq[:, None] - 2.0 * (points @ points.T) + sq[None, :]
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _conditional_affinities(distances: np.ndarray, perplexity: float) -> np.ndarray:
    """Per-row Gaussian affinities with bandwidth bisected to the target entropy."""
    n = distances.shape[0]
    target = np.log(perplexity)
    p = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        idx = np.arange(n) != i
        di = distances[i, idx]
        beta = 1.0
        beta_min, beta_max = -np.inf, np.inf
        row = np.exp(-di * beta)
        for _ in range(MAX_BISECTIONS):
            total = row.sum()
            if total <= 0.0:
                total = _EPS
            entropy = np.log(total) + beta * float(di @ row) / total
            diff = entropy - target
            if abs(diff) <= ENTROPY_TOL:
                break
            if diff > 0:
                beta_min = beta
                beta = beta * 2.0 if np.isinf(beta_max) else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if np.isinf(beta_min) else (beta + beta_min) / 2.0
            row = np.exp(-di * beta)
        total = row.sum()
        if not np.isfinite(total) or total <= 0.0:
            # equidistant neighbors below the target entropy: the bandwidth
            # runs away and the row underflows; the limit is uniform
            row = np.ones_like(di)
            total = row.sum()
        p[i, idx] = row / total
    return p


def _output_affinities(positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    num = 1.0 / (1.0 + _squared_distances(positions))
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    return np.maximum(q, _EPS), num


def kl_divergence(p: np.ndarray, positions: np.ndarray) -> float:
    q, _ = _output_affinities(positions)
    return float(np.sum(p * np.log(np.maximum(p, _EPS) / q)))


def joint_affinities(vectors: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized, normalized input affinity matrix."""
    cond = _conditional_affinities(_squared_distances(vectors), perplexity)
    p = cond + cond.T
    p /= p.sum()
    return np.maximum(p, _EPS)


def project_tsne(vectors, perplexity: float = 30.0, iterations: int = 1000,
                 learning_rate: float = 200.0, seed: int = 0,
                 kl_history: list | None = None,
                 kl_every: int = 50) -> np.ndarray:
    """Project row vectors to 2-D.

    Requires at least 4 points and a perplexity of at most (n - 1) / 3.
    Degenerate input (all rows identical) yields positions driven by the
    seeded initialization noise rather than an error. When ``kl_history``
    is given, (iteration, KL) pairs are appended every ``kl_every``
    iterations once early exaggeration has ended.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("vectors must be a 2-D array")
    n = x.shape[0]
    if n < 4:
        raise ValueError(f"need at least 4 points to project, got {n}")
    if perplexity <= 0:
        raise ValueError("perplexity must be positive")
    if perplexity > (n - 1) / 3:
        raise ValueError(
            f"perplexity {perplexity} too large for {n} points "
            f"(limit {(n - 1) / 3:.2f})")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")

    p = joint_affinities(x, perplexity)

    rng = np.random.default_rng(seed)
    y = rng.normal(0.0, INIT_SIGMA, size=(n, 2))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    # Momentum steps may transiently climb; after exaggeration each step is
    # accepted only if it does not raise the KL, otherwise it is undone, the
    # momentum restarted, and the step scale shrunk. This keeps the
    # divergence monotone without touching the descent direction itself.
    step_scale = 1.0
    best_kl = np.inf

    for it in range(iterations):
        p_eff = p * EXAGGERATION if it < EXAGGERATION_ITERS else p
        q, num = _output_affinities(y)
        pq_num = (p_eff - q) * num
        grad = 4.0 * (pq_num.sum(axis=1)[:, None] * y - pq_num @ y)

        momentum = INITIAL_MOMENTUM if it < MOMENTUM_SWITCH_ITER else FINAL_MOMENTUM
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, MIN_GAIN, out=gains)
        velocity = momentum * velocity - learning_rate * step_scale * (gains * grad)
        proposed = y + velocity
        proposed -= proposed.mean(axis=0)

        if it < EXAGGERATION_ITERS:
            y = proposed
        else:
            kl = kl_divergence(p, proposed)
            if kl <= best_kl:
                y = proposed
                best_kl = kl
            else:
                velocity[:] = 0.0
                gains[:] = 1.0
                step_scale = max(step_scale * STEP_SHRINK, MIN_STEP_SCALE)

        if (kl_history is not None and it >= EXAGGERATION_ITERS
                and (it - EXAGGERATION_ITERS) % kl_every == 0):
            kl_history.append((it, kl_divergence(p, y)))

    return y
