"""Exact multinomial, convolutional ("true") and post-processed ("naive")
likelihoods, with maximum-likelihood estimation under each model.

Everything is computed in log space; the convolutional likelihood is an exact
sum over the (2m+1)^(k-1) noise lattice (clipped to the multinomial support),
combined by log-sum-exp.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DegenerateDataError, DomainError, OptimizerError, SizeError, ValidationError
from .kernels import NoiseKernel
from .tables import FrequencyTable, PerturbedTable, PostProcessedTable

LATTICE_CAP = 10**7
NEG_INF = float("-inf")


@dataclass(frozen=True)
class SimplexPoint:
    """Interior point of the probability simplex, stored as k-1 free coordinates."""

    probs: tuple[float, ...]
    interior_margin: float = 0.0

    def __post_init__(self):
        if len(self.probs) < 1:
            raise ValidationError("a simplex point needs at least one free coordinate")
        if any(p <= 0 for p in self.probs):
            raise ValidationError("free coordinates must be strictly positive")
        if sum(self.probs) >= 1:
            raise ValidationError("free coordinates must sum to less than 1")
        if self.interior_margin > min(min(self.probs), self.last) + 1e-15:
            raise ValidationError("interior_margin exceeds the distance to the boundary")

    @property
    def k(self) -> int:
        return len(self.probs) + 1

    @property
    def last(self) -> float:
        return 1.0 - sum(self.probs)

    @property
    def full(self) -> tuple[float, ...]:
        return self.probs + (self.last,)

    @classmethod
    def from_full(cls, full, interior_margin: float = 0.0) -> "SimplexPoint":
        return cls(tuple(float(p) for p in full[:-1]), interior_margin)


@dataclass(frozen=True)
class FisherInfo:
    """Fisher information of the multinomial model in the k-1 free coordinates."""

    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))


def default_margin(n: int, k: int) -> float:
    """Interior clamp used by the MLEs; O(1/n), below Edgeworth resolution."""
    return 1.0 / (2 * n + k)


def clamp_to_interior(proportions, margin: float) -> SimplexPoint:
    """Lift a length-k proportion vector onto the interior of the simplex.

    Entries below the margin are raised to it; the remaining mass is
    redistributed proportionally over the unclamped entries.
    """
    q = np.asarray(proportions, dtype=float)
    k = q.size
    if margin <= 0 or margin >= 1.0 / k:
        raise ValidationError("margin must be in (0, 1/k)")
    q = np.maximum(q, 0.0)
    total = q.sum()
    q = q / total if total > 0 else np.full(k, 1.0 / k)
    low = q < margin
    while True:
        remaining = 1.0 - margin * low.sum()
        scaled = np.where(low, margin, q * remaining / q[~low].sum())
        newly_low = ~low & (scaled < margin)
        if not newly_low.any():
            q = scaled
            break
        low |= newly_low
    return SimplexPoint(tuple(q[:-1]), margin)


def _log_pmf(full_p: np.ndarray, counts: np.ndarray, n: int) -> np.ndarray:
    """Multinomial log pmf for rows of ``counts`` (k columns summing to n)."""
    counts = np.atleast_2d(counts)
    out = np.full(counts.shape[0], NEG_INF)
    valid = np.all(counts >= 0, axis=1)
    if valid.any():
        c = counts[valid]
        out[valid] = (
            gammaln(n + 1)
            - gammaln(c + 1).sum(axis=1)
            + (c * np.log(full_p)).sum(axis=1)
        )
    return out


def multinomial_log_pmf(p: SimplexPoint, a: FrequencyTable) -> float:
    """Log multinomial mass of the table under p, via log-gamma."""
    if a.k != p.k:
        raise DomainError(f"table has {a.k} cells but p has {p.k}")
    counts = np.asarray(a.counts)
    if counts.sum() != a.n or np.any(counts < 0):
        raise DomainError("counts outside the multinomial support")
    return float(_log_pmf(np.asarray(p.full), counts, a.n)[0])


def _lattice(b_free: np.ndarray, n: int, m: int) -> np.ndarray:
    """All noise vectors l with each coordinate in [max(-m, b_i - n), min(m, b_i)]."""
    ranges = []
    for bi in b_free:
        lo, hi = max(-m, int(bi) - n), min(m, int(bi))
        if lo > hi:
            return np.empty((0, b_free.size), dtype=int)
        ranges.append(range(lo, hi + 1))
    total = 1
    for r in ranges:
        total *= len(r)
    if total > LATTICE_CAP:
        raise SizeError(f"lattice of {total} terms exceeds the exact-evaluation cap")
    return np.array(list(itertools.product(*ranges)), dtype=int)


def _true_terms(p: SimplexPoint, b: PerturbedTable, kernel: NoiseKernel):
    """Log-weights and cell counts of every lattice term of the true likelihood."""
    if b.k != p.k:
        raise DomainError(f"table has {b.k} cells but p has {p.k}")
    n, k, m = b.n, b.k, kernel.m
    b_free = np.asarray(b.values[:-1])
    lat = _lattice(b_free, n, m)
    if lat.shape[0] == 0:
        return np.empty(0), np.empty((0, k), dtype=int)
    free_counts = b_free[None, :] - lat
    last = n - free_counts.sum(axis=1)
    counts = np.column_stack([free_counts, last])
    valid = last >= 0
    lat, counts = lat[valid], counts[valid]
    if lat.shape[0] == 0:
        return np.empty(0), np.empty((0, k), dtype=int)
    log_noise = kernel.log_prob(lat).sum(axis=1)
    log_w = log_noise + _log_pmf(np.asarray(p.full), counts, n)
    return log_w, counts


def true_log_likelihood(p: SimplexPoint, b: PerturbedTable, kernel: NoiseKernel) -> float:
    """Log of the multinomial-convolved-with-noise mass at b.

    Returns -inf (a sentinel, not an exception) when every lattice term is
    outside the multinomial support.
    """
    log_w, _ = _true_terms(p, b, kernel)
    if log_w.size == 0:
        return NEG_INF
    return float(logsumexp(log_w))


def h_factor(p: SimplexPoint, b: PerturbedTable, kernel: NoiseKernel) -> float:
    """log H, where  true likelihood = multinomial(b) * H.

    Computed through the falling/rising-factorial count ratios in log space,
    independently of the direct convolution sum, so the identity
    true_log_likelihood == multinomial_log_pmf + h_factor is a nontrivial
    cross-check.
    """
    n, m = b.n, kernel.m
    b_all = np.asarray(b.values)
    if np.any(b_all < 0):
        raise DomainError("decomposition needs the central term inside the support")
    b_free = b_all[:-1]
    lat = _lattice(b_free, n, m)
    free_counts = b_free[None, :] - lat
    last = n - free_counts.sum(axis=1)
    valid = last >= 0
    lat, free_counts, last = lat[valid], free_counts[valid], last[valid]
    # log rho(n, b, l): factorial ratios between the shifted and central terms
    log_rho = (
        gammaln(b_free + 1).sum()
        - gammaln(free_counts + 1).sum(axis=1)
        + gammaln(n - b_free.sum() + 1)
        - gammaln(last + 1)
    )
    ratios = np.log(p.last) - np.log(np.asarray(p.probs))
    log_terms = kernel.log_prob(lat).sum(axis=1) + log_rho + lat @ ratios
    return float(logsumexp(log_terms))


def naive_log_likelihood(p: SimplexPoint, bplus: PostProcessedTable) -> float:
    """Multinomial log likelihood at the post-processed counts and total."""
    return multinomial_log_pmf(p, FrequencyTable(bplus.values))


def mle_naive(bplus: PostProcessedTable) -> SimplexPoint:
    """Empirical proportions b+/n+, clamped into the interior."""
    if bplus.n_plus == 0:
        raise DegenerateDataError("post-processed table sums to zero")
    margin = default_margin(bplus.n_plus, bplus.k)
    return clamp_to_interior(np.asarray(bplus.values) / bplus.n_plus, margin)


def _true_derivs(p: SimplexPoint, b: PerturbedTable, kernel: NoiseKernel):
    """Value, gradient and Hessian of the true log likelihood in free coordinates."""
    log_w, counts = _true_terms(p, b, kernel)
    if log_w.size == 0:
        return NEG_INF, None, None
    value = float(logsumexp(log_w))
    w = np.exp(log_w - value)
    probs = np.asarray(p.probs)
    free = counts[:, :-1]
    last = counts[:, -1]
    # d log pmf / dp_i = c_i/p_i - c_k/p_k
    g_terms = free / probs[None, :] - (last / p.last)[:, None]
    grad = w @ g_terms
    # d2 log pmf = -diag(c_i/p_i^2) - c_k/p_k^2
    h_flat = -(w @ (last / p.last**2)) * np.ones((p.k - 1, p.k - 1))
    h_flat -= np.diag(w @ (free / probs[None, :] ** 2))
    cross = (g_terms * w[:, None]).T @ g_terms
    hess = h_flat + cross - np.outer(grad, grad)
    return value, grad, hess


def _projected_grad(x: np.ndarray, grad: np.ndarray, margin: float) -> np.ndarray:
    """Gradient with components pointing out of the feasible box zeroed."""
    pg = grad.copy()
    at_sum = 1.0 - x.sum() <= margin * (1 + 1e-9)
    if at_sum and pg.sum() > 0:
        pg = pg - pg.mean()
    at_low = x <= margin * (1 + 1e-9)
    pg[at_low & (pg < 0)] = 0.0
    return pg


def _project_box(y: np.ndarray, margin: float) -> np.ndarray:
    """Euclidean projection onto {y_i >= margin, sum y <= 1 - margin}."""
    y = np.maximum(y, margin)
    cap = 1.0 - margin - margin * y.size  # budget for u = y - margin
    if cap <= 0:
        return np.full_like(y, margin)
    u = y - margin
    if u.sum() <= cap:
        return y
    # project u onto the simplex {u >= 0, sum u = cap} (sort-based algorithm)
    s = np.sort(u)[::-1]
    css = np.cumsum(s)
    idx = np.arange(1, u.size + 1)
    cond = s - (css - cap) / idx > 0
    rho = int(np.nonzero(cond)[0][-1]) + 1
    theta = (css[rho - 1] - cap) / rho
    return np.maximum(u - theta, 0.0) + margin


def _quadratic_gain(pg: np.ndarray, hess: np.ndarray) -> float:
    """Upper estimate of the remaining ascent gain under the local quadratic model."""
    try:
        return float(abs(0.5 * pg @ np.linalg.solve(hess, pg)))
    except np.linalg.LinAlgError:
        hnorm = float(np.max(np.abs(hess)))
        return float(pg @ pg) / (2 * hnorm) if hnorm > 0 else float("inf")


def mle_true(b: PerturbedTable, kernel: NoiseKernel, tol: float = 1e-10,
             max_iter: int = 100) -> SimplexPoint:
    """Maximize the true log likelihood over the interior of the simplex.

    Damped Newton from the clamped empirical point; the empirical point is
    within O(|eps_n|^3/n) of the optimum, so Newton converges in a few steps.
    Falls back to gradient ascent when the Hessian is singular.
    """
    n, k = b.n, b.k
    margin = default_margin(n, k)
    start = clamp_to_interior(np.asarray(b.values, dtype=float) / n, margin)
    if kernel.m == 0:
        return start
    x = np.asarray(start.probs)

    def converged_on_face(x, grad, value):
        # Movement achievable along the projected ascent path is negligible.
        d = _project_box(x + 1e-6 * grad / max(1.0, float(np.max(np.abs(grad)))), margin) - x
        return grad @ d <= 1e-10 * (1.0 + abs(value))

    value, grad, hess = _true_derivs(SimplexPoint(tuple(x), margin), b, kernel)
    if value == NEG_INF:
        raise DomainError("perturbed table admits no support point")
    for _ in range(max_iter):
        pg = _projected_grad(x, grad, margin)
        if np.max(np.abs(pg)) < tol:
            return SimplexPoint(tuple(x), margin)
        directions = []
        try:
            step = np.linalg.solve(hess, -grad)
            if step @ grad > 0:
                directions.append(step)
        except np.linalg.LinAlgError:
            pass
        directions.append(pg)  # fallback when Newton is blocked by the box
        improved = False
        for step in directions:
            t = 1.0
            for _ in range(60):
                y = _project_box(x + t * step, margin)
                if np.max(np.abs(y - x)) > 0:
                    cand = SimplexPoint(tuple(y), margin)
                    v2, g2, h2 = _true_derivs(cand, b, kernel)
                    if v2 > value:
                        x, value, grad, hess = y, v2, g2, h2
                        improved = True
                        break
                t /= 2
            if improved:
                break
        if not improved:
            # Ascent stalled: converged on a face, converged to machine
            # precision (the quadratic-model gain is below the resolution of
            # the log likelihood), or a genuine failure.
            pg = _projected_grad(x, grad, margin)
            if (np.max(np.abs(pg)) < max(tol, 1e-8)
                    or _quadratic_gain(pg, hess) < 1e-10 * (1.0 + abs(value))
                    or converged_on_face(x, grad, value)):
                return SimplexPoint(tuple(x), margin)
            raise OptimizerError(
                "MLE line search stalled", last_iterate=tuple(x),
                grad_norm=float(np.max(np.abs(pg))),
            )
    pg = _projected_grad(x, grad, margin)
    if np.max(np.abs(pg)) < max(tol, 1e-8) or converged_on_face(x, grad, value):
        return SimplexPoint(tuple(x), margin)
    raise OptimizerError(
        f"MLE did not converge in {max_iter} iterations",
        last_iterate=tuple(x), grad_norm=float(np.max(np.abs(pg))),
    )


def fisher_information(p: SimplexPoint) -> FisherInfo:
    """1/p_i + 1/p_k on the diagonal, 1/p_k off-diagonal."""
    probs = np.asarray(p.probs)
    mat = np.full((p.k - 1, p.k - 1), 1.0 / p.last)
    mat[np.diag_indices(p.k - 1)] += 1.0 / probs
    return FisherInfo(mat)
