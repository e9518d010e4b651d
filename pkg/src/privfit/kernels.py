"""Truncated discrete noise kernels on {-m, ..., m} and table perturbation.

The two built-in families put unnormalized mass exp(-eps*|l|) (laplace) or
exp(-eps*l^2/(2m+1)) (gaussian) on each offset l; ``custom`` accepts any
strictly positive symmetric weight vector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tables import FrequencyTable, PerturbedTable, PostProcessedTable

KINDS = ("laplace", "gaussian", "custom")


@dataclass(frozen=True)
class NoiseKernel:
    """Immutable truncated noise law; weights[i] is the mass at offset i - m."""

    kind: str
    epsilon: float
    m: int
    weights: tuple[float, ...]
    normalizer: float

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1)

    @property
    def probs(self) -> np.ndarray:
        return np.asarray(self.weights) / self.normalizer

    def weight(self, l: int) -> float:
        if abs(l) > self.m:
            return 0.0
        return self.weights[l + self.m]

    def log_prob(self, l) -> np.ndarray:
        """Elementwise log of weight(l)/normalizer; -inf outside the support."""
        l = np.asarray(l)
        out = np.full(l.shape, -np.inf, dtype=float)
        inside = np.abs(l) <= self.m
        w = np.asarray(self.weights)
        out[inside] = np.log(w[l[inside] + self.m]) - math.log(self.normalizer)
        return out


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float


def make_kernel(kind: str, epsilon: float, m: int, custom_weights=None) -> NoiseKernel:
    if kind not in KINDS:
        raise ValidationError(f"unknown kernel kind {kind!r}")
    if epsilon < 0:
        raise ValidationError("epsilon must be nonnegative")
    if m < 0:
        raise ValidationError("m must be nonnegative")
    ls = np.arange(-m, m + 1)
    if kind == "laplace":
        weights = np.exp(-epsilon * np.abs(ls))
    elif kind == "gaussian":
        weights = np.exp(-epsilon * ls**2 / (2 * m + 1))
    else:
        if custom_weights is None:
            raise ValidationError("custom kernels require explicit weights")
        weights = np.asarray(custom_weights, dtype=float)
        if weights.shape != (2 * m + 1,):
            raise ValidationError(f"custom weights must have length {2 * m + 1}")
        if np.any(weights <= 0):
            raise ValidationError("custom weights must be strictly positive")
        if not np.allclose(weights, weights[::-1], rtol=1e-12, atol=0):
            raise ValidationError("custom weights must be symmetric")
    # Direct summation keeps custom kernels on the same code path as the
    # built-in families; O(m) cost is negligible.
    normalizer = float(np.sum(weights))
    return NoiseKernel(kind, float(epsilon), int(m), tuple(float(w) for w in weights), normalizer)


def kernel_variance(kernel: NoiseKernel) -> float:
    """Var[L] = sum_l l^2 w(l) / normalizer (the kernel mean is 0 by symmetry)."""
    ls = kernel.offsets
    return float(np.sum(ls**2 * np.asarray(kernel.weights)) / kernel.normalizer)


def kernel_log_mgf(kernel: NoiseKernel, z: float) -> float:
    """log E[e^{zL}], evaluated with the max term factored out.

    Table-scale arguments reach e^{z*m} ~ e^{22}, and larger m*z would
    overflow a naive sum.
    """
    ls = kernel.offsets
    exponents = z * ls + np.log(np.asarray(kernel.weights))
    hi = float(np.max(exponents))
    return hi + math.log(float(np.sum(np.exp(exponents - hi)))) - math.log(kernel.normalizer)


def delta_of(kernel: NoiseKernel) -> PrivacyBudget:
    """The delta of (eps,delta)-DP: the boundary mass w(m)/normalizer."""
    return PrivacyBudget(kernel.epsilon, kernel.weight(kernel.m) / kernel.normalizer)


def sample_noise(kernel: NoiseKernel, rng_seed: int, count: int) -> np.ndarray:
    """Draw iid offsets by inverse CDF over the 2m+1 atoms; deterministic per seed."""
    if count < 0:
        raise ValidationError("count must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    return _sample_with_rng(kernel, rng, count)


def _sample_with_rng(kernel: NoiseKernel, rng: np.random.Generator, count) -> np.ndarray:
    cdf = np.cumsum(kernel.probs)
    cdf[-1] = 1.0
    u = rng.random(count)
    return np.searchsorted(cdf, u, side="right") - kernel.m


def perturb(table: FrequencyTable, kernel: NoiseKernel, rng_seed: int) -> PerturbedTable:
    """Perturb the first k-1 cells independently; the last cell absorbs the offsets."""
    noise = sample_noise(kernel, rng_seed, table.k - 1)
    free = tuple(int(a + l) for a, l in zip(table.counts[:-1], noise))
    return PerturbedTable.from_free_cells(free, table.n)


def post_process_nonnegative(b: PerturbedTable) -> PostProcessedTable:
    """Clamp negatives to zero, then recompute the last cell as max(0, n - |b+|)."""
    free = tuple(max(0, v) for v in b.values[:-1])
    last = max(0, b.n - sum(free))
    return PostProcessedTable(free + (last,))


@dataclass(frozen=True)
class DPReport:
    holds: bool
    worst_ratio: float
    boundary_mass: float
    violation: tuple | None = None


def verify_dp(kernel: NoiseKernel) -> DPReport:
    """Exhaustively check the per-cell (eps,delta)-DP condition.

    For every neighbor shift a' = a +/- 1 and every output with |b-a| <= m,
    either the weight ratio is bounded by e^eps, or the output has left the
    neighbor's range and its mass must not exceed delta.  The mechanism
    factorizes over cells, so the per-cell check is the relevant one.
    """
    if kernel.m < 1:
        raise ValidationError("verify_dp needs m >= 1")
    delta = delta_of(kernel).delta
    bound = math.exp(kernel.epsilon)
    worst = 0.0
    violation = None
    for shift in (1, -1):
        for l in range(-kernel.m, kernel.m + 1):
            l_prime = l - shift
            if abs(l_prime) <= kernel.m:
                ratio = kernel.weight(l) / kernel.weight(l_prime)
                worst = max(worst, ratio)
                if ratio > bound * (1 + 1e-12):
                    violation = (shift, l, ratio)
            else:
                mass = kernel.weight(l) / kernel.normalizer
                if mass > delta * (1 + 1e-12):
                    violation = (shift, l, mass)
    return DPReport(violation is None, worst, delta, violation)


def kernel_to_json(kernel: NoiseKernel) -> str:
    spec: dict = {"kind": kernel.kind, "epsilon": kernel.epsilon, "m": kernel.m}
    if kernel.kind == "custom":
        spec["weights"] = list(kernel.weights)
    return json.dumps(spec)


def kernel_from_json(text: str) -> NoiseKernel:
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad kernel JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise ValidationError("kernel JSON must be an object")
    try:
        return make_kernel(
            spec["kind"], spec["epsilon"], spec["m"], custom_weights=spec.get("weights")
        )
    except KeyError as exc:
        raise ValidationError(f"kernel JSON missing field {exc}") from exc
