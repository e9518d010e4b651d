"""Exponential tilting machinery and a sharp large-deviation tail estimator.

Implements cumulant functions of finite-support lattice distributions, the
Legendre transform (Cramer rate function), the sharp estimate
exp{-n*rate + sqrt(n)*boundary} * n^{-(d+1)/4} up to a multiplicative
constant, and an exact d=1 tail oracle by n-fold convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, OptimizerError, SizeError, ValidationError

ORACLE_MAX_N = 2000


@dataclass(frozen=True)
class LatticeDistribution:
    """Finite-support law on a d-dimensional lattice: ((point, prob), ...)."""

    atoms: tuple[tuple[tuple[float, ...], float], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValidationError("a lattice distribution needs at least one atom")
        d = len(self.atoms[0][0])
        if any(len(x) != d for x, _ in self.atoms):
            raise ValidationError("all atoms must share the same dimension")
        probs = [p for _, p in self.atoms]
        if any(p <= 0 for p in probs):
            raise ValidationError("atom probabilities must be strictly positive")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValidationError("atom probabilities must sum to 1")

    @property
    def d(self) -> int:
        return len(self.atoms[0][0])

    @property
    def points(self) -> np.ndarray:
        return np.array([x for x, _ in self.atoms], dtype=float)

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms], dtype=float)

    def mean(self) -> np.ndarray:
        return self.probs @ self.points

    @classmethod
    def bernoulli(cls, p: float, centered: bool = False) -> "LatticeDistribution":
        shift = p if centered else 0.0
        return cls((((0.0 - shift,), 1.0 - p), ((1.0 - shift,), p)))

    @classmethod
    def multinomial_indicators(cls, probs_full) -> "LatticeDistribution":
        """Cell-indicator family: atom e_i (in the first k-1 coordinates) w.p. probs[i]."""
        probs_full = tuple(float(p) for p in probs_full)
        k = len(probs_full)
        atoms = []
        for i, p in enumerate(probs_full):
            x = [0.0] * (k - 1)
            if i < k - 1:
                x[i] = 1.0
            atoms.append((tuple(x), p))
        return cls(tuple(atoms))


@dataclass(frozen=True)
class LDEstimate:
    zhat: tuple[float, ...]
    rate: float
    boundary_term: float
    log_prefactor_exponent: float
    log_estimate_up_to_constant: float


def cumulant(dist: LatticeDistribution, z) -> dict:
    """L(z) = log E[e^{z.X}], with tilted mean (gradient) and covariance (hessian)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (dist.d,):
        raise ValidationError(f"z must have dimension {dist.d}")
    x = dist.points
    exponents = x @ z + np.log(dist.probs)
    hi = float(np.max(exponents))
    w = np.exp(exponents - hi)
    total = float(np.sum(w))
    value = hi + math.log(total)
    w /= total
    grad = w @ x
    centered = x - grad
    hess = (centered * w[:, None]).T @ centered
    return {"value": value, "gradient": grad, "hessian": hess}


def _hull_check(dist: LatticeDistribution, xi: np.ndarray) -> None:
    # Necessary condition: xi strictly inside the bounding box of the support
    # in every coordinate.  For d=1 this is exact; for d>1 Newton divergence
    # signals the remaining infeasible cases.
    x = dist.points
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    if np.any(xi <= lo - 1e-15) or np.any(xi >= hi + 1e-15):
        raise InfeasibleError("xi lies outside the support's bounding box")
    if np.any(np.isclose(xi, lo, atol=1e-13)) or np.any(np.isclose(xi, hi, atol=1e-13)):
        if not np.any(np.all(np.isclose(x, xi), axis=1)) or len(dist.atoms) > 1:
            raise InfeasibleError("xi lies on the boundary of the support hull")


def legendre_transform(dist: LatticeDistribution, xi) -> dict:
    """Solve grad L(zhat) = xi by damped Newton from 0; rate = zhat.xi - L(zhat)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (dist.d,):
        raise ValidationError(f"xi must have dimension {dist.d}")
    _hull_check(dist, xi)
    z = np.zeros(dist.d)
    tol = 1e-12
    for _ in range(200):
        c = cumulant(dist, z)
        resid = c["gradient"] - xi
        if np.max(np.abs(resid)) < tol:
            break
        hess = c["hessian"]
        try:
            step = np.linalg.solve(hess, resid)
        except np.linalg.LinAlgError:
            step = np.linalg.solve(hess + 1e-12 * np.eye(dist.d), resid)
        # Damp by halving until the residual norm decreases.
        base = float(np.linalg.norm(resid))
        scale = 1.0
        for _ in range(60):
            z_new = z - scale * step
            new_resid = cumulant(dist, z_new)["gradient"] - xi
            if float(np.linalg.norm(new_resid)) < base:
                break
            scale /= 2
        else:
            raise OptimizerError("tilting Newton stalled", last_iterate=z, grad_norm=base)
        z = z_new
    else:
        raise OptimizerError("tilting Newton did not converge",
                             last_iterate=z, grad_norm=float(np.linalg.norm(resid)))
    c = cumulant(dist, z)
    rate = float(z @ xi - c["value"])
    return {"zhat": z, "rate": max(rate, 0.0)}


def sharp_ld_estimate(dist: LatticeDistribution, xi, region_support_fn, n: int) -> LDEstimate:
    """Log of the sharp tail estimate, up to an n-free multiplicative constant.

    region_support_fn(zhat) must return min over the target region of zhat.v.
    The distribution must be centered (mean zero).
    """
    if n < 1:
        raise ValidationError("n must be positive")
    if np.max(np.abs(dist.mean())) > 1e-10:
        raise ValidationError("sharp_ld_estimate requires a centered distribution")
    sol = legendre_transform(dist, xi)
    zhat = np.atleast_1d(sol["zhat"])
    boundary = float(region_support_fn(zhat))
    d = dist.d
    log_est = -n * sol["rate"] + math.sqrt(n) * boundary - ((d + 1) / 4) * math.log(n)
    return LDEstimate(
        zhat=tuple(float(v) for v in zhat),
        rate=sol["rate"],
        boundary_term=boundary,
        log_prefactor_exponent=-(d + 1) / 4,
        log_estimate_up_to_constant=log_est,
    )


def exact_tail_oracle(dist: LatticeDistribution, xi: float, halfwidth: float, n: int) -> float:
    """Exact Pr[sum_{i<=n} X_i in [n*xi - sqrt(n)*h, n*xi + sqrt(n)*h]] for d=1.

    Computed by exact n-fold convolution of the atom law on its common
    lattice step.
    """
    if dist.d != 1:
        raise SizeError("the exact tail oracle handles only d = 1")
    if n < 1 or n > ORACLE_MAX_N:
        raise SizeError(f"the exact tail oracle handles 1 <= n <= {ORACLE_MAX_N}")
    if halfwidth < 0:
        raise ValidationError("halfwidth must be nonnegative")
    values = dist.points[:, 0]
    probs = dist.probs
    # Detect the lattice: a common step dividing all pairwise value gaps.
    base = float(values.min())
    gaps = values - base
    step = 0.0
    for g in gaps:
        if g > 1e-12:
            step = g if step == 0.0 else math.gcd(round(g * 10**9), round(step * 10**9)) / 10**9
    if step == 0.0:
        # Single atom: the sum is deterministic.
        target = n * values[0]
        lo, hi = n * xi - math.sqrt(n) * halfwidth, n * xi + math.sqrt(n) * halfwidth
        return 1.0 if lo - 1e-12 <= target <= hi + 1e-12 else 0.0
    idx = np.round(gaps / step).astype(int)
    if np.max(np.abs(gaps - idx * step)) > 1e-9:
        raise ValidationError("atoms do not share a common lattice step")
    pmf = np.zeros(idx.max() + 1)
    for i, p in zip(idx, probs):
        pmf[i] += p
    # n-fold convolution by binary exponentiation.
    result = np.array([1.0])
    power = pmf
    e = n
    while e > 0:
        if e & 1:
            result = np.convolve(result, power)
        e >>= 1
        if e:
            power = np.convolve(power, power)
    # result[j] = Pr[sum = n*base + j*step]
    lo = n * xi - math.sqrt(n) * halfwidth
    hi = n * xi + math.sqrt(n) * halfwidth
    j = np.arange(result.size)
    sums = n * base + j * step
    mask = (sums >= lo - 1e-9) & (sums <= hi + 1e-9)
    return float(result[mask].sum())
