"""KL geometry and privacy trade-off quantities: power loss, nu, bounds, cost."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .kernels import NoiseKernel, kernel_log_mgf, kernel_variance
from .likelihood import SimplexPoint


@dataclass(frozen=True)
class HypothesisPair:
    """Null p0 against alternative p1; both interior, distinct."""

    p0: SimplexPoint
    p1: SimplexPoint

    def __post_init__(self):
        if self.p0.k != self.p1.k:
            raise ValidationError("p0 and p1 must have the same number of cells")
        gap = max(abs(a - b) for a, b in zip(self.p0.full, self.p1.full))
        if gap <= 1e-12:
            raise ValidationError("p0 and p1 must differ (infinity-norm gap > 1e-12)")

    @property
    def k(self) -> int:
        return self.p0.k


@dataclass(frozen=True)
class PowerLossReport:
    kl: float
    kl_gradient: tuple[float, ...]
    loss: float
    nu: int
    per_coordinate_logmgf: tuple[float, ...]


class Regime(str, enum.Enum):
    LARGE_SCALE = "large_scale"
    SMALL_SCALE = "small_scale"


@dataclass(frozen=True)
class BoundsReport:
    regime: Regime
    bound: float
    nu: int


@dataclass(frozen=True)
class SampleCostReport:
    nbar_plain: int
    nbar_private_estimate: int
    cost: float


def kl_multinomial(pair_or_p0, p1: SimplexPoint | None = None) -> float:
    """D_KL(p0 || p1) = sum over all k cells of p0_i log(p0_i / p1_i)."""
    if p1 is None:
        p0, p1 = pair_or_p0.p0, pair_or_p0.p1
    else:
        p0 = pair_or_p0
    a = np.asarray(p0.full)
    b = np.asarray(p1.full)
    return float(np.sum(a * np.log(a / b)))


def kl_gradient(pair: HypothesisPair) -> tuple[float, ...]:
    """Gradient of D_KL in the k-1 free coordinates, with p0_k = 1 - |p0|.

    Component i is log(p0_i/p1_i) - log(p0_k/p1_k).
    """
    p0, p1 = pair.p0, pair.p1
    last = math.log(p0.last / p1.last)
    return tuple(math.log(a / b) - last for a, b in zip(p0.probs, p1.probs))


def power_loss(pair: HypothesisPair, kernel: NoiseKernel) -> PowerLossReport:
    """The O(1/n) power penalty: sum of the kernel log-MGF at each gradient coordinate.

    The k-1 noise coordinates are independent, so the MGF of the noise vector
    factorizes across coordinates.
    """
    z = kl_gradient(pair)
    per = tuple(kernel_log_mgf(kernel, zi) for zi in z)
    return PowerLossReport(
        kl=kl_multinomial(pair),
        kl_gradient=z,
        loss=float(sum(per)),
        nu=large_scale_count(pair, kernel.epsilon, eta=0.1),
        per_coordinate_logmgf=per,
    )


def large_scale_count(pair: HypothesisPair, epsilon: float, eta: float,
                      per_cell: bool = False) -> int:
    """Number of KL-gradient coordinates with magnitude >= epsilon*(1+eta).

    Default counts the k-1 free-coordinate gradient.  With per_cell=True the
    count runs over all k cells using the unconstrained per-cell partials
    log(p0_i/p1_i) + 1.
    """
    if eta <= 0:
        raise DomainError("eta must be positive")
    threshold = epsilon * (1 + eta)
    if per_cell:
        grads = [math.log(a / b) + 1 for a, b in zip(pair.p0.full, pair.p1.full)]
    else:
        grads = list(kl_gradient(pair))
    return sum(1 for g in grads if abs(g) >= threshold)


def proposition_bounds(pair: HypothesisPair, kernel: NoiseKernel, eta: float) -> BoundsReport:
    """Lower-bound report on the power loss.

    With nu > 0 large-scale coordinates: bound = nu * log_mgf(eps*(1+eta)).
    With nu == 0 (all coordinates small): proof-form bound
    k * eps^2 (1+eta)^2 Var[L] / 2, valid only when eps^2 (1+eta)^2 Var[L] < 1.
    """
    if eta <= 0:
        raise DomainError("eta must be positive")
    nu = large_scale_count(pair, kernel.epsilon, eta)
    if nu > 0:
        bound = nu * kernel_log_mgf(kernel, kernel.epsilon * (1 + eta))
        return BoundsReport(Regime.LARGE_SCALE, float(bound), nu)
    var = kernel_variance(kernel)
    small = kernel.epsilon**2 * (1 + eta) ** 2 * var
    if kernel.m > 0 and small >= 1:
        raise DomainError(
            "small-scale bound requires eps^2 (1+eta)^2 Var[L] < 1"
        )
    return BoundsReport(Regime.SMALL_SCALE, pair.k * small / 2, 0)


def predicted_power_exponent(pair: HypothesisPair, kernel: NoiseKernel,
                             n: int, alpha: float = 0.05) -> dict:
    """Computable part of the power exponent: D_KL + (k/4)(log n / n) - loss/n.

    The O(1/sqrt(n)) level-dependent term has no closed form and is omitted;
    the report records that omission so downstream comparisons carry the band.
    """
    if n < 2:
        raise ValidationError("n must be at least 2")
    if not 0 < alpha < 1:
        raise ValidationError("alpha must be in (0, 1)")
    report = power_loss(pair, kernel)
    value = report.kl + (pair.k / 4) * math.log(n) / n - report.loss / n
    return {
        "value": value,
        "kl": report.kl,
        "loss": report.loss,
        "n": n,
        "alpha": alpha,
        "omitted_terms": "O(1/sqrt(n)) and O(1/n) level-dependent corrections",
    }


def sample_cost(pair: HypothesisPair, kernel: NoiseKernel, nbar_plain: int) -> SampleCostReport:
    """Extra observations the private test needs: cost = nbar * loss / D_KL."""
    if nbar_plain < 1:
        raise ValidationError("nbar_plain must be at least 1")
    report = power_loss(pair, kernel)
    cost = nbar_plain * report.loss / report.kl
    return SampleCostReport(
        nbar_plain=nbar_plain,
        nbar_private_estimate=nbar_plain + math.ceil(cost),
        cost=cost,
    )
