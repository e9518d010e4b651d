"""Canonical benchmark rows and hypothesis scenarios, plus CSV row emitters.

The (epsilon, delta, m) rows and the four hypothesis pairs are fixed reference
settings used throughout the test suite and the CLI reproduction commands.
The m values are taken as given for each (epsilon, delta) target; no selection
rule is applied here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .divergence import HypothesisPair, power_loss
from .kernels import delta_of, kernel_variance, make_kernel
from .likelihood import SimplexPoint


@dataclass(frozen=True)
class BudgetRow:
    epsilon: float
    delta: float
    m_laplace: int
    m_gaussian: int


BUDGET_ROWS: tuple[BudgetRow, ...] = (
    BudgetRow(0.025, 0.09, 5, 5),
    BudgetRow(0.025, 0.04, 10, 10),
    BudgetRow(0.05, 0.08, 5, 5),
    BudgetRow(0.05, 0.04, 10, 10),
    BudgetRow(0.075, 0.08, 5, 5),
    BudgetRow(0.075, 0.03, 10, 11),
    BudgetRow(0.1, 0.07, 5, 6),
    BudgetRow(0.1, 0.03, 10, 12),
    BudgetRow(0.125, 0.07, 5, 6),
    BudgetRow(0.125, 0.02, 10, 12),
    BudgetRow(0.15, 0.06, 5, 6),
    BudgetRow(0.15, 0.02, 10, 12),
    BudgetRow(0.175, 0.06, 5, 6),
    BudgetRow(0.175, 0.02, 10, 12),
    BudgetRow(0.2, 0.05, 5, 6),
    BudgetRow(0.2, 0.02, 10, 13),
)


def _pair(p0_free, p1_free) -> HypothesisPair:
    return HypothesisPair(SimplexPoint(p0_free), SimplexPoint(p1_free))


SCENARIOS: dict[str, HypothesisPair] = {
    "U_vs_0.1": _pair((0.5,), (0.1,)),
    "U_vs_0.4": _pair((0.5,), (0.4,)),
    "U4_vs_(0.45,0.45,0.05)": _pair((0.25, 0.25, 0.25), (0.45, 0.45, 0.05)),
    "U4_vs_(0.85,0.05,0.05)": _pair((0.25, 0.25, 0.25), (0.85, 0.05, 0.05)),
}

FIGURE_EPS_GRID: tuple[float, ...] = tuple(round(0.005 * i, 3) for i in range(1, 51))
FIGURE_M_VALUES: tuple[int, ...] = (5, 10, 15, 20)


def loss_table_rows():
    """Rows (epsilon, delta, m_L, m_G, scenario, loss_L, loss_G) over all settings."""
    out = []
    for row in BUDGET_ROWS:
        kern_l = make_kernel("laplace", row.epsilon, row.m_laplace)
        kern_g = make_kernel("gaussian", row.epsilon, row.m_gaussian)
        for name, pair in SCENARIOS.items():
            out.append({
                "epsilon": row.epsilon,
                "delta": row.delta,
                "m_L": row.m_laplace,
                "m_G": row.m_gaussian,
                "scenario": name,
                "loss_L": power_loss(pair, kern_l).loss,
                "loss_G": power_loss(pair, kern_g).loss,
            })
    return out


def variance_table_rows():
    """Rows (epsilon, delta, m_L, m_G, var_L, var_G, delta_L, delta_G)."""
    out = []
    for row in BUDGET_ROWS:
        kern_l = make_kernel("laplace", row.epsilon, row.m_laplace)
        kern_g = make_kernel("gaussian", row.epsilon, row.m_gaussian)
        out.append({
            "epsilon": row.epsilon,
            "delta": row.delta,
            "m_L": row.m_laplace,
            "m_G": row.m_gaussian,
            "var_L": kernel_variance(kern_l),
            "var_G": kernel_variance(kern_g),
            "delta_L": delta_of(kern_l).delta,
            "delta_G": delta_of(kern_g).delta,
        })
    return out


def loss_curve_rows(kind: str = "laplace"):
    """Rows (scenario, m, epsilon, loss) on the epsilon grid for each m."""
    out = []
    for name, pair in SCENARIOS.items():
        for m in FIGURE_M_VALUES:
            for eps in FIGURE_EPS_GRID:
                kern = make_kernel(kind, eps, m)
                out.append({
                    "scenario": name,
                    "m": m,
                    "epsilon": eps,
                    "loss": power_loss(pair, kern).loss,
                })
    return out
