"""Numerical verification of a jump-aware stochastic calculus for centered
Gaussian processes with fixed-time discontinuities.

Layers: regulated functions and variation functionals (``regulated``),
Stieltjes integration engines and the two-variable chain rule (``stieltjes``),
the Gaussian smoothing semigroup with growth-certified test functions
(``heatkernel``), the closed-form process catalog with exact simulation
(``gaussproc``), the deterministic and Monte Carlo verification engines
(``itoverify``), and a scenario CLI (``cli``).
"""

__version__ = "0.1.0"

from .gaussproc import (
    CameronMartinElement,
    DiscontinuityRecord,
    ProcessSpec,
    catalog,
    cm_element,
    cm_inner,
    path_qv_mc,
    planar_qv_sum,
    planar_variation_sum,
    simulate_paths,
)
from .heatkernel import TestFunction, heat_identity_residual, psi, test_function
from .itoverify import (
    ItoCase,
    McReport,
    Observable,
    SimpleWickIntegrand,
    auto_cm_battery,
    hermite_p2_identity_mc,
    ito_rcll_residual,
    ito_stransform_residual,
    martingale_ito_mc,
    mc_s_transform,
    s_transform,
    simple_skorokhod_mc,
)
from .regulated import Jump, Partition, RegulatedFunction, one_sided_limits, p_variation, sigma2, w2star_criterion
from .stieltjes import ScalarField, chain_rule, hk_riemann_sum, integrate_ls, integrate_ys, young_stieltjes_sum

__all__ = [
    "CameronMartinElement",
    "DiscontinuityRecord",
    "ItoCase",
    "Jump",
    "McReport",
    "Observable",
    "Partition",
    "ProcessSpec",
    "RegulatedFunction",
    "ScalarField",
    "SimpleWickIntegrand",
    "TestFunction",
    "auto_cm_battery",
    "catalog",
    "chain_rule",
    "cm_element",
    "cm_inner",
    "heat_identity_residual",
    "hermite_p2_identity_mc",
    "hk_riemann_sum",
    "integrate_ls",
    "integrate_ys",
    "ito_rcll_residual",
    "ito_stransform_residual",
    "martingale_ito_mc",
    "mc_s_transform",
    "one_sided_limits",
    "p_variation",
    "path_qv_mc",
    "planar_qv_sum",
    "planar_variation_sum",
    "psi",
    "s_transform",
    "sigma2",
    "simple_skorokhod_mc",
    "simulate_paths",
    "test_function",
    "w2star_criterion",
    "young_stieltjes_sum",
]
