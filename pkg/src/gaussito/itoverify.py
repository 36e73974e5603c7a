"""Verification engines for the jump-aware Gaussian change-of-variables identity.

Deterministic side: pairing a square-integrable functional against Wick
exponentials turns the identity for F(X_T) into an exact statement about
smooth deterministic functions,

    psi_F(V(T), hbar(T)) - psi_F(V(0), hbar(0))
      = int psi_{F'}(V, hbar) dhbar + (1/2) int psi_{F''}(V, hbar) dV
        + left and right jump-correction sums over the discontinuity times,

which the engines here evaluate term by term with the Stieltjes machinery and
report as a residual.  The right-continuous reduction replaces the value
integrands by left-limit integrands, drops the variance atoms, and folds the
jump algebra into a single sum whose left-limit/jump correlation term can be
knocked out on purpose (mutation sensitivity).

Monte Carlo side: pathwise checks in the martingale case, sample pairings
against Wick exponentials with exact first-chaos norms, simple Wick-Stieltjes
integrals with closed-form Wick products, and the degree-two Hermite inner
product identity E[P2(g) P2(h)] = 2 E[gh]^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussproc import (
    CameronMartinElement,
    ProcessSpec,
    SimulationResult,
    UnsupportedModelError,
    cm_element,
    cm_inner,
    simulate_paths,
)
from .heatkernel import TestFunction, psi
from .regulated import Partition
from .stieltjes import integrate_ls, integrate_ys

__all__ = [
    "ItoCase",
    "ItoResidual",
    "McReport",
    "Observable",
    "SimpleWickIntegrand",
    "auto_cm_battery",
    "hermite_p2_identity_mc",
    "ito_rcll_residual",
    "ito_stransform_residual",
    "martingale_ito_mc",
    "mc_s_transform",
    "s_transform",
    "simple_skorokhod_mc",
    "skorokhod_s_transform",
    "skorokhod_sample",
    "wick_exponential_paths",
]

MUTATIONS = ("drop_left_jump_sum", "drop_right_jump_sum", "drop_dv_integral", "drop_xleft_correction")


@dataclass(frozen=True)
class ItoCase:
    """One deterministic verification case: model, test function, pairing element."""

    spec: ProcessSpec
    test_function: TestFunction
    h: CameronMartinElement
    ys_tol: float = 1e-11
    max_refine: int = 60000
    label: str = ""

    def __post_init__(self):
        self.test_function.check_growth(self.spec.lam)


@dataclass(frozen=True)
class McReport:
    estimate: float
    standard_error: float
    reference: float
    z_score: float
    n_paths: int
    seed: int
    label: str = ""


def _mc_report(values: np.ndarray, reference: float, n_paths: int, seed: int, label: str) -> McReport:
    est = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n_paths))
    z = (est - reference) / se if se > 0 else 0.0
    return McReport(estimate=est, standard_error=se, reference=reference, z_score=z, n_paths=n_paths, seed=seed, label=label)


# -- S-transform closed forms ---------------------------------------------------


@dataclass(frozen=True)
class Observable:
    """Closed-form-pairable functionals of the process.

    kinds: "process" (X_t), "f"/"f1"/"f2" (F and derivatives at X_t),
    "f_left"/"f_right" (F at the weak one-sided limits), "wick_exp"
    (exp-wick of g), "jump_pairing" ((e^{c J - c^2 var/2} - 1) J for the
    left-jump variable J at a record, paired with its own exponential).
    """

    kind: str
    t: float = 0.0
    g: CameronMartinElement | None = None
    jump_index: int = 0
    coeff: float = 1.0
    label: str = ""


def s_transform(obs: Observable, case: ItoCase) -> float:
    """Deterministic pairing value of the observable against exp-wick of case.h."""
    spec, tf, h = case.spec, case.test_function, case.h
    if obs.kind == "process":
        return float(h.hbar.values(obs.t))
    if obs.kind in ("f", "f1", "f2"):
        fn = {"f": tf.f, "f1": tf.f1, "f2": tf.f2}[obs.kind]
        return float(psi(fn, spec.variance.values(obs.t), h.hbar.values(obs.t)))
    if obs.kind == "f_left":
        return float(psi(tf.f, spec.variance.left_values(obs.t), h.hbar.left_values(obs.t)))
    if obs.kind == "f_right":
        return float(psi(tf.f, spec.variance.right_values(obs.t), h.hbar.right_values(obs.t)))
    if obs.kind == "wick_exp":
        return math.exp(cm_inner(spec, obs.g, h))
    if obs.kind == "jump_pairing":
        return obs.coeff * spec.records[obs.jump_index].e_dminus_sq
    raise ValueError(f"unknown observable kind {obs.kind!r}")


# -- deterministic residuals ----------------------------------------------------


@dataclass(frozen=True)
class ItoResidual:
    """Term-by-term breakdown; residual = lhs - (all right-hand terms)."""

    form: str
    lhs: float
    integral_dhbar: float
    integral_dv_half: float
    left_jump_terms: tuple[tuple[float, float], ...]
    right_jump_terms: tuple[tuple[float, float], ...]
    left_jump_sum: float
    right_jump_sum: float
    residual: float
    converged: bool

    def terms(self) -> dict[str, float]:
        return {
            "lhs": self.lhs,
            "integral_dhbar": self.integral_dhbar,
            "integral_dv_half": self.integral_dv_half,
            "left_jump_sum": self.left_jump_sum,
            "right_jump_sum": self.right_jump_sum,
        }


def _check_mutations(drop) -> frozenset:
    drop = frozenset(drop)
    unknown = drop - set(MUTATIONS)
    if unknown:
        raise ValueError(f"unknown mutation flags {sorted(unknown)}")
    return drop


def ito_stransform_residual(case: ItoCase, drop=frozenset()) -> ItoResidual:
    """Residual of the general deterministic identity for one case.

    Jump sums use exact stored jump sizes of V and hbar, are accumulated with
    compensated summation (so they are invariant under reordering of the
    discontinuity list), and can be knocked out selectively via ``drop`` for
    sensitivity checks.
    """
    drop = _check_mutations(drop)
    spec, tf = case.spec, case.test_function
    hbar, V = case.h.hbar, spec.variance
    T = spec.horizon

    lhs = float(psi(tf.f, V.values(T), hbar.values(T)) - psi(tf.f, V.values(0.0), hbar.values(0.0)))

    def u_d1(ts):
        return psi(tf.f1, V.values(ts), hbar.values(ts))

    def u_d2(ts):
        return psi(tf.f2, V.values(ts), hbar.values(ts))

    r1 = integrate_ys(u_d1, hbar, tol=case.ys_tol, max_refine=case.max_refine, extra_knots=V.pinned_points())
    r2 = integrate_ls(u_d2, V, tol=case.ys_tol, max_refine=case.max_refine, extra_knots=hbar.pinned_points())

    left_terms, right_terms = [], []
    for rec in spec.records:
        s = rec.time
        vl, vv, vr = V.one_sided(s)
        hl, hh, hr = hbar.one_sided(s)
        p1 = float(psi(tf.f1, vv, hh))
        p2 = float(psi(tf.f2, vv, hh))
        if s > 0.0:
            val = (
                float(psi(tf.f, vv, hh))
                - float(psi(tf.f, vl, hl))
                - p1 * hbar.delta_minus_at(s)
                - 0.5 * p2 * V.delta_minus_at(s)
            )
            left_terms.append((s, val))
        if s < T:
            val = (
                float(psi(tf.f, vr, hr))
                - float(psi(tf.f, vv, hh))
                - p1 * hbar.delta_plus_at(s)
                - 0.5 * p2 * V.delta_plus_at(s)
            )
            right_terms.append((s, val))

    left_sum = math.fsum(v for _, v in left_terms)
    right_sum = math.fsum(v for _, v in right_terms)

    rhs = [r1.value]
    if "drop_dv_integral" not in drop:
        rhs.append(0.5 * r2.value)
    if "drop_left_jump_sum" not in drop:
        rhs.append(left_sum)
    if "drop_right_jump_sum" not in drop:
        rhs.append(right_sum)

    return ItoResidual(
        form="general",
        lhs=lhs,
        integral_dhbar=r1.value,
        integral_dv_half=0.5 * r2.value,
        left_jump_terms=tuple(left_terms),
        right_jump_terms=tuple(right_terms),
        left_jump_sum=left_sum,
        right_jump_sum=right_sum,
        residual=lhs - math.fsum(rhs),
        converged=r1.converged and r2.converged,
    )


def ito_rcll_residual(case: ItoCase, drop=frozenset()) -> ItoResidual:
    """Residual of the right-continuous reduction (left-limit integrands,
    continuous-variance integral, single jump sum with the
    E[X_{s-} (X_s - X_{s-})] correction term).

    Only meaningful for martingale/rcll models; the correction term can be
    removed with ``drop={"drop_xleft_correction"}`` to measure its weight.
    """
    drop = _check_mutations(drop)
    spec, tf = case.spec, case.test_function
    if spec.kind not in ("martingale", "rcll"):
        raise UnsupportedModelError(f"{spec.name}: right-continuous reduction needs kind martingale/rcll")
    hbar, V = case.h.hbar, spec.variance
    T = spec.horizon
    for rec in spec.records:
        if rec.e_dplus_sq or rec.v_plus != rec.v_right or hbar.delta_plus_at(rec.time) or V.delta_plus_at(rec.time):
            raise UnsupportedModelError(f"{spec.name}: forward jump data present at t={rec.time}")

    lhs = float(psi(tf.f, V.values(T), hbar.values(T)) - psi(tf.f, V.values(0.0), hbar.values(0.0)))

    def u_d1_left(ts):
        return psi(tf.f1, V.left_values(ts), hbar.left_values(ts))

    def u_d2_left(ts):
        return psi(tf.f2, V.left_values(ts), hbar.left_values(ts))

    r1 = integrate_ys(
        u_d1_left,
        hbar,
        tol=case.ys_tol,
        max_refine=case.max_refine,
        extra_knots=V.pinned_points(),
        exclude_zero_plus_atom=True,
    )
    # continuous part of V only: atoms move into the jump sum
    r2 = integrate_ls(
        u_d2_left,
        V.without_jumps(),
        tol=case.ys_tol,
        max_refine=case.max_refine,
        extra_knots=tuple(hbar.pinned_points()) + tuple(V.jump_times),
    )

    jump_terms = []
    for rec in spec.records:
        s = rec.time
        if not s > 0.0:
            continue
        vl, vv, _ = V.one_sided(s)
        hl, hh, _ = hbar.one_sided(s)
        p1_left = float(psi(tf.f1, vl, hl))
        p2_left = float(psi(tf.f2, vl, hl))
        val = (
            float(psi(tf.f, vv, hh))
            - float(psi(tf.f, vl, hl))
            - (p2_left * rec.e_xleft_dminus + p1_left * hbar.delta_minus_at(s))
        )
        if "drop_xleft_correction" not in drop:
            val += p2_left * rec.e_xleft_dminus
        jump_terms.append((s, val))
    jump_sum = math.fsum(v for _, v in jump_terms)

    rhs = [r1.value, jump_sum]
    if "drop_dv_integral" not in drop:
        rhs.append(0.5 * r2.value)

    return ItoResidual(
        form="rcll",
        lhs=lhs,
        integral_dhbar=r1.value,
        integral_dv_half=0.5 * r2.value,
        left_jump_terms=tuple(jump_terms),
        right_jump_terms=(),
        left_jump_sum=jump_sum,
        right_jump_sum=0.0,
        residual=lhs - math.fsum(rhs),
        converged=r1.converged and r2.converged,
    )


# -- Monte Carlo engines ----------------------------------------------------------


def _column(times: np.ndarray, t: float) -> int:
    idx = int(np.searchsorted(times, t))
    if idx >= len(times) or times[idx] != t:
        raise KeyError(f"time {t} missing from simulation grid")
    return idx


def wick_exponential_paths(sim: SimulationResult, h: CameronMartinElement) -> np.ndarray:
    """exp{h - E[h^2]/2} per path, with the exact first-chaos norm."""
    if len(h.coeffs) == 0:
        return np.ones(sim.paths.shape[0])
    cols = [_column(sim.times, t) for t in h.times]
    return np.exp(sim.paths[:, cols] @ h.weights - 0.5 * h.norm_sq)


def _left_limit_paths(spec: ProcessSpec, sim: SimulationResult, t: float) -> np.ndarray:
    vals = sim.paths[:, _column(sim.times, t)]
    for k, rec in enumerate(spec.records):
        if rec.time == t:
            return vals - sim.jump_draws[:, k]
    return vals


def martingale_ito_mc(case: ItoCase, grid, n_paths: int, seed: int) -> McReport:
    """Pathwise check of the discontinuous-martingale identity on a grid.

    Per path: forward Riemann sums of F'(X) against the Brownian increments,
    exact jump handling with the jointly drawn jump variables, and the
    continuous-variance quadrature term.  The report's estimate is the
    relative L2 residual (discretization error; halves roughly like the
    square root of the step).
    """
    spec, tf = case.spec, case.test_function
    if spec.kind != "martingale":
        raise UnsupportedModelError(f"{spec.name}: pathwise identity needs a martingale model")
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    pts = np.asarray(grid.points if isinstance(grid, Partition) else grid, dtype=float)
    pts = np.union1d(pts, np.asarray(spec.record_times()))
    if pts[0] != 0.0 or pts[-1] != spec.horizon:
        raise ValueError("grid must span [0, horizon]")
    sim = simulate_paths(spec, pts, n_paths, seed)
    X, xi = sim.paths, sim.jump_draws

    dB = np.diff(X, axis=1)
    jcols = [_column(pts, s) for s in spec.record_times()]
    for k, col in enumerate(jcols):
        dB[:, col - 1] -= xi[:, k]

    ito = np.sum(tf.f1(X[:, :-1]) * dB, axis=1)
    jump = np.zeros(n_paths)
    for k, col in enumerate(jcols):
        x_left = X[:, col] - xi[:, k]
        ito += tf.f1(x_left) * xi[:, k]
        jump += tf.f(X[:, col]) - tf.f(x_left) - tf.f1(x_left) * xi[:, k]

    dvc = np.diff(spec.variance.base_values(pts))
    quad = 0.5 * np.sum(tf.f2(X[:, :-1]) * dvc, axis=1)

    increment = tf.f(X[:, -1]) - tf.f(X[:, 0])
    resid = increment - ito - quad - jump
    scale = math.sqrt(float(np.mean(increment**2)))
    rms = math.sqrt(float(np.mean(resid**2)))
    rel = rms / scale if scale > 0 else rms
    if rms > 0:
        se_rel = float(np.std(resid**2, ddof=1)) / math.sqrt(n_paths) / (2.0 * rms) / max(scale, 1e-300)
    else:
        se_rel = 0.0
    z = rel / se_rel if se_rel > 0 else 0.0
    return McReport(
        estimate=rel,
        standard_error=se_rel,
        reference=0.0,
        z_score=z,
        n_paths=n_paths,
        seed=seed,
        label=f"martingale_ito[{spec.name},{tf.name},n={len(pts) - 1}]",
    )


def _needs_right_jump(spec: ProcessSpec) -> bool:
    return any(rec.e_dplus_sq > 0 for rec in spec.records)


def mc_s_transform(case: ItoCase, obs: Observable, n_paths: int, seed: int) -> McReport:
    """Monte Carlo pairing E[exp-wick(h) * observable] against the closed form."""
    spec, h = case.spec, case.h
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    reference = s_transform(obs, case)

    times = set(h.times) | set(spec.record_times())
    if obs.kind in ("process", "f", "f1", "f2", "f_left", "f_right"):
        times.add(obs.t)
    if obs.g is not None:
        times.update(obs.g.times)
    grid = np.array(sorted(times)) if times else np.array([spec.horizon])
    sim = simulate_paths(spec, grid, n_paths, seed)

    if obs.kind == "jump_pairing":
        j = sim.jump_draws[:, obs.jump_index]
        var = spec.records[obs.jump_index].e_dminus_sq
        values = (np.exp(obs.coeff * j - 0.5 * obs.coeff**2 * var) - 1.0) * j
        return _mc_report(values, reference, n_paths, seed, obs.label or "jump_pairing")

    weight = wick_exponential_paths(sim, h)
    tf = case.test_function
    if obs.kind == "process":
        xi = sim.paths[:, _column(grid, obs.t)]
    elif obs.kind in ("f", "f1", "f2"):
        fn = {"f": tf.f, "f1": tf.f1, "f2": tf.f2}[obs.kind]
        xi = fn(sim.paths[:, _column(grid, obs.t)])
    elif obs.kind == "f_left":
        xi = tf.f(_left_limit_paths(spec, sim, obs.t))
    elif obs.kind == "f_right":
        if _needs_right_jump(spec):
            raise UnsupportedModelError("forward jump variables are not simulated")
        xi = tf.f(sim.paths[:, _column(grid, obs.t)])
    elif obs.kind == "wick_exp":
        xi = wick_exponential_paths(sim, obs.g)
    else:
        raise ValueError(f"unknown observable kind {obs.kind!r}")
    return _mc_report(weight * xi, reference, n_paths, seed, obs.label or obs.kind)


# -- simple Wick-Stieltjes integrands ----------------------------------------------


@dataclass(frozen=True)
class SimpleWickIntegrand:
    """Step integrand with Wick-exponential coefficients.

    On the open cell (t_{i-1}, t_i) the integrand is exp-wick(open_coeffs[i-1]);
    at the node t_i it is exp-wick(node_coeffs[i]).  Empty-coefficient elements
    encode the constant 1.  The integral against X is the Wick-Stieltjes sum of
    the one-sided-limit increments, each Wick product evaluated in closed form:
    exp-wick(f) * (g - E[g f]).
    """

    times: tuple[float, ...]
    open_coeffs: tuple[CameronMartinElement, ...]
    node_coeffs: tuple[CameronMartinElement, ...]

    def __post_init__(self):
        if len(self.times) < 2 or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing with at least two entries")
        if len(self.open_coeffs) != len(self.times) - 1 or len(self.node_coeffs) != len(self.times):
            raise ValueError("coefficient counts must match the time grid")


def _check_integrand_span(spec: ProcessSpec, z: SimpleWickIntegrand) -> None:
    if z.times[0] != 0.0 or z.times[-1] != spec.horizon:
        raise ValueError("step integrand must span [0, horizon]")


def skorokhod_s_transform(spec: ProcessSpec, z: SimpleWickIntegrand, h: CameronMartinElement) -> float:
    """Deterministic pairing of the simple Wick-Stieltjes integral (exact sum)."""
    _check_integrand_span(spec, z)
    hbar = h.hbar
    terms = [math.exp(cm_inner(spec, z.node_coeffs[0], h)) * float(hbar.right_values(z.times[0]) - hbar.values(z.times[0]))]
    for i in range(1, len(z.times)):
        a, b = z.times[i - 1], z.times[i]
        terms.append(math.exp(cm_inner(spec, z.open_coeffs[i - 1], h)) * float(hbar.left_values(b) - hbar.right_values(a)))
        terms.append(math.exp(cm_inner(spec, z.node_coeffs[i], h)) * float(hbar.right_values(b) - hbar.left_values(b)))
    return math.fsum(terms)


def _one_sided_paths(spec: ProcessSpec, sim: SimulationResult, t: float, side: int) -> np.ndarray:
    if side < 0:
        return _left_limit_paths(spec, sim, t)
    if _needs_right_jump(spec):
        raise UnsupportedModelError("forward jump variables are not simulated")
    return sim.paths[:, _column(sim.times, t)]


def skorokhod_sample(spec: ProcessSpec, z: SimpleWickIntegrand, sim: SimulationResult) -> np.ndarray:
    """Per-path values of the simple Wick-Stieltjes integral via closed-form Wick products."""
    _check_integrand_span(spec, z)
    total = np.zeros(sim.paths.shape[0])
    f0 = z.node_coeffs[0]
    g0 = _one_sided_paths(spec, sim, z.times[0], +1) - sim.paths[:, _column(sim.times, z.times[0])]
    e0 = float(f0.hbar.right_values(z.times[0]) - f0.hbar.values(z.times[0]))
    total += wick_exponential_paths(sim, f0) * (g0 - e0)
    for i in range(1, len(z.times)):
        a, b = z.times[i - 1], z.times[i]
        fo = z.open_coeffs[i - 1]
        g_open = _one_sided_paths(spec, sim, b, -1) - _one_sided_paths(spec, sim, a, +1)
        e_open = float(fo.hbar.left_values(b) - fo.hbar.right_values(a))
        total += wick_exponential_paths(sim, fo) * (g_open - e_open)
        fn = z.node_coeffs[i]
        g_node = _one_sided_paths(spec, sim, b, +1) - _one_sided_paths(spec, sim, b, -1)
        e_node = float(fn.hbar.right_values(b) - fn.hbar.left_values(b))
        total += wick_exponential_paths(sim, fn) * (g_node - e_node)
    return total


def simple_skorokhod_mc(
    spec: ProcessSpec,
    z: SimpleWickIntegrand,
    h: CameronMartinElement,
    n_paths: int,
    seed: int,
) -> McReport:
    """Monte Carlo pairing of the sampled integral against its exact transform."""
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    times = set(z.times) | set(h.times) | set(spec.record_times())
    for c in z.open_coeffs + z.node_coeffs:
        times.update(c.times)
    grid = np.array(sorted(times))
    sim = simulate_paths(spec, grid, n_paths, seed)
    values = wick_exponential_paths(sim, h) * skorokhod_sample(spec, z, sim)
    reference = skorokhod_s_transform(spec, z, h)
    return _mc_report(values, reference, n_paths, seed, "simple_skorokhod")


def hermite_p2_identity_mc(
    spec: ProcessSpec,
    g: CameronMartinElement,
    h: CameronMartinElement,
    n_paths: int,
    seed: int,
) -> McReport:
    """Degree-two Hermite pairing E[(g^2 - E g^2)(h^2 - E h^2)] vs 2 E[gh]^2."""
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    times = sorted(set(g.times) | set(h.times))
    if not times:
        raise ValueError("need at least one support time")
    sim = simulate_paths(spec, np.array(times), n_paths, seed)
    gv = sim.paths[:, [_column(sim.times, t) for t in g.times]] @ g.weights
    hv = sim.paths[:, [_column(sim.times, t) for t in h.times]] @ h.weights
    values = (gv**2 - g.norm_sq) * (hv**2 - h.norm_sq)
    reference = 2.0 * cm_inner(spec, g, h) ** 2
    return _mc_report(values, reference, n_paths, seed, "hermite_p2")


# -- standard pairing battery -------------------------------------------------------


def auto_cm_battery(spec: ProcessSpec, size: int = 3) -> list[CameronMartinElement]:
    """Deterministic battery of pairing elements adapted to the model.

    Times come from a coarse grid plus the discontinuity times and near-jump
    companions; for the fading model all informative times sit inside the
    active window.  Every element has bounded-variation induced function for
    the catalog models, so the battery is admissible for the refinement-mode
    integrals throughout.
    """
    T = spec.horizon
    if spec.name == "evanescent":
        s0 = spec.params["s0"]
        combos = [
            [(1.0, 0.6 * s0)],
            [(0.8, 0.875 * s0)],
            [(0.6, 0.3 * s0), (-0.5, 0.9375 * s0), (0.3, s0 + 0.3 * (T - s0))],
        ]
    else:
        combos = [
            [(1.0, T)],
            [(0.8, 0.4 * T)],
            [(0.6, 0.25 * T), (-0.5, 0.8 * T), (0.3, T)],
        ]
        for s in spec.record_times():
            lo = max(0.05 * T, s - 0.2 * T)
            hi = min(T, s + 0.2 * T)
            combos.append([(0.7, s), (0.4, hi)])
            combos.append([(0.5, lo), (-0.6, s)])
    while len(combos) < size:
        k = len(combos)
        combos.append([(0.9 / (k + 1), (0.15 + 0.7 * k / (k + 1)) * T)])
    return [cm_element(spec, c, label=f"h{k}") for k, c in enumerate(combos)]
