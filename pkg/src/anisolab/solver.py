"""Existence-side machinery: inner variational solves, the regularized
fixed-point map, the level ladder with its provable properties, and the
level-set extinction calculator.

The inner problem minimizes the strictly convex energy

    E(u) = sum_i (1/p_i) int |D_i u|^{p_i}  -  int rhs * u

over zero-boundary fields (damped Newton with an Armijo line search; the
energies decrease strictly until tolerance).  The level-n problem feeds the
bounded right-hand side g_n * exp(1/(|v| + 1/n)) through that solve; its
fixed point is the level solution.  The ladder runs levels n = 1..n_max and
records monotonicity defects, interior minima, and sup norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonConvergenceError, ValidationError
from .exponents import ExponentData, integrability_thresholds
from .grid import (
    GridField,
    Grid,
    cutoff_profile,
    extract_interior,
    embed_interior,
    face_integral,
    axis_diff,
    integrate,
    interior_difference_matrix,
    level_set_measure,
    p_laplacian_apply,
    weak_form_gap,
    weighted_integrate,
)

_LINEAR_LU_CACHE: dict = {}


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass
class WeightSpec:
    """Nonnegative weight g with its claimed integrability exponent m.

    `m` is metadata: it selects which boundedness threshold the ladder
    report compares against.  A weight with zero mass is admitted (it makes
    every level solution vanish) but flagged by `positive_mass`.
    """

    g: GridField
    m: float | None = None

    def __post_init__(self):
        if np.any(self.g.values < 0):
            raise ValidationError("weight g must be nonnegative")

    @property
    def positive_mass(self) -> bool:
        return integrate(self.g) > 0


@dataclass
class RegularizationLevel:
    """Level n of the regularization: weight min(g, n), singularity shift 1/n."""

    n: int
    g_n: GridField
    shift: float

    @classmethod
    def from_weight(cls, n: int, w: WeightSpec) -> "RegularizationLevel":
        if n < 1:
            raise ValidationError("level index n must be >= 1")
        capped = np.minimum(w.g.values, float(n))
        return cls(n=n, g_n=w.g.like(capped), shift=1.0 / n)


# ---------------------------------------------------------------------------
# inner variational problem
# ---------------------------------------------------------------------------

def inner_energy(u: GridField, rhs: GridField, e: ExponentData) -> float:
    """E(u) = sum_i (1/p_i) int |D_i u|^{p_i} - int rhs * u."""
    grid = u.grid
    total = 0.0
    for axis, p_i in enumerate(e.p):
        d = axis_diff(u, axis)
        total += face_integral(np.abs(d) ** p_i, grid, axis) / p_i
    return total - weighted_integrate(rhs, u)


def energy_gradient(u: GridField, rhs: GridField, e: ExponentData) -> GridField:
    """Pointwise gradient of the energy per unit node volume: Op(u) - rhs on
    the interior, zero on the boundary ring."""
    grid = u.grid
    vals = p_laplacian_apply(u, e).values - rhs.values
    vals[grid.boundary_mask()] = 0.0
    return GridField(grid, vals)


def _interior_matrices(grid: Grid) -> list[sp.csr_matrix]:
    return [interior_difference_matrix(grid, axis) for axis in range(grid.dim)]


def _linear_lu(grid: Grid):
    """Cached factorization of the unit-weight stiffness sum_i K_i^T K_i."""
    lu = _LINEAR_LU_CACHE.get(grid)
    if lu is None:
        mats = _interior_matrices(grid)
        stiff = sum((k.T @ k for k in mats), start=sp.csr_matrix((mats[0].shape[1],) * 2))
        lu = spla.splu(stiff.tocsc())
        _LINEAR_LU_CACHE[grid] = lu
    return lu


def _vec_energy(x, mats, p, rhs_int):
    total = 0.0
    for k, p_i in zip(mats, p):
        total += np.sum(np.abs(k @ x) ** p_i) / p_i
    return total - float(rhs_int @ x)


def _vec_gradient(x, mats, p, rhs_int):
    g = -rhs_int.copy()
    for k, p_i in zip(mats, p):
        f = k @ x
        g += k.T @ (np.abs(f) ** (p_i - 2.0) * f)
    return g


def solve_inner(
    rhs: GridField,
    e: ExponentData,
    tol: float | None = None,
    max_iter: int = 10_000,
    x0: GridField | None = None,
    info: dict | None = None,
) -> GridField:
    """Minimize the inner energy; returns the zero-boundary field whose
    energy-gradient sup norm is <= tol.

    Damped Newton: the linearized flux weights (p_i - 1)|D_i u|^{p_i - 2}
    are floored to keep the system positive definite where a p_i > 2 flux
    degenerates, and an Armijo backtracking line search guarantees strictly
    decreasing energies.  For all p_i = 2 the step is the exact solve with a
    cached factorization.
    """
    grid = rhs.grid
    if e.N != grid.dim:
        raise ValidationError(f"exponent dimension {e.N} != grid dimension {grid.dim}")
    p = e.p
    all_two = all(p_i == 2.0 for p_i in p)
    if tol is None:
        tol = 1e-10 if all_two else 1e-8
    mats = _interior_matrices(grid)
    rhs_int = extract_interior(rhs)

    if x0 is not None:
        x = extract_interior(x0)
    elif all_two or not np.any(rhs_int):
        x = np.zeros_like(rhs_int)
    else:
        # p > 2 flux degenerates at zero gradient; start from the linear solve
        x = _linear_lu(grid).solve(rhs_int)

    energies: list[float] = []
    residuals: list[float] = []
    fx = _vec_energy(x, mats, p, rhs_int)
    g = _vec_gradient(x, mats, p, rhs_int)

    converged = False
    res = float(np.max(np.abs(g))) if g.size else 0.0
    for _ in range(max_iter):
        res = float(np.max(np.abs(g))) if g.size else 0.0
        energies.append(fx)
        residuals.append(res)
        if res <= tol:
            converged = True
            break
        if all_two:
            d = _linear_lu(grid).solve(-g)
        else:
            j = None
            for k, p_i in zip(mats, p):
                f = k @ x
                scale = float(np.max(np.abs(f))) if f.size else 0.0
                # floor keeps the linearized system positive definite where
                # a p_i > 2 flux degenerates; it only shapes the direction
                floor = 1e-8 * (1.0 + scale)
                w = (p_i - 1.0) * np.maximum(np.abs(f), floor) ** (p_i - 2.0)
                block = k.T @ sp.diags(w) @ k
                j = block if j is None else j + block
            d = spla.splu(j.tocsc()).solve(-g)
        gd = float(g @ d)
        if gd >= 0.0:
            d = -g
            gd = float(g @ d)
        # near the minimum the true decrease drops below the resolution of
        # the energy; the eps slack lets the (exact) Newton step through
        slack = 16.0 * np.finfo(float).eps * (1.0 + abs(fx))
        step = 1.0
        while step >= 1e-14:
            x_new = x + step * d
            f_new = _vec_energy(x_new, mats, p, rhs_int)
            if f_new <= fx + 1e-4 * step * gd + slack:
                break
            step *= 0.5
        else:
            raise NonConvergenceError(
                "line search failed in the inner solve", residual=res
            )
        x = x_new
        fx = f_new
        g = _vec_gradient(x, mats, p, rhs_int)
    if not converged:
        raise NonConvergenceError(
            f"inner solve did not reach tol={tol} in {max_iter} iterations",
            residual=res,
        )
    if info is not None:
        info["energies"] = energies
        info["residuals"] = residuals
        info["iterations"] = len(energies)
    return embed_interior(grid, x)


# ---------------------------------------------------------------------------
# regularized fixed-point map and level solve
# ---------------------------------------------------------------------------

def apply_A(
    v: GridField,
    level: RegularizationLevel,
    e: ExponentData,
    tol: float | None = None,
    x0: GridField | None = None,
) -> GridField:
    """One application of the level map: solve with right-hand side
    g_n * exp(1/(|v| + 1/n)), which is bounded by g_n * e^n."""
    rhs_vals = level.g_n.values * np.exp(1.0 / (np.abs(v.values) + level.shift))
    return solve_inner(GridField(v.grid, rhs_vals), e, tol=tol, x0=x0)


def solve_level(
    level: RegularizationLevel,
    e: ExponentData,
    tol_fix: float = 1e-8,
    max_outer: int = 200,
    inner_tol: float | None = None,
    u0: GridField | None = None,
    info: dict | None = None,
) -> GridField:
    """Iterate u <- A(u) from u = 0 until the residual sup|A(u) - u| <= tol_fix.

    The map is order-reversing in u, so plain iterates oscillate around the
    fixed point and the oscillation contracts only while the linearized map
    is mild.  The update therefore mixes with an adaptive weight: the
    dominant eigenvalue of the damped map is estimated from consecutive
    residual fields and the weight is set to its optimal relaxation value,
    which keeps the sweep convergent even when the plain iteration is not.
    """
    grid = level.g_n.grid
    u = u0 if u0 is not None else GridField.zeros(grid)
    omega = 1.0
    f_prev: np.ndarray | None = None
    gaps: list[float] = []
    for _ in range(max_outer):
        au = apply_A(u, level, e, tol=inner_tol, x0=u)
        f_k = au.values - u.values
        gap = float(np.max(np.abs(f_k)))
        gaps.append(gap)
        if gap <= tol_fix:
            if info is not None:
                info["gaps"] = gaps
                info["iterations"] = len(gaps)
                info["residual"] = gap
                info["omega"] = omega
            return au
        if f_prev is not None:
            denom = float(np.dot(f_prev.ravel(), f_prev.ravel()))
            if denom > 0:
                lam = float(np.dot(f_k.ravel(), f_prev.ravel())) / denom
                lam = min(lam, 0.999)
                # damped-map eigenvalue lam = 1 - omega*(1 + t) for the
                # dominant mode t of the order-reversing linearization
                t_dom = max((1.0 - lam) / omega - 1.0, 0.0)
                omega_new = 2.0 / (2.0 + t_dom)
                omega = min(1.0, max(1.0 / 256.0, 0.5 * omega + 0.5 * omega_new))
        u = GridField(grid, u.values + omega * f_k)
        f_prev = f_k
    raise NonConvergenceError(
        f"fixed-point iteration did not reach {tol_fix} in {max_outer} sweeps",
        residual=gaps[-1],
        diagnostics={"gaps": gaps[-10:], "omega": omega},
    )


# ---------------------------------------------------------------------------
# ladder
# ---------------------------------------------------------------------------

@dataclass
class LevelRecord:
    n: int
    residual: float
    sup_norm: float
    interior_min: float
    mono_defect: float
    outer_iterations: int


@dataclass
class LevelSetFit:
    """Domination fit of the decay recursion measure(h) <= C*measure(k)^beta/(h-k)^r
    on the superlevel-set measures of a field, with r held fixed.

    The slope beta comes from least squares in log space; the constant C is
    then raised until the bound dominates every measured pair, so
    `max_violation` is 1 whenever a fit exists.  `residual_halfwidth` is the
    half-range of the log-space residuals around the least-squares line (the
    fit-quality metric)."""

    levels: tuple[float, ...]
    measures: tuple[float, ...]
    r: float
    beta: float
    log_c: float
    max_violation: float
    residual_halfwidth: float


@dataclass
class LadderReport:
    levels: list[LevelRecord]
    uniform_bound_expected: bool | None
    sup_increment_ratio: float | None
    weak_residual_level_max: float
    weak_residual_limit_max: float
    levelset_fit: LevelSetFit | None
    epsilon_used: float
    epsilon_support_margin: float
    epsilon_energy: float
    final_field: GridField

    def to_dict(self) -> dict:
        return {
            "levels": [
                {
                    "n": r.n,
                    "residual": r.residual,
                    "supNorm": r.sup_norm,
                    "interiorMin": r.interior_min,
                    "monoDefect": r.mono_defect,
                    "outerIterations": r.outer_iterations,
                }
                for r in self.levels
            ],
            "uniformBoundExpected": self.uniform_bound_expected,
            "supIncrementRatio": self.sup_increment_ratio,
            "weakResidualLevelMax": self.weak_residual_level_max,
            "weakResidualLimitMax": self.weak_residual_limit_max,
            "levelsetFit": None
            if self.levelset_fit is None
            else {
                "levels": list(self.levelset_fit.levels),
                "measures": list(self.levelset_fit.measures),
                "r": self.levelset_fit.r,
                "beta": self.levelset_fit.beta,
                "logC": self.levelset_fit.log_c,
                "maxViolation": self.levelset_fit.max_violation,
                "residualHalfwidth": self.levelset_fit.residual_halfwidth,
            },
            "epsilonUsed": self.epsilon_used,
            "epsilonSupportMargin": self.epsilon_support_margin,
            "epsilonEnergy": self.epsilon_energy,
        }


def _centered_half_box_mask(grid: Grid) -> np.ndarray:
    mask = np.ones(grid.shape, dtype=bool)
    for axis, ((lo, hi), ax) in enumerate(zip(grid.box, grid.axes())):
        span = hi - lo
        ok = (ax >= lo + 0.25 * span - 1e-12) & (ax <= hi - 0.25 * span + 1e-12)
        shape = [1] * grid.dim
        shape[axis] = ax.size
        mask &= ok.reshape(shape)
    return mask


def random_bump(grid: Grid, rng: np.random.Generator) -> GridField:
    """Random compactly supported smoothstep bump vanishing near the boundary."""
    extents = [hi - lo for lo, hi in grid.box]
    rho = (0.10 + 0.15 * rng.random()) * min(extents)
    center = []
    for (lo, hi), step in zip(grid.box, grid.h):
        margin = rho + 2.0 * step
        if lo + margin >= hi - margin:
            center.append(0.5 * (lo + hi))
        else:
            center.append(lo + margin + (hi - lo - 2 * margin) * rng.random())
    d = grid.node_distances(center)
    return GridField(grid, cutoff_profile(np.clip(d / rho, 0.0, 1.0)))


def level_set_decay_fit(
    u: GridField,
    levels=None,
    r: float | None = None,
    e: ExponentData | None = None,
) -> LevelSetFit | None:
    """Fit measure(h_{j+1}) = C * measure(h_j)^beta / (h_{j+1}-h_j)^r with r
    fixed; returns None when the field has too little level-set structure."""
    umax = float(np.max(u.values))
    if umax <= 0:
        return None
    if levels is None:
        levels = np.linspace(0.2, 0.9, 8) * umax
    levels = np.asarray(sorted(levels), dtype=float)
    measures = np.array([level_set_measure(u, h) for h in levels])
    keep = measures > 0
    levels, measures = levels[keep], measures[keep]
    if len(levels) < 4:
        return None
    if r is None:
        if e is not None and e.pstar is not None:
            r = e.pstar
        elif e is not None:
            r = e.p_max + 2.0
        else:
            r = 2.0
    log_phi = np.log(measures)
    log_gap = np.log(np.diff(levels))
    # regress log phi_{j+1} + r log(dh_j) on [1, log phi_j], then push the
    # intercept up so the bound dominates every measured pair
    target = log_phi[1:] + r * log_gap
    design = np.column_stack([np.ones(len(target)), log_phi[:-1]])
    (log_c_ls, beta), *_ = np.linalg.lstsq(design, target, rcond=None)
    residuals = target - (log_c_ls + beta * log_phi[:-1])
    log_c = float(log_c_ls + np.max(residuals))
    halfwidth = float(0.5 * (np.max(residuals) - np.min(residuals)))
    bound = log_c + beta * log_phi[:-1] - r * log_gap
    max_violation = float(np.max(np.exp(log_phi[1:] - bound)))
    return LevelSetFit(
        levels=tuple(levels),
        measures=tuple(measures),
        r=float(r),
        beta=float(beta),
        log_c=log_c,
        max_violation=max_violation,
        residual_halfwidth=halfwidth,
    )


def run_ladder(
    n_max: int,
    w: WeightSpec,
    e: ExponentData,
    tol_fix: float = 1e-8,
    inner_tol: float | None = None,
    max_outer: int = 200,
    seed: int = 0,
    n_test_functions: int = 20,
) -> LadderReport:
    """Solve levels n = 1..n_max and record the ladder properties.

    Per level: fixed-point residual, sup norm, interior minimum over the
    centered half box, and the monotonicity defect max(u_{n-1} - u_n)^+.
    The final level also gets a weak-form residual battery (against both the
    level equation and the unregularized one) and a level-set decay fit.
    """
    if n_max < 2:
        raise ValidationError("the ladder needs n_max >= 2")
    grid = w.g.grid
    if e.pstar is not None and e.pstar < e.p_max:
        raise ValidationError(
            f"existence-mode runs require pstar >= p_N (got {e.pstar} < {e.p_max})"
        )
    omega_mask = _centered_half_box_mask(grid)
    records: list[LevelRecord] = []
    u_prev: GridField | None = None
    for n in range(1, n_max + 1):
        level = RegularizationLevel.from_weight(n, w)
        inf = {}
        u_n = solve_level(
            level, e, tol_fix=tol_fix, max_outer=max_outer,
            inner_tol=inner_tol, u0=u_prev, info=inf,
        )
        defect = 0.0
        if u_prev is not None:
            defect = float(max(0.0, np.max(u_prev.values - u_n.values)))
        records.append(
            LevelRecord(
                n=n,
                residual=inf["residual"],
                sup_norm=u_n.sup_norm(),
                interior_min=float(np.min(u_n.values[omega_mask])),
                mono_defect=defect,
                outer_iterations=inf["iterations"],
            )
        )
        u_prev = u_n

    final = u_prev
    thresholds = integrability_thresholds(e)
    if w.m is None:
        expected = None
    elif thresholds.m_bounded is not None:
        expected = w.m > thresholds.m_bounded
    else:
        expected = w.m > 1.0
    sups = [r.sup_norm for r in records]
    ratio = None
    if len(sups) >= 3:
        d1, d2 = sups[-2] - sups[-3], sups[-1] - sups[-2]
        ratio = d2 / d1 if d1 > 0 else 0.0

    rng = np.random.default_rng(seed)
    level = RegularizationLevel.from_weight(n_max, w)
    rhs_level = GridField(
        grid, level.g_n.values * np.exp(1.0 / (np.abs(final.values) + level.shift))
    )
    res_level = 0.0
    res_limit = 0.0
    for _ in range(n_test_functions):
        phi = random_bump(grid, rng)
        support = phi.values > 0
        limit_vals = np.zeros(grid.shape)
        limit_vals[support] = w.g.values[support] * np.exp(
            1.0 / final.values[support]
        )
        res_level = max(res_level, abs(weak_form_gap(final, phi, rhs_level, e.p)))
        res_limit = max(
            res_limit, abs(weak_form_gap(final, phi, GridField(grid, limit_vals), e.p))
        )

    interior_min_final = records[-1].interior_min
    eps = 0.5 * max(interior_min_final, 0.0)
    shifted = GridField(grid, np.maximum(final.values - eps, 0.0))
    eps_energy = sum(
        face_integral(np.abs(axis_diff(shifted, a)) ** p_i, grid, a) / p_i
        for a, p_i in enumerate(e.p)
    )
    support_cells = shifted.values > 0
    if np.any(support_cells):
        margin = math.inf
        for axis in range(grid.dim):
            idx = np.any(
                support_cells,
                axis=tuple(j for j in range(grid.dim) if j != axis),
            )
            first, last = int(np.argmax(idx)), int(len(idx) - 1 - np.argmax(idx[::-1]))
            margin = min(margin, first * grid.h[axis], (len(idx) - 1 - last) * grid.h[axis])
    else:
        margin = math.inf

    return LadderReport(
        levels=records,
        uniform_bound_expected=expected,
        sup_increment_ratio=ratio,
        weak_residual_level_max=res_level,
        weak_residual_limit_max=res_limit,
        levelset_fit=level_set_decay_fit(final, e=e),
        epsilon_used=eps,
        epsilon_support_margin=margin,
        epsilon_energy=eps_energy,
        final_field=final,
    )


# ---------------------------------------------------------------------------
# level-set extinction
# ---------------------------------------------------------------------------

def stampacchia_extinction(
    c: float, beta: float, r: float, k0: float, phi0: float
) -> float:
    """Extinction level for the decay recursion phi(h) <= c*phi(k)^beta/(h-k)^r.

    Returns k0 + d with d^r = c * phi0^(beta-1) * 2^(r*beta/(beta-1)); the
    measure is forced to vanish at that level whenever beta > 1.
    """
    if not beta > 1:
        raise ValidationError(f"extinction needs beta > 1, got {beta}")
    if r <= 0 or c < 0 or phi0 < 0:
        raise ValidationError("need r > 0, c >= 0, phi0 >= 0")
    if phi0 == 0.0:
        return k0
    d = (c * phi0 ** (beta - 1.0) * 2.0 ** (r * beta / (beta - 1.0))) ** (1.0 / r)
    return k0 + d


@dataclass
class StampacchiaVerification:
    d: float
    k_star: float
    iterations: int
    converged: bool
    max_ratio_deviation: float
    final_bound: float


def stampacchia_verify(
    c: float,
    beta: float,
    r: float,
    k0: float,
    phi0: float,
    target: float = 1e-12,
    max_iter: int = 400,
) -> StampacchiaVerification:
    """Iterate the recursion at the predicted increment and confirm the decay.

    With k_{j+1} = k_j + d*2^{-(j+1)} and equality in the recursion, the
    quantity phi_j * mu^j / phi0 (mu = 2^{r/(beta-1)}) stays exactly 1, so
    the implied bound phi_j <= phi0 * mu^{-j} is tight; `max_ratio_deviation`
    records how far floating point drifts from that identity before the
    bound drops below `target`.
    """
    k_star = stampacchia_extinction(c, beta, r, k0, phi0)
    d = k_star - k0
    if phi0 == 0.0:
        return StampacchiaVerification(0.0, k_star, 0, True, 0.0, 0.0)
    mu = 2.0 ** (r / (beta - 1.0))
    phi = phi0
    bound = phi0
    deviation = 0.0
    j = 0
    while bound > target and j < max_iter:
        step = d * 2.0 ** (-(j + 1))
        phi = c * phi ** beta / step ** r
        j += 1
        bound = phi0 * mu ** (-j)
        if bound > 0:
            deviation = max(deviation, abs(phi / bound - 1.0))
    return StampacchiaVerification(
        d=d,
        k_star=k_star,
        iterations=j,
        converged=bound <= target,
        max_ratio_deviation=deviation,
        final_bound=bound,
    )
