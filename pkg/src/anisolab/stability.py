"""Stability-side evaluators: the weak form, the second-variation gap and
its spectral index, the two-sided a priori estimate with truncations, the
cutoff corollaries, and the radius-sweep contradiction experiments.

Sign conventions: for positive candidates the nonlinearities here are
negative with positive derivative,

    mixed power:  f(u) = -u^-delta - u^-gamma,   f'(u) = delta*u^(-delta-1) + gamma*u^(-gamma-1)
    exponential:  f(u) = -e^(1/u),               f'(u) = e^(1/u) / u^2

A candidate u is *numerically stable* when the quadratic-form gap

    sum_i (p_i - 1) int |D_i u|^{p_i-2} |D_i phi|^2  -  int W f'(u) phi^2

is nonnegative over all discrete test functions; `stability_index` returns
the smallest Rayleigh quotient of that gap (mass-normalized), so stability
is exactly index >= 0.  W is 1 for the literal inequality and g for the
weighted variant the cutoff estimates use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import logsumexp

from .errors import (
    GeometryError,
    HypothesisNotApplicableError,
    NonConvergenceError,
    OutOfWindowError,
    SingularityError,
    ValidationError,
)
from .exponents import (
    ApplicableTheorem,
    ExpSingular,
    MixedPower,
    ProblemSpec,
    ThresholdReport,
    beta_window,
    decay_exponents,
    lhs_power,
    region_memberships,
    theta_exponents,
)
from .grid import (
    GridField,
    Grid,
    axis_diff,
    ball_fraction_weights,
    embed_interior,
    face_average,
    face_integral,
    integrate,
    interior_difference_matrix,
    interior_face_slices,
    weighted_integrate,
)
from .truncations import TruncationPair, b_eval


class StabilityVariant(Enum):
    AS_WRITTEN = "AsWritten"
    WEIGHTED_BY_G = "WeightedByG"


class CorollaryCase(Enum):
    """Which cutoff estimate is evaluated.

    C5_2_1: mixed power, candidates 0 < u <= 1, power E = 2b + delta + q - 1
    C5_2_2: mixed power, candidates u >= 1, power E = 2b + gamma + q - 1
    C5_2_3: mixed power, delta = gamma, candidates u > 0, delta-based power
    C5_3:   exponential, candidates 0 < u <= M, power E = 2b + q
    """

    C5_2_1 = "C5_2_1"
    C5_2_2 = "C5_2_2"
    C5_2_3 = "C5_2_3"
    C5_3 = "C5_3"


@dataclass(frozen=True)
class NonlinearityEval:
    """Vectorized nonlinearity with its derivative."""

    f: Callable
    fprime: Callable
    label: str = ""

    @classmethod
    def mixed_power(cls, delta: float, gamma: float) -> "NonlinearityEval":
        if not (0 < delta <= gamma):
            raise ValidationError("mixed power needs 0 < delta <= gamma")
        return cls(
            f=lambda u: -(u ** -delta) - (u ** -gamma),
            fprime=lambda u: delta * u ** (-delta - 1.0) + gamma * u ** (-gamma - 1.0),
            label=f"mixed_power(delta={delta}, gamma={gamma})",
        )

    @classmethod
    def exp_singular(cls) -> "NonlinearityEval":
        return cls(
            f=lambda u: -np.exp(1.0 / u),
            fprime=lambda u: np.exp(1.0 / u) / u ** 2,
            label="exp_singular",
        )

    @classmethod
    def from_problem(cls, spec: ProblemSpec) -> "NonlinearityEval":
        if isinstance(spec.kind, MixedPower):
            return cls.mixed_power(spec.kind.delta, spec.kind.gamma)
        return cls.exp_singular()

    @classmethod
    def constant_slope(cls, lam: float) -> "NonlinearityEval":
        """Frozen test nonlinearity: f = 0, f' = lam everywhere."""
        return cls(
            f=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
            fprime=lambda u: np.full_like(np.asarray(u, dtype=float), lam),
            label=f"constant_slope({lam})",
        )


def _require_compact_support(phi: GridField) -> None:
    if not phi.is_zero_on_boundary():
        raise ValidationError("test function must vanish on the boundary ring")


def _require_positive_on_support(u: GridField, support: np.ndarray) -> None:
    if np.any(u.values[support] <= 0):
        raise SingularityError("u must be positive wherever the test function lives")


def _node_weight_tensor(grid: Grid) -> np.ndarray:
    w = None
    for axis, w1 in enumerate(grid.node_weights_1d()):
        shape = [1] * grid.dim
        shape[axis] = w1.size
        w = w1.reshape(shape) if w is None else w * w1.reshape(shape)
    return w


# ---------------------------------------------------------------------------
# weak form and stability gap
# ---------------------------------------------------------------------------

def weak_residual(
    u: GridField,
    phi: GridField,
    nl: NonlinearityEval,
    g: GridField,
    p,
) -> float:
    """LHS - RHS of the weak form with the weighted right side g * f(u) * phi:

        sum_i int |D_i u|^{p_i-2} D_i u * D_i phi  -  int g f(u) phi

    `phi` must vanish on the boundary ring and u must be positive on its
    support (the nonlinearity is singular at zero).
    """
    grid = u.grid
    _require_compact_support(phi)
    support = phi.values != 0
    _require_positive_on_support(u, support)
    lhs = 0.0
    for axis, p_i in enumerate(p):
        du = axis_diff(u, axis)
        dphi = axis_diff(phi, axis)
        lhs += face_integral(np.abs(du) ** (p_i - 2.0) * du * dphi, grid, axis)
    rhs_vals = np.zeros(grid.shape)
    rhs_vals[support] = g.values[support] * nl.f(u.values[support])
    return lhs - weighted_integrate(GridField(grid, rhs_vals), phi)


def stability_gap(
    u: GridField,
    phi: GridField,
    nl: NonlinearityEval,
    g: GridField,
    p,
    variant: StabilityVariant = StabilityVariant.WEIGHTED_BY_G,
) -> float:
    """Second-variation gap of the candidate u tested against phi:

        sum_i (p_i - 1) int |D_i u|^{p_i-2} |D_i phi|^2 - int W f'(u) phi^2

    with W = 1 (AS_WRITTEN) or W = g (WEIGHTED_BY_G).  Quadratic in phi, so
    its sign is scale-invariant.
    """
    grid = u.grid
    _require_compact_support(phi)
    support = phi.values != 0
    _require_positive_on_support(u, support)
    quad = 0.0
    for axis, p_i in enumerate(p):
        du = axis_diff(u, axis)
        dphi = axis_diff(phi, axis)
        quad += (p_i - 1.0) * face_integral(
            np.abs(du) ** (p_i - 2.0) * dphi ** 2, grid, axis
        )
    pot_vals = np.zeros(grid.shape)
    pot_vals[support] = nl.fprime(u.values[support]) * phi.values[support] ** 2
    if variant is StabilityVariant.WEIGHTED_BY_G:
        pot_vals[support] *= g.values[support]
    return quad - integrate(GridField(grid, pot_vals))


@dataclass
class StabilityReport:
    """Outcome of the spectral stability test."""

    gap: float
    variant: StabilityVariant
    minimizer: GridField
    iterations: int
    shift: float
    description: str

    @property
    def stable(self) -> bool:
        return self.gap >= 0.0

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "variant": self.variant.value,
            "stable": self.stable,
            "iterations": self.iterations,
            "shift": self.shift,
            "minimizer": self.description,
        }


def stability_index(
    u: GridField,
    nl: NonlinearityEval,
    g: GridField,
    p,
    variant: StabilityVariant = StabilityVariant.WEIGHTED_BY_G,
    tol: float = 1e-10,
    max_iter: int = 5000,
    seed: int = 0,
) -> StabilityReport:
    """Smallest mass-normalized eigenvalue of the gap form over discrete test
    functions; the candidate is numerically stable iff the index is >= 0.

    The pencil (stiffness-with-frozen-weights minus potential, mass) is
    solved by inverse power iteration shifted strictly below the spectrum
    (the potential bound gives a safe shift), so the iteration converges to
    the smallest eigenvalue even when it is far from zero.  On a uniform
    grid the interior mass matrix is a multiple of the identity, so the
    index is the smallest eigenvalue of the plain symmetric matrix.
    """
    grid = u.grid
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        pot_full = np.asarray(nl.fprime(u.values), dtype=float)
        if variant is StabilityVariant.WEIGHTED_BY_G:
            pot_full = pot_full * g.values
    pot = pot_full[grid.interior_slices()].ravel()
    if not np.all(np.isfinite(pot)):
        raise SingularityError("potential W*f'(u) is not finite on the interior")

    a = None
    for axis, p_i in enumerate(p):
        k = interior_difference_matrix(grid, axis)
        du = axis_diff(u, axis)[interior_face_slices(grid, axis)].ravel()
        w = (p_i - 1.0) * np.abs(du) ** (p_i - 2.0)
        block = k.T @ sp.diags(w) @ k
        a = block if a is None else a + block
    pencil = (a - sp.diags(pot)).tocsr()

    n = pencil.shape[0]
    shift = -max(0.0, float(np.max(pot)) if pot.size else 0.0) - 1.0
    lu = spla.splu((pencil - shift * sp.identity(n)).tocsc())
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    rho_prev = math.inf
    rho = 0.0
    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            x = rng.standard_normal(n)
            x /= np.linalg.norm(x)
            continue
        y /= norm
        rho = float(y @ (pencil @ y))
        if abs(rho - rho_prev) <= tol * max(1.0, abs(rho)):
            x = y
            break
        rho_prev = rho
        x = y
    else:
        raise NonConvergenceError(
            "inverse power iteration stagnated",
            residual=abs(rho - rho_prev),
            diagnostics={"rho": rho, "iterations": max_iter},
        )
    minimizer = embed_interior(grid, x)
    return StabilityReport(
        gap=rho,
        variant=variant,
        minimizer=minimizer,
        iterations=it,
        shift=shift,
        description=f"inverse-power eigenvector, unit mass norm, {it} iterations",
    )


# ---------------------------------------------------------------------------
# a priori estimate (two-sided, with truncations)
# ---------------------------------------------------------------------------

def epsilon_coefficient(alpha: float, epsilon: float, n_dim: int, q: float) -> float:
    """(alpha-1)^2 (N(q-1) + eps) / (4 alpha (1 - eps)); increasing in eps on
    (0,1) with limit N(q-1)(alpha-1)^2/(4 alpha) at eps -> 0."""
    if not 0 < epsilon < 1:
        raise ValidationError("epsilon must lie in (0, 1)")
    return (alpha - 1.0) ** 2 * (n_dim * (q - 1.0) + epsilon) / (4.0 * alpha * (1.0 - epsilon))


@dataclass
class CaccioppoliReport:
    lhs: float
    rhs: float
    alpha: float | None
    epsilon: float | None
    beta: float | None
    k: int | None
    satisfied: bool
    firstViolatingR: float | None = None
    range_ok: bool | None = None
    case: str | None = None

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "beta": self.beta,
            "k": self.k,
            "satisfied": self.satisfied,
            "firstViolatingR": self.firstViolatingR,
            "rangeOk": self.range_ok,
            "case": self.case,
        }


def apriori_sides(
    u: GridField,
    psi: GridField,
    alpha: float,
    epsilon: float,
    k: int,
    nl: NonlinearityEval,
    e,
    g: GridField | None = None,
    c_const: float = 1.0,
    weighted: bool = False,
    truncated: bool = True,
) -> CaccioppoliReport:
    """Evaluate both sides of the truncated a priori estimate:

        LHS = int u f'(u) b_k(u) psi^q
        RHS = C sum_i int u^{p_i-alpha-1} |D_i psi|^{p_i} psi^{q-p_i}
              - eps_coef * int f(u) b_k(u) psi^q

    With `truncated=False` the pure power u^-alpha replaces b_k(u) (the
    inactive-truncation reference used for consistency checks).  The
    constant C is caller-supplied: it is existential, not computable.
    """
    grid = u.grid
    if not alpha > e.p_max - 1:
        raise ValidationError(f"alpha = {alpha} must exceed p_N - 1 = {e.p_max - 1}")
    coef = epsilon_coefficient(alpha, epsilon, e.N, e.q)
    if np.any(psi.values < 0) or np.any(psi.values > 1):
        raise ValidationError("psi must take values in [0, 1]")
    support = psi.values > 0
    _require_positive_on_support(u, support)

    u_safe = np.where(support, u.values, 1.0)
    if truncated:
        bk = b_eval(TruncationPair(k=k, alpha=alpha), u_safe)
    else:
        bk = u_safe ** (-alpha)
    psi_q = np.where(support, psi.values, 0.0) ** e.q
    weight = g.values if (weighted and g is not None) else 1.0

    lhs_vals = np.where(support, u_safe * nl.fprime(u_safe) * bk * psi_q * weight, 0.0)
    f_vals = np.where(support, nl.f(u_safe) * bk * psi_q * weight, 0.0)
    lhs = integrate(GridField(grid, lhs_vals))
    f_term = integrate(GridField(grid, f_vals))

    grad_term = 0.0
    for axis, p_i in enumerate(e.p):
        dpsi = axis_diff(psi, axis)
        psi_f = face_average(psi, axis)
        u_f = face_average(u, axis)
        on = psi_f > 0
        if np.any(u_f[on] <= 0):
            raise SingularityError("face-averaged u must stay positive on supp psi")
        u_f = np.where(on, u_f, 1.0)
        psi_f = np.where(on, psi_f, 1.0)
        integrand = np.where(
            on,
            u_f ** (p_i - alpha - 1.0) * np.abs(dpsi) ** p_i * psi_f ** (e.q - p_i),
            0.0,
        )
        grad_term += face_integral(integrand, grid, axis)

    rhs = c_const * grad_term - coef * f_term
    return CaccioppoliReport(
        lhs=lhs,
        rhs=rhs,
        alpha=alpha,
        epsilon=epsilon,
        beta=None,
        k=k if truncated else None,
        satisfied=lhs <= rhs,
    )


# ---------------------------------------------------------------------------
# cutoff corollaries
# ---------------------------------------------------------------------------

def _case_setup(case: CorollaryCase, beta: float, spec: ProblemSpec):
    """Return (E, theta_prime per axis, range predicate) for the case."""
    e = spec.exponents
    if case is CorollaryCase.C5_3:
        if not isinstance(spec.kind, ExpSingular):
            raise ValidationError("case C5_3 needs an exponential problem")
        big_e = lhs_power(beta, spec)
        theta_p = tuple(theta_exponents(beta, spec, i)[1] for i in range(e.N))
        cap = spec.kind.cap
        range_pred = lambda vals: bool(np.all((vals > 0) & (vals <= cap + 1e-12)))
    else:
        if not isinstance(spec.kind, MixedPower):
            raise ValidationError(f"case {case.value} needs a mixed-power problem")
        use_gamma = case is CorollaryCase.C5_2_2
        if case is CorollaryCase.C5_2_3 and spec.kind.delta != spec.kind.gamma:
            raise ValidationError("case C5_2_3 needs delta = gamma")
        big_e = lhs_power(beta, spec, use_gamma=use_gamma)
        theta_p = tuple(
            theta_exponents(beta, spec, i, use_gamma=use_gamma)[1] for i in range(e.N)
        )
        if case is CorollaryCase.C5_2_1:
            range_pred = lambda vals: bool(np.all((vals > 0) & (vals <= 1.0 + 1e-12)))
        elif case is CorollaryCase.C5_2_2:
            range_pred = lambda vals: bool(np.all(vals >= 1.0 - 1e-12))
        else:
            range_pred = lambda vals: bool(np.all(vals > 0))
    return big_e, theta_p, range_pred


def _log_quotient_integral(
    grid: Grid, g_vals, psi_vals, u_vals, big_e: float, extra_mask=None
) -> float:
    """int g (psi/u)^E via log-space accumulation (E can be large)."""
    w = _node_weight_tensor(grid)
    mask = (psi_vals > 0) & (g_vals > 0) & (w > 0)
    if extra_mask is not None:
        mask &= extra_mask
    if not np.any(mask):
        return 0.0
    if np.any(u_vals[mask] <= 0):
        raise SingularityError("u must be positive where the cutoff lives")
    logs = (
        np.log(w[mask])
        + np.log(g_vals[mask])
        + big_e * (np.log(psi_vals[mask]) - np.log(u_vals[mask]))
    )
    return float(np.exp(logsumexp(logs)))


def corollary_sides(
    u: GridField,
    psi: GridField,
    beta: float,
    spec: ProblemSpec,
    case: CorollaryCase,
    c_const: float = 1.0,
    g: GridField | None = None,
) -> CaccioppoliReport:
    """Evaluate the cutoff estimate int g (psi/u)^E <= C sum_i int |D_i psi|^{p_i theta_i'}.

    The range condition on u (per case) is checked and reported, never fatal:
    out-of-range candidates are legitimate exploratory inputs.
    """
    grid = u.grid
    e = spec.exponents
    l1, upper = beta_window(spec)
    if not l1 < beta < upper:
        raise OutOfWindowError(f"beta = {beta} outside the window ({l1}, {upper})")
    if np.any(psi.values < 0) or np.any(psi.values > 1):
        raise ValidationError("psi must take values in [0, 1]")
    big_e, theta_p, range_pred = _case_setup(case, beta, spec)
    g_vals = g.values if g is not None else np.ones(grid.shape)

    lhs = _log_quotient_integral(grid, g_vals, psi.values, u.values, big_e)
    rhs = 0.0
    for axis, (p_i, t_p) in enumerate(zip(e.p, theta_p)):
        dpsi = np.abs(axis_diff(psi, axis))
        exponent = big_e if case is CorollaryCase.C5_3 else p_i * t_p
        rhs += face_integral(dpsi ** exponent, grid, axis)
    rhs *= c_const

    return CaccioppoliReport(
        lhs=lhs,
        rhs=rhs,
        alpha=2.0 * beta + e.q - 1.0,
        epsilon=None,
        beta=beta,
        k=None,
        satisfied=lhs <= rhs,
        range_ok=range_pred(u.values[psi.values > 0]) if np.any(psi.values > 0) else None,
        case=case.value,
    )


# ---------------------------------------------------------------------------
# radius sweeps and certificates
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    R: float
    lhs: float
    rhs: float
    ratio: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    firstViolatingR: float | None
    slope: float | None
    decay_exponents: tuple[float, ...]
    big_e: float
    beta: float

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"R": r.R, "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio}
                for r in self.rows
            ],
            "firstViolatingR": self.firstViolatingR,
            "slope": self.slope,
            "decayExponents": list(self.decay_exponents),
            "E": self.big_e,
            "beta": self.beta,
        }


def radius_sweep(
    u: GridField,
    g: GridField,
    spec: ProblemSpec,
    beta: float,
    radii,
    c_const: float = 1.0,
    center=None,
    use_gamma: bool = False,
) -> SweepResult:
    """Evaluate int_{B_R} g (1/u)^E against C sum_i R^{N - p_i theta_i'}
    over increasing radii.

    Returns the table, the first violating radius (if any), and the fitted
    log-log slope of LHS/RHS.  When every decay exponent is negative the
    right side shrinks relative to the ball volume, so any fixed C is
    eventually violated; that is the contradiction the sweep exhibits.
    """
    grid = u.grid
    e = spec.exponents
    if not c_const > 0:
        raise ValidationError("the estimate constant C must be positive")
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValidationError("radii must be strictly increasing")
    if not radii:
        raise ValidationError("need at least one radius")
    c = grid.center if center is None else tuple(center)
    r_max = max(radii)
    for (lo, hi), ci in zip(grid.box, c):
        if ci - 2.0 * r_max < lo or ci + 2.0 * r_max > hi:
            raise GeometryError(
                f"2 * max radius = {2 * r_max} around {c} does not fit the box {grid.box}"
            )
    l1, upper = beta_window(spec)
    if not l1 < beta < upper:
        raise OutOfWindowError(f"beta = {beta} outside the window ({l1}, {upper})")
    big_e = lhs_power(beta, spec, use_gamma=use_gamma)
    if big_e <= 0:
        raise ValidationError(f"degenerate total power E = {big_e}")
    decay = decay_exponents(beta, spec, use_gamma=use_gamma)

    distances = grid.node_distances(c)
    rows: list[SweepRow] = []
    first_violating = None
    for r in radii:
        ball = ball_fraction_weights(grid, r, center=c, distances=distances)
        lhs = _log_quotient_integral(
            grid, g.values * ball, np.ones(grid.shape), u.values, big_e,
            extra_mask=ball > 0,
        )
        rhs = c_const * sum(r ** d for d in decay)
        rows.append(SweepRow(R=r, lhs=lhs, rhs=rhs, ratio=lhs / rhs if rhs > 0 else math.inf))
        if first_violating is None and lhs > rhs:
            first_violating = r

    slope = None
    good = [(row.R, row.ratio) for row in rows if 0 < row.ratio < math.inf]
    if len(good) >= 2:
        log_r = np.log([x for x, _ in good])
        log_ratio = np.log([y for _, y in good])
        design = np.column_stack([np.ones(len(good)), log_r])
        (_, slope_val), *_ = np.linalg.lstsq(design, log_ratio, rcond=None)
        slope = float(slope_val)

    return SweepResult(
        rows=rows,
        firstViolatingR=first_violating,
        slope=slope,
        decay_exponents=decay,
        big_e=big_e,
        beta=beta,
    )


_THEOREM_RANGES = {
    ApplicableTheorem.THM3_2: lambda vals, spec: bool(
        np.all((vals > 0) & (vals <= 1.0 + 1e-12))
    ),
    ApplicableTheorem.THM3_3: lambda vals, spec: bool(np.all(vals >= 1.0 - 1e-12)),
    ApplicableTheorem.THM3_4: lambda vals, spec: bool(np.all(vals > 0)),
    ApplicableTheorem.THM3_5: lambda vals, spec: bool(
        np.all((vals > 0) & (vals <= spec.kind.cap + 1e-12))
    ),
}


@dataclass
class NonexistenceCertificate:
    thresholds: ThresholdReport
    theorem: ApplicableTheorem
    beta: float
    decay_exponents: tuple[float, ...]
    sweep: SweepResult
    range_ok: bool
    c_const: float
    conclusion: str

    def to_dict(self) -> dict:
        return {
            "thresholds": self.thresholds.to_flat_dict(),
            "theoremApplicable": self.theorem.value,
            "beta": self.beta,
            "decayExponents": list(self.decay_exponents),
            "sweep": self.sweep.to_dict(),
            "rangeOk": self.range_ok,
            "Cconst": self.c_const,
            "conclusion": self.conclusion,
        }


def nonexistence_certificate(
    spec: ProblemSpec,
    u: GridField,
    g: GridField,
    c_const: float = 1.0,
    radii=None,
    center=None,
) -> NonexistenceCertificate:
    """Bundle hypothesis certification, beta selection, and the radius sweep
    into one verdict on a candidate stable solution.

    Raises HypothesisNotApplicableError when no certified case covers the
    parameter point (the gate refuses rather than sweeping).
    """
    report = region_memberships(spec)
    thm = report.theoremApplicable
    if thm is ApplicableTheorem.NONE:
        raise HypothesisNotApplicableError(
            "no certified hypothesis set holds at this parameter point; certificate refused"
        )
    beta = report.selectedBeta
    use_gamma = thm is ApplicableTheorem.THM3_3
    grid = u.grid
    c = grid.center if center is None else tuple(center)
    if radii is None:
        half = min(min(ci - lo, hi - ci) for (lo, hi), ci in zip(grid.box, c))
        r_top = 0.499 * half
        radii = np.geomspace(r_top / 10.0, r_top, 10)
    sweep = radius_sweep(
        u, g, spec, beta, radii, c_const=c_const, center=c, use_gamma=use_gamma
    )
    range_ok = _THEOREM_RANGES[thm](u.values, spec)
    if sweep.firstViolatingR is not None:
        conclusion = (
            f"candidate cannot satisfy the cutoff consequence of stability beyond "
            f"R = {sweep.firstViolatingR} with constant C = {c_const}"
        )
    else:
        conclusion = (
            "no violation within the swept radii; enlarge the radii or lower C "
            "(all decay exponents are negative, so a violation exists for some R)"
        )
    return NonexistenceCertificate(
        thresholds=report,
        theorem=thm,
        beta=beta,
        decay_exponents=report.decayExponents,
        sweep=sweep,
        range_ok=range_ok,
        c_const=c_const,
        conclusion=conclusion,
    )
