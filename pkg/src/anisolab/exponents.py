"""Critical exponents, parameter regions, and hypothesis certification.

Everything here is exact closed-form arithmetic on the anisotropy vector
p = (p_1 <= ... <= p_N) and on the problem parameters (delta, gamma) or M.
The derived scalars feed the nonexistence experiments in `stability` and
the existence machinery in `solver`:

    pbar   harmonic mean of the p_i
    pstar  N*pbar/(N - pbar), defined only for pbar < N
    q      arithmetic mean of the p_i
    l1     (p_N - q)/2, lower endpoint of every beta window
    l2     2*delta/(N(q-1)) - (q-1)/2, upper endpoint (mixed-power problems)
    l3     2/(M*N(q-1)) - (q-1)/2, upper endpoint (exponential problems)

plus the open regions A, B, C, I, J whose membership decides which
nonexistence case (if any) applies to a parameter point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import (
    HypothesisNotApplicableError,
    HypothesisViolatedError,
    OutOfWindowError,
    UndefinedExponentError,
    ValidationError,
)

IDENTITY_TOL = 1e-12

# select_beta starts this fraction of the window below the upper endpoint;
# the candidate then bisects toward the midpoint if the decay test fails.
_BETA_ENDPOINT_OFFSET = 1e-6


def harmonic_mean(p, n: int | None = None) -> float:
    """Harmonic mean of a positive vector: n / sum(1/p_i)."""
    p = tuple(float(x) for x in p)
    if not p:
        raise ValidationError("harmonic mean of an empty vector")
    if any(x <= 0 for x in p):
        raise ValidationError("harmonic mean needs strictly positive entries")
    if n is None:
        n = len(p)
    if n != len(p):
        raise ValidationError(f"dimension {n} does not match vector length {len(p)}")
    return n / sum(1.0 / x for x in p)


@dataclass(frozen=True)
class ExponentData:
    """Anisotropy vector with its derived scalar exponents."""

    p: tuple[float, ...]
    N: int
    pbar: float
    pstar: float | None
    q: float

    @classmethod
    def from_p(cls, p) -> "ExponentData":
        p = tuple(float(x) for x in p)
        if not p:
            raise ValidationError("empty exponent vector")
        if any(x < 2.0 for x in p):
            raise ValidationError("every p_i must be >= 2")
        if any(a > b for a, b in zip(p, p[1:])):
            raise ValidationError("p must be sorted ascending")
        n = len(p)
        pbar = harmonic_mean(p)
        pstar = n * pbar / (n - pbar) if pbar < n else None
        return cls(p=p, N=n, pbar=pbar, pstar=pstar, q=sum(p) / n)

    @property
    def p_max(self) -> float:
        return self.p[-1]


def sobolev_exponent(e: ExponentData) -> float:
    """N*pbar/(N - pbar); only defined in the regime pbar < N."""
    if e.pstar is None:
        raise UndefinedExponentError(
            f"pbar = {e.pbar} >= N = {e.N}: the embedding exponent is not defined; "
            "use the r-parameterized thresholds instead"
        )
    return e.pstar


@dataclass(frozen=True)
class MixedPower:
    """Nonlinearity -(u^-delta + u^-gamma) with 0 < delta <= gamma."""

    delta: float
    gamma: float

    def __post_init__(self):
        if not (0 < self.delta <= self.gamma):
            raise ValidationError(
                f"mixed-power parameters need 0 < delta <= gamma, got ({self.delta}, {self.gamma})"
            )


@dataclass(frozen=True)
class ExpSingular:
    """Nonlinearity -e^(1/u); `cap` is the assumed upper bound M on candidates."""

    cap: float

    def __post_init__(self):
        if not self.cap > 0:
            raise ValidationError(f"cap M must be positive, got {self.cap}")


@dataclass(frozen=True)
class ProblemSpec:
    kind: MixedPower | ExpSingular
    exponents: ExponentData
    weight_floor: float = 1.0

    def __post_init__(self):
        if not self.weight_floor > 0:
            raise ValidationError("weight floor c must be positive")


@dataclass(frozen=True)
class Interval:
    """Open interval; `upper` may be math.inf.  Endpoints are never members."""

    lower: float
    upper: float

    def contains(self, x: float) -> bool:
        return self.lower < x < self.upper

    @property
    def empty(self) -> bool:
        return not (self.lower < self.upper)


class ApplicableTheorem(Enum):
    """Which certified nonexistence case a parameter point falls under.

    THM3_2: mixed power, candidates 0 < u <= 1, 1 <= delta < gamma, delta in A∩I
    THM3_3: mixed power, candidates u >= 1, 0 < delta < gamma, delta in A, gamma in I∩[1,inf)
    THM3_4: mixed power, candidates u > 0, 1 <= delta = gamma in A∩I
    THM3_5: exponential, candidates 0 < u <= M, M in J
    """

    THM3_2 = "Thm3_2"
    THM3_3 = "Thm3_3"
    THM3_4 = "Thm3_4"
    THM3_5 = "Thm3_5"
    NONE = "None"


def region_A(e: ExponentData) -> Interval:
    return Interval(e.N * (e.q - 1) * (e.p_max - 1) / 4.0, math.inf)


def region_B(e: ExponentData) -> Interval:
    return Interval(0.0, 4.0 / (e.N * (e.q - 1) * (e.p_max - 1)))


def region_C(e: ExponentData) -> Interval:
    if e.N == 1:
        return Interval(0.0, math.inf)
    return Interval(0.0, 4.0 / (e.N * (e.N - 1) * (e.q - 1)))


def region_I_axis_bounds(e: ExponentData) -> tuple[float | None, ...]:
    """Per-axis lower endpoints of I_i; None where the denominator degenerates."""
    bounds = []
    for p_i in e.p:
        den = p_i * (e.N * (e.q - 1) + 4.0) - e.N ** 2 * (e.q - 1)
        if den <= 0:
            bounds.append(None)
        else:
            bounds.append(e.N ** 2 * (e.q - 1) * (p_i - 1) / den)
    return tuple(bounds)


def region_I(e: ExponentData) -> Interval | None:
    """Intersection of the per-axis intervals; None when any axis degenerates."""
    bounds = region_I_axis_bounds(e)
    if any(b is None for b in bounds):
        return None
    return Interval(max(bounds), math.inf)


def region_J(e: ExponentData) -> Interval:
    b, c = region_B(e), region_C(e)
    return Interval(max(b.lower, c.lower), min(b.upper, c.upper))


def beta_window(spec: ProblemSpec) -> tuple[float, float]:
    """(l1, l2) for mixed-power problems, (l1, l3) for exponential ones.

    An empty window (upper <= lower) is returned as-is, never raised.
    """
    e = spec.exponents
    if e.q <= 1:
        raise ValidationError(f"window endpoints need q > 1, got q = {e.q}")
    l1 = (e.p_max - e.q) / 2.0
    if isinstance(spec.kind, MixedPower):
        upper = 2.0 * spec.kind.delta / (e.N * (e.q - 1)) - (e.q - 1) / 2.0
    else:
        upper = 2.0 / (spec.kind.cap * e.N * (e.q - 1)) - (e.q - 1) / 2.0
    return l1, upper


def lhs_power(beta: float, spec: ProblemSpec, use_gamma: bool = False) -> float:
    """Total power E carried by the cutoff quotient (psi/u)^E."""
    e = spec.exponents
    if isinstance(spec.kind, MixedPower):
        s = spec.kind.gamma if use_gamma else spec.kind.delta
        return 2.0 * beta + s + e.q - 1.0
    return 2.0 * beta + e.q


def theta_exponents(
    beta: float, spec: ProblemSpec, i: int, use_gamma: bool = False
) -> tuple[float, float]:
    """Conjugate pair (theta_i, theta_i') for axis i at the given beta.

    theta_i = E/(2*beta + q - p_i) where E is the total cutoff power; the
    conjugate satisfies 1/theta + 1/theta' = 1 exactly.  Requires beta > l1.
    """
    e = spec.exponents
    l1 = (e.p_max - e.q) / 2.0
    if beta <= l1:
        raise OutOfWindowError(f"beta = {beta} must exceed l1 = {l1}")
    p_i = e.p[i]
    den = 2.0 * beta + e.q - p_i
    big_e = lhs_power(beta, spec, use_gamma=use_gamma)
    return big_e / den, big_e / (big_e - den)


def decay_exponents(
    beta: float, spec: ProblemSpec, use_gamma: bool = False
) -> tuple[float, ...]:
    """Per-axis radial decay exponents N - p_i * theta_i' at the given beta.

    All-negative decay is what makes the radius sweep contradict stability.
    """
    e = spec.exponents
    return tuple(
        e.N - e.p[i] * theta_exponents(beta, spec, i, use_gamma=use_gamma)[1]
        for i in range(e.N)
    )


def _gamma_decay_negative_near_endpoint(spec: ProblemSpec) -> bool:
    """Probe whether the gamma-family decay exponents all turn negative just
    inside the window.

    For candidates bounded below by one the cutoff estimate carries the
    conjugates built from gamma while the window upper endpoint comes from
    delta, so (unlike the other cases) region membership alone does not
    decide the sign; it has to be checked numerically.
    """
    l1, upper = beta_window(spec)
    if not upper > l1:
        return False
    beta = upper - _BETA_ENDPOINT_OFFSET * (upper - l1)
    return all(d < 0 for d in decay_exponents(beta, spec, use_gamma=True))


def _applicable_theorem(spec: ProblemSpec) -> ApplicableTheorem:
    e = spec.exponents
    if isinstance(spec.kind, ExpSingular):
        if region_J(e).contains(spec.kind.cap):
            return ApplicableTheorem.THM3_5
        return ApplicableTheorem.NONE

    d, g = spec.kind.delta, spec.kind.gamma
    a = region_A(e)
    i_int = region_I(e)
    d_in_i = i_int.contains(d) if i_int is not None else False
    g_in_i = i_int.contains(g) if i_int is not None else False
    if d >= 1 and d < g and a.contains(d) and d_in_i:
        return ApplicableTheorem.THM3_2
    if (
        0 < d < g
        and a.contains(d)
        and g >= 1
        and g_in_i
        and _gamma_decay_negative_near_endpoint(spec)
    ):
        return ApplicableTheorem.THM3_3
    if d == g and d >= 1 and a.contains(d) and d_in_i:
        return ApplicableTheorem.THM3_4
    return ApplicableTheorem.NONE


def select_beta(spec: ProblemSpec) -> tuple[float, tuple[float, ...]]:
    """Pick a beta strictly inside the window with all decay exponents < 0.

    Starts just below the upper endpoint (where the decay is most negative)
    and bisects toward the midpoint; the first all-negative candidate wins.
    """
    thm = _applicable_theorem(spec)
    if thm is ApplicableTheorem.NONE:
        raise HypothesisNotApplicableError(
            "no certified hypothesis set holds at this parameter point"
        )
    l1, upper = beta_window(spec)
    if not upper > l1:
        raise HypothesisViolatedError(
            f"certified point has an empty beta window ({l1}, {upper})"
        )
    use_gamma = thm is ApplicableTheorem.THM3_3
    beta = upper - _BETA_ENDPOINT_OFFSET * (upper - l1)
    mid = 0.5 * (l1 + upper)
    for _ in range(200):
        decay = decay_exponents(beta, spec, use_gamma=use_gamma)
        if all(d < 0 for d in decay):
            return beta, decay
        beta = 0.5 * (beta + mid)
    raise HypothesisViolatedError(
        f"no admissible beta found in ({l1}, {upper}) although case {thm.value} applies"
    )


@dataclass(frozen=True)
class IntegrabilityThresholds:
    """Integrability exponents the weight g must meet.

    m_exist and m_bounded are set in the pbar < N regime.  For pbar >= N,
    existence needs any m > 1 and boundedness needs m above r/(r - p_N) for
    some r > p_N; `high_mean_threshold` evaluates that curve.
    """

    m_exist: float | None
    m_bounded: float | None
    pbar: float
    p_max: float
    N: int

    def high_mean_threshold(self, r: float) -> float:
        if self.pbar < self.N:
            raise UndefinedExponentError("r-parameterized threshold applies only for pbar >= N")
        if not r > self.p_max:
            raise ValidationError(f"need r > p_N = {self.p_max}, got r = {r}")
        return r / (r - self.p_max)


def integrability_thresholds(e: ExponentData) -> IntegrabilityThresholds:
    if e.pstar is not None:
        m_exist = e.pstar / (e.pstar - 1.0)
        m_bounded = e.pstar / (e.pstar - e.pbar)
    else:
        m_exist = None
        m_bounded = None
    return IntegrabilityThresholds(
        m_exist=m_exist, m_bounded=m_bounded, pbar=e.pbar, p_max=e.p_max, N=e.N
    )


@dataclass(frozen=True)
class ThresholdReport:
    """Structured outcome of hypothesis certification at one parameter point."""

    l1: float
    l2: float | None
    l3: float | None
    regionA: Interval
    regionB: Interval
    regionC: Interval
    regionI: Interval | None
    regionI_axis_bounds: tuple[float | None, ...]
    regionJ: Interval
    delta_in_A: bool | None
    delta_in_I: bool | None
    gamma_in_I: bool | None
    cap_in_B: bool | None
    cap_in_C: bool | None
    cap_in_J: bool | None
    betaWindow: tuple[float, float]
    selectedBeta: float | None
    decayExponents: tuple[float, ...] | None
    theoremApplicable: ApplicableTheorem

    def to_flat_dict(self) -> dict:
        """Flat key-value document; infinite endpoints serialize as None."""

        def num(x):
            if x is None:
                return None
            return None if math.isinf(x) else float(x)

        def iv(region: Interval | None, prefix: str, **members):
            out = {
                f"{prefix}.lower": num(region.lower) if region else None,
                f"{prefix}.upper": num(region.upper) if region else None,
            }
            for key, val in members.items():
                out[f"{prefix}.{key}"] = val
            return out

        doc: dict = {"l1": self.l1}
        if self.l2 is not None:
            doc["l2"] = self.l2
        if self.l3 is not None:
            doc["l3"] = self.l3
        doc.update(iv(self.regionA, "regionA", member=self.delta_in_A))
        doc.update(iv(self.regionB, "regionB", member=self.cap_in_B))
        doc.update(iv(self.regionC, "regionC", member=self.cap_in_C))
        doc.update(
            iv(
                self.regionI,
                "regionI",
                member=self.delta_in_I,
                memberGamma=self.gamma_in_I,
            )
        )
        doc["regionI.axisBounds"] = [num(b) for b in self.regionI_axis_bounds]
        doc.update(iv(self.regionJ, "regionJ", member=self.cap_in_J))
        doc["betaWindow.lower"] = self.betaWindow[0]
        doc["betaWindow.upper"] = self.betaWindow[1]
        doc["selectedBeta"] = self.selectedBeta
        doc["decayExponents"] = (
            list(self.decayExponents) if self.decayExponents is not None else None
        )
        doc["theoremApplicable"] = self.theoremApplicable.value
        return doc


def region_memberships(spec: ProblemSpec) -> ThresholdReport:
    """Compute every region endpoint, membership, and the applicable case.

    When a case applies, a beta is selected and the decay exponents at that
    beta are recorded; otherwise those fields are None.
    """
    e = spec.exponents
    a, b, c, j = region_A(e), region_B(e), region_C(e), region_J(e)
    i_int = region_I(e)
    i_bounds = region_I_axis_bounds(e)
    l1, upper = beta_window(spec)

    if isinstance(spec.kind, MixedPower):
        d, g = spec.kind.delta, spec.kind.gamma
        delta_in_a = a.contains(d)
        delta_in_i = i_int.contains(d) if i_int is not None else False
        gamma_in_i = i_int.contains(g) if i_int is not None else False
        cap_in_b = cap_in_c = cap_in_j = None
        l2, l3 = upper, None
    else:
        delta_in_a = delta_in_i = gamma_in_i = None
        cap_in_b = b.contains(spec.kind.cap)
        cap_in_c = c.contains(spec.kind.cap)
        cap_in_j = j.contains(spec.kind.cap)
        l2, l3 = None, upper

    thm = _applicable_theorem(spec)
    if thm is not ApplicableTheorem.NONE:
        beta, decay = select_beta(spec)
    else:
        beta, decay = None, None

    return ThresholdReport(
        l1=l1,
        l2=l2,
        l3=l3,
        regionA=a,
        regionB=b,
        regionC=c,
        regionI=i_int,
        regionI_axis_bounds=i_bounds,
        regionJ=j,
        delta_in_A=delta_in_a,
        delta_in_I=delta_in_i,
        gamma_in_I=gamma_in_i,
        cap_in_B=cap_in_b,
        cap_in_C=cap_in_c,
        cap_in_J=cap_in_j,
        betaWindow=(l1, upper),
        selectedBeta=beta,
        decayExponents=decay,
        theoremApplicable=thm,
    )
