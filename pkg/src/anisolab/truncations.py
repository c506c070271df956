"""Truncated test-function builders a_k, b_k and their structural identities.

For a level k and a power alpha > p_N - 1, the pair interpolates the pure
powers t^((1-alpha)/2) and t^(-alpha) by linear pieces on [0, 1/k), keeping
both functions positive, decreasing, and C^1 across the knot t = 1/k.

Three properties are machine-checkable and load-bearing downstream:

  (a) a_k(t)^2 >= t * b_k(t) everywhere, with equality on t >= 1/k;
  (b) a_k^p |a_k'|^(2-p) + b_k^p |b_k'|^(1-p) <= C * t^(p-alpha-1) per axis
      power p, for some finite C;
  (c) a_k'(t)^2 = ((alpha-1)^2 / (4*alpha)) * |b_k'(t)| as an exact identity
      on both pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class TruncationPair:
    """Level-k truncation with power alpha; linear-piece coefficients precomputed.

    `exponents` optionally carries the anisotropy vector so alpha can be
    validated against p_N - 1 and property (b) evaluated per axis.
    """

    k: int
    alpha: float
    exponents: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError(f"k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if self.exponents is not None:
            exps = tuple(float(x) for x in self.exponents)
            object.__setattr__(self, "exponents", exps)
            if not self.alpha > max(exps) - 1:
                raise ValidationError(
                    f"alpha = {self.alpha} must exceed p_N - 1 = {max(exps) - 1}"
                )
        if not self.alpha > 1:
            raise ValidationError(f"alpha must exceed 1 (p_i >= 2), got {self.alpha}")

    @property
    def knot(self) -> float:
        return 1.0 / self.k

    # linear piece of a_k: a_slope * t + a_icept on [0, 1/k)
    @property
    def a_slope(self) -> float:
        return 0.5 * (1.0 - self.alpha) * self.k ** (0.5 * (self.alpha + 1.0))

    @property
    def a_icept(self) -> float:
        # a_slope * (1+alpha)/(k*(1-alpha)) simplified
        return 0.5 * (1.0 + self.alpha) * self.k ** (0.5 * (self.alpha - 1.0))

    # linear piece of b_k: b_slope * t + b_icept on [0, 1/k)
    @property
    def b_slope(self) -> float:
        return -self.alpha * self.k ** (self.alpha + 1.0)

    @property
    def b_icept(self) -> float:
        return (1.0 + self.alpha) * self.k ** self.alpha

    @property
    def derivative_ratio(self) -> float:
        """The exact constant (alpha-1)^2/(4*alpha) of property (c)."""
        return (self.alpha - 1.0) ** 2 / (4.0 * self.alpha)


def _as_nonneg_array(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValidationError("truncations are defined for t >= 0 only")
    return arr, np.ndim(t) == 0


def _maybe_scalar(values, scalar: bool):
    return float(values[()]) if scalar else values


def a_eval(tp: TruncationPair, t):
    """a_k(t): linear on [0, 1/k), t^((1-alpha)/2) beyond."""
    arr, scalar = _as_nonneg_array(t)
    safe = np.where(arr > 0, arr, 1.0)
    power = safe ** (0.5 * (1.0 - tp.alpha))
    lin = tp.a_slope * arr + tp.a_icept
    return _maybe_scalar(np.where(arr < tp.knot, lin, power), scalar)


def a_prime(tp: TruncationPair, t):
    """a_k'(t); the knot value is taken from the power piece."""
    arr, scalar = _as_nonneg_array(t)
    safe = np.where(arr > 0, arr, 1.0)
    power = 0.5 * (1.0 - tp.alpha) * safe ** (-0.5 * (1.0 + tp.alpha))
    lin = np.full_like(arr, tp.a_slope)
    return _maybe_scalar(np.where(arr < tp.knot, lin, power), scalar)


def b_eval(tp: TruncationPair, t):
    """b_k(t): linear on [0, 1/k), t^(-alpha) beyond."""
    arr, scalar = _as_nonneg_array(t)
    safe = np.where(arr > 0, arr, 1.0)
    power = safe ** (-tp.alpha)
    lin = tp.b_slope * arr + tp.b_icept
    return _maybe_scalar(np.where(arr < tp.knot, lin, power), scalar)


def b_prime(tp: TruncationPair, t):
    """b_k'(t); the knot value is taken from the power piece."""
    arr, scalar = _as_nonneg_array(t)
    safe = np.where(arr > 0, arr, 1.0)
    power = -tp.alpha * safe ** (-tp.alpha - 1.0)
    lin = np.full_like(arr, tp.b_slope)
    return _maybe_scalar(np.where(arr < tp.knot, lin, power), scalar)


def default_samples(tp: TruncationPair, n: int = 1000, t_max: float = 10.0) -> np.ndarray:
    """Sample grid covering both pieces, the knot, a near-zero point, and a
    large-t proxy; sorted ascending."""
    lin_part = np.linspace(0.0, tp.knot, max(n // 4, 8), endpoint=False)
    pow_part = np.geomspace(tp.knot, t_max, max(n - len(lin_part) - 2, 8))
    pts = np.concatenate(([1e-12], lin_part, [tp.knot], pow_part, [t_max * 100.0]))
    return np.unique(pts)


@dataclass
class PropertyViolation:
    prop: str
    t: float
    lhs: float
    rhs: float


@dataclass
class TruncationPropertyReport:
    ok: bool
    knot_gap_a: float
    knot_gap_b: float
    knot_gap_a_prime: float
    knot_gap_b_prime: float
    max_c_deviation: float
    min_a_margin: float
    max_power_equality_gap: float
    growth_constants: dict[float, float] = field(default_factory=dict)
    violations: list[PropertyViolation] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "knotGapA": self.knot_gap_a,
            "knotGapB": self.knot_gap_b,
            "knotGapAPrime": self.knot_gap_a_prime,
            "knotGapBPrime": self.knot_gap_b_prime,
            "maxCDeviation": self.max_c_deviation,
            "minAMargin": self.min_a_margin,
            "maxPowerEqualityGap": self.max_power_equality_gap,
            "growthConstants": {str(p): v for p, v in self.growth_constants.items()},
            "violations": [
                {"property": v.prop, "t": v.t, "lhs": v.lhs, "rhs": v.rhs}
                for v in self.violations
            ],
        }


def verify_properties(
    tp: TruncationPair,
    samples=None,
    exponents: tuple[float, ...] | None = None,
    tol: float = IDENTITY_TOL,
) -> TruncationPropertyReport:
    """Check properties (a), (b), (c) plus knot continuity on a sample grid.

    (c) is asserted as an exact identity (relative tolerance `tol`) on both
    pieces; (a) is asserted everywhere with exact equality on the power
    piece; (b) is reported as a per-axis sup of the normalized ratio, only
    required to be finite over the sampled range.
    """
    if samples is None:
        samples = default_samples(tp)
    t = np.asarray(samples, dtype=float)
    if np.any(t < 0):
        raise ValidationError("samples must be >= 0")
    exps = exponents or tp.exponents or ()

    violations: list[PropertyViolation] = []

    a = a_eval(tp, t)
    b = b_eval(tp, t)
    ap = a_prime(tp, t)
    bp = b_prime(tp, t)

    # knot continuity: both closed forms evaluated exactly at 1/k
    knot = tp.knot
    lin_a = tp.a_slope * knot + tp.a_icept
    pow_a = knot ** (0.5 * (1.0 - tp.alpha))
    lin_b = tp.b_slope * knot + tp.b_icept
    pow_b = knot ** (-tp.alpha)
    gap_a = abs(lin_a - pow_a) / max(1.0, abs(pow_a))
    gap_b = abs(lin_b - pow_b) / max(1.0, abs(pow_b))
    gap_ap = abs(tp.a_slope - 0.5 * (1.0 - tp.alpha) * knot ** (-0.5 * (1.0 + tp.alpha)))
    gap_ap /= max(1.0, abs(tp.a_slope))
    gap_bp = abs(tp.b_slope - (-tp.alpha * knot ** (-tp.alpha - 1.0)))
    gap_bp /= max(1.0, abs(tp.b_slope))
    for name, gap in (("knot-a", gap_a), ("knot-b", gap_b),
                      ("knot-a'", gap_ap), ("knot-b'", gap_bp)):
        if gap > tol:
            violations.append(PropertyViolation(name, knot, gap, tol))

    # property (c): a'(t)^2 == ratio * |b'(t)|, relative to the local scale
    ratio = tp.derivative_ratio
    c_dev = np.abs(ap ** 2 - ratio * np.abs(bp)) / np.maximum(1.0, ratio * np.abs(bp))
    max_c = float(np.max(c_dev))
    if max_c > tol:
        idx = int(np.argmax(c_dev))
        violations.append(
            PropertyViolation("c", float(t[idx]), float(ap[idx] ** 2),
                              float(ratio * abs(bp[idx])))
        )

    # property (a): a^2 >= t*b, equality on the power piece
    margin = a ** 2 - t * b
    scale_a = np.maximum(1.0, a ** 2)
    min_margin = float(np.min(margin / scale_a))
    if min_margin < -tol:
        idx = int(np.argmin(margin / scale_a))
        violations.append(
            PropertyViolation("a", float(t[idx]), float(a[idx] ** 2), float(t[idx] * b[idx]))
        )
    on_power = t >= knot
    if np.any(on_power):
        eq_gap = np.abs(margin[on_power]) / scale_a[on_power]
        max_eq_gap = float(np.max(eq_gap))
        if max_eq_gap > tol:
            sub = np.flatnonzero(on_power)
            idx = int(sub[np.argmax(eq_gap)])
            violations.append(
                PropertyViolation("a-equality", float(t[idx]), float(a[idx] ** 2),
                                  float(t[idx] * b[idx]))
            )
    else:
        max_eq_gap = 0.0

    # property (b): sup over t > 0 of the normalized growth ratio, per axis
    growth: dict[float, float] = {}
    positive = t > 0
    tp_pos, a_pos, b_pos = t[positive], a[positive], b[positive]
    ap_pos, bp_pos = np.abs(ap[positive]), np.abs(bp[positive])
    for p_i in exps:
        num = a_pos ** p_i * ap_pos ** (2.0 - p_i) + b_pos ** p_i * bp_pos ** (1.0 - p_i)
        den = tp_pos ** (p_i - tp.alpha - 1.0)
        sup = float(np.max(num / den))
        growth[p_i] = sup
        if not np.isfinite(sup):
            violations.append(PropertyViolation("b", float("nan"), sup, float("inf")))

    return TruncationPropertyReport(
        ok=not violations,
        knot_gap_a=gap_a,
        knot_gap_b=gap_b,
        knot_gap_a_prime=gap_ap,
        knot_gap_b_prime=gap_bp,
        max_c_deviation=max_c,
        min_a_margin=min_margin,
        max_power_equality_gap=max_eq_gap,
        growth_constants=growth,
        violations=violations,
    )
