"""Analytic error bounds and sample-size conditions for exhaustive support recovery.

Everything here is a closed-form function of the problem parameters; the Monte
Carlo machinery lives elsewhere and is used only to check these expressions.
Bounds are computed and stored in the natural-log domain (exponents reach
-1e3 at modest parameters) and clamped to [0, 1] only at the report boundary.

Conventions: T is the true support, F a candidate support, d = |T - F| the
overlap deficit, g = ||(I - Pi_F) X_{T-F} beta_{T-F}||^2 the signal energy
invisible to the wrong subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError, PreconditionError, ValidationError
from .model import (
    DesignMatrix,
    SparseSignal,
    SparsityPattern,
    build_projector,
    pattern_difference,
)

# Optimal constants for the quadratic-form Chernoff exponent: the rate
# 2t^2/(1-2t) - t over |t| < 1/2 is minimized at t* with value sqrt(2) - 3/2,
# and the bound's decay constant is c = -min = (3 - 2 sqrt 2)/2.
CHERNOFF_C = (3.0 - 2.0 * math.sqrt(2.0)) / 2.0
CHERNOFF_T_STAR = (1.0 - math.sqrt(2.0) / 2.0) / 2.0
CHERNOFF_MIN = math.sqrt(2.0) - 1.5


@dataclass(frozen=True)
class ChernoffConstants:
    c: float = CHERNOFF_C
    t_star: float = CHERNOFF_T_STAR
    min_value: float = CHERNOFF_MIN


CHERNOFF = ChernoffConstants()


@dataclass(frozen=True)
class BoundReport:
    """One bound evaluation; ``probability`` is always min(1, exp(log_bound))."""

    log_bound: float
    probability: float
    d: Optional[int] = None
    projection_energy: Optional[float] = None

    @classmethod
    def from_log(
        cls,
        log_bound: float,
        d: Optional[int] = None,
        projection_energy: Optional[float] = None,
    ) -> "BoundReport":
        prob = 1.0 if log_bound >= 0.0 else math.exp(log_bound)
        return cls(log_bound=float(log_bound), probability=prob, d=d,
                   projection_energy=projection_energy)


@dataclass(frozen=True)
class ConditionReport:
    """Sufficient/necessary sample-size thresholds at one (p, k, beta_min^2, C) point."""

    n: Optional[int]
    sufficient_threshold: float
    necessary_threshold: float
    convexity_ok: bool
    p: int
    k: int
    beta_min_sq: float
    C: float


def chernoff_rate(t: float) -> float:
    """2t^2/(1-2t) - t, the rate whose infimum over |t|<1/2 is sqrt(2)-3/2."""
    if abs(t) >= 0.5:
        raise DomainError(f"rate requires |t| < 1/2, got t={t}")
    return 2.0 * t * t / (1.0 - 2.0 * t) - t


def quadratic_form_matrix(
    design: DesignMatrix,
    t_pattern: SparsityPattern,
    f_pattern: SparsityPattern,
) -> np.ndarray:
    """Dense Psi = Pi_F - Pi_T, the matrix of the decision statistic y^T Psi y."""
    pi_t = build_projector(design, t_pattern).matrix()
    pi_f = build_projector(design, f_pattern).matrix()
    return pi_f - pi_t


def projection_energy(
    design: DesignMatrix,
    signal: SparseSignal,
    t_pattern: SparsityPattern,
    f_pattern: SparsityPattern,
) -> float:
    """g = ||(I - Pi_F) X_{T-F} beta_{T-F}||^2, the energy F's subspace cannot absorb."""
    _check_support_pair(design, signal, t_pattern, f_pattern)
    diff = pattern_difference(t_pattern, f_pattern)
    if len(diff) == 0:
        return 0.0
    v = design.submatrix(diff) @ signal.values_on(diff)
    proj_f = build_projector(design, f_pattern)
    resid = v - proj_f.apply(v)
    return float(resid @ resid)


def _check_support_pair(design, signal, t_pattern, f_pattern):
    if signal.pattern.indices != t_pattern.indices or signal.pattern.p != t_pattern.p:
        raise ValidationError("signal support must equal the true pattern")
    if t_pattern.p != design.p or f_pattern.p != design.p:
        raise ValidationError("pattern ambient dimension does not match the design")
    if len(f_pattern) != len(t_pattern):
        raise ValidationError(
            f"candidate size {len(f_pattern)} != true support size {len(t_pattern)}"
        )


def exact_quadratic_log_mgf(
    design: DesignMatrix,
    signal: SparseSignal,
    t_pattern: SparsityPattern,
    f_pattern: SparsityPattern,
    t: float,
) -> float:
    """Exact log E[exp(t Z)] for Z = y^T Psi y, y ~ N(X_T beta_T, I).

    Equal to 2t^2 mu^T Psi (I-2tPsi)^{-1} Psi mu + t mu^T Psi mu
    - (1/2) log det(I - 2tPsi), evaluated through the eigendecomposition of
    Psi (all eigenvalues lie in [-1, 1], so I - 2tPsi is positive definite
    for |t| < 1/2).
    """
    if abs(t) >= 0.5:
        raise DomainError(f"log-MGF defined for |t| < 1/2, got t={t}")
    _check_support_pair(design, signal, t_pattern, f_pattern)
    if f_pattern.indices == t_pattern.indices:
        return 0.0
    psi = quadratic_form_matrix(design, t_pattern, f_pattern)
    mu = design.submatrix(t_pattern) @ signal.values
    lam, vecs = np.linalg.eigh(psi)
    w = vecs.T @ mu
    denom = 1.0 - 2.0 * t * lam
    if np.any(denom <= 0.0):
        raise DomainError(f"I - 2t*Psi not positive definite at t={t}")
    quad = 2.0 * t * t * float(np.sum(lam**2 * w**2 / denom))
    linear = t * float(np.sum(lam * w**2))
    logdet = float(np.sum(np.log(denom)))
    return quad + linear - 0.5 * logdet


def chain_log_bound(g: float, d: int, t: float) -> float:
    """Operator-norm/eigen-pair relaxation of the exact log-MGF at parameter t.

    [2t^2/(1 - 2|t|) - t] * g - (d/2) log(1 - 4t^2).  The |t| in the
    denominator keeps the operator-norm step valid on both signs of t; for
    t >= 0 (including the optimal t*) it coincides with 2t^2/(1-2t) - t.
    """
    if abs(t) >= 0.5:
        raise DomainError(f"chain bound requires |t| < 1/2, got t={t}")
    if g < 0:
        raise ValidationError(f"projection energy must be nonnegative, got {g}")
    if d < 0:
        raise ValidationError(f"overlap deficit must be nonnegative, got {d}")
    rate = 2.0 * t * t / (1.0 - 2.0 * abs(t)) - t
    return rate * g - 0.5 * d * math.log1p(-4.0 * t * t)


def pairwise_conditional_bound(
    design: DesignMatrix,
    signal: SparseSignal,
    t_pattern: SparsityPattern,
    f_pattern: SparsityPattern,
) -> BoundReport:
    """Bound on Pr[decoder declares F | X, beta, T]: exp(-c*g + d/2).

    Vacuous (probability 1) when F = T.
    """
    _check_support_pair(design, signal, t_pattern, f_pattern)
    d = len(pattern_difference(t_pattern, f_pattern))
    g = projection_energy(design, signal, t_pattern, f_pattern)
    log_bound = -CHERNOFF_C * g + 0.5 * d
    return BoundReport.from_log(log_bound, d=d, projection_energy=g)


def chi_square_log_mgf(t: float, dof: int) -> float:
    """log E[exp(t W)] = -(dof/2) log(1 - 2t) for W chi-square with dof degrees."""
    if dof < 1:
        raise ValidationError(f"degrees of freedom must be >= 1, got {dof}")
    if 2.0 * t >= 1.0:
        raise DomainError(f"chi-square MGF requires 2t < 1, got t={t}")
    return -0.5 * dof * math.log1p(-2.0 * t)


def averaged_pairwise_bound(n: int, k: int, d: int, miss_energy: float) -> BoundReport:
    """Design-averaged bound on declaring a fixed F at deficit d.

    exp(-((n-k)/2) log(1 + 2c ||beta_{T-F}||^2) + d/2): the conditional
    exponent's energy is ||beta_{T-F}||^2 times a chi-square with n-k degrees
    of freedom, and its MGF gives the log term.
    """
    if n <= k:
        raise ValidationError(f"need n > k, got n={n}, k={k}")
    if not 1 <= d <= k:
        raise ValidationError(f"need 1 <= d <= k, got d={d}, k={k}")
    if miss_energy < 0:
        raise ValidationError(f"miss energy must be nonnegative, got {miss_energy}")
    log_bound = -0.5 * (n - k) * math.log1p(2.0 * CHERNOFF_C * miss_energy) + 0.5 * d
    return BoundReport.from_log(log_bound, d=d)


def union_error_bound_sum(n: int, p: int, k: int, beta_min_sq: float) -> BoundReport:
    """Union bound over all wrong supports, grouped by overlap deficit.

    sum_{d=1..k} C(k,d) C(p-k,d) exp(-((n-k)/2) log(1+2c d beta_min^2) + d/2),
    accumulated with log-sum-exp; the total is clamped to 1 only at the end.
    """
    _check_union_params(n, p, k, beta_min_sq)
    terms = []
    for d in range(1, k + 1):
        log_count = _log_comb(k, d) + _log_comb(p - k, d)
        log_term = log_count - 0.5 * (n - k) * math.log1p(
            2.0 * CHERNOFF_C * d * beta_min_sq
        ) + 0.5 * d
        terms.append(log_term)
    log_bound = float(logsumexp(np.array(terms)))
    return BoundReport.from_log(log_bound)


def _check_union_params(n: int, p: int, k: int, beta_min_sq: float) -> None:
    if k < 1 or p <= k:
        raise ValidationError(f"need p > k >= 1, got p={p}, k={k}")
    if n <= k:
        raise ValidationError(f"need n > k, got n={n}, k={k}")
    if beta_min_sq <= 0:
        raise ValidationError(f"beta_min^2 must be positive, got {beta_min_sq}")


def _log_comb(a: int, b: int) -> float:
    return float(gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1))


def log_binomial(p: int, k: int) -> float:
    """log C(p, k) via log-gamma; exact enough for p in the millions."""
    if k < 0 or k > p:
        raise ValidationError(f"need 0 <= k <= p, got k={k}, p={p}")
    return _log_comb(p, k)


def convexity_condition(n: int, k: int, beta_min_sq: float) -> bool:
    """(n-k) beta_min^2 > 4 (1 + k beta_min^2)^2 / (k beta_min^2).

    This is the condition as published.  It is NOT sufficient for the
    deficit curve f to be convex with the actual constant c = (3-2sqrt2)/2
    (the 4 corresponds to c = 1/2); use ``curvature_condition`` for the exact
    requirement.
    """
    if k < 1:
        raise ValidationError(f"need k >= 1, got k={k}")
    if beta_min_sq <= 0:
        raise ValidationError(f"beta_min^2 must be positive, got {beta_min_sq}")
    lhs = (n - k) * beta_min_sq
    rhs = 4.0 * (1.0 + k * beta_min_sq) ** 2 / (k * beta_min_sq)
    return lhs > rhs


def curvature_condition(n: int, k: int, beta_min_sq: float) -> bool:
    """Exact convexity of the deficit curve on [1, k]: f''(1) > 0 and f''(k) > 0.

    f''(d) > 0 holds on an interval in d (its sign condition is a concave
    quadratic), so positivity at both endpoints gives convexity on [1, k]
    and hence a boundary maximum.  Strictly stronger than
    ``convexity_condition`` for every parameter.
    """
    if k < 1:
        raise ValidationError(f"need k >= 1, got k={k}")
    if beta_min_sq <= 0:
        raise ValidationError(f"beta_min^2 must be positive, got {beta_min_sq}")
    return _f_second(1.0, n, k, beta_min_sq) > 0 and _f_second(float(k), n, k, beta_min_sq) > 0


def _f_second(d: float, n: int, k: int, beta_min_sq: float) -> float:
    b2 = beta_min_sq
    return -2.0 / d + 2.0 * CHERNOFF_C**2 * b2 * b2 * (n - k) / (
        1.0 + 2.0 * CHERNOFF_C * d * b2
    ) ** 2


def f_curve(
    d: float, n: int, p: int, k: int, beta_min_sq: float
) -> tuple[float, float, float]:
    """The deficit curve f(d) and its first two derivatives.

    f(d) = d [5/2 + log(k(p-k)/d^2)] - ((n-k)/2) log(1 + 2c d beta_min^2)
    f'(d) = 1/2 + log(k(p-k)/d^2) - c beta_min^2 (n-k) / (1 + 2c d beta_min^2)
    f''(d) = -2/d + 2 c^2 beta_min^4 (n-k) / (1 + 2c d beta_min^2)^2

    The 1/2 in f' is the calculus-correct constant (the published display's
    5/2 drops the -2 from differentiating d*log(1/d^2)); both derivatives
    match central finite differences of f.
    """
    if d <= 0:
        raise DomainError(f"deficit must be positive, got d={d}")
    if k < 1 or p <= k:
        raise ValidationError(f"need p > k >= 1, got p={p}, k={k}")
    if beta_min_sq <= 0:
        raise ValidationError(f"beta_min^2 must be positive, got {beta_min_sq}")
    b2 = beta_min_sq
    c = CHERNOFF_C
    log_ratio = math.log(k * (p - k) / (d * d))
    f = d * (2.5 + log_ratio) - 0.5 * (n - k) * math.log1p(2.0 * c * d * b2)
    fp = 0.5 + log_ratio - c * b2 * (n - k) / (1.0 + 2.0 * c * d * b2)
    fpp = _f_second(d, n, k, b2)
    return f, fp, fpp


def union_error_bound_closed_form(
    n: int, p: int, k: int, beta_min_sq: float, C: float
) -> BoundReport:
    """Closed form k e^{5/2} max{(p-k)^{-B}, [e(p-k)/k]^{-kB}}, B = (C-5)/2.

    Preconditions are the ones under which this expression provably majorizes
    ``union_error_bound_sum``:

    - p > 2k;
    - exact convexity of the deficit curve (``curvature_condition``), which
      puts the integer maximum at d in {1, k};
    - the sample-size display with the 2c the exponent actually carries:
      n - k > C max{log(p-k)/log(1+2c b^2), (k log((p-k)/k) + k)/log(1+2c k b^2)}.
      The published display uses log(1+b^2)/log(1+k b^2) and absorbs the 2c
      into "large enough C"; at finite size with explicit C that version does
      not majorize the sum.
    """
    _check_union_params(n, p, k, beta_min_sq)
    if C <= 0:
        raise ValidationError(f"C must be positive, got {C}")
    if p <= 2 * k:
        raise PreconditionError("p > 2k", f"p={p}, k={k}")
    if not curvature_condition(n, k, beta_min_sq):
        raise PreconditionError(
            "deficit-curve convexity: f''(1) > 0 and f''(k) > 0",
            f"n={n}, k={k}, beta_min_sq={beta_min_sq}",
        )
    b2 = beta_min_sq
    c = CHERNOFF_C
    term1 = math.log(p - k) / math.log1p(2.0 * c * b2)
    term2 = (k * math.log((p - k) / k) + k) / math.log1p(2.0 * c * k * b2)
    required = C * max(term1, term2)
    if n - k <= required:
        raise PreconditionError(
            "n - k > C max{log(p-k)/log(1+2c b^2), (k log((p-k)/k)+k)/log(1+2c k b^2)}",
            f"n-k={n - k}, required > {required:.6g}",
        )
    B = (C - 5.0) / 2.0
    branch1 = -B * math.log(p - k)
    branch2 = -k * B * (1.0 + math.log((p - k) / k))
    log_bound = math.log(k) + 2.5 + max(branch1, branch2)
    return BoundReport.from_log(log_bound)


_SUFFICIENT_VARIANTS = ("proof", "statement", "corollary")


def sufficient_sample_size(
    p: int, k: int, beta_min_sq: float, C: float, variant: str = "proof"
) -> float:
    """Sample-size threshold above which the error bound decays.

    variant="proof":      k + C max{log(p-k)/log(1+b^2), (k log((p-k)/k) + k)/log(1+k b^2)}
    variant="statement":  k + C max{log(k(p-k))/log(1+b^2), (k log((p-k)/k) + log k)/log(1+k b^2)}
    variant="corollary":  C max{log(p-k)/log(1+b^2), k log(p/k)/log(1+k b^2), k}

    The proof and statement variants differ in the published text (grouping of
    log k(p-k), +k vs +log k); the proof form is the default.  The corollary
    variant thresholds n itself (not n - k) and includes the bare k term.
    """
    if variant not in _SUFFICIENT_VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}; pick from {_SUFFICIENT_VARIANTS}")
    if k < 1 or p <= 2 * k:
        raise ValidationError(f"need p > 2k and k >= 1, got p={p}, k={k}")
    if beta_min_sq <= 0:
        raise ValidationError(f"beta_min^2 must be positive, got {beta_min_sq}")
    if C <= 0:
        raise ValidationError(f"C must be positive, got {C}")
    b2 = beta_min_sq
    denom1 = math.log1p(b2)
    denomk = math.log1p(k * b2)
    if variant == "proof":
        term1 = math.log(p - k) / denom1
        term2 = (k * math.log((p - k) / k) + k) / denomk
        return k + C * max(term1, term2)
    if variant == "statement":
        term1 = math.log(k * (p - k)) / denom1
        term2 = (k * math.log((p - k) / k) + math.log(k)) / denomk
        return k + C * max(term1, term2)
    term1 = math.log(p - k) / denom1
    term2 = k * math.log(p / k) / denomk
    return C * max(term1, term2, float(k))


def necessary_sample_size(p: int, k: int, beta_min_sq: float) -> float:
    """Information-theoretic threshold below which reliable recovery fails.

    max{f1, f2, k-1} with
      f1 = (log C(p,k) - 1) / ((1/2) log(1 + k b^2 (1 - k/p)))
      f2 = (log(p-k+1) - 1) / ((1/2) log(1 + b^2 (1 - 1/(p-k+1))))
    """
    if k < 1 or p <= k:
        raise ValidationError(f"need p > k >= 1, got p={p}, k={k}")
    if beta_min_sq <= 0:
        raise DomainError(f"beta_min^2 must be positive, got {beta_min_sq}")
    b2 = beta_min_sq
    denom1 = 0.5 * math.log1p(k * b2 * (1.0 - k / p))
    denom2 = 0.5 * math.log1p(b2 * (1.0 - 1.0 / (p - k + 1)))
    if denom1 <= 0 or denom2 <= 0:
        raise DomainError(
            f"degenerate denominator at p={p}, k={k}, beta_min_sq={beta_min_sq}"
        )
    f1 = (log_binomial(p, k) - 1.0) / denom1
    f2 = (math.log(p - k + 1) - 1.0) / denom2
    return max(f1, f2, float(k - 1))


@dataclass(frozen=True)
class RegimeRow:
    p: int
    k: int
    beta_min_sq: float
    sufficient_n: float
    necessary_n: float
    predictor: float
    sufficient_ratio: float
    necessary_ratio: float


@dataclass(frozen=True)
class Regime:
    """One scaling row: maps p -> (k, beta_min^2) plus the predicted growth rate."""

    name: str
    k_of_p: Callable[[int], int]
    beta_sq_of: Callable[[int, int], float]
    predictor_of: Callable[[int, int], float]
    label: str


def _k_linear(p: int) -> int:
    return math.ceil(p / 4)


def _k_sublinear(p: int) -> int:
    return math.ceil(math.sqrt(p))


REGIMES: dict[str, Regime] = {
    "linear_invk": Regime(
        "linear_invk", _k_linear, lambda p, k: 1.0 / k,
        lambda p, k: p * math.log(p),
        "k ~ p/4, beta_min^2 ~ 1/k, predictor p log p",
    ),
    "linear_logk": Regime(
        "linear_logk", _k_linear, lambda p, k: math.log(k) / k,
        lambda p, k: float(p),
        "k ~ p/4, beta_min^2 ~ log(k)/k, predictor p",
    ),
    "linear_unit": Regime(
        "linear_unit", _k_linear, lambda p, k: 1.0,
        lambda p, k: float(p),
        "k ~ p/4, beta_min^2 = 1, predictor p",
    ),
    "sublinear_invk": Regime(
        "sublinear_invk", _k_sublinear, lambda p, k: 1.0 / k,
        lambda p, k: k * math.log(p - k),
        "k ~ sqrt(p), beta_min^2 ~ 1/k, predictor k log(p-k)",
    ),
    "sublinear_logk": Regime(
        "sublinear_logk", _k_sublinear, lambda p, k: math.log(k) / k,
        lambda p, k: k * math.log(p / k) / math.log(math.log(k)),
        "k ~ sqrt(p), beta_min^2 ~ log(k)/k, predictor k log(p/k)/log log k",
    ),
    "sublinear_unit": Regime(
        "sublinear_unit", _k_sublinear, lambda p, k: 1.0,
        lambda p, k: max(k * math.log(p / k) / math.log(k), float(k)),
        "k ~ sqrt(p), beta_min^2 = 1, predictor max{k log(p/k)/log k, k}",
    ),
}


def regime_table(
    regime: str,
    p_grid: Sequence[int],
    C: float = 9.0,
    variant: str = "proof",
) -> list[RegimeRow]:
    """Evaluate sufficient and necessary thresholds along one scaling row.

    Each row reports the ratio of both thresholds to the row's predicted
    growth expression (the order constants are not published, so only the
    flatness of the ratios is meaningful).
    """
    if regime not in REGIMES:
        raise ValidationError(f"unknown regime {regime!r}; pick from {sorted(REGIMES)}")
    grid = list(p_grid)
    if not grid:
        raise ValidationError("p grid must be nonempty")
    if any(b >= a for a, b in zip(grid[1:], grid)):
        raise ValidationError("p grid must be strictly increasing")
    reg = REGIMES[regime]
    rows = []
    for p in grid:
        k = reg.k_of_p(p)
        if p <= 2 * k:
            raise ValidationError(f"regime {regime} needs p > 2k, got p={p}, k={k}")
        b2 = reg.beta_sq_of(p, k)
        suff = sufficient_sample_size(p, k, b2, C, variant=variant)
        nec = necessary_sample_size(p, k, b2)
        pred = reg.predictor_of(p, k)
        rows.append(
            RegimeRow(
                p=p, k=k, beta_min_sq=b2,
                sufficient_n=suff, necessary_n=nec, predictor=pred,
                sufficient_ratio=suff / pred, necessary_ratio=nec / pred,
            )
        )
    return rows


def condition_report(
    p: int,
    k: int,
    beta_min_sq: float,
    C: float = 9.0,
    n: Optional[int] = None,
    variant: str = "proof",
) -> ConditionReport:
    """Bundle both thresholds and the published convexity flag for one point."""
    suff = sufficient_sample_size(p, k, beta_min_sq, C, variant=variant)
    nec = necessary_sample_size(p, k, beta_min_sq)
    conv = convexity_condition(n, k, beta_min_sq) if n is not None else convexity_condition(
        int(math.ceil(suff)), k, beta_min_sq
    )
    return ConditionReport(
        n=n, sufficient_threshold=suff, necessary_threshold=nec,
        convexity_ok=conv, p=p, k=k, beta_min_sq=beta_min_sq, C=C,
    )
