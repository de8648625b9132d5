"""Deterministic Monte Carlo estimation of decoder error probabilities.

Each trial draws its noise (and, in fresh-design mode, its matrix) from a
counter-based stream keyed by (master_seed, kind, trial index), so the
per-trial outcome is a pure function of the experiment spec.  Error counts
are integers aggregated commutatively: worker count and scheduling cannot
change any result.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np

from . import rng
from .bounds import averaged_pairwise_bound, pairwise_conditional_bound, union_error_bound_sum
from .decoder import DEFAULT_CANDIDATE_BUDGET, decode_exhaustive
from .errors import BudgetError, ValidationError
from .model import (
    DesignMatrix,
    ProblemInstance,
    SparseSignal,
    SparsityPattern,
    build_projector,
    flat_signal,
    make_pattern,
    pattern_count,
    pattern_difference,
)

TARGET_PAIRWISE = "pairwise"
TARGET_RECOVERY = "recovery"
DESIGN_FIXED = "fixed"
DESIGN_FRESH = "fresh"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one batch of trials bit-exactly."""

    n: int
    p: int
    k: int
    trials: int
    master_seed: int
    target: str = TARGET_PAIRWISE
    design_mode: str = DESIGN_FIXED
    beta_min: float = 1.0
    beta_values: Optional[tuple[float, ...]] = None
    true_pattern: Optional[tuple[int, ...]] = None  # None -> {0..k-1}
    random_true_pattern: bool = False
    wrong_pattern: Optional[tuple[int, ...]] = None  # pairwise target only
    noiseless: bool = False
    level: float = 0.95

    def validate(self) -> None:
        # Recovery admits the degenerate p == k (a single candidate support,
        # which the decoder always declares); pairwise needs room for F != T.
        if not (self.p >= self.k >= 1):
            raise ValidationError(f"need p >= k >= 1, got p={self.p}, k={self.k}")
        if self.target == TARGET_PAIRWISE and self.p <= self.k:
            raise ValidationError(f"pairwise target needs p > k, got p={self.p}, k={self.k}")
        if self.n < 1:
            raise ValidationError(f"need n >= 1, got n={self.n}")
        if self.trials < 1:
            raise ValidationError(f"need trials >= 1, got {self.trials}")
        if not 0.0 < self.level < 1.0:
            raise ValidationError(f"confidence level must be in (0,1), got {self.level}")
        if self.target not in (TARGET_PAIRWISE, TARGET_RECOVERY):
            raise ValidationError(f"unknown target {self.target!r}")
        if self.design_mode not in (DESIGN_FIXED, DESIGN_FRESH):
            raise ValidationError(f"unknown design mode {self.design_mode!r}")
        if self.beta_values is not None and len(self.beta_values) != self.k:
            raise ValidationError(
                f"explicit beta has {len(self.beta_values)} entries, need k={self.k}"
            )
        if self.beta_values is None and self.beta_min <= 0:
            raise ValidationError(f"beta_min must be positive, got {self.beta_min}")
        if self.target == TARGET_PAIRWISE:
            if self.wrong_pattern is None:
                raise ValidationError("pairwise target needs a wrong pattern F")
            if self.random_true_pattern:
                raise ValidationError(
                    "pairwise target needs a fixed true pattern (d must be well defined)"
                )
            if len(self.wrong_pattern) != self.k:
                raise ValidationError(
                    f"wrong pattern has {len(self.wrong_pattern)} indices, need k={self.k}"
                )
        if self.target == TARGET_RECOVERY and self.design_mode != DESIGN_FRESH:
            raise ValidationError(
                "full-recovery experiments average over the design: use design_mode='fresh'"
            )

    def true_support(self) -> SparsityPattern:
        idx = self.true_pattern if self.true_pattern is not None else tuple(range(self.k))
        return make_pattern(idx, self.p)

    def wrong_support(self) -> SparsityPattern:
        assert self.wrong_pattern is not None
        return make_pattern(self.wrong_pattern, self.p)

    def signal_on(self, support: SparsityPattern) -> SparseSignal:
        if self.beta_values is not None:
            return SparseSignal(pattern=support, values=np.array(self.beta_values))
        return flat_signal(support, self.beta_min)

    def beta_min_sq(self) -> float:
        if self.beta_values is not None:
            return float(min(abs(v) for v in self.beta_values)) ** 2
        return self.beta_min**2

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class TrialBatchResult:
    error_count: int
    trials: int
    rate: float
    wilson_low: float
    wilson_high: float
    bound_value: float
    spec_digest: str


def wilson_interval(errors: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or errors < 0 or errors > trials:
        raise ValidationError(f"need 0 <= errors <= trials, got {errors}/{trials}")
    if not 0.0 < level < 1.0:
        raise ValidationError(f"confidence level must be in (0,1), got {level}")
    z = NormalDist().inv_cdf(0.5 * (1.0 + level))
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2.0 * trials)) / denom
    margin = (z / denom) * math.sqrt(
        phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)
    )
    # The score interval's endpoints are exactly 0 and 1 at the extremes;
    # computing them from center/margin loses that to cancellation.
    low = 0.0 if errors == 0 else max(0.0, center - margin)
    high = 1.0 if errors == trials else min(1.0, center + margin)
    return low, high


def _noise(spec: ExperimentSpec, trial: int) -> np.ndarray:
    if spec.noiseless:
        return np.zeros(spec.n)
    return rng.noise_stream(spec.master_seed, trial).standard_normal(spec.n)


def _fresh_design(spec: ExperimentSpec, trial: int) -> DesignMatrix:
    entries = rng.design_stream(spec.master_seed, trial).standard_normal((spec.n, spec.p))
    return DesignMatrix(entries=entries)


def _random_support(spec: ExperimentSpec, trial: int) -> SparsityPattern:
    gen = rng.pattern_stream(spec.master_seed, trial)
    idx = gen.choice(spec.p, size=spec.k, replace=False)
    return make_pattern([int(i) for i in idx], spec.p)


def pairwise_trial_outcomes(spec: ExperimentSpec) -> np.ndarray:
    """Boolean error indicator per trial: Z_F > 0 (decoder strictly prefers F)."""
    spec.validate()
    if spec.target != TARGET_PAIRWISE:
        raise ValidationError("spec target is not pairwise")
    return _pairwise_slice(spec, 0, spec.trials)


def recovery_trial_outcomes(
    spec: ExperimentSpec, max_candidates: int = DEFAULT_CANDIDATE_BUDGET
) -> np.ndarray:
    """Boolean error indicator per trial: declared support differs from the truth."""
    spec.validate()
    if spec.target != TARGET_RECOVERY:
        raise ValidationError("spec target is not recovery")
    total = pattern_count(spec.p, spec.k)
    if total > max_candidates:
        raise BudgetError(
            f"each decode scores C({spec.p},{spec.k}) = {total} candidates, "
            f"exceeding the budget of {max_candidates}"
        )
    return _recovery_slice(spec, 0, spec.trials)


def _chunked(spec: ExperimentSpec, slice_fn, workers: int) -> np.ndarray:
    """Assemble per-trial outcomes, optionally over parallel chunks.

    Streams are keyed per trial, so any partition of [0, trials) replays the
    exact same trials; results are placed by index, making the output a pure
    function of the spec.
    """
    if workers <= 1 or spec.trials < 2 * workers:
        return slice_fn(spec, 0, spec.trials)
    edges = np.linspace(0, spec.trials, workers + 1).astype(int)
    pieces = [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:])]
    out = np.zeros(spec.trials, dtype=bool)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for (lo, _), res in zip(pieces, pool.map(lambda piece: slice_fn(spec, *piece), pieces)):
            out[lo : lo + len(res)] = res
    return out


def _pairwise_slice(spec: ExperimentSpec, lo: int, hi: int) -> np.ndarray:
    t_patt = spec.true_support()
    f_patt = spec.wrong_support()
    signal = spec.signal_on(t_patt)
    out = np.zeros(hi - lo, dtype=bool)
    fixed = spec.design_mode == DESIGN_FIXED
    if fixed:
        design = _fresh_design(spec, 0)
        qt = build_projector(design, t_patt).basis
        qf = build_projector(design, f_patt).basis
        mean = design.submatrix(t_patt) @ signal.values
    for j, i in enumerate(range(lo, hi)):
        if not fixed:
            design = _fresh_design(spec, i)
            qt = build_projector(design, t_patt).basis
            qf = build_projector(design, f_patt).basis
            mean = design.submatrix(t_patt) @ signal.values
        y = mean + _noise(spec, i)
        z = float(np.sum((qf.T @ y) ** 2) - np.sum((qt.T @ y) ** 2))
        out[j] = z > 0.0
    return out


def _recovery_slice(spec: ExperimentSpec, lo: int, hi: int) -> np.ndarray:
    out = np.zeros(hi - lo, dtype=bool)
    for j, i in enumerate(range(lo, hi)):
        t_patt = _random_support(spec, i) if spec.random_true_pattern else spec.true_support()
        signal = spec.signal_on(t_patt)
        design = _fresh_design(spec, i)
        y = design.submatrix(t_patt) @ signal.values + _noise(spec, i)
        inst = ProblemInstance(design=design, signal=signal, observation=y)
        decoded = decode_exhaustive(inst)
        out[j] = decoded.pattern.indices != t_patt.indices
    return out


def _attach_bound(spec: ExperimentSpec) -> float:
    if spec.target == TARGET_PAIRWISE:
        t_patt = spec.true_support()
        f_patt = spec.wrong_support()
        if spec.design_mode == DESIGN_FIXED:
            design = _fresh_design(spec, 0)
            report = pairwise_conditional_bound(design, spec.signal_on(t_patt), t_patt, f_patt)
        else:
            d = len(pattern_difference(t_patt, f_patt))
            if d == 0:
                return 1.0
            miss = float(np.sum(spec.signal_on(t_patt).values_on(
                pattern_difference(t_patt, f_patt)) ** 2))
            report = averaged_pairwise_bound(spec.n, spec.k, d, miss)
        return report.probability
    if spec.p == spec.k:
        return 0.0  # no wrong support exists
    return union_error_bound_sum(spec.n, spec.p, spec.k, spec.beta_min_sq()).probability


def _finish(spec: ExperimentSpec, outcomes: np.ndarray) -> TrialBatchResult:
    errors = int(np.sum(outcomes))
    low, high = wilson_interval(errors, spec.trials, spec.level)
    return TrialBatchResult(
        error_count=errors,
        trials=spec.trials,
        rate=errors / spec.trials,
        wilson_low=low,
        wilson_high=high,
        bound_value=_attach_bound(spec),
        spec_digest=spec.digest(),
    )


def run_pairwise(spec: ExperimentSpec, workers: int = 1) -> TrialBatchResult:
    """Count trials with Z_F > 0; attach the matching analytic bound.

    Fixed-design mode reuses one seeded matrix (the bound is conditional on
    it); fresh-design mode draws a new matrix per trial (the bound is the
    design-averaged one).
    """
    spec.validate()
    if spec.target != TARGET_PAIRWISE:
        raise ValidationError("spec target is not pairwise")
    outcomes = _chunked(spec, _pairwise_slice, workers)
    return _finish(spec, outcomes)


def run_full_recovery(
    spec: ExperimentSpec, workers: int = 1, max_candidates: int = DEFAULT_CANDIDATE_BUDGET
) -> TrialBatchResult:
    """Decode exhaustively per trial and count declared != true support."""
    spec.validate()
    if spec.target != TARGET_RECOVERY:
        raise ValidationError("spec target is not recovery")
    total = pattern_count(spec.p, spec.k)
    if total > max_candidates:
        raise BudgetError(
            f"each decode scores C({spec.p},{spec.k}) = {total} candidates, "
            f"exceeding the budget of {max_candidates}"
        )
    outcomes = _chunked(spec, _recovery_slice, workers)
    return _finish(spec, outcomes)


@dataclass(frozen=True)
class SweepRow:
    spec: ExperimentSpec
    result: Optional[TrialBatchResult]
    error: Optional[str]


def sweep(specs: Sequence[ExperimentSpec], workers: int = 1) -> list[SweepRow]:
    """One result row per grid point, in grid order; invalid points are
    reported per-row and the sweep continues."""
    rows: list[SweepRow] = []
    for spec in specs:
        try:
            if spec.target == TARGET_PAIRWISE:
                res = run_pairwise(spec, workers=workers)
            else:
                res = run_full_recovery(spec, workers=workers)
            rows.append(SweepRow(spec=spec, result=res, error=None))
        except (ValidationError, BudgetError) as exc:
            rows.append(SweepRow(spec=spec, result=None, error=str(exc)))
    return rows
