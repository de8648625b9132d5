"""Problem instances for noisy sparse linear observations y = X beta + eps.

Types here are immutable after construction and safe to share across
concurrent workers.  All storage is double precision: the bounds computed
downstream span hundreds of orders of magnitude and single precision
underflows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ValidationError
from .rng import design_stream, noise_stream

#: Relative rank cutoff for projector construction, scaled by the largest
#: column norm of the extracted submatrix.
DEFAULT_RANK_TOLERANCE = 1e-10


@dataclass(frozen=True)
class SparsityPattern:
    """An ordered set of column indices inside an ambient dimension p.

    ``indices`` is strictly increasing with every entry in [0, p).
    """

    indices: tuple[int, ...]
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValidationError(f"ambient dimension must be positive, got p={self.p}")
        prev = -1
        for i in self.indices:
            if not isinstance(i, (int, np.integer)):
                raise ValidationError(f"pattern index {i!r} is not an integer")
            if i <= prev:
                raise ValidationError(f"indices must be strictly increasing, got {self.indices}")
            if i < 0 or i >= self.p:
                raise ValidationError(f"index {i} outside [0, {self.p})")
            prev = i
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def cardinality(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, index: int) -> bool:
        return index in set(self.indices)

    def difference(self, other: "SparsityPattern") -> "SparsityPattern":
        return pattern_difference(self, other)


def make_pattern(indices: Sequence[int], p: int) -> SparsityPattern:
    """Build the canonical (sorted) pattern; duplicates or range errors raise."""
    idx = sorted(int(i) for i in indices)
    if len(set(idx)) != len(idx):
        raise ValidationError(f"duplicate indices in {list(indices)}")
    return SparsityPattern(indices=tuple(idx), p=p)


def pattern_difference(a: SparsityPattern, b: SparsityPattern) -> SparsityPattern:
    """Indices in ``a`` but not in ``b``; cardinality is the overlap deficit d."""
    if a.p != b.p:
        raise ValidationError(f"ambient dimensions differ: {a.p} vs {b.p}")
    b_set = set(b.indices)
    kept = tuple(i for i in a.indices if i not in b_set)
    return SparsityPattern(indices=kept, p=a.p)


def enumerate_patterns(p: int, k: int) -> Iterator[SparsityPattern]:
    """Yield all C(p, k) size-k patterns exactly once, in lexicographic order."""
    if k < 0 or k > p:
        raise ValidationError(f"need 0 <= k <= p, got k={k}, p={p}")
    for combo in itertools.combinations(range(p), k):
        yield SparsityPattern(indices=combo, p=p)


@dataclass(frozen=True)
class SparseSignal:
    """Signal values on an exact support: no stored value is zero."""

    pattern: SparsityPattern
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.shape[0] != len(self.pattern):
            raise ValidationError(
                f"values shape {vals.shape} does not match support size {len(self.pattern)}"
            )
        if vals.shape[0] == 0:
            raise ValidationError("signal support must be nonempty")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("signal values must be finite")
        if np.any(vals == 0.0):
            raise ValidationError("signal values must be exactly nonzero on the support")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def beta_min(self) -> float:
        return float(np.min(np.abs(self.values)))

    def energy(self) -> float:
        return float(np.sum(self.values**2))

    def values_on(self, sub: SparsityPattern) -> np.ndarray:
        """Values restricted to ``sub``, which must be contained in the support."""
        lookup = {i: v for i, v in zip(self.pattern.indices, self.values)}
        missing = [i for i in sub.indices if i not in lookup]
        if missing:
            raise ValidationError(f"indices {missing} are not in the signal support")
        return np.array([lookup[i] for i in sub.indices], dtype=float)

    def dense(self) -> np.ndarray:
        out = np.zeros(self.pattern.p)
        out[list(self.pattern.indices)] = self.values
        return out


def flat_signal(pattern: SparsityPattern, beta_min: float) -> SparseSignal:
    """The flat signal beta_i = beta_min on the support (worst case per bound)."""
    if beta_min <= 0:
        raise ValidationError(f"beta_min must be positive, got {beta_min}")
    return SparseSignal(pattern=pattern, values=np.full(len(pattern), float(beta_min)))


@dataclass(frozen=True)
class DesignMatrix:
    """An n x p measurement matrix with finite entries."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=float)
        if mat.ndim != 2:
            raise ValidationError(f"design must be a matrix, got ndim={mat.ndim}")
        if not np.all(np.isfinite(mat)):
            raise ValidationError("design entries must be finite")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "entries", mat)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def p(self) -> int:
        return self.entries.shape[1]

    def submatrix(self, pattern: SparsityPattern) -> np.ndarray:
        if pattern.p != self.p:
            raise ValidationError(f"pattern ambient {pattern.p} != design p {self.p}")
        return self.entries[:, list(pattern.indices)]


def gaussian_design(n: int, p: int, seed: int) -> DesignMatrix:
    """i.i.d. standard-normal design from the counter-based stream keyed by seed.

    Identical (n, p, seed) gives byte-identical matrices.
    """
    if n < 1 or p < 1:
        raise ValidationError(f"need n, p >= 1, got n={n}, p={p}")
    rng = design_stream(seed)
    return DesignMatrix(entries=rng.standard_normal((n, p)))


@dataclass(frozen=True)
class ProblemInstance:
    """One observation y = X_T beta_T + eps with unit noise variance."""

    design: DesignMatrix
    signal: SparseSignal
    observation: np.ndarray = field(repr=False)
    noise_variance: float = 1.0

    def __post_init__(self):
        if self.signal.pattern.p != self.design.p:
            raise ValidationError(
                f"signal ambient {self.signal.pattern.p} != design p {self.design.p}"
            )
        y = np.asarray(self.observation, dtype=float)
        if y.ndim != 1 or y.shape[0] != self.design.n:
            raise ValidationError(
                f"observation length {y.shape} != measurement count {self.design.n}"
            )
        if self.noise_variance != 1.0:
            raise ValidationError("noise variance is fixed at 1 (rescale beta instead)")
        y = y.copy()
        y.flags.writeable = False
        object.__setattr__(self, "observation", y)

    @property
    def n(self) -> int:
        return self.design.n

    @property
    def p(self) -> int:
        return self.design.p

    @property
    def k(self) -> int:
        return len(self.signal.pattern)

    @property
    def true_pattern(self) -> SparsityPattern:
        return self.signal.pattern

    def noiseless_mean(self) -> np.ndarray:
        return self.design.submatrix(self.signal.pattern) @ self.signal.values


def synthesize_observation(
    design: DesignMatrix,
    signal: SparseSignal,
    noise_seed: int,
    noiseless: bool = False,
) -> np.ndarray:
    """Return X_T beta_T + eps, eps i.i.d. standard normal (zero when noiseless)."""
    if signal.pattern.p != design.p:
        raise ValidationError(f"signal ambient {signal.pattern.p} != design p {design.p}")
    mean = design.submatrix(signal.pattern) @ signal.values
    if noiseless:
        return mean
    eps = noise_stream(noise_seed).standard_normal(design.n)
    return mean + eps


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector onto a column space, held as an orthonormal basis."""

    basis: np.ndarray = field(repr=False)  # n x r, orthonormal columns

    def __post_init__(self):
        q = np.asarray(self.basis, dtype=float)
        if q.ndim != 2:
            raise ValidationError("projector basis must be a matrix")
        q = q.copy()
        q.flags.writeable = False
        object.__setattr__(self, "basis", q)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValidationError(f"vector shape {v.shape} != ({self.n},)")
        return self.basis @ (self.basis.T @ v)

    def matrix(self) -> np.ndarray:
        """Dense n x n projector matrix (small n only)."""
        return self.basis @ self.basis.T


def build_projector(
    design: DesignMatrix,
    pattern: SparsityPattern,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> Projector:
    """Orthonormal basis of col(X_F) via SVD, truncated at the rank tolerance.

    Rank deficiency (duplicate or dependent columns) is handled by projecting
    onto the numerically spanned subspace; the cutoff is relative to the
    largest column norm of X_F.  The empty pattern yields the zero projector.
    """
    if len(pattern) == 0:
        return Projector(basis=np.zeros((design.n, 0)))
    sub = design.submatrix(pattern)
    col_norms = np.linalg.norm(sub, axis=0)
    scale = float(np.max(col_norms))
    if scale == 0.0:
        return Projector(basis=np.zeros((design.n, 0)))
    u, s, _ = np.linalg.svd(sub, full_matrices=False)
    r = int(np.sum(s > rank_tolerance * scale))
    return Projector(basis=u[:, :r])


def residual_energy(projector: Projector, v: np.ndarray) -> float:
    """Squared norm of (I - Pi) v, computed from the explicit residual."""
    v = np.asarray(v, dtype=float)
    if v.shape != (projector.n,):
        raise ValidationError(f"vector shape {v.shape} != ({projector.n},)")
    resid = v - projector.apply(v)
    return float(resid @ resid)


def pattern_count(p: int, k: int) -> int:
    """C(p, k): the number of candidate supports the exhaustive decoder scores."""
    if k < 0 or k > p:
        raise ValidationError(f"need 0 <= k <= p, got k={k}, p={p}")
    return math.comb(p, k)
