"""Self-contained oracle suite for the analytic machinery.

Every check pits a closed-form quantity against an independent route:
grid minimization for the Chernoff constants, dense symmetric eigensolves
for the spectrum of Pi_F - Pi_T, Monte Carlo sampling for the exact and
chi-square log-MGFs, and central finite differences for the deficit-curve
derivatives.  The CLI ``verify`` command runs these and exits nonzero on
any failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .bounds import (
    CHERNOFF,
    CHERNOFF_C,
    CHERNOFF_T_STAR,
    chain_log_bound,
    chernoff_rate,
    chi_square_log_mgf,
    curvature_condition,
    exact_quadratic_log_mgf,
    f_curve,
    projection_energy,
    quadratic_form_matrix,
)
from .model import (
    DesignMatrix,
    SparseSignal,
    build_projector,
    make_pattern,
    pattern_difference,
)

DEFAULT_VERIFY_SEED = 20260811


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_instance(gen: np.random.Generator, n_max: int = 32, k_max: int = 4):
    """A random (design, signal, T, F) tuple with F != T."""
    k = int(gen.integers(1, k_max + 1))
    n = int(gen.integers(max(4, 2 * k), n_max + 1))
    p = int(gen.integers(k + 2, 2 * k + 6))
    design = DesignMatrix(entries=gen.standard_normal((n, p)))
    t_idx = sorted(gen.choice(p, size=k, replace=False).tolist())
    while True:
        f_idx = sorted(gen.choice(p, size=k, replace=False).tolist())
        if f_idx != t_idx:
            break
    t_patt = make_pattern(t_idx, p)
    f_patt = make_pattern(f_idx, p)
    values = gen.uniform(0.5, 3.0, size=k) * gen.choice([-1.0, 1.0], size=k)
    signal = SparseSignal(pattern=t_patt, values=values)
    return design, signal, t_patt, f_patt


def check_chernoff_constants(c_override: float | None = None) -> CheckResult:
    """Grid-minimize 2t^2/(1-2t) - t over (-0.5, 0.5) and compare the constants."""
    c = CHERNOFF_C if c_override is None else c_override
    ts = np.linspace(-0.5 + 1e-6, 0.5 - 1e-6, 1_000_000)
    vals = 2.0 * ts * ts / (1.0 - 2.0 * ts) - ts
    i = int(np.argmin(vals))
    min_err = abs(vals[i] - CHERNOFF.min_value)
    t_err = abs(ts[i] - CHERNOFF.t_star)
    c_err = abs(c + CHERNOFF.min_value)
    ok = min_err < 1e-9 and t_err < 1e-4 and c_err < 1e-14
    return CheckResult(
        "chernoff-constants",
        ok,
        f"min_err={min_err:.3e} t_err={t_err:.3e} c_err={c_err:.3e}",
    )


def check_eigen_pairs(seed: int = DEFAULT_VERIFY_SEED, instances: int = 100) -> CheckResult:
    """Nonzero eigenvalues of Pi_F - Pi_T come in +/- pairs, at most d, inside [-1, 1]."""
    gen = rng.stream(seed, 101)
    worst_pair = 0.0
    worst_mag = 0.0
    for _ in range(instances):
        design, _, t_patt, f_patt = _random_instance(gen)
        d = len(pattern_difference(t_patt, f_patt))
        lam = np.linalg.eigvalsh(quadratic_form_matrix(design, t_patt, f_patt))
        pos = np.sort(lam[lam > 1e-8])[::-1]
        neg = np.sort(-lam[lam < -1e-8])[::-1]
        if len(pos) != len(neg) or len(pos) > d:
            return CheckResult(
                "eigen-pairs", False,
                f"pair count mismatch: {len(pos)} pos, {len(neg)} neg, d={d}",
            )
        if len(pos):
            worst_pair = max(worst_pair, float(np.max(np.abs(pos - neg))))
        worst_mag = max(worst_mag, float(np.max(np.abs(lam))))
    ok = worst_pair < 1e-8 and worst_mag <= 1.0 + 1e-10
    return CheckResult(
        "eigen-pairs", ok, f"worst_pair_gap={worst_pair:.3e} max_abs_eig={worst_mag:.12f}"
    )


def check_quadratic_identities(
    seed: int = DEFAULT_VERIFY_SEED, instances: int = 100
) -> CheckResult:
    """mu^T Psi mu = -g and mu^T Psi^2 mu = +g against the projector route."""
    gen = rng.stream(seed, 102)
    worst = 0.0
    for _ in range(instances):
        design, signal, t_patt, f_patt = _random_instance(gen)
        psi = quadratic_form_matrix(design, t_patt, f_patt)
        mu = design.submatrix(t_patt) @ signal.values
        g = projection_energy(design, signal, t_patt, f_patt)
        scale = max(g, 1e-12)
        err1 = abs(float(mu @ psi @ mu) + g) / scale
        err2 = abs(float(mu @ psi @ psi @ mu) - g) / scale
        worst = max(worst, err1, err2)
    ok = worst < 1e-9
    return CheckResult("quadratic-identities", ok, f"worst_rel_err={worst:.3e}")


def check_exact_mgf_sampling(
    seed: int = DEFAULT_VERIFY_SEED, samples: int = 1_000_000
) -> CheckResult:
    """Exact log-MGF at t* vs log of the sampled mean of exp(t* Z), n=6, p=4, k=2."""
    gen = rng.stream(seed, 103)
    n, p, k = 6, 4, 2
    design = DesignMatrix(entries=gen.standard_normal((n, p)))
    t_patt = make_pattern([0, 1], p)
    f_patt = make_pattern([1, 2], p)
    signal = SparseSignal(pattern=t_patt, values=np.array([1.5, -2.0]))
    t = CHERNOFF_T_STAR
    exact = exact_quadratic_log_mgf(design, signal, t_patt, f_patt, t)
    qt = build_projector(design, t_patt).basis
    qf = build_projector(design, f_patt).basis
    mu = design.submatrix(t_patt) @ signal.values
    noise = rng.stream(seed, 104).standard_normal((samples, n))
    ys = mu[None, :] + noise
    z = np.sum((ys @ qf) ** 2, axis=1) - np.sum((ys @ qt) ** 2, axis=1)
    sampled = math.log(float(np.mean(np.exp(t * z))))
    rel = abs(sampled - exact) / abs(exact)
    ok = rel < 0.02
    return CheckResult(
        "exact-mgf-vs-sampled", ok, f"exact={exact:.6f} sampled={sampled:.6f} rel={rel:.4f}"
    )


def check_chi_square_mgf(
    seed: int = DEFAULT_VERIFY_SEED, samples: int = 1_000_000, dof: int = 11
) -> CheckResult:
    """Chi-square log-MGF at t = -c against the sampled mean of exp(tW)."""
    t = -CHERNOFF_C
    exact = chi_square_log_mgf(t, dof)
    noise = rng.stream(seed, 105).standard_normal((samples, dof))
    w = np.sum(noise**2, axis=1)
    sampled = math.log(float(np.mean(np.exp(t * w))))
    rel = abs(sampled - exact) / abs(exact)
    ok = rel < 0.01
    return CheckResult(
        "chi-square-mgf", ok, f"exact={exact:.6f} sampled={sampled:.6f} rel={rel:.4f}"
    )


def check_chain_ordering(
    seed: int = DEFAULT_VERIFY_SEED, instances: int = 100, t_points: int = 25
) -> CheckResult:
    """exact <= chain(t) on a t grid, and chain(t*) <= -c g + d/2, slack 1e-9."""
    gen = rng.stream(seed, 106)
    ts = np.linspace(-0.49, 0.49, t_points)
    worst = -math.inf
    for _ in range(instances):
        design, signal, t_patt, f_patt = _random_instance(gen)
        d = len(pattern_difference(t_patt, f_patt))
        g = projection_energy(design, signal, t_patt, f_patt)
        for t in ts:
            exact = exact_quadratic_log_mgf(design, signal, t_patt, f_patt, float(t))
            chain = chain_log_bound(g, d, float(t))
            worst = max(worst, exact - chain)
        final = -CHERNOFF_C * g + 0.5 * d
        worst = max(worst, chain_log_bound(g, d, CHERNOFF_T_STAR) - final)
    ok = worst <= 1e-9
    return CheckResult("chain-ordering", ok, f"worst_excess={worst:.3e}")


def check_f_curve_derivatives(
    seed: int = DEFAULT_VERIFY_SEED, points: int = 100
) -> CheckResult:
    """f' and f'' against central finite differences, 1e-6 relative."""
    gen = rng.stream(seed, 107)
    h = 1e-5
    worst = 0.0
    for _ in range(points):
        k = int(gen.integers(1, 33))
        p = int(gen.integers(2 * k + 1, 6 * k + 40))
        b2 = float(np.exp(gen.uniform(math.log(0.1), math.log(10.0))))
        n = k + int(gen.integers(8, 2000))
        d = float(gen.uniform(1.0, max(1.0, float(k))))
        f_mid, fp_mid, fpp_mid = f_curve(d, n, p, k, b2)
        f_hi, fp_hi, _ = f_curve(d + h, n, p, k, b2)
        f_lo, fp_lo, _ = f_curve(d - h, n, p, k, b2)
        fd1 = (f_hi - f_lo) / (2 * h)
        fd2 = (fp_hi - fp_lo) / (2 * h)
        worst = max(
            worst,
            abs(fd1 - fp_mid) / max(abs(fp_mid), 1e-6),
            abs(fd2 - fpp_mid) / max(abs(fpp_mid), 1e-6),
        )
    ok = worst < 1e-6
    return CheckResult("f-curve-derivatives", ok, f"worst_rel_err={worst:.3e}")


def check_curvature_boundary_max(
    seed: int = DEFAULT_VERIFY_SEED, points: int = 200
) -> CheckResult:
    """Under the exact curvature condition, the integer maximum of f is at d in {1, k}."""
    gen = rng.stream(seed, 108)
    tried = 0
    for _ in range(points * 20):
        if tried >= points:
            break
        k = int(gen.integers(2, 65))
        p = int(gen.integers(2 * k + 1, 6 * k + 50))
        b2 = float(np.exp(gen.uniform(math.log(0.05), math.log(10.0))))
        lo = (1.0 + 2.0 * CHERNOFF_C * b2) ** 2 / (CHERNOFF_C**2 * b2 * b2)
        lo = max(lo, (1.0 + 2.0 * CHERNOFF_C * k * b2) ** 2 / (k * CHERNOFF_C**2 * b2 * b2))
        n = k + int(math.ceil(lo * float(gen.uniform(1.001, 5.0))))
        if not curvature_condition(n, k, b2):
            continue
        tried += 1
        vals = [f_curve(float(d), n, p, k, b2)[0] for d in range(1, k + 1)]
        arg = int(np.argmax(vals)) + 1
        if arg not in (1, k):
            return CheckResult(
                "curvature-boundary-max", False,
                f"interior argmax d={arg} at n={n}, p={p}, k={k}, b2={b2:.4f}",
            )
        if any(f_curve(float(d), n, p, k, b2)[2] <= 0 for d in np.linspace(1, k, 64)):
            return CheckResult(
                "curvature-boundary-max", False,
                f"negative curvature inside [1,k] at n={n}, k={k}, b2={b2:.4f}",
            )
    ok = tried >= points
    return CheckResult("curvature-boundary-max", ok, f"checked {tried} qualifying points")


def check_rate_relaxation() -> CheckResult:
    """-log(sqrt(2) - 1/2) <= 1, the step replacing the det term by d/2 at t*."""
    val = -math.log(math.sqrt(2.0) - 0.5)
    at_tstar = chernoff_rate(CHERNOFF_T_STAR)
    ok = val <= 1.0 and abs(at_tstar - CHERNOFF.min_value) < 1e-14
    return CheckResult(
        "rate-relaxation", ok, f"-log(sqrt2-1/2)={val:.6f} rate(t*)-min={at_tstar - CHERNOFF.min_value:.2e}"
    )


def run_all(
    seed: int = DEFAULT_VERIFY_SEED,
    fault_c_sign: bool = False,
) -> list[CheckResult]:
    """Run the full suite; ``fault_c_sign`` flips the sign of c as a negative control."""
    c_override = -CHERNOFF_C if fault_c_sign else None
    return [
        check_chernoff_constants(c_override=c_override),
        check_rate_relaxation(),
        check_eigen_pairs(seed),
        check_quadratic_identities(seed),
        check_exact_mgf_sampling(seed),
        check_chi_square_mgf(seed),
        check_chain_ordering(seed),
        check_f_curve_derivatives(seed),
        check_curvature_boundary_max(seed),
    ]
