"""Closed-form performance bounds and optimal bases.

Every constrained minimization here has the shape ``min t**a / (t - 1)`` over
an interval of ``t > 1`` with ``a > 1``.  That objective is strictly unimodal
with its minimum at ``t = a / (a - 1)``, so each bound is the objective at the
critical point clamped into the feasible interval.  Values are computed in
log space; binomial tails use exact integers for any ``k``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, UnsupportedRegimeError

# robust lower bound enumerates every candidate-set size l <= 2**k
MAX_ENUMERATED_K = 24


@dataclass(frozen=True)
class RobustnessSpec:
    r: float

    def __post_init__(self):
        if not self.r >= 4:
            raise DomainError(f"robustness r must be >= 4, got {self.r}")


@dataclass(frozen=True)
class AdviceConfig:
    k: int
    H: int = 0

    def __post_init__(self):
        _check_advice(self.k, self.H)

    @property
    def tau(self) -> float:
        return 0.0 if self.k == 0 else self.H / self.k


def _check_advice(k: int, H: int):
    if k < 0 or H < 0 or H > k:
        raise DomainError(f"need 0 <= H <= k, got k={k}, H={H}")


def _check_upper_regime(k: int, H: int):
    _check_advice(k, H)
    if 2 * H > k:
        raise UnsupportedRegimeError(
            f"upper bounds need H <= k/2 (got k={k}, H={H}); no guarantee is known")


def zeta_roots(r: float) -> tuple[float, float]:
    """Both roots of ``x**2 / (x - 1) = r``; the r-robust geometric bases."""
    if not r >= 4:
        raise DomainError(f"robustness r must be >= 4, got {r}")
    disc = math.sqrt(r * r - 4 * r)
    z2 = (r + disc) / 2
    # algebraically (r - disc)/2, written to avoid cancellation for large r
    z1 = 2 * r / (r + disc)
    return z1, z2


def binomial_tail(N: int, m: int) -> int:
    """``sum_{j<=m} C(N, j)`` as an exact integer."""
    if N < 0 or m < 0 or m > N:
        raise DomainError(f"need 0 <= m <= N, got N={N}, m={m}")
    total, term = 0, 1
    for j in range(m + 1):
        total += term
        term = term * (N - j) // (j + 1)
    return total


def binary_entropy(x: float) -> float:
    if not 0 <= x <= 1:
        raise DomainError(f"entropy argument must lie in [0, 1], got {x}")
    if x in (0, 1):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def entropy_bounds(N: int, m: int) -> tuple[float, float]:
    """Entropy bracket around ``binomial_tail(N, m)`` for ``0 < m < N/2``."""
    if not (0 < m and 2 * m < N):
        raise DomainError(f"entropy bracket needs 0 < m < N/2, got N={N}, m={m}")
    upper = 2.0 ** (N * binary_entropy(m / N))
    lower = upper / math.sqrt(8 * m * (1 - m / N))
    tail = binomial_tail(N, m)
    assert lower <= tail <= upper, (N, m, lower, tail, upper)
    return lower, upper


class Minimum(NamedTuple):
    t: float
    value: float


def _log_objective(a: float, t: float) -> float:
    return a * math.log(t) - math.log(t - 1)


def minimize_power_ratio(a: float, lo: float = 1.0, hi: float = math.inf) -> Minimum:
    """Minimize ``t**a / (t - 1)`` over ``t`` in ``[lo, hi]`` with ``t > 1``."""
    if not a > 1:
        raise DomainError(f"exponent must exceed 1, got {a}")
    if lo > hi:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    t = a / (a - 1)
    t = min(max(t, lo), hi)
    if not t > 1:
        raise DomainError("feasible interval must lie in t > 1")
    return Minimum(t, math.exp(_log_objective(a, t)))


def pareto_consistency_lower_bound(r: float, k: int) -> float:
    """Best consistency of any r-robust schedule with ``k`` bits of untrusted advice."""
    return _pareto_min(r, k).value


def pareto_optimal_base(r: float, k: int) -> float:
    n = 2 ** k
    return math.exp(math.log(_pareto_min(r, k).t) / n)


def _pareto_min(r: float, k: int) -> Minimum:
    if k < 0:
        raise DomainError(f"advice size must be non-negative, got {k}")
    z1, z2 = zeta_roots(r)
    n = 2 ** k
    # in t = x**n the objective is t**(1 + 1/n) / (t - 1)
    return minimize_power_ratio(1 + 1 / n, z1, z2)


def upper_rank(k: int, H: int) -> int:
    """``U = 2**H * binomial_tail(k - H, H)``, the rank guarantee of the noisy selector."""
    _check_advice(k, H)
    return 2 ** H * binomial_tail(k - H, H)


class NoisyUpper(NamedTuple):
    bound: float
    base: float
    U: int


def noisy_upper_bound(k: int, H: int) -> NoisyUpper:
    """Acceleration ratio of the noisy-advice schedule, its base ``b`` and ``U``."""
    _check_upper_regime(k, H)
    U = upper_rank(k, H)
    n = 2 ** k
    # c = (1 + U) / 2**k; bound = c * (1 + 1/c) ** (1 + c)
    log_c = math.log(1 + U) - math.log(n)
    c = math.exp(log_c)
    log_bound = log_c + (1 + c) * math.log1p(1 / c)
    # b**n = (n + U + 1) / (U + 1) = 1 + 1/c
    base = math.exp(math.log1p(1 / c) / n)
    return NoisyUpper(math.exp(log_bound), base, U)


def noisy_upper_objective(base: float, k: int, U: int) -> float:
    """``b**(2**k + 1 + U) / (b**(2**k) - 1)``."""
    n = 2 ** k
    lb = math.log(base)
    return math.exp((n + 1 + U) * lb - math.log(math.expm1(n * lb)))


class NoisyLower(NamedTuple):
    bound: float
    L: float


def f_curve(x: float) -> float:
    """``(1/x) * (1 + x) ** (1 + 1/x)``."""
    if not x > 0:
        raise DomainError(f"f is defined for x > 0, got {x}")
    return math.exp(-math.log(x) + (1 + 1 / x) * math.log1p(x))


def _log_L(k: int, H: int) -> float:
    return k * math.log(2) - math.log(binomial_tail(k, H))


def noisy_lower_bound(k: int, H: int) -> NoisyLower:
    """Lower bound ``f(L)`` with ``L = 2**k / binomial_tail(k, H)``."""
    _check_advice(k, H)
    L = math.exp(_log_L(k, H))
    return NoisyLower(f_curve(L), L)


class RobustUpper(NamedTuple):
    bound: float
    base: float


def robust_noisy_upper_bound(k: int, H: int, r: float) -> RobustUpper:
    """Noisy upper bound when every schedule of the family must stay r-robust."""
    _check_upper_regime(k, H)
    U = upper_rank(k, H)
    n = 2 ** k
    z1, z2 = zeta_roots(r)
    a = 1 + (1 + U) / n
    t, value = minimize_power_ratio(a, z1, z2)
    return RobustUpper(value, math.exp(math.log(t) / n))


def faulty_count(l: int, k: int, H: int) -> int:
    """Number of processors the adversary may disable among ``l`` candidates.

    ``floor(l * binomial_tail(k, H) / 2**k)``, capped at ``l - 1`` because at
    least one candidate always remains consistent.
    """
    return min((l * binomial_tail(k, H)) >> k, l - 1)


def robust_noisy_lower_bound(k: int, H: int, r: float, relaxed: bool = False) -> float:
    """Lower bound for the robust noisy model.

    For every candidate-set size ``l <= 2**k`` minimize
    ``a**(l + 1 + phi_l) / (a**l - 1)`` over ``a**l`` in the r-robust interval,
    then take the min over ``l``.  With ``relaxed=True`` the exponent
    ``l + 1 + phi_l`` is replaced by its lower estimate ``l * (1 + 1/L)`` for
    ``l >= L`` (and ``l + 1`` below), which tends to ``f(L)`` as ``r`` grows.
    """
    _check_advice(k, H)
    z1, z2 = zeta_roots(r)
    if relaxed:
        a = 1 + math.exp(-_log_L(k, H))
        return minimize_power_ratio(a, z1, z2).value
    if k > MAX_ENUMERATED_K:
        raise UnsupportedRegimeError(
            f"exact robust lower bound enumerates 2**k sizes; k <= {MAX_ENUMERATED_K}")
    # objective at t = a**l is t**(1 + (1 + phi_l)/l) / (t - 1); increasing in
    # the exponent for t > 1, so only the smallest exponent matters
    n = 2 ** k
    ls = np.arange(1, n + 1, dtype=np.int64)
    phi = np.minimum((ls * binomial_tail(k, H)) >> k, ls - 1)
    exps = 1 + (1 + phi) / ls
    return minimize_power_ratio(float(exps.min()), z1, z2).value


class RftOptimum(NamedTuple):
    value: float
    base: float


def rft_optimal_value(r: float, p: int, f: int) -> RftOptimum:
    """Optimal ratio with up to ``f`` faults among ``p`` processors, r-robust per processor."""
    if p < 1 or f < 0 or f >= p:
        raise DomainError(f"need 0 <= f < p, got p={p}, f={f}")
    z1, z2 = zeta_roots(r)
    # t = b**p; objective t**((p + f + 1)/p) / (t - 1)
    t, value = minimize_power_ratio((p + f + 1) / p, z1, z2)
    return RftOptimum(value, math.exp(math.log(t) / p))


def prior_work_bound(k: int, H: int) -> float:
    """Ratio ``f(2H/k)`` of the earlier k-schedule construction."""
    _check_advice(k, H)
    if k == 0 or H == 0:
        raise DomainError("prior-work bound needs k > 0 and H > 0")
    return f_curve(2 * H / k)


def l_scale_lower_bound(k: int, H: int) -> float:
    """``2**(k * (1 - entropy(H/k)))``; never exceeds ``L``."""
    _check_advice(k, H)
    tau = 0.0 if k == 0 else H / k
    log2_bound = k * (1 - binary_entropy(tau)) if tau <= 0.5 else 0.0
    L = math.exp(_log_L(k, H))
    value = 2.0 ** log2_bound
    assert L >= value * (1 - 1e-12), (k, H, L, value)
    return value


def line_search_ratio(rho: float) -> float:
    """Competitive ratio of the line-search strategy built on a sequence of ratio ``rho``."""
    if not rho >= 1:
        raise DomainError(f"rho must be >= 1, got {rho}")
    return 1 + 2 * rho


@dataclass
class BoundsReport:
    k: int
    H: int
    r: float
    zeta1: float
    zeta2: float
    U: int | None
    L: float
    pareto_lower: float
    noisy_upper: float | None
    noisy_lower: float
    robust_noisy_upper: float | None
    robust_noisy_lower: float | None
    optimal_base: float | None
    p: int | None = None
    f: int | None = None
    rft_value: float | None = None
    rft_base: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def bounds_report(k: int, H: int, r: float = 4.0, p: int | None = None,
                  f: int | None = None) -> BoundsReport:
    _check_advice(k, H)
    z1, z2 = zeta_roots(r)
    notes = []
    try:
        up = noisy_upper_bound(k, H)
        rob = robust_noisy_upper_bound(k, H, r)
        noisy_up, base, rob_up = up.bound, up.base, rob.bound
    except UnsupportedRegimeError as exc:
        noisy_up = base = rob_up = None
        notes.append(str(exc))
    try:
        rob_low = robust_noisy_lower_bound(k, H, r)
    except UnsupportedRegimeError as exc:
        rob_low = None
        notes.append(str(exc))
    low = noisy_lower_bound(k, H)
    report = BoundsReport(
        k=k, H=H, r=r, zeta1=z1, zeta2=z2, U=upper_rank(k, H) if 2 * H <= k else None, L=low.L,
        pareto_lower=pareto_consistency_lower_bound(r, k),
        noisy_upper=noisy_up, noisy_lower=low.bound, robust_noisy_upper=rob_up,
        robust_noisy_lower=rob_low, optimal_base=base, notes=notes)
    if p is not None:
        f = 0 if f is None else f
        rft = rft_optimal_value(r, p, f)
        report.p, report.f, report.rft_value, report.rft_base = p, f, rft.value, rft.base
    return report
