"""Single- and multi-processor contract schedules and the ratios defined on them.

Lengths are stored as natural logarithms so that long horizons with large
bases never overflow; every ratio is evaluated as a difference of logs.
All sups are taken over the materialized horizon and are therefore lower
estimates of the sup of the infinite schedule.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InvalidScheduleError, PreconditionError

DEFAULT_HORIZON = 200

# two instants closer than this (relative) are treated as simultaneous
TIME_RTOL = 1e-12


def log_cumsum(log_values: np.ndarray) -> np.ndarray:
    """Prefix sums of ``exp(log_values)``, returned in log space."""
    return np.logaddexp.accumulate(np.asarray(log_values, dtype=float))


@dataclass(frozen=True, eq=False)
class Schedule:
    """An increasing sequence of contract lengths ``x_0 < x_1 < ...``.

    ``kind`` and ``params`` record the closed-form rule that produced the
    materialized lengths, so geometric and cyclic-member schedules round-trip
    through JSON without storing every length.
    """

    log_lengths: np.ndarray
    kind: str = "explicit"
    params: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        logs = np.asarray(self.log_lengths, dtype=float)
        if logs.ndim != 1 or logs.size == 0:
            raise InvalidScheduleError("a schedule needs at least one contract")
        if not np.all(np.isfinite(logs)):
            raise InvalidScheduleError("contract lengths must be positive and finite")
        if logs.size > 1 and not np.all(np.diff(logs) > 0):
            raise InvalidScheduleError("contract lengths must be strictly increasing")
        logs.setflags(write=False)
        object.__setattr__(self, "log_lengths", logs)

    @classmethod
    def explicit(cls, lengths: Iterable[float], label: str = "") -> "Schedule":
        arr = np.asarray(list(lengths), dtype=float)
        if arr.size and np.any(arr <= 0):
            raise InvalidScheduleError("contract lengths must be positive")
        with np.errstate(divide="ignore"):
            return cls(np.log(arr), kind="explicit", label=label)

    @classmethod
    def geometric(cls, base: float, scale: float = 1.0,
                  horizon: int = DEFAULT_HORIZON, label: str = "") -> "Schedule":
        """The schedule ``scale * base**i`` for ``i < horizon``."""
        if not base > 1:
            raise InvalidScheduleError(f"geometric base must exceed 1, got {base}")
        if not scale > 0:
            raise InvalidScheduleError(f"scale must be positive, got {scale}")
        if horizon < 1:
            raise InvalidScheduleError("horizon must be a positive integer")
        logs = math.log(scale) + np.arange(horizon) * math.log(base)
        return cls(logs, kind="geometric",
                   params={"base": float(base), "scale": float(scale)},
                   label=label or f"G_{base:g}")

    @property
    def horizon(self) -> int:
        return int(self.log_lengths.size)

    @property
    def lengths(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_lengths)

    def log_completion_times(self) -> np.ndarray:
        return log_cumsum(self.log_lengths)

    def completion_times(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_completion_times())

    def scaled(self, factor: float) -> "Schedule":
        params = dict(self.params)
        if "scale" in params:
            params["scale"] = params["scale"] * factor
        return Schedule(self.log_lengths + math.log(factor), kind=self.kind,
                        params=params, label=self.label)

    def to_dict(self) -> dict:
        if self.kind in ("geometric", "cyclic-member"):
            return {"kind": self.kind, "base": self.params["base"],
                    "scale": self.params["scale"], "horizon": self.horizon,
                    "label": self.label}
        return {"kind": "explicit", "lengths": self.lengths.tolist(), "label": self.label}

    @classmethod
    def from_dict(cls, data: dict) -> "Schedule":
        kind = data.get("kind", "explicit")
        if kind == "explicit":
            return cls.explicit(data["lengths"], label=data.get("label", ""))
        if kind in ("geometric", "cyclic-member"):
            sched = cls.geometric(data["base"], data.get("scale", 1.0),
                                  int(data.get("horizon", DEFAULT_HORIZON)),
                                  label=data.get("label", ""))
            return Schedule(sched.log_lengths, kind=kind, params=sched.params,
                            label=sched.label)
        raise InvalidScheduleError(f"unknown schedule kind {kind!r}")

    def __repr__(self):
        return f"Schedule(kind={self.kind!r}, horizon={self.horizon}, label={self.label!r})"


def ratio_profile(s: Schedule, x_minus1: float = 1.0) -> np.ndarray:
    """Per-index terms ``(x_0 + ... + x_i) / x_{i-1}`` of the acceleration ratio."""
    if not x_minus1 > 0:
        raise DomainError("x_minus1 must be positive")
    logs = s.log_lengths
    denom = np.concatenate(([math.log(x_minus1)], logs[:-1]))
    return np.exp(log_cumsum(logs) - denom)


def acceleration_ratio(s: Schedule, x_minus1: float = 1.0) -> float:
    """Worst-case ratio of a single schedule over its horizon.

    Interruptions just before a completion are the worst case, so this is the
    max over i of the prefix sum up to ``x_i`` divided by ``x_{i-1}``, with
    ``x_{-1} = x_minus1`` (1 by convention).
    """
    return float(ratio_profile(s, x_minus1).max())


def longest_completed_by(s: Schedule, T: float) -> float | None:
    """Length of the longest contract finished by time ``T``; ``None`` if none has."""
    if T < 0:
        raise DomainError("interruption time must be non-negative")
    if T == 0:
        return None
    done = _count_done(s.log_completion_times(), math.log(T), strict=False)
    if done == 0:
        return None
    return float(math.exp(s.log_lengths[done - 1]))


def _count_done(log_times: np.ndarray, log_t: float, strict: bool) -> int:
    # completion instants within TIME_RTOL of T count as simultaneous with T
    if strict:
        return int(np.searchsorted(log_times, log_t - TIME_RTOL, side="left"))
    return int(np.searchsorted(log_times, log_t + TIME_RTOL, side="right"))


@dataclass(frozen=True, eq=False)
class MultiSchedule:
    """A p-processor schedule; up to ``fault_budget`` processors may be faulty."""

    processors: tuple[Schedule, ...]
    fault_budget: int = 0
    label: str = ""

    def __post_init__(self):
        procs = tuple(self.processors)
        if not procs:
            raise InvalidScheduleError("a multi-processor schedule needs p >= 1 processors")
        if not 0 <= self.fault_budget < len(procs):
            raise DomainError(f"fault budget must satisfy 0 <= phi < p, got "
                              f"phi={self.fault_budget}, p={len(procs)}")
        object.__setattr__(self, "processors", procs)

    @property
    def p(self) -> int:
        return len(self.processors)

    def merged(self) -> "MergedSequence":
        return MergedSequence(np.concatenate([s.log_lengths for s in self.processors]))

    def to_dict(self) -> dict:
        return {"fault_budget": self.fault_budget, "label": self.label,
                "processors": [s.to_dict() for s in self.processors]}


@dataclass(frozen=True, eq=False)
class MergedSequence:
    """All contract lengths of a multi-schedule in non-decreasing order (log space)."""

    log_values: np.ndarray

    def __post_init__(self):
        logs = np.sort(np.asarray(self.log_values, dtype=float))
        logs.setflags(write=False)
        object.__setattr__(self, "log_values", logs)

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "MergedSequence":
        arr = np.asarray(list(values), dtype=float)
        if np.any(arr <= 0):
            raise DomainError("merged values must be positive")
        return cls(np.log(arr))

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    def __len__(self):
        return int(self.log_values.size)


def fault_tolerant_ratio(m: MultiSchedule, fault_set: Iterable[int] = (),
                         x_minus1: float = 1.0) -> float:
    """Acceleration ratio of ``m`` when the processors in ``fault_set`` never complete anything.

    Interruptions are probed just before every completion on a live processor:
    the ratio is the completion instant over the longest live contract that
    finished strictly earlier.  Before any live completion the longest
    contract is taken to be ``x_minus1`` (the same convention as for a single
    schedule, so a 1-processor schedule gives exactly
    :func:`acceleration_ratio`).  Probes stop at the earliest final
    completion over *all* processors, so every fault set is evaluated on the
    same time window.
    """
    faults = set(fault_set)
    if any(not 0 <= j < m.p for j in faults):
        raise DomainError(f"fault set {sorted(faults)} names a processor outside [0, {m.p})")
    live = [j for j in range(m.p) if j not in faults]
    if not live:
        raise DomainError("at least one processor must survive")
    if not x_minus1 > 0:
        raise DomainError("x_minus1 must be positive")

    completions = [s.log_completion_times() for s in m.processors]
    log_tmax = min(float(c[-1]) for c in completions)

    times = np.concatenate([completions[j] for j in live])
    lengths = np.concatenate([m.processors[j].log_lengths for j in live])
    order = np.argsort(times, kind="stable")
    times, lengths = times[order], lengths[order]
    keep = times <= log_tmax + TIME_RTOL
    times, lengths = times[keep], lengths[keep]

    # longest contract finished strictly before each instant; ties share the
    # value at the start of their group
    best_before = np.concatenate(([math.log(x_minus1)],
                                  np.maximum.accumulate(lengths)))
    group_start = np.searchsorted(times, times - TIME_RTOL, side="left")
    return float(np.exp(np.max(times - best_before[group_start])))


def worst_fault_ratio(m: MultiSchedule, faults: int) -> tuple[float, tuple[int, ...]]:
    """Max of :func:`fault_tolerant_ratio` over all fault sets of the given size."""
    if not 0 <= faults < m.p:
        raise DomainError(f"need 0 <= faults < p, got {faults}")
    worst, arg = -math.inf, ()
    for fs in itertools.combinations(range(m.p), faults):
        ratio = fault_tolerant_ratio(m, fs)
        if ratio > worst:
            worst, arg = ratio, fs
    return worst, arg


def alpha_estimate(seq: MergedSequence) -> float:
    """Finite-horizon proxy for ``limsup x_n ** (1/n)``.

    Takes the max of ``x_n ** (1/n)`` over the top half of the horizon,
    which suppresses start-up transients and is exact for sequences that are
    globally geometric from 1.
    """
    n_total = len(seq)
    if n_total < 2:
        raise DomainError("need at least two merged values")
    idx = np.arange(max(1, n_total // 2), n_total)
    return float(np.exp(np.max(seq.log_values[idx] / idx)))


def gal_functional(seq: MergedSequence, q: int, p: int, phi: int) -> float:
    """Prefix sum through index ``q + phi + 1`` over the ``p`` values ending at ``q``."""
    if p < 1 or phi < 0:
        raise DomainError("need p >= 1 and phi >= 0")
    if q < p - 1 or q + phi + 1 >= len(seq):
        raise DomainError(f"q={q} outside materialized range for p={p}, phi={phi}, "
                          f"horizon={len(seq)}")
    logs = seq.log_values
    num = np.logaddexp.reduce(logs[: q + phi + 2])
    den = np.logaddexp.reduce(logs[q - p + 1: q + 1])
    return float(math.exp(num - den))


def gal_sup(seq: MergedSequence, p: int, phi: int) -> float:
    """Max of :func:`gal_functional` over every admissible ``q``."""
    logs = seq.log_values
    n = len(seq)
    q = np.arange(p - 1, n - phi - 1)
    if q.size == 0:
        raise DomainError("horizon too short for the requested p and phi")
    prefix = log_cumsum(logs)
    num = prefix[q + phi + 1]
    # window sum of p entries ending at q, via a difference of prefix sums
    upper = prefix[q]
    lower = np.where(q - p >= 0, prefix[np.maximum(q - p, 0)], -np.inf)
    with np.errstate(divide="ignore"):
        den = upper + np.log1p(-np.exp(lower - upper))
    return float(np.exp(np.max(num - den)))


@dataclass
class EnvelopeReport:
    r: float
    passed: bool
    checked: int
    lower_violations: list[int] = field(default_factory=list)
    upper_violations: list[int] = field(default_factory=list)

    def __bool__(self):
        return self.passed


def zeta_envelope_logs(r: float, count: int, log_x0: float, log_x1: float):
    """Log lower/upper envelopes for ``x_{i+1}``, ``i = 0 .. count-1``."""
    from .bounds import zeta_roots

    z1, z2 = zeta_roots(r)
    i = np.arange(count, dtype=float)
    if r == 4:
        lower = i * math.log(2) + log_x0
        upper = np.log(i + 1) + i * math.log(2) + log_x1
        return lower, upper
    with np.errstate(divide="ignore"):
        lower = math.log(z1 - 1) + i * math.log(z1) + log_x0
    # (z2^{i+1} - z1^{i+1}) / (z2 - z1), factored to stay finite
    upper = ((i + 1) * math.log(z2) + np.log1p(-np.exp((i + 1) * math.log(z1 / z2)))
             - math.log(z2 - z1) + log_x1)
    return lower, upper


def check_zeta_envelope(s: Schedule, r: float, x0: float | None = None,
                        x1: float | None = None, rtol: float = 1e-9) -> EnvelopeReport:
    """Check that every length lies inside the envelopes an r-robust schedule must obey.

    ``x0``/``x1`` override the reference lengths used by the envelopes
    (defaults: the schedule's own first two contracts).
    """
    if r < 4:
        raise DomainError(f"robustness must be at least 4, got {r}")
    ratio = acceleration_ratio(s)
    if ratio > r * (1 + rtol):
        raise PreconditionError(f"schedule has acceleration ratio {ratio:.9g} > r={r}")
    logs = s.log_lengths
    if logs.size < 2:
        return EnvelopeReport(r=r, passed=True, checked=0)
    log_x0 = logs[0] if x0 is None else math.log(x0)
    log_x1 = logs[1] if x1 is None else math.log(x1)
    count = logs.size - 1
    lower, upper = zeta_envelope_logs(r, count, log_x0, log_x1)
    actual = logs[1:]
    tol = math.log1p(rtol)
    low_bad = np.nonzero(actual < lower - tol)[0].tolist()
    up_bad = np.nonzero(actual > upper + tol)[0].tolist()
    return EnvelopeReport(r=r, passed=not low_bad and not up_bad, checked=count,
                          lower_violations=low_bad, upper_violations=up_bad)


def multischedule(schedules: Sequence[Schedule], fault_budget: int = 0) -> MultiSchedule:
    return MultiSchedule(tuple(schedules), fault_budget)
