"""Advice-driven schedules built from the cyclic family ``X_{b,l}``.

Member ``i`` of ``X_{b,l}`` runs the contracts ``b**(i + j*l)``, ``j >= 0``.
Every power of ``b`` appears in exactly one member, and the instant at which
exponent ``e = i + j*l`` completes,

    C(e) = b**i * (b**((j+1)*l) - 1) / (b**l - 1),

is strictly increasing in ``e``.  So at any interruption ``T`` the exponents
finished so far (over all members) are ``0..E``, the best member is ``E mod l``
and member ``m`` sits at rank ``(E - m) mod l``: the ranking is a cyclic
rotation.  Advice is a set of answers about that rotation.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import bounds
from .bounds import RobustnessSpec
from .errors import DomainError, PreconditionError
from .querygames import AdviceChannel, QueryTranscript, solve_min_cyclic
from .sequences import (DEFAULT_HORIZON, TIME_RTOL, MultiSchedule, Schedule,
                        MergedSequence)

MODES = ("untrusted", "noisy", "robustNoisy")


@dataclass(frozen=True)
class CyclicFamily:
    base: float
    count: int
    horizon: int = DEFAULT_HORIZON

    def __post_init__(self):
        if not self.base > 1:
            raise DomainError(f"family base must exceed 1, got {self.base}")
        if self.count < 1 or self.horizon < 1:
            raise DomainError("family needs count >= 1 and horizon >= 1")

    @property
    def log_base(self) -> float:
        return math.log(self.base)

    def member(self, i: int) -> Schedule:
        if not 0 <= i < self.count:
            raise DomainError(f"member {i} outside [0, {self.count})")
        scale = self.base ** i
        logs = (i + self.count * np.arange(self.horizon)) * self.log_base
        return Schedule(logs, kind="cyclic-member",
                        params={"base": self.base ** self.count, "scale": scale},
                        label=f"X[{i}]")

    def members(self) -> list[Schedule]:
        return [self.member(i) for i in range(self.count)]

    def as_multischedule(self, fault_budget: int = 0) -> MultiSchedule:
        return MultiSchedule(tuple(self.members()), fault_budget, label=self.label)

    def merged(self) -> MergedSequence:
        return MergedSequence(np.arange(self.count * self.horizon) * self.log_base)

    @property
    def label(self) -> str:
        return f"X_{{{self.base:.6g},{self.count}}}"

    @property
    def exponents(self) -> int:
        return self.count * self.horizon

    def log_completion_times(self) -> np.ndarray:
        """``log C(e)`` for every materialized exponent ``e``."""
        e = np.arange(self.exponents)
        i, j = e % self.count, e // self.count
        lb, l = self.log_base, self.count
        # log(b**x - 1) = x*lb + log(1 - b**-x)
        num = (j + 1) * l * lb + np.log(-np.expm1(-(j + 1) * l * lb))
        den = l * lb + math.log(-math.expm1(-l * lb))
        return i * lb + num - den

    def last_exponent(self, T: float, prior: bool = False) -> int:
        """Largest exponent completed by ``T`` (strictly before ``T`` if ``prior``); -1 if none."""
        if not T > 0:
            return -1
        log_t = math.log(T)
        times = self.log_completion_times()
        if prior:
            done = int(np.searchsorted(times, log_t - TIME_RTOL, side="left"))
        else:
            done = int(np.searchsorted(times, log_t + TIME_RTOL, side="right"))
        if log_t > times[-1] + TIME_RTOL:
            raise DomainError(f"T={T:g} is past the materialized horizon")
        return done - 1

    def ranking_at(self, T: float, prior: bool = False) -> list[int]:
        """Rank of each member at ``T`` (0 = longest completed contract)."""
        E = self._require_started(T, prior)
        return [(E - m) % self.count for m in range(self.count)]

    def member_exponent(self, m: int, E: int) -> int:
        """Exponent of member ``m``'s longest contract once ``0..E`` are done; -1 if none."""
        return E - ((E - m) % self.count)

    def _require_started(self, T: float, prior: bool) -> int:
        E = self.last_exponent(T, prior)
        if E < 0:
            raise PreconditionError(f"no member has completed a contract by T={T:g}")
        return E


def best_member_at(family: CyclicFamily, T: float, prior: bool = False) -> tuple[int, float]:
    """Member holding the longest contract completed by ``T`` and that length.

    The closed form is cross-checked against direct enumeration of member
    prefix sums, and the induced ranking is checked to be a cyclic rotation.
    """
    E = family._require_started(T, prior)
    best = E % family.count
    length = family.base ** E

    log_t = math.log(T)
    done_lengths = []
    for m in range(family.count):
        s = family.member(m)
        times = s.log_completion_times()
        side_t = log_t - TIME_RTOL if prior else log_t + TIME_RTOL
        done = int(np.searchsorted(times, side_t, side="left" if prior else "right"))
        # a member with nothing finished sits at its virtual predecessor
        # exponent m - l, which keeps the ranking a rotation
        done_lengths.append(s.log_lengths[done - 1] if done
                            else (m - family.count) * family.log_base)
    order = sorted(range(family.count), key=lambda m: -done_lengths[m])
    if order[0] != best:
        raise AssertionError(f"closed-form best member {best} != enumerated {order[0]}")
    expected = [(best - r) % family.count for r in range(family.count)]
    if family.count > 1 and order != expected:
        raise AssertionError(f"ranking {order} is not a cyclic rotation")
    return best, length


@dataclass(frozen=True)
class AdvicePlan:
    family: CyclicFamily
    k: int
    H: int = 0
    mode: str = "untrusted"
    spec: RobustnessSpec | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown plan mode {self.mode!r}")
        if self.family.count != 2 ** self.k:
            raise DomainError(f"family must have 2**k = {2 ** self.k} members")
        if self.mode == "robustNoisy" and self.spec is None:
            raise DomainError("robustNoisy plans need a robustness spec")

    @property
    def base(self) -> float:
        return self.family.base

    def guarantee(self) -> float:
        """Closed-form ratio bound for the plan's mode."""
        if self.mode == "untrusted":
            return bounds.noisy_upper_objective(self.base, self.k, 0)
        return bounds.noisy_upper_objective(self.base, self.k, bounds.upper_rank(self.k, self.H))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "k": self.k, "H": self.H,
                "r": None if self.spec is None else self.spec.r,
                "b": self.base, "l": self.family.count, "horizon": self.family.horizon}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "AdvicePlan":
        spec = None if d.get("r") is None else RobustnessSpec(d["r"])
        fam = CyclicFamily(d["b"], d["l"], d.get("horizon", DEFAULT_HORIZON))
        return cls(fam, d["k"], d.get("H", 0), d["mode"], spec)

    def contract_table(self, rows_per_member: int | None = None) -> str:
        """CSV with columns member, j, length, completion_time."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["member", "j", "length", "completion_time"])
        for i in range(self.family.count):
            s = self.family.member(i)
            lengths, times = s.lengths, s.completion_times()
            for j in range(rows_per_member or s.horizon):
                w.writerow([i, j, repr(float(lengths[j])), repr(float(times[j]))])
        return buf.getvalue()


def build_pareto_schedule(r: float | RobustnessSpec, k: int,
                          horizon: int = DEFAULT_HORIZON) -> AdvicePlan:
    """``X_{b,2**k}`` with the consistency-optimal base among r-robust ones."""
    spec = r if isinstance(r, RobustnessSpec) else RobustnessSpec(r)
    if k < 0:
        raise DomainError("k must be non-negative")
    b = bounds.pareto_optimal_base(spec.r, k)
    return AdvicePlan(CyclicFamily(b, 2 ** k, horizon), k, 0, "untrusted", spec)


def build_noisy_schedule(k: int, H: int, horizon: int = DEFAULT_HORIZON) -> AdvicePlan:
    b = bounds.noisy_upper_bound(k, H).base
    return AdvicePlan(CyclicFamily(b, 2 ** k, horizon), k, H, "noisy")


def build_robust_noisy_schedule(k: int, H: int, r: float | RobustnessSpec,
                                horizon: int = DEFAULT_HORIZON) -> AdvicePlan:
    spec = r if isinstance(r, RobustnessSpec) else RobustnessSpec(r)
    b = bounds.robust_noisy_upper_bound(k, H, spec.r).base
    return AdvicePlan(CyclicFamily(b, 2 ** k, horizon), k, H, "robustNoisy", spec)


def build_rft_schedule(r: float | RobustnessSpec, p: int, f: int,
                       horizon: int = 400) -> MultiSchedule:
    """``X_{b,p}`` with one member per processor and ``f`` tolerated faults."""
    spec = r if isinstance(r, RobustnessSpec) else RobustnessSpec(r)
    if not 0 <= f < p:
        raise DomainError(f"need 0 <= f < p, got p={p}, f={f}")
    b = bounds.rft_optimal_value(spec.r, p, f).base
    return CyclicFamily(b, p, horizon).as_multischedule(fault_budget=f)


def member_to_index(member: int, l: int) -> int:
    # array index i holds the rank of member l-1-i, which makes the array a
    # cyclic shift (i - x) mod l with x = l-1-best
    return l - 1 - member


def advice_target(family: CyclicFamily, T: float, prior: bool = False) -> int:
    """Position of the minimum in the MinCyclic array induced at ``T``."""
    best, _ = best_member_at(family, T, prior)
    return member_to_index(best, family.count)


def achieved_ratio(family: CyclicFamily, member: int, T: float, prior: bool = False) -> float:
    """``T`` over the longest contract ``member`` has completed (1 if none yet)."""
    E = family._require_started(T, prior)
    e = family.member_exponent(member, E)
    log_len = e * family.log_base if e >= 0 else 0.0
    return math.exp(math.log(T) - log_len)


@dataclass
class Selection:
    member: int
    ratio: float
    transcript: QueryTranscript


def select_with_noisy_advice(plan: AdvicePlan, channel: AdviceChannel, T: float,
                             prior: bool = False, strict: bool = True) -> Selection:
    """Pick a member using ``k`` answers from ``channel`` about the ranking at ``T``."""
    l = plan.family.count
    if plan.k == 0:
        return Selection(0, achieved_ratio(plan.family, 0, T, prior), QueryTranscript())
    channel.bind(advice_target(plan.family, T, prior))
    j, transcript = solve_min_cyclic(l, channel, plan.k, plan.H, strict=strict)
    member = l - 1 - j
    return Selection(member, achieved_ratio(plan.family, member, T, prior), transcript)
