"""Simulation scenarios, theorem verification suites and the bounds comparison table.

Every scenario is deterministic given its config: lie patterns and fault
subsets are enumerated when small and otherwise drawn from numpy's PCG64
generator seeded by the config's seeds.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import advisor, bounds, querygames, sequences
from .errors import ConfigError, ContractSchedError, DomainError

SCENARIOS = ("pareto", "noisy", "robustNoisy", "rft", "game")
MAX_EXHAUSTIVE_PATTERNS = 10 ** 5
MAX_EXHAUSTIVE_PROCESSORS = 8
DEFAULT_TOLERANCE = 1e-6


@dataclass
class SimulationConfig:
    scenario: str
    k: int = 0
    H: int = 0
    r: float | None = None
    p: int | None = None
    f: int | None = None
    t_grid: int = 1000
    fillers: int = 100
    seeds: list[int] = field(default_factory=lambda: [0])
    horizon: int | None = None
    tolerance: float = DEFAULT_TOLERANCE
    samples: int = 1000

    def __post_init__(self):
        self.seeds = [int(s) for s in self.seeds]
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.t_grid < 1 or self.fillers < 0:
            raise ConfigError("t_grid must be >= 1 and fillers >= 0")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.horizon is not None and self.horizon < 2:
            raise ConfigError("horizon must be >= 2")
        s = self.scenario
        if s in ("pareto", "robustNoisy", "rft"):
            if self.r is None or not self.r >= 4:
                raise ConfigError(f"{s} needs robustness r >= 4, got r={self.r}")
        if s in ("pareto", "noisy", "robustNoisy", "game"):
            if self.k < 0 or not 0 <= self.H <= self.k:
                raise ConfigError(f"{s} needs 0 <= H <= k, got k={self.k}, H={self.H}")
        if s in ("noisy", "robustNoisy", "game") and 2 * self.H > self.k:
            raise ConfigError(f"{s} needs H <= k/2, got k={self.k}, H={self.H}")
        if s == "rft":
            if self.p is None or self.f is None or not 0 <= self.f < self.p:
                raise ConfigError(f"rft needs 0 <= f < p, got p={self.p}, f={self.f}")

    @property
    def effective_horizon(self) -> int:
        if self.horizon is not None:
            return self.horizon
        return 400 if self.scenario == "rft" else sequences.DEFAULT_HORIZON

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)


@dataclass
class Check:
    name: str
    observed: float
    bound: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.observed <= self.bound + self.tolerance

    @property
    def slack(self) -> float:
        return self.bound - self.observed

    def to_dict(self) -> dict:
        return {"name": self.name, "observed": self.observed, "bound": self.bound,
                "slack": self.slack, "passed": self.passed}


@dataclass
class SimulationRun:
    config: SimulationConfig
    records: list[dict]
    checks: list[Check]
    transcripts: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def max_ratio(self) -> float:
        return self.checks[0].observed

    @property
    def bound(self) -> float:
        return self.checks[0].bound

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> dict:
        main = self.checks[0]
        return {"max_achieved": main.observed, "bound": main.bound, "slack": main.slack,
                "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "summary": self.summary(),
                "records": self.records, "transcripts": self.transcripts}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        cfg = self.config
        lines = [f"scenario {cfg.scenario}  k={cfg.k} H={cfg.H} r={cfg.r} p={cfg.p} f={cfg.f}"
                 f"  seeds={cfg.seeds}  probes={len(self.records)}"]
        width = max(len(c.name) for c in self.checks)
        for c in self.checks:
            lines.append(f"  {c.name:<{width}}  observed {c.observed:.9g}  bound {c.bound:.9g}"
                         f"  {'PASS' if c.passed else 'FAIL'}")
        lines.append(f"overall {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def completion_probes(family: advisor.CyclicFamily, count: int,
                      fillers: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Interruption probes as ``(log T, prior)`` arrays.

    ``count`` probes sit at completion instants, alternating between "just
    before" (``prior=True``, the worst case) and "at" the instant; the
    exponents used are evenly spread over the horizon.  ``fillers`` extra
    probes are log-uniform between the first and last completion.
    """
    times = family.log_completion_times()
    pairs = max(1, count // 2)
    idx = np.unique(np.linspace(1, times.size - 1, pairs).round().astype(int))
    log_t = np.repeat(times[idx], 2)
    prior = np.tile([True, False], idx.size)
    if count % 2 == 1 or count < 2:
        log_t, prior = log_t[:count], prior[:count]
    if fillers:
        fill = np.linspace(times[0], times[-1], fillers + 2)[1:-1]
        log_t = np.concatenate([log_t, fill])
        prior = np.concatenate([prior, np.zeros(fillers, dtype=bool)])
    return log_t, prior


def _last_exponents(family: advisor.CyclicFamily, log_t: np.ndarray,
                    prior: np.ndarray) -> np.ndarray:
    times = family.log_completion_times()
    before = np.searchsorted(times, log_t - sequences.TIME_RTOL, side="left")
    upto = np.searchsorted(times, log_t + sequences.TIME_RTOL, side="right")
    return np.where(prior, before, upto) - 1


def _lie_pattern_source(k: int, H: int, seeds: Sequence[int], samples: int):
    """Exhaustive lie patterns when few enough, else seeded random ones."""
    if querygames.count_lie_patterns(k, H) <= MAX_EXHAUSTIVE_PATTERNS:
        return list(querygames.lie_patterns(k, H)), "exhaustive"
    pats = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            eta = int(rng.integers(0, H + 1))
            pats.append(frozenset(int(i) for i in rng.choice(k, size=eta, replace=False)))
    return pats, "sampled"


def worst_rank_by_target(n: int, k: int, H: int, patterns) -> tuple[np.ndarray, list[str]]:
    """For each target ``x``, the worst ``(j - x) mod n`` over lie patterns.

    The solver is deterministic in its answers, so results are cached per
    answer string and each (target, pattern) pair costs one replay.
    """
    solver = querygames.min_cyclic_solver(n, k, H)
    cache: dict[tuple[bool, ...], int] = {}
    worst = np.zeros(n, dtype=np.int64)
    sample_transcripts = []
    for x in range(n):
        for pat in patterns:
            answers: tuple[bool, ...] = ()
            for q in range(k):
                truth = x <= solver.query(answers)
                answers += (truth != (q in pat),)
            j = cache.get(answers)
            if j is None:
                j = cache[answers] = solver.output(answers)
            rank = (j - x) % n
            if rank > worst[x]:
                worst[x] = rank
        if x == 0 and patterns:
            ch = querygames.AdviceChannel.scripted(x, max(patterns, key=len), H)
            solver.play(ch)
            sample_transcripts.append(ch.transcript.to_jsonl())
    return worst, sample_transcripts


def _family_ratio_checks(plan: advisor.AdvicePlan, log_t, prior, rank_of_target,
                         tolerance) -> tuple[list[dict], float]:
    fam = plan.family
    l = fam.count
    E = _last_exponents(fam, log_t, prior)
    valid = E >= 0
    log_t, prior, E = log_t[valid], prior[valid], E[valid]
    best = E % l
    x = l - 1 - best
    rank = rank_of_target[x]
    exp_chosen = E - rank
    log_len = np.where(exp_chosen >= 0, exp_chosen * fam.log_base, 0.0)
    ratios = np.exp(log_t - log_len)
    members = (best - rank) % l
    # T itself overflows a float for long horizons, so the log is primary
    records = [{"log_T": float(t), "T": float(np.exp(t)) if t < 700 else None,
                "prior": bool(pr), "member": int(m), "ratio": float(q)}
               for t, pr, m, q in zip(log_t, prior, members, ratios)]
    return records, float(ratios.max())


def _run_pareto(cfg: SimulationConfig) -> SimulationRun:
    plan = advisor.build_pareto_schedule(cfg.r, cfg.k, cfg.effective_horizon)
    log_t, prior = completion_probes(plan.family, cfg.t_grid, cfg.fillers)
    records, worst = _family_ratio_checks(
        plan, log_t, prior, np.zeros(plan.family.count, dtype=np.int64), cfg.tolerance)
    robust = max(sequences.acceleration_ratio(m) for m in plan.family.members())
    checks = [Check("consistency", worst, bounds.pareto_consistency_lower_bound(cfg.r, cfg.k),
                    cfg.tolerance),
              Check("member robustness", robust, cfg.r, cfg.tolerance)]
    return SimulationRun(cfg, records, checks)


def _run_noisy(cfg: SimulationConfig, robust: bool) -> SimulationRun:
    if robust:
        plan = advisor.build_robust_noisy_schedule(cfg.k, cfg.H, cfg.r, cfg.effective_horizon)
        bound = bounds.robust_noisy_upper_bound(cfg.k, cfg.H, cfg.r).bound
    else:
        plan = advisor.build_noisy_schedule(cfg.k, cfg.H, cfg.effective_horizon)
        bound = bounds.noisy_upper_bound(cfg.k, cfg.H).bound
    n = plan.family.count
    log_t, prior = completion_probes(plan.family, cfg.t_grid, cfg.fillers)
    if cfg.k == 0:
        worst, transcripts, how = np.zeros(1, dtype=np.int64), [], "exhaustive"
    else:
        patterns, how = _lie_pattern_source(cfg.k, cfg.H, cfg.seeds, cfg.samples)
        worst, transcripts = worst_rank_by_target(n, cfg.k, cfg.H, patterns)
    records, max_ratio = _family_ratio_checks(plan, log_t, prior, worst, cfg.tolerance)
    checks = [Check(f"achieved ratio ({how} lies)", max_ratio, bound, cfg.tolerance),
              Check("rank", float(worst.max()), bounds.upper_rank(cfg.k, cfg.H), 0.0)]
    if robust:
        # whatever the advice, every member is r-robust on its own
        rob = max(sequences.acceleration_ratio(m) for m in plan.family.members())
        checks.append(Check("member robustness", rob, cfg.r, cfg.tolerance))
    return SimulationRun(cfg, records, checks, transcripts)


def fault_subsets(p: int, max_size: int, seeds: Sequence[int], samples: int):
    if p <= MAX_EXHAUSTIVE_PROCESSORS:
        for size in range(max_size + 1):
            yield from itertools.combinations(range(p), size)
        return
    for seed in seeds:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            size = int(rng.integers(0, max_size + 1))
            yield tuple(sorted(int(i) for i in rng.choice(p, size=size, replace=False)))


def _run_rft(cfg: SimulationConfig) -> SimulationRun:
    ms = advisor.build_rft_schedule(cfg.r, cfg.p, cfg.f, cfg.effective_horizon)
    value = bounds.rft_optimal_value(cfg.r, cfg.p, cfg.f).value
    records, worst = [], 0.0
    for fs in fault_subsets(cfg.p, cfg.f, cfg.seeds, cfg.samples):
        ratio = sequences.fault_tolerant_ratio(ms, fs)
        records.append({"fault_set": list(fs), "ratio": ratio})
        worst = max(worst, ratio)
    survivor = 0.0
    for live in range(cfg.p):
        fs = [j for j in range(cfg.p) if j != live]
        ratio = sequences.fault_tolerant_ratio(ms, fs)
        records.append({"fault_set": fs, "survivor": live, "ratio": ratio})
        survivor = max(survivor, ratio)
    checks = [Check(f"<= {cfg.f} faults", worst, value, cfg.tolerance),
              Check("single survivor", survivor, cfg.r, cfg.tolerance)]
    return SimulationRun(cfg, records, checks)


def _run_game(cfg: SimulationConfig) -> SimulationRun:
    n = 2 ** cfg.k
    worst = querygames.exhaustive_min_cyclic(n, cfg.k, cfg.H)
    outcome = querygames.play_against_adversary(n, cfg.k, cfg.H)
    records = [{"n": n, "worst_rank": worst, "adversary_output": outcome.output,
                "survivors": outcome.survivors}]
    checks = [Check("worst rank (all answer sequences)", worst,
                    bounds.upper_rank(cfg.k, cfg.H), 0.0),
              # survivors >= required, phrased as required - survivors <= 0
              Check("adversary survivors deficit", outcome.required - outcome.survivors, 0, 0.0)]
    return SimulationRun(cfg, records, checks, [outcome.transcript.to_jsonl()])


def run_scenario(config: SimulationConfig | dict) -> SimulationRun:
    cfg = config if isinstance(config, SimulationConfig) else SimulationConfig.from_dict(config)
    start = time.perf_counter()
    try:
        if cfg.scenario == "pareto":
            run = _run_pareto(cfg)
        elif cfg.scenario in ("noisy", "robustNoisy"):
            run = _run_noisy(cfg, cfg.scenario == "robustNoisy")
        elif cfg.scenario == "rft":
            run = _run_rft(cfg)
        else:
            run = _run_game(cfg)
    except (DomainError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"infeasible {cfg.scenario} parameters: {exc}") from exc
    run.elapsed = time.perf_counter() - start
    return run


# verification suites

@dataclass
class TagResult:
    tag: str
    passed: bool
    checked: int
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0


@dataclass
class VerificationReport:
    level: str
    results: dict[str, TagResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def to_dict(self) -> dict:
        return {"level": self.level, "passed": self.passed,
                "tags": {t: asdict(r) for t, r in self.results.items()}}

    def to_text(self) -> str:
        lines = []
        for t, r in self.results.items():
            lines.append(f"{t:<22} {'PASS' if r.passed else 'FAIL'}  {r.checked:>6} checks"
                         f"  {r.seconds:6.2f}s")
            lines.extend(f"    {msg}" for msg in r.failures[:5])
        lines.append(f"overall {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


class _Suite:
    def __init__(self):
        self.checked = 0
        self.failures: list[str] = []

    def expect(self, ok: bool, msg: str):
        self.checked += 1
        if not ok:
            self.failures.append(msg)


def _suite_prop1(s: _Suite, full: bool):
    s.expect(abs(sequences.acceleration_ratio(sequences.Schedule.geometric(2, horizon=60)) - 4)
             <= 1e-9, "G_2 ratio != 4")
    for b in np.linspace(1.2, 6, 50 if full else 10):
        got = sequences.acceleration_ratio(sequences.Schedule.geometric(b))
        s.expect(abs(got - b * b / (b - 1)) <= 1e-6, f"G_{b:.4g}: {got} vs {b * b / (b - 1)}")


def _suite_zetas(s: _Suite, full: bool):
    for r in np.linspace(4, 100, 100 if full else 20):
        z1, z2 = bounds.zeta_roots(r)
        s.expect(abs(z1 * z2 - r) <= 1e-10 * r and abs(z1 + z2 - r) <= 1e-10 * r
                 and abs((z1 - 1) * (z2 - 1) - 1) <= 1e-10, f"zeta identities at r={r}")
    for r in (4, 4.5, 5, 8):
        z1, z2 = bounds.zeta_roots(r)
        for b in np.linspace(z1, z2, 100 if full else 10):
            rep = sequences.check_zeta_envelope(sequences.Schedule.geometric(b), r)
            s.expect(rep.passed, f"envelope fails for G_{b:.6g}, r={r}")


def _suite_merge(s: _Suite, full: bool):
    for r in (4, 4.5, 5, 8):
        z1, z2 = bounds.zeta_roots(r)
        for p in (1, 2, 3, 4):
            for t in np.linspace(z1, z2, 5 if full else 3):
                fam = advisor.CyclicFamily(t ** (1 / p), p)
                a = sequences.alpha_estimate(fam.merged())
                s.expect(z1 ** (1 / p) - 0.02 <= a <= z2 ** (1 / p) + 0.02,
                         f"alpha {a} outside zeta range, r={r}, p={p}")


def _empirical_consistency(fam: advisor.CyclicFamily) -> float:
    # just before exponent e completes, the best contract is b**(e-1)
    times = fam.log_completion_times()
    e = np.arange(1, times.size)
    return float(np.exp(np.max(times[1:] - (e - 1) * fam.log_base)))


def _suite_lower_pareto(s: _Suite, full: bool):
    for r in (4, 4.5, 5, 6):
        z1, z2 = bounds.zeta_roots(r)
        for k in range(4 if full else 3):
            lb = bounds.pareto_consistency_lower_bound(r, k)
            l = 2 ** k
            for t in np.linspace(z1, z2, 25 if full else 7):
                fam = advisor.CyclicFamily(t ** (1 / l), l)
                s.expect(_empirical_consistency(fam) >= lb - 1e-9,
                         f"r={r}, k={k}: base {t ** (1 / l):.6g} beats the lower bound")


def _suite_pareto_upper(s: _Suite, full: bool, builder: Callable):
    for r in (4, 4.5, 5, 6):
        for k in range(4):
            plan = builder(r, k)
            emp = _empirical_consistency(plan.family)
            lb = bounds.pareto_consistency_lower_bound(r, k)
            s.expect(abs(emp - lb) <= 1e-6, f"r={r}, k={k}: consistency {emp} vs {lb}")
            rob = max(sequences.acceleration_ratio(m) for m in plan.family.members())
            s.expect(rob <= r + 1e-6, f"r={r}, k={k}: member robustness {rob} > r")


def _suite_cyclic_upper(s: _Suite, full: bool):
    for k in range(3, 9 if full else 7):
        for H in range(0, min(2, k // 2) + 1):
            worst = querygames.exhaustive_min_cyclic(2 ** k, k, H)
            s.expect(worst <= bounds.upper_rank(k, H),
                     f"k={k}, H={H}: rank {worst} > {bounds.upper_rank(k, H)}")


def _suite_noisy_upper(s: _Suite, full: bool):
    grid = [(k, H) for k in ((4, 6, 8) if full else (2, 4)) for H in (0, 1, 2) if 2 * H <= k]
    for k, H in grid:
        run = run_scenario(SimulationConfig("noisy", k=k, H=H, t_grid=1000 if full else 200,
                                            fillers=0))
        s.expect(run.passed, f"noisy k={k}, H={H}: {run.max_ratio} > {run.bound}")


def _suite_cyclic_lower(s: _Suite, full: bool):
    seeds = range(1000 if full else 50)
    for n in (8, 16, 32):
        for k in (3, 4, 5):
            for H in (0, 1):
                out = querygames.play_against_adversary(n, k, H)
                s.expect(out.survivors_ok, f"n={n}, k={k}, H={H}: {out.survivors} survivors "
                         f"< {out.required}")
                for seed in seeds:
                    out = querygames.play_against_adversary(n, k, H, seed)
                    s.expect(out.survivors_ok, f"n={n}, k={k}, H={H}, seed {seed}: "
                             f"{out.survivors} survivors < {out.required}")


def _suite_noisy_lower(s: _Suite, full: bool):
    for k in range(21):
        for H in range(k // 2 + 1):
            lo = bounds.noisy_lower_bound(k, H).bound
            up = bounds.noisy_upper_bound(k, H).bound
            s.expect(lo <= up * (1 + 1e-12), f"k={k}, H={H}: lower {lo} > upper {up}")
            if k <= (12 if full else 8):
                for r in (4.5, 8):
                    rl = bounds.robust_noisy_lower_bound(k, H, r)
                    ru = bounds.robust_noisy_upper_bound(k, H, r).bound
                    s.expect(rl <= ru * (1 + 1e-12), f"robust k={k}, H={H}, r={r}: {rl} > {ru}")


def _suite_alpha_faulty(s: _Suite, full: bool):
    horizon = 400
    for a in (1.5, 2, 3):
        for p in (1, 2, 4):
            merged = advisor.CyclicFamily(a, p, -(-horizon // p)).merged()
            for phi in range(p):
                target = a ** (p + 1 + phi) / (a ** p - 1)
                got = sequences.gal_sup(merged, p, phi)
                s.expect(got >= target - 1e-6, f"a={a}, p={p}, phi={phi}: {got} < {target}")
    for r in (6, 8):
        for p in (2, 3):
            for f in range(p):
                ms = advisor.build_rft_schedule(r, p, f)
                g = sequences.gal_sup(ms.merged(), p, f)
                value = bounds.rft_optimal_value(r, p, f).value
                worst, _ = sequences.worst_fault_ratio(ms, f)
                s.expect(g >= value - 1e-3, f"rft r={r}, p={p}, f={f}: gal sup {g} < {value}")
                s.expect(g <= worst * (1 + 1e-9), f"rft r={r}, p={p}, f={f}: gal sup {g} "
                         f"exceeds realized ratio {worst}")


def _suite_rft(s: _Suite, full: bool):
    for p in ((2, 3, 4) if full else (2, 3)):
        for f in range(p):
            for r in (6, 8):
                run = run_scenario(SimulationConfig("rft", r=r, p=p, f=f))
                for c in run.checks:
                    s.expect(c.passed, f"rft p={p}, f={f}, r={r}: {c.name} {c.observed} > {c.bound}")


THEOREM_TAGS = ("Prop1", "Thm-zetas", "Cor-merge", "Thm-lower-pareto", "Thm-pareto-upper",
                "Thm-cyclic-upper", "Thm-noisy-upper", "Thm-cyclic-lower", "Thm-noisy-lower",
                "Thm-mult-alpha-faulty", "Thm-rft")


def verify_theorems(level: str = "quick", tags: Sequence[str] | None = None,
                    pareto_builder: Callable = advisor.build_pareto_schedule) -> VerificationReport:
    """Run the property suites and report pass/fail per theorem tag.

    ``pareto_builder`` can be swapped for a deliberately broken builder to
    check that the Pareto suite detects it.
    """
    if level not in ("quick", "full"):
        raise ConfigError(f"level must be quick or full, got {level!r}")
    full = level == "full"
    suites = {
        "Prop1": _suite_prop1,
        "Thm-zetas": _suite_zetas,
        "Cor-merge": _suite_merge,
        "Thm-lower-pareto": _suite_lower_pareto,
        "Thm-pareto-upper": lambda s, fl: _suite_pareto_upper(s, fl, pareto_builder),
        "Thm-cyclic-upper": _suite_cyclic_upper,
        "Thm-noisy-upper": _suite_noisy_upper,
        "Thm-cyclic-lower": _suite_cyclic_lower,
        "Thm-noisy-lower": _suite_noisy_lower,
        "Thm-mult-alpha-faulty": _suite_alpha_faulty,
        "Thm-rft": _suite_rft,
    }
    selected = THEOREM_TAGS if tags is None else tags
    results = {}
    for tag in selected:
        if tag not in suites:
            raise ConfigError(f"unknown theorem tag {tag!r}")
        s = _Suite()
        start = time.perf_counter()
        try:
            suites[tag](s, full)
        except ContractSchedError as exc:
            s.failures.append(f"error: {exc}")
        results[tag] = TagResult(tag, not s.failures, s.checked, s.failures,
                                 time.perf_counter() - start)
    return VerificationReport(level, results)


# bounds table

@dataclass
class BoundsTable:
    rows: list[dict]
    monotone: dict[float, bool]
    crossing: dict[float, int | None]

    COLUMNS = ("k", "tau", "H", "noisy_upper", "noisy_lower", "prior_work", "l_scale_lower")

    @property
    def passed(self) -> bool:
        return all(self.monotone.values()) and all(c is not None for c in self.crossing.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({c: row[c] for c in self.COLUMNS})
        return buf.getvalue()

    def to_text(self) -> str:
        def fmt(v):
            return "-" if v is None else f"{v:.6g}" if isinstance(v, float) else str(v)
        lines = ["  ".join(f"{c:>13}" for c in self.COLUMNS)]
        lines += ["  ".join(f"{fmt(row[c]):>13}" for c in self.COLUMNS) for row in self.rows]
        for tau in self.monotone:
            lines.append(f"tau={tau:g}: non-increasing={self.monotone[tau]}, "
                         f"below prior work from k={self.crossing[tau]}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"rows": self.rows, "monotone": {str(t): v for t, v in self.monotone.items()},
                "crossing": {str(t): v for t, v in self.crossing.items()}}


def compare_bounds_table(k_range: Sequence[int], tau_list: Sequence[float],
                         r: float | None = None) -> BoundsTable:
    """Noisy upper/lower bounds against the earlier ``f(2*tau)`` guarantee.

    ``H = floor(tau * k)``.  With ``r`` given, the robust upper bound is used.
    """
    rows, monotone, crossing = [], {}, {}
    for tau in tau_list:
        if not 0 <= tau <= 0.5:
            raise DomainError(f"tau must lie in [0, 1/2], got {tau}")
        prior = bounds.f_curve(2 * tau) if tau > 0 else None
        uppers, cross = [], None
        for k in sorted(k_range):
            H = math.floor(tau * k)
            up = (bounds.noisy_upper_bound(k, H).bound if r is None
                  else bounds.robust_noisy_upper_bound(k, H, r).bound)
            rows.append({"k": k, "tau": tau, "H": H, "noisy_upper": up,
                         "noisy_lower": bounds.noisy_lower_bound(k, H).bound,
                         "prior_work": prior,
                         "l_scale_lower": bounds.l_scale_lower_bound(k, H)})
            uppers.append(up)
            if cross is None and prior is not None and k <= 64 and up < prior:
                cross = k
        monotone[tau] = all(b <= a * (1 + 1e-12) for a, b in zip(uppers, uppers[1:]))
        crossing[tau] = cross
    return BoundsTable(rows, monotone, crossing)
