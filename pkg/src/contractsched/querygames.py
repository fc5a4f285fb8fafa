"""Searching with lies: the weighting solver, the halving adversary, and advice channels.

The solver side handles MinCyclic: an array ``A[0..n-1]`` holds an unknown
cyclic rotation with ``A[x] = 0`` and ``A[i] = (i - x) mod n``.  It asks
comparison queries "is x <= B?", at most ``H`` of which are answered wrongly,
and outputs an index whose value is small.  The index range is cut into
``m`` intervals and Berlekamp's volume (weighting) strategy locates the
interval holding ``x``; the output is that interval's largest index.

The adversary side answers arbitrary subset queries so as to keep at least
half the total Berlekamp weight, which leaves many candidates consistent.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import accumulate, combinations
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .bounds import binomial_tail
from .errors import (DomainError, InconsistentAnswersError, ProtocolError,
                     UnsupportedRegimeError)

# interval counts above the provable floor are only used once the greedy
# strategy has been checked on every answer sequence; that check is
# exponential in k
CERTIFY_MAX_K = 14


@lru_cache(maxsize=None)
def _tail(q: int, h: int) -> int:
    if h < 0 or q < 0:
        return 0
    return binomial_tail(q, min(h, q))


def weighting_feasible(m: int, k: int, H: int) -> bool:
    """True iff ``2**(k-H) >= m * binomial_tail(k-H, H)``."""
    if not 0 <= H <= k:
        raise DomainError(f"need 0 <= H <= k, got k={k}, H={H}")
    return 2 ** (k - H) >= m * _tail(k - H, H)


@dataclass(frozen=True)
class GameState:
    """Lie counts of every candidate plus the number of queries left.

    A candidate with more than ``lie_budget`` lies is eliminated; a viable
    candidate with ``e`` lies carries weight ``binomial_tail(q, H - e)``.
    """

    lie_counts: tuple[int, ...]
    remaining: int
    lie_budget: int

    @classmethod
    def initial(cls, m: int, k: int, H: int) -> "GameState":
        if m < 1:
            raise DomainError("need at least one candidate")
        return cls((0,) * m, k, H)

    @property
    def m(self) -> int:
        return len(self.lie_counts)

    def weights(self, remaining: int | None = None) -> list[int]:
        q = self.remaining if remaining is None else remaining
        return [_tail(q, self.lie_budget - e) for e in self.lie_counts]

    def total_weight(self) -> int:
        return sum(self.weights())

    def viable(self) -> list[int]:
        return [c for c, e in enumerate(self.lie_counts) if e <= self.lie_budget]

    def after(self, threshold: int, yes: bool) -> "GameState":
        """State after the answer to "is x <= threshold?"."""
        return self.after_predicate(lambda c: c <= threshold, yes)

    def after_subset(self, subset: Iterable[int], yes: bool) -> "GameState":
        members = set(subset)
        return self.after_predicate(members.__contains__, yes)

    def after_predicate(self, inside: Callable[[int], bool], yes: bool) -> "GameState":
        if self.remaining < 1:
            raise ProtocolError("no queries left")
        cap = self.lie_budget + 1
        counts = tuple(e if e >= cap or inside(c) == yes else e + 1
                       for c, e in enumerate(self.lie_counts))
        return replace(self, lie_counts=counts, remaining=self.remaining - 1)

    def branch_weights(self) -> tuple[list[int], list[int]]:
        """Post-answer totals ``(yes, no)`` for every threshold ``0..m-1``."""
        q, H = self.remaining - 1, self.lie_budget
        same = [_tail(q, H - e) for e in self.lie_counts]
        inc = [_tail(q, H - e - 1) for e in self.lie_counts]
        ps, pi = list(accumulate(same)), list(accumulate(inc))
        tot_s, tot_i = ps[-1], pi[-1]
        yes = [ps[b] + tot_i - pi[b] for b in range(self.m)]
        no = [pi[b] + tot_s - ps[b] for b in range(self.m)]
        return yes, no


def weighting_query(state: GameState) -> int:
    """Threshold minimizing the worst post-answer weight; ties go to the smallest."""
    if state.remaining < 1:
        raise ProtocolError("no queries left")
    if not state.viable():
        raise InconsistentAnswersError("every candidate exceeded the lie budget")
    yes, no = state.branch_weights()
    worst = [max(y, n) for y, n in zip(yes, no)]
    return worst.index(min(worst))


def weighting_identifies(m: int, k: int, H: int) -> bool:
    """Whether greedy weighting leaves at most one viable candidate on every answer path."""
    return _identifies(GameState.initial(m, k, H))


@lru_cache(maxsize=None)
def _identifies(state: GameState) -> bool:
    viable = state.viable()
    if not viable:
        return True
    if state.remaining == 0:
        return len(viable) == 1
    b = weighting_query(state)
    return _identifies(state.after(b, True)) and _identifies(state.after(b, False))


def interval_partition(n: int, m: int) -> list[tuple[int, int]]:
    """``m`` contiguous intervals covering ``[0, n)``, sizes differing by at most one."""
    if not 1 <= m <= n:
        raise DomainError(f"need 1 <= m <= n, got m={m}, n={n}")
    size, extra = divmod(n, m)
    out, lo = [], 0
    for i in range(m):
        hi = lo + size + (1 if i < extra else 0) - 1
        out.append((lo, hi))
        lo = hi + 1
    return out


def cyclic_rank(j: int, x: int, n: int) -> int:
    """``A[j]`` when the minimum sits at ``x``."""
    return (j - x) % n


def min_cyclic_guarantee(n: int, k: int, H: int) -> int:
    """``ceil(n * binomial_tail(k-H, H) / 2**(k-H))``."""
    return -(-n * _tail(k - H, H) // 2 ** (k - H))


def min_cyclic_intervals(n: int, k: int, H: int) -> int:
    """Number of intervals the solver splits ``[0, n)`` into.

    The provable choice is ``floor(2**(k-H) / binomial_tail(k-H, H))``.  When
    the ceiling is larger and greedy weighting is certified to identify that
    many candidates (checked exhaustively for ``k <= CERTIFY_MAX_K``), the
    ceiling is used, which keeps interval lengths within the guarantee.
    """
    if n < 1 or k < 0 or not 0 <= H <= k:
        raise DomainError(f"bad MinCyclic parameters n={n}, k={k}, H={H}")
    if 2 * H > k:
        raise UnsupportedRegimeError(f"MinCyclic solver needs H <= k/2, got k={k}, H={H}")
    t = _tail(k - H, H)
    m_floor = 2 ** (k - H) // t
    if m_floor < 1:
        raise UnsupportedRegimeError(f"no interval split is feasible for k={k}, H={H}")
    m_ceil = -(-(2 ** (k - H)) // t)
    m = m_floor
    if m_ceil > m_floor and k <= CERTIFY_MAX_K and weighting_identifies(m_ceil, k, H):
        m = m_ceil
    return min(m, n)


@dataclass
class QueryRecord:
    query: int | list[int]
    answer: bool
    lie: bool | None = None

    def to_dict(self) -> dict:
        return {"q": self.query, "a": int(self.answer),
                "lie": "unknown" if self.lie is None else self.lie}

    @classmethod
    def from_dict(cls, d: dict) -> "QueryRecord":
        lie = d.get("lie", "unknown")
        return cls(d["q"], bool(d["a"]), None if lie == "unknown" else bool(lie))


@dataclass
class QueryTranscript:
    records: list[QueryRecord] = field(default_factory=list)
    output: int | None = None

    @property
    def answers(self) -> tuple[bool, ...]:
        return tuple(r.answer for r in self.records)

    def lies(self) -> int:
        return sum(1 for r in self.records if r.lie)

    def to_jsonl(self) -> str:
        lines = [json.dumps(r.to_dict()) for r in self.records]
        lines.append(json.dumps({"output": self.output}))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "QueryTranscript":
        tr = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            if "output" in d:
                tr.output = d["output"]
            else:
                tr.records.append(QueryRecord.from_dict(d))
        return tr


def _contains(query: int | Sequence[int] | frozenset, x: int) -> bool:
    if isinstance(query, (int, np.integer)):
        return x <= query
    return x in query


def _as_subset(query, n: int) -> frozenset[int]:
    if isinstance(query, (int, np.integer)):
        return frozenset(range(0, min(int(query), n - 1) + 1))
    return frozenset(query)


class SearchAdversary:
    """Answers subset queries to keep at least half the Berlekamp weight.

    Candidates are the ``n`` possible locations of the best element.  On a
    tie the adversary answers "no".
    """

    def __init__(self, n: int, k: int, H: int):
        if n < 1 or k < 0 or not 0 <= H <= k:
            raise DomainError(f"bad game parameters n={n}, k={k}, H={H}")
        self.n, self.k, self.H = n, k, H
        self.state = GameState((0,) * n, k, H)

    def respond(self, query) -> bool:
        if self.state.remaining < 1:
            raise ProtocolError("adversary received more than k queries")
        subset = _as_subset(query, self.n)
        yes_state = self.state.after_subset(subset, True)
        no_state = self.state.after_subset(subset, False)
        w_yes, w_no = yes_state.total_weight(), no_state.total_weight()
        answer = w_yes > w_no
        self.state = yes_state if answer else no_state
        return answer

    def survivors(self) -> list[int]:
        return self.state.viable()

    def forced_rank(self, output: int, model: str = "search") -> int:
        """Largest rank of ``output`` over rankings consistent with the answers.

        ``"search"``: any ranking whose best element is a survivor, so the
        output can be ranked last unless it is the only survivor.
        ``"cyclic"``: the ranking is a rotation, rank ``(output - x) mod n``.
        """
        alive = self.survivors()
        if not alive:
            raise InconsistentAnswersError("adversary exceeded its lie budget")
        if model == "search":
            return 0 if alive == [output] else self.n - 1
        if model == "cyclic":
            return max(cyclic_rank(output, x, self.n) for x in alive)
        raise DomainError(f"unknown ranking model {model!r}")


def adversarial_respond(adversary: SearchAdversary, query) -> bool:
    return adversary.respond(query)


def search_lower_rank(n: int, k: int, H: int) -> int:
    """``floor(n * binomial_tail(k, H) / 2**k)``, capped at the worst rank ``n - 1``."""
    return min(n * _tail(k, H) >> k, n - 1)


class AdviceChannel:
    """Answers binary queries about a hidden index, lying at most as configured.

    Modes: ``truthful``; ``scripted`` (lies exactly at the given query
    positions); ``random`` (a seeded uniform number of lies in ``[0, H]`` at
    uniform positions among the ``k`` queries); ``adversarial`` (no fixed
    target, answers chosen by :class:`SearchAdversary`).
    """

    def __init__(self, mode: str, lie_budget: int = 0, target: int | None = None,
                 lie_positions: Iterable[int] = (), n: int | None = None,
                 k: int | None = None, seed: int | None = None):
        if mode not in ("truthful", "scripted", "random", "adversarial"):
            raise DomainError(f"unknown channel mode {mode!r}")
        self.mode = mode
        self.lie_budget = lie_budget
        self.target = target
        self.k = k
        self.seed = seed
        self.lie_positions = frozenset(lie_positions)
        self.adversary = None
        self.transcript = QueryTranscript()
        if mode == "random":
            if k is None:
                raise DomainError("random channel needs the number of queries k")
            rng = np.random.default_rng(seed)
            eta = int(rng.integers(0, lie_budget + 1))
            self.lie_positions = frozenset(
                int(i) for i in rng.choice(k, size=min(eta, k), replace=False))
        if mode == "adversarial":
            if n is None or k is None:
                raise DomainError("adversarial channel needs n and k")
            self.adversary = SearchAdversary(n, k, lie_budget)

    @classmethod
    def truthful(cls, target: int | None = None) -> "AdviceChannel":
        return cls("truthful", 0, target)

    @classmethod
    def scripted(cls, target: int | None, lie_positions: Iterable[int],
                 lie_budget: int | None = None) -> "AdviceChannel":
        pos = frozenset(lie_positions)
        return cls("scripted", len(pos) if lie_budget is None else lie_budget, target, pos)

    @classmethod
    def random(cls, target: int | None, k: int, lie_budget: int, seed: int) -> "AdviceChannel":
        return cls("random", lie_budget, target, k=k, seed=seed)

    @classmethod
    def adversarial(cls, n: int, k: int, lie_budget: int) -> "AdviceChannel":
        return cls("adversarial", lie_budget, n=n, k=k)

    @property
    def lies_used(self) -> int:
        return self.transcript.lies()

    def bind(self, target: int) -> "AdviceChannel":
        if self.mode != "adversarial":
            self.target = target
        return self

    def ask(self, query) -> bool:
        """Answer "is x <= query?" (int) or "is x in query?" (collection)."""
        idx = len(self.transcript.records)
        if self.k is not None and idx >= self.k:
            raise ProtocolError(f"channel allows only {self.k} queries")
        record_q = int(query) if isinstance(query, (int, np.integer)) else sorted(query)
        if self.mode == "adversarial":
            answer = self.adversary.respond(query)
            self.transcript.records.append(QueryRecord(record_q, answer, None))
            return answer
        if self.target is None:
            raise ProtocolError("channel has no target bound")
        truth = _contains(query, self.target)
        lie = idx in self.lie_positions
        answer = truth != lie
        self.transcript.records.append(QueryRecord(record_q, answer, lie))
        return answer


class MinCyclicSolver:
    """Greedy weighting over interval candidates; deterministic in the answer history."""

    def __init__(self, n: int, k: int, H: int, m: int | None = None):
        self.n, self.k, self.H = n, k, H
        self.m = min_cyclic_intervals(n, k, H) if m is None else m
        self.intervals = interval_partition(n, self.m)
        self._states: dict[tuple[bool, ...], GameState] = {
            (): GameState.initial(self.m, k, H)}
        self._thresholds: dict[tuple[bool, ...], int] = {}

    def state(self, answers: tuple[bool, ...]) -> GameState:
        st = self._states.get(answers)
        if st is None:
            prev = self.state(answers[:-1])
            st = prev.after(self._interval_threshold(answers[:-1]), answers[-1])
            self._states[answers] = st
        return st

    def _interval_threshold(self, answers: tuple[bool, ...]) -> int:
        b = self._thresholds.get(answers)
        if b is None:
            st = self.state(answers)
            if st.viable():
                b = weighting_query(st)
            else:
                # answers already exceed the budget: keep asking the last query
                b = self._interval_threshold(answers[:-1]) if answers else 0
            self._thresholds[answers] = b
        return b

    def query(self, answers: tuple[bool, ...]) -> int:
        """Index threshold ``B`` of the next question "is x <= B?"."""
        return self.intervals[self._interval_threshold(answers)][1]

    def consistent_intervals(self, answers: tuple[bool, ...], strict: bool = True) -> list[int]:
        st = self.state(answers)
        alive = st.viable()
        if alive or strict:
            return alive
        least = min(st.lie_counts)
        return [c for c, e in enumerate(st.lie_counts) if e == least]

    def output(self, answers: tuple[bool, ...], strict: bool = True) -> int:
        """Largest index of the identified interval.

        If several intervals remain viable, the index minimizing the worst
        cyclic rank over all their members is returned instead.
        """
        alive = self.consistent_intervals(answers, strict)
        if not alive:
            raise InconsistentAnswersError(
                f"answers {answers} are inconsistent with at most {self.H} lies")
        if len(alive) == 1:
            return self.intervals[alive[0]][1]
        targets = [x for c in alive for x in range(self.intervals[c][0], self.intervals[c][1] + 1)]
        choices = [self.intervals[c][1] for c in alive]
        return min(choices, key=lambda j: (max(cyclic_rank(j, x, self.n) for x in targets), j))

    def play(self, channel: AdviceChannel, strict: bool = True) -> int:
        answers: tuple[bool, ...] = ()
        for _ in range(self.k):
            answers += (channel.ask(self.query(answers)),)
        out = self.output(answers, strict)
        channel.transcript.output = out
        return out


@lru_cache(maxsize=64)
def min_cyclic_solver(n: int, k: int, H: int) -> MinCyclicSolver:
    return MinCyclicSolver(n, k, H)


def solve_min_cyclic(n: int, channel: AdviceChannel, k: int, H: int,
                     strict: bool = True) -> tuple[int, QueryTranscript]:
    """Run the MinCyclic solver against ``channel`` with exactly ``k`` queries.

    With ``strict=False`` answers that exceed the lie budget do not raise;
    the output then falls back to the least-contradicted interval.
    """
    solver = min_cyclic_solver(n, k, H)
    j = solver.play(channel, strict)
    return j, channel.transcript


def answer_paths(solver: MinCyclicSolver) -> Iterator[tuple[tuple[bool, ...], list[int]]]:
    """Every complete answer sequence with at least one consistent interval.

    Yields ``(answers, viable intervals)`` in depth-first order, pruning
    branches where every interval already exceeds the lie budget.
    """
    def walk(answers):
        alive = solver.state(answers).viable()
        if not alive:
            return
        if len(answers) == solver.k:
            yield answers, alive
            return
        for a in (True, False):
            yield from walk(answers + (a,))
    yield from walk(())


def exhaustive_min_cyclic(n: int, k: int, H: int) -> int:
    """Worst ``A[j]`` over all answer sequences consistent with at most ``H`` lies."""
    solver = min_cyclic_solver(n, k, H)
    worst = 0
    for answers, alive in answer_paths(solver):
        j = solver.output(answers)
        for c in alive:
            lo, hi = solver.intervals[c]
            worst = max(worst, max(cyclic_rank(j, x, n) for x in range(lo, hi + 1)))
    return worst


def lie_patterns(k: int, H: int) -> Iterator[frozenset[int]]:
    """All sets of at most ``H`` lie positions among ``k`` queries."""
    for h in range(H + 1):
        for pos in combinations(range(k), h):
            yield frozenset(pos)


def count_lie_patterns(k: int, H: int) -> int:
    return binomial_tail(k, H)


def inject_errors(truth: Sequence[int], H: int, mode: str = "random",
                  seed: int | None = None) -> list[int]:
    """Flip at most ``H`` bits of ``truth``.

    ``random`` flips a seeded uniform subset whose size is uniform in
    ``[0, H]``; ``adversarial`` flips exactly ``H`` bits, the earliest ones,
    where an adaptive searcher is misled the longest.
    """
    bits = [int(b) for b in truth]
    if H < 0 or H > len(bits):
        raise DomainError(f"lie budget {H} outside [0, {len(bits)}]")
    if mode == "random":
        rng = np.random.default_rng(seed)
        eta = int(rng.integers(0, H + 1))
        flips = rng.choice(len(bits), size=eta, replace=False) if eta else []
    elif mode == "adversarial":
        flips = range(H)
    else:
        raise DomainError(f"unknown injection mode {mode!r}")
    for i in flips:
        bits[int(i)] ^= 1
    return bits


class RandomSubsetSolver:
    """Asks uniformly random subset queries and outputs a random consistent index."""

    def __init__(self, n: int, k: int, H: int, seed: int):
        self.n, self.k, self.H = n, k, H
        self.rng = np.random.default_rng(seed)

    def play(self, channel: AdviceChannel) -> int:
        state = GameState((0,) * self.n, self.k, self.H)
        for _ in range(self.k):
            subset = [int(i) for i in np.nonzero(self.rng.random(self.n) < 0.5)[0]]
            state = state.after_subset(subset, channel.ask(subset))
        alive = state.viable() or list(range(self.n))
        out = int(alive[int(self.rng.integers(len(alive)))])
        channel.transcript.output = out
        return out


@dataclass
class SearchOutcome:
    output: int
    survivors: int
    forced_rank: int
    cyclic_rank: int
    required: int
    transcript: QueryTranscript

    @property
    def survivors_ok(self) -> bool:
        return self.survivors >= self.required

    @property
    def rank_ok(self) -> bool:
        return self.forced_rank >= self.required


def play_against_adversary(n: int, k: int, H: int, solver: str | int = "weighting") -> SearchOutcome:
    """Run a solver against :class:`SearchAdversary`.

    ``solver`` is ``"weighting"`` for :class:`MinCyclicSolver` or an integer
    seed for :class:`RandomSubsetSolver`.
    """
    channel = AdviceChannel.adversarial(n, k, H)
    if solver == "weighting":
        out = MinCyclicSolver(n, k, H).play(channel)
    else:
        out = RandomSubsetSolver(n, k, H, int(solver)).play(channel)
    adv = channel.adversary
    return SearchOutcome(output=out, survivors=len(adv.survivors()),
                         forced_rank=adv.forced_rank(out, "search"),
                         cyclic_rank=adv.forced_rank(out, "cyclic"),
                         required=search_lower_rank(n, k, H),
                         transcript=channel.transcript)
