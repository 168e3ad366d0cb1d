"""Exact and statistical execution of machine specs.

Exact runs track every computation branch with big-integer rational
weights; no floating point ever decides an outcome. Probabilities are
reported as ExactProb where the arithmetic stays rational and as
certified enclosing intervals (ApproxProb) where a rotation register is
measured at an angle whose sine is irrational. A mid-input measurement
must have exact branch probabilities, because its branches keep
evolving; an interval-valued measurement is legal only when every
outcome immediately halts or restarts the machine.

Monte Carlo runs sample measurement outcomes against exact rational
cumulative thresholds using dyadic draws that are refined on demand, so
sampling is unbiased even for interval-valued probabilities.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

from .exactnum import (
    ApproxProb,
    ExactnessError,
    ExactProb,
    PROB_ONE,
    PROB_ZERO,
    ProbValue,
    RationalInterval,
    format_rational,
    prob_reciprocal,
    prob_scale,
    prob_sum,
)
from .machines import (
    LEFT_MARKER,
    MODEL_RTPFA,
    MOVE_LEFT,
    MOVE_RIGHT,
    MOVE_STAY,
    REGISTER_MATRIX,
    REGISTER_ROTATION,
    RESTART_TARGET,
    RIGHT_MARKER,
    MachineSpec,
    MeasureAction,
    MeasureRotationAction,
    RotateAction,
    UnitaryAction,
)
from .qstate import (
    ProjectiveMeasurement,
    QVector,
    ROTATION_AT_ONE,
    ROTATION_AT_ZERO,
    RotationRegister,
)

Register = Union[QVector, RotationRegister, None]

CATEGORY_ACCEPT = "accept"
CATEGORY_REJECT = "reject"
CATEGORY_DONT_KNOW = "dont_know"
CATEGORY_CONTINUE = "continue"
CATEGORIES = (CATEGORY_ACCEPT, CATEGORY_REJECT, CATEGORY_DONT_KNOW, CATEGORY_CONTINUE)


class MachineError(RuntimeError):
    """A run hit a hole in the transition tables or broke an invariant."""


class NonterminatingError(ValueError):
    """A restarting analysis found zero certified halting mass per round."""


def prob_to_json(p: ProbValue):
    if p.is_exact():
        return format_rational(p.value)
    iv = p.as_interval()
    return {"hi": format_rational(iv.hi), "lo": format_rational(iv.lo)}


@dataclass(frozen=True)
class OutcomeDistribution:
    """Terminal mass of one pass over the input, by decision category.

    ``p_continue`` holds restart mass for a restarting machine and the
    residual live mass of a sweep-capped run; it is exactly zero for an
    ordinary realtime machine.
    """

    p_accept: ProbValue
    p_reject: ProbValue
    p_dont_know: ProbValue
    p_continue: ProbValue

    def by_category(self) -> "dict[str, ProbValue]":
        return {
            CATEGORY_ACCEPT: self.p_accept,
            CATEGORY_REJECT: self.p_reject,
            CATEGORY_DONT_KNOW: self.p_dont_know,
            CATEGORY_CONTINUE: self.p_continue,
        }

    def total_interval(self) -> RationalInterval:
        total = prob_sum(self.by_category().values())
        return total.as_interval()

    def to_json(self) -> dict:
        return {f"p_{k}": prob_to_json(v) for k, v in self.by_category().items()}


def _empty_masses() -> "dict[str, list[ProbValue]]":
    return {cat: [] for cat in CATEGORIES}


def _masses_to_distribution(masses: "dict[str, list[ProbValue]]") -> OutcomeDistribution:
    sums = {cat: prob_sum(masses[cat]) for cat in CATEGORIES}
    total = prob_sum(sums.values()).as_interval()
    if not total.contains(Fraction(1)):
        raise MachineError(f"total terminal mass {total} does not cover 1")
    return OutcomeDistribution(
        sums[CATEGORY_ACCEPT],
        sums[CATEGORY_REJECT],
        sums[CATEGORY_DONT_KNOW],
        sums[CATEGORY_CONTINUE],
    )


_BASIS_2 = ProjectiveMeasurement.from_partition(2, {"1": [0], "2": [1]})


def initial_register(spec: MachineSpec) -> Register:
    if spec.register == REGISTER_MATRIX:
        return QVector.basis(spec.quantum_dim, 0)
    if spec.register == REGISTER_ROTATION:
        return ROTATION_AT_ZERO
    return None


def _quantum_outcomes(
    spec: MachineSpec, cstate: str, sym: str, reg: Register, precision_bits: int
) -> "list[tuple[str, Register, Union[Fraction, ApproxProb]]]":
    """All measurement branches for one square, with exact-zero branches dropped."""
    action = spec.quantum_delta.get((cstate, sym))
    if action is None:
        return [("1", reg, Fraction(1))]
    if isinstance(action, UnitaryAction):
        return [("1", action.matrix.apply(reg), Fraction(1))]
    if isinstance(action, RotateAction):
        return [("1", reg.rotated(action.angle), Fraction(1))]
    if isinstance(action, MeasureAction):
        vec = reg if action.pre is None else action.pre.apply(reg)
        branches = action.measurement.measure(vec)
        return [(b.outcome, b.vector, b.probability) for b in branches]
    # MeasureRotationAction: exact when the angle is a quarter turn,
    # interval-valued otherwise.
    if reg.is_exact():
        vec = reg.exact_vector()
        if action.pre is not None:
            vec = action.pre.apply(vec)
        out = []
        for b in _BASIS_2.measure(vec):
            post = ROTATION_AT_ZERO if b.outcome == "1" else ROTATION_AT_ONE
            out.append((b.outcome, post, b.probability))
        return out
    if action.pre is not None:
        raise ExactnessError(
            "rotation measurement with a pre-unitary requires an exactly known angle"
        )
    p_zero, p_one = reg.outcome_probabilities(precision_bits)
    out = []
    for label, post, p in (("1", ROTATION_AT_ZERO, p_zero), ("2", ROTATION_AT_ONE, p_one)):
        if p.is_exact():
            if p.value:
                out.append((label, post, p.value))
        else:
            out.append((label, post, p))
    return out


def _classical_step(spec: MachineSpec, cstate: str, sym: str, outcome: str):
    step = spec.classical_delta.get((cstate, sym, outcome))
    if step is None:
        raise MachineError(f"no classical transition for ({cstate!r}, {sym!r}, {outcome!r})")
    return step


def _decision(spec: MachineSpec, state: str) -> Optional[str]:
    if state == spec.accept_state:
        return CATEGORY_ACCEPT
    if state == spec.reject_state:
        return CATEGORY_REJECT
    if state == spec.dont_know_state:
        return CATEGORY_DONT_KNOW
    if state == RESTART_TARGET:
        return CATEGORY_CONTINUE
    return None


def tape_of(spec: MachineSpec, input_str: str) -> "list[str]":
    for ch in input_str:
        if ch not in spec.alphabet:
            raise MachineError(f"input symbol {ch!r} outside the machine alphabet")
    return [LEFT_MARKER, *input_str, RIGHT_MARKER]


def run_exact_realtime(
    spec: MachineSpec, input_str: str, precision_bits: int = 64
) -> OutcomeDistribution:
    """One exact left-to-right pass; every branch tracked with rational weight."""
    if spec.model_class == MODEL_RTPFA:
        return _run_pfa(spec, input_str)
    if not spec.is_realtime():
        raise MachineError(f"{spec.model_class} is not a realtime machine class")
    tape = tape_of(spec, input_str)
    branches: "dict[tuple[str, Register], Fraction]" = {
        (spec.initial_state, initial_register(spec)): Fraction(1)
    }
    masses = _empty_masses()
    for sym in tape:
        new_branches: "dict[tuple[str, Register], Fraction]" = {}
        for (cstate, reg), weight in branches.items():
            check = Fraction(0)
            for label, reg2, p in _quantum_outcomes(spec, cstate, sym, reg, precision_bits):
                step = _classical_step(spec, cstate, sym, label)
                category = _decision(spec, step.state)
                if isinstance(p, Fraction):
                    check += p
                    share: ProbValue = ExactProb(weight * p)
                else:
                    check += p.as_interval().lo
                    if category is None:
                        raise ExactnessError(
                            "interval-valued measurement outcome must halt or restart"
                        )
                    share = prob_scale(p, weight)
                if category is not None:
                    masses[category].append(share)
                else:
                    key = (step.state, reg2)
                    new_branches[key] = new_branches.get(key, Fraction(0)) + share.value
            if check > 1:
                raise MachineError("measurement branches exceed total mass")
        branches = new_branches
    if branches:
        raise MachineError("live branches remain after the right end-marker")
    return _masses_to_distribution(masses)


def _run_pfa(spec: MachineSpec, input_str: str) -> OutcomeDistribution:
    """Realtime PFA: push the exact state distribution through each symbol.

    The whole tape is consumed; mass sitting in the accept, reject, or
    don't-know state at the end decides, anything else is residual.
    Absorbing behavior of halting states is up to the matrices.
    """
    tape = tape_of(spec, input_str)
    dist: "dict[str, Fraction]" = {spec.initial_state: Fraction(1)}
    for sym in tape:
        matrix = spec.stochastic_delta.get(sym)
        if matrix is None:
            raise MachineError(f"no stochastic matrix for symbol {sym!r}")
        dist = matrix.push(dist)
    masses = _empty_masses()
    for state, mass in dist.items():
        category = _decision(spec, state) or CATEGORY_CONTINUE
        masses[category].append(ExactProb(mass))
    return _masses_to_distribution(masses)


@dataclass(frozen=True)
class RestartAnalysis:
    """Closed-form behavior of a restarting machine run to termination."""

    per_round: OutcomeDistribution
    overall_accept: ProbValue
    overall_reject: ProbValue
    overall_dont_know: ProbValue
    expected_rounds: ProbValue
    expected_steps: ProbValue

    def to_json(self) -> dict:
        return {
            "expected_rounds": prob_to_json(self.expected_rounds),
            "expected_steps": prob_to_json(self.expected_steps),
            "overall_accept": prob_to_json(self.overall_accept),
            "overall_dont_know": prob_to_json(self.overall_dont_know),
            "overall_reject": prob_to_json(self.overall_reject),
            "per_round": self.per_round.to_json(),
        }


def _halting_ratio(part: ProbValue, others: "list[ProbValue]") -> ProbValue:
    """part / (part + sum(others)) with the correlation between the two
    occurrences of `part` respected, so certified one-sidedness survives:
    the ratio is exactly 1 when every other part is exactly zero."""
    if all(o.is_exact() and o.value == 0 for o in others):
        return PROB_ONE
    if part.is_exact() and part.value == 0:
        return PROB_ZERO
    rest = prob_sum(others).as_interval()
    own = part.as_interval()
    # x/(x+y) is increasing in x and decreasing in y.
    lo = own.lo / (own.lo + rest.hi)
    hi = own.hi / (own.hi + rest.lo) if own.hi + rest.lo > 0 else Fraction(1)
    if part.is_exact() and rest.is_point():
        return ExactProb(lo)
    return ApproxProb(RationalInterval(lo, min(hi, Fraction(1))))


def analyze_restarting(
    spec: MachineSpec, input_str: str, precision_bits: int = 64
) -> RestartAnalysis:
    """Behavior of the infinite restart loop, derived from one exact round.

    Rounds are independent and identically distributed, so the overall
    accept probability is the per-round accept mass conditioned on
    halting, and the expected number of rounds is the reciprocal of the
    per-round halting mass. Expected steps charge |input| + 2 squares
    per round.
    """
    per_round = run_exact_realtime(spec, input_str, precision_bits)
    halting = [per_round.p_accept, per_round.p_reject, per_round.p_dont_know]
    halt_mass = prob_sum(halting)
    iv = halt_mass.as_interval()
    if iv.hi == 0:
        raise NonterminatingError("zero halting mass per round; the loop never ends")
    if iv.lo == 0:
        raise NonterminatingError("cannot certify a positive halting mass per round")
    expected_rounds = prob_reciprocal(halt_mass)
    return RestartAnalysis(
        per_round=per_round,
        overall_accept=_halting_ratio(per_round.p_accept, [per_round.p_reject, per_round.p_dont_know]),
        overall_reject=_halting_ratio(per_round.p_reject, [per_round.p_accept, per_round.p_dont_know]),
        overall_dont_know=_halting_ratio(
            per_round.p_dont_know, [per_round.p_accept, per_round.p_reject]
        ),
        expected_rounds=expected_rounds,
        expected_steps=prob_scale(expected_rounds, Fraction(len(input_str) + 2)),
    )


def run_exact_sweeping(
    spec: MachineSpec, input_str: str, max_sweeps: int, precision_bits: int = 64
) -> OutcomeDistribution:
    """Exact run of a two-way machine under a per-branch sweep budget.

    A sweep completes when the head arrives at either end-marker. Every
    branch may process squares only while its completed-sweep count is
    below ``max_sweeps``; a branch that reaches the budget contributes
    its weight to ``p_continue``. Decided mass is monotone in the
    budget. ``max_sweeps`` of zero therefore reports all mass as
    residual.
    """
    if max_sweeps < 0:
        raise ValueError("max_sweeps must be nonnegative")
    tape = tape_of(spec, input_str)
    last = len(tape) - 1
    step_budget = (max_sweeps + 1) * (len(tape) + 2) + 16
    masses = _empty_masses()
    stack = [(0, spec.initial_state, initial_register(spec), Fraction(1), 0, 0)]
    while stack:
        pos, cstate, reg, weight, sweeps, steps = stack.pop()
        if sweeps >= max_sweeps:
            masses[CATEGORY_CONTINUE].append(ExactProb(weight))
            continue
        if steps > step_budget:
            raise MachineError("step budget exceeded without sweep progress")
        sym = tape[pos]
        for label, reg2, p in _quantum_outcomes(spec, cstate, sym, reg, precision_bits):
            step = _classical_step(spec, cstate, sym, label)
            category = _decision(spec, step.state)
            if not isinstance(p, Fraction):
                if category is None:
                    raise ExactnessError(
                        "interval-valued measurement outcome must halt or restart"
                    )
                masses[category].append(prob_scale(p, weight))
                continue
            if category == CATEGORY_CONTINUE:
                raise MachineError("restart is not part of the sweeping model")
            if category is not None:
                masses[category].append(ExactProb(weight * p))
                continue
            delta = {MOVE_LEFT: -1, MOVE_STAY: 0, MOVE_RIGHT: 1}[step.move]
            pos2 = pos + delta
            if pos2 < 0 or pos2 > last:
                raise MachineError("head moved off the tape")
            arrived = pos2 != pos and pos2 in (0, last)
            stack.append(
                (pos2, step.state, reg2, weight * p, sweeps + (1 if arrived else 0), steps + 1)
            )
    return _masses_to_distribution(masses)


@dataclass(frozen=True)
class SweepingAnalysis:
    """Closed-form behavior of a sweeping machine whose live mass returns
    to the initial configuration after each undecided iteration."""

    per_iteration: OutcomeDistribution
    overall_accept: ProbValue
    overall_reject: ProbValue
    expected_iterations: ProbValue
    expected_sweeps: ProbValue
    expected_steps: ProbValue

    def to_json(self) -> dict:
        return {
            "expected_iterations": prob_to_json(self.expected_iterations),
            "expected_steps": prob_to_json(self.expected_steps),
            "expected_sweeps": prob_to_json(self.expected_sweeps),
            "overall_accept": prob_to_json(self.overall_accept),
            "overall_reject": prob_to_json(self.overall_reject),
            "per_iteration": self.per_iteration.to_json(),
        }


def analyze_sweeping(
    spec: MachineSpec, input_str: str, precision_bits: int = 64, tick_cap: int = 0
) -> SweepingAnalysis:
    """Detect the iteration loop of a sweeping machine and sum the series.

    The exact run proceeds in global ticks (every live branch processes
    one square per tick). When the live set collapses back to the
    initial configuration with weight L, one iteration is complete; the
    decided masses m_i recorded at ticks o_i (with s_i completed sweeps)
    then give, by geometric summation over independent iterations,

        overall(category) = sum of category masses / (1 - L)
        E[ticks]  = sum(m_i o_i)/(1 - L) + cycle_ticks * L/(1 - L)
        E[sweeps] = sum(m_i s_i)/(1 - L) + cycle_sweeps * L/(1 - L)
    """
    tape = tape_of(spec, input_str)
    last = len(tape) - 1
    if tick_cap <= 0:
        tick_cap = 64 * (len(tape) + 2) + 256
    start = (0, spec.initial_state, initial_register(spec))
    live: "dict[tuple[int, str, Register], Fraction]" = {start: Fraction(1)}
    decided: "list[tuple[str, Fraction, int, int]]" = []
    loop_weight: Optional[Fraction] = None
    cycle_ticks = cycle_sweeps = 0
    sweeps_by_config: "dict[tuple[int, str, Register], int]" = {start: 0}
    for tick in range(1, tick_cap + 1):
        new_live: "dict[tuple[int, str, Register], Fraction]" = {}
        new_sweeps: "dict[tuple[int, str, Register], int]" = {}
        for (pos, cstate, reg), weight in live.items():
            sweeps = sweeps_by_config[(pos, cstate, reg)]
            sym = tape[pos]
            for label, reg2, p in _quantum_outcomes(spec, cstate, sym, reg, precision_bits):
                if not isinstance(p, Fraction):
                    raise ExactnessError("loop analysis requires exact branch masses")
                step = _classical_step(spec, cstate, sym, label)
                category = _decision(spec, step.state)
                if category == CATEGORY_CONTINUE:
                    raise MachineError("restart is not part of the sweeping model")
                if category is not None:
                    decided.append((category, weight * p, tick, sweeps))
                    continue
                delta = {MOVE_LEFT: -1, MOVE_STAY: 0, MOVE_RIGHT: 1}[step.move]
                pos2 = pos + delta
                if pos2 < 0 or pos2 > last:
                    raise MachineError("head moved off the tape")
                arrived = pos2 != pos and pos2 in (0, last)
                key = (pos2, step.state, reg2)
                new_live[key] = new_live.get(key, Fraction(0)) + weight * p
                s2 = sweeps + (1 if arrived else 0)
                if key in new_sweeps and new_sweeps[key] != s2:
                    raise MachineError("merged branches disagree on sweep count")
                new_sweeps[key] = s2
        live, sweeps_by_config = new_live, new_sweeps
        if not live:
            loop_weight = Fraction(0)
            break
        if len(live) == 1 and start in live:
            loop_weight = live[start]
            cycle_ticks = tick
            cycle_sweeps = sweeps_by_config[start]
            break
    if loop_weight is None:
        raise MachineError("no iteration structure detected within the tick cap")
    if loop_weight >= 1:
        raise NonterminatingError("the sweeping loop never sheds mass")
    survive = 1 - loop_weight
    sums = {cat: Fraction(0) for cat in CATEGORIES}
    tick_mass = Fraction(0)
    sweep_mass = Fraction(0)
    for category, mass, tick, sweeps in decided:
        sums[category] += mass
        tick_mass += mass * tick
        sweep_mass += mass * sweeps
    per_iteration = OutcomeDistribution(
        ExactProb(sums[CATEGORY_ACCEPT]),
        ExactProb(sums[CATEGORY_REJECT]),
        ExactProb(sums[CATEGORY_DONT_KNOW]),
        ExactProb(loop_weight),
    )
    tail = loop_weight / survive
    return SweepingAnalysis(
        per_iteration=per_iteration,
        overall_accept=ExactProb(sums[CATEGORY_ACCEPT] / survive),
        overall_reject=ExactProb(sums[CATEGORY_REJECT] / survive),
        expected_iterations=ExactProb(1 / survive),
        expected_sweeps=ExactProb(sweep_mass / survive + cycle_sweeps * tail),
        expected_steps=ExactProb(tick_mass / survive + cycle_ticks * tail),
    )


class SplittableRng:
    """Seedable, splittable source of uniform 64-bit draws.

    Child generators are derived by hashing the parent's seed material
    with a text label, so any tree of children is fully determined by
    the root seed and the labels, independent of evaluation order or of
    how work is distributed across workers. Draws come from the stdlib
    Mersenne Twister seeded with the hashed material.
    """

    def __init__(self, seed, _material: Optional[bytes] = None):
        if _material is None:
            _material = hashlib.sha256(f"exactqfa:{seed!r}".encode()).digest()
        self._material = _material
        self._rng = random.Random(int.from_bytes(_material, "big"))

    def child(self, label: str) -> "SplittableRng":
        material = hashlib.sha256(self._material + b"/" + label.encode()).digest()
        return SplittableRng(None, _material=material)

    def draw64(self) -> int:
        return self._rng.getrandbits(64)


@dataclass(frozen=True)
class MonteCarloResult:
    """Aggregated trial outcomes of a sampled execution."""

    trials: int
    counts: "dict[str, int]"
    mean_steps: Optional[Fraction]
    mean_rounds: Optional[Fraction]

    def empirical(self, category: str) -> Fraction:
        return Fraction(self.counts.get(category, 0), self.trials)

    def to_json(self) -> dict:
        return {
            "counts": dict(sorted(self.counts.items())),
            "mean_rounds": None if self.mean_rounds is None else format_rational(self.mean_rounds),
            "mean_steps": None if self.mean_steps is None else format_rational(self.mean_steps),
            "trials": self.trials,
        }


CATEGORY_CAPPED = "capped"

_MAX_SAMPLE_BITS = 1 << 16


class _StochNode:
    """One square whose measurement genuinely branches.

    ``targets`` aligns with the outcome order of ``outcomes_at``; the
    cumulative probability bounds can be recomputed at higher precision
    when a draw lands too close to a boundary to decide.
    """

    __slots__ = ("key", "targets", "outcomes_at")

    def __init__(self, key, targets, outcomes_at: Callable[[int], list]):
        self.key = key
        self.targets = targets
        self.outcomes_at = outcomes_at

    def cumulative_bounds(self, bits: int) -> "list[tuple[Fraction, Fraction]]":
        lo = hi = Fraction(0)
        bounds = []
        for _, _, p in self.outcomes_at(bits):
            if isinstance(p, Fraction):
                lo, hi = lo + p, hi + p
            else:
                iv = p.as_interval()
                lo, hi = lo + iv.lo, hi + iv.hi
            bounds.append((lo, hi))
        return bounds


def _sample_outcome(node: _StochNode, rng: SplittableRng, precision_bits: int) -> int:
    num = rng.draw64()
    den = 1 << 64
    bits = max(64, precision_bits)
    while True:
        bounds = node.cumulative_bounds(bits)
        prev_hi = Fraction(0)
        chosen = -1
        for i, (cum_lo, cum_hi) in enumerate(bounds):
            # The draw u lies in [num/den, (num+1)/den); outcome i is
            # certain when that whole window sits inside the band the
            # outcome owns regardless of where the true probabilities
            # fall within their intervals. The true cumulative total is
            # exactly 1 and u < 1 always, so the last outcome needs only
            # the lower test.
            upper_ok = i == len(bounds) - 1 or num + 1 <= cum_lo * den
            if num >= prev_hi * den and upper_ok:
                chosen = i
                break
            prev_hi = cum_hi
        if chosen >= 0:
            return chosen
        num = (num << 64) | rng.draw64()
        den <<= 64
        if bits < _MAX_SAMPLE_BITS:
            bits *= 2
        if den > 1 << (4 * _MAX_SAMPLE_BITS):
            raise RuntimeError("sampling failed to separate outcome boundaries")


class _CompiledMachine:
    """Lazily compiled transition graph for sampled execution.

    Deterministic stretches (single outcome of probability one) are
    collapsed into jumps with step counts, so a trial only pays for
    genuine random choices. Nodes are (position, classical state,
    register) triples.
    """

    def __init__(self, spec: MachineSpec, input_str: str, precision_bits: int):
        self.spec = spec
        self.tape = tape_of(spec, input_str)
        self.last = len(self.tape) - 1
        self.precision_bits = precision_bits
        self.start = (0, spec.initial_state, initial_register(spec))
        self._memo: dict = {}

    def _next_position(self, pos: int, move: str) -> int:
        pos2 = pos + {MOVE_LEFT: -1, MOVE_STAY: 0, MOVE_RIGHT: 1}[move]
        if pos2 < 0 or pos2 > self.last:
            raise MachineError("head moved off the tape")
        return pos2

    def _stoch_node(self, key) -> _StochNode:
        pos, cstate, reg = key
        sym = self.tape[pos]
        spec = self.spec

        def outcomes_at(bits: int):
            return _quantum_outcomes(spec, cstate, sym, reg, bits)

        targets = []
        for label, reg2, _ in outcomes_at(self.precision_bits):
            step = _classical_step(spec, cstate, sym, label)
            category = _decision(spec, step.state)
            if category == CATEGORY_CONTINUE:
                targets.append(("restart", None))
            elif category is not None:
                targets.append(("halt", category))
            else:
                targets.append(("node", (self._next_position(pos, step.move), step.state, reg2)))
        return _StochNode(key, targets, outcomes_at)

    def resolve(self, node):
        """Follow deterministic steps from node; returns (kind, payload, steps).

        kind "halt": payload is the category; steps include the deciding
        square. kind "restart": steps include the right end-marker. kind
        "stoch": payload is a _StochNode and steps stop just before it.
        """
        chain = []
        seen = set()
        steps = 0
        cur = node
        while True:
            hit = self._memo.get(cur)
            if hit is not None:
                kind, payload, extra = hit
                steps += extra
                break
            if cur in seen:
                raise NonterminatingError("deterministic loop never reaches a decision")
            seen.add(cur)
            if len(chain) > max(4096, 16 * len(self.tape)):
                raise NonterminatingError("deterministic run exceeded the step budget")
            pos, cstate, reg = cur
            sym = self.tape[pos]
            outs = _quantum_outcomes(self.spec, cstate, sym, reg, self.precision_bits)
            deterministic = (
                len(outs) == 1 and isinstance(outs[0][2], Fraction) and outs[0][2] == 1
            )
            if not deterministic:
                kind, payload = "stoch", self._stoch_node(cur)
                self._memo[cur] = (kind, payload, 0)
                break
            label, reg2, _ = outs[0]
            step = _classical_step(self.spec, cstate, sym, label)
            category = _decision(self.spec, step.state)
            if category == CATEGORY_CONTINUE:
                kind, payload = "restart", None
                steps += 1
                self._memo[cur] = (kind, payload, 1)
                break
            if category is not None:
                kind, payload = "halt", category
                steps += 1
                self._memo[cur] = (kind, payload, 1)
                break
            chain.append((cur, steps))
            steps += 1
            cur = (self._next_position(pos, step.move), step.state, reg2)
        for n, before in chain:
            self._memo[n] = (kind, payload, steps - before)
        return kind, payload, steps


def _run_trials(
    compiled: _CompiledMachine,
    rng_root: SplittableRng,
    indices: range,
    step_cap: Optional[int],
    precision_bits: int,
):
    counts = {
        cat: 0
        for cat in (CATEGORY_ACCEPT, CATEGORY_REJECT, CATEGORY_DONT_KNOW, CATEGORY_CONTINUE, CATEGORY_CAPPED)
    }
    step_total = 0
    round_total = 0
    decided = 0
    for index in indices:
        rng = rng_root.child(f"trial:{index}")
        node = compiled.start
        steps = 0
        rounds = 1
        verdict = None
        while True:
            kind, payload, consumed = compiled.resolve(node)
            steps += consumed
            if step_cap is not None and steps > step_cap:
                verdict = CATEGORY_CAPPED
                break
            if kind == "halt":
                verdict = payload
                break
            if kind == "restart":
                rounds += 1
                node = compiled.start
                continue
            stoch: _StochNode = payload
            steps += 1
            if step_cap is not None and steps > step_cap:
                verdict = CATEGORY_CAPPED
                break
            choice = _sample_outcome(stoch, rng, precision_bits)
            target_kind, target = stoch.targets[choice]
            if target_kind == "halt":
                verdict = target
                break
            if target_kind == "restart":
                rounds += 1
                node = compiled.start
                continue
            node = target
        counts[verdict] += 1
        if verdict != CATEGORY_CAPPED:
            step_total += steps
            round_total += rounds
            decided += 1
    return counts, step_total, round_total, decided


def run_monte_carlo(
    spec: MachineSpec,
    input_str: str,
    trials: int,
    seed,
    step_cap: Optional[int] = None,
    precision_bits: int = 64,
    workers: int = 1,
) -> MonteCarloResult:
    """Sample full executions; restarts run until a halting decision.

    Results are reproducible from the seed and independent of the worker
    count: every trial owns a child generator derived from the seed and
    the trial index. Trials that exceed ``step_cap`` squares are counted
    as capped and excluded from the step and round means.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if spec.model_class == MODEL_RTPFA:
        compiled = _compile_pfa(spec, input_str)
    else:
        compiled = _CompiledMachine(spec, input_str, precision_bits)
    rng_root = SplittableRng(seed)
    chunk = 4096
    blocks = [range(i, min(i + chunk, trials)) for i in range(0, trials, chunk)]
    results = []
    if workers > 1 and len(blocks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda block: _run_trials(compiled, rng_root, block, step_cap, precision_bits),
                    blocks,
                )
            )
    else:
        results = [_run_trials(compiled, rng_root, block, step_cap, precision_bits) for block in blocks]
    counts = {
        cat: 0
        for cat in (CATEGORY_ACCEPT, CATEGORY_REJECT, CATEGORY_DONT_KNOW, CATEGORY_CONTINUE, CATEGORY_CAPPED)
    }
    step_total = 0
    round_total = 0
    decided = 0
    for block_counts, block_steps, block_rounds, block_decided in results:
        for cat, n in block_counts.items():
            counts[cat] += n
        step_total += block_steps
        round_total += block_rounds
        decided += block_decided
    return MonteCarloResult(
        trials=trials,
        counts=counts,
        mean_steps=Fraction(step_total, decided) if decided else None,
        mean_rounds=Fraction(round_total, decided) if decided else None,
    )


def _compile_pfa(spec: MachineSpec, input_str: str) -> _CompiledMachine:
    """Present a realtime PFA as a compiled graph of stochastic nodes.

    The classical state plays the register role; every square is a
    stochastic node over the rows of that symbol's matrix.
    """
    compiled = _CompiledMachine.__new__(_CompiledMachine)
    compiled.spec = spec
    compiled.tape = tape_of(spec, input_str)
    compiled.last = len(compiled.tape) - 1
    compiled.precision_bits = 64
    compiled.start = (0, spec.initial_state, None)
    compiled._memo = {}

    def resolve(node):
        hit = compiled._memo.get(node)
        if hit is not None:
            return hit
        pos, cstate, _ = node
        category = _decision(spec, cstate)
        if category is not None:
            entry = ("halt", category, 0)
            compiled._memo[node] = entry
            return entry
        if pos > compiled.last:
            entry = ("halt", CATEGORY_CONTINUE, 0)
            compiled._memo[node] = entry
            return entry
        sym = compiled.tape[pos]
        matrix = spec.stochastic_delta[sym]
        row = matrix.rows[matrix.order.index(cstate)]
        targets = []
        probs = []
        for target_state, p in zip(matrix.order, row):
            if p == 0:
                continue
            targets.append(("node", (pos + 1, target_state, None)))
            probs.append(p)

        def outcomes_at(_bits, probs=tuple(probs)):
            return [(str(i), None, p) for i, p in enumerate(probs)]

        entry = ("stoch", _StochNode(node, targets, outcomes_at), 0)
        compiled._memo[node] = entry
        return entry

    compiled.resolve = resolve
    return compiled


def run_unary_length(
    spec: MachineSpec, length: int, precision_bits: int = 64, walk_limit: int = 1 << 22
) -> OutcomeDistribution:
    """Exact realtime run on the unary input of the given length.

    Closed forms avoid materializing the input: a self-looping rotation
    square contributes its angle times the length, and a classical or
    matrix register that revisits a configuration is advanced by cycle
    arithmetic. Falls back to a ValueError when the evolution inside the
    unary run is not deterministic, in which case the caller should use
    run_exact_realtime on the materialized string.
    """
    if length < 0:
        raise ValueError("length must be nonnegative")
    if len(spec.alphabet) != 1:
        raise ValueError("unary fast path requires a one-symbol alphabet")
    if spec.model_class == MODEL_RTPFA:
        return _unary_pfa(spec, length)
    if not spec.is_realtime():
        raise ValueError("unary fast path requires a realtime machine class")
    sym = spec.alphabet[0]
    masses = _empty_masses()
    # The left end-marker may branch; each branch is advanced separately.
    live: "list[tuple[str, Register, Fraction]]" = []
    for label, reg2, p in _quantum_outcomes(
        spec, spec.initial_state, LEFT_MARKER, initial_register(spec), precision_bits
    ):
        step = _classical_step(spec, spec.initial_state, LEFT_MARKER, label)
        category = _decision(spec, step.state)
        if not isinstance(p, Fraction):
            raise ExactnessError("interval-valued branch on the left end-marker")
        if category is not None:
            masses[category].append(ExactProb(p))
        else:
            live.append((step.state, reg2, p))
    advanced: "list[tuple[str, Register, Fraction]]" = []
    for cstate, reg, weight in live:
        outcome = _advance_unary(spec, cstate, reg, sym, length, precision_bits, walk_limit)
        if outcome[0] == "halt":
            masses[outcome[1]].append(ExactProb(weight))
        else:
            advanced.append((outcome[1], outcome[2], weight))
    for cstate, reg, weight in advanced:
        for label, reg2, p in _quantum_outcomes(spec, cstate, RIGHT_MARKER, reg, precision_bits):
            step = _classical_step(spec, cstate, RIGHT_MARKER, label)
            category = _decision(spec, step.state)
            if category is None:
                raise MachineError("right end-marker must halt or restart a realtime machine")
            if isinstance(p, Fraction):
                masses[category].append(ExactProb(weight * p))
            else:
                masses[category].append(prob_scale(p, weight))
    return _masses_to_distribution(masses)


def _advance_unary(
    spec: MachineSpec,
    cstate: str,
    reg: Register,
    sym: str,
    length: int,
    precision_bits: int,
    walk_limit: int,
):
    """Advance one deterministic branch over `length` unary squares."""
    if length == 0:
        return ("live", cstate, reg)
    action = spec.quantum_delta.get((cstate, sym))
    if isinstance(action, RotateAction):
        step = spec.classical_delta.get((cstate, sym, "1"))
        if step is None:
            raise MachineError(f"no classical transition for ({cstate!r}, {sym!r}, '1')")
        if step.state == cstate:
            return ("live", cstate, reg.rotated(action.angle.scale(length)))
    seen = {(cstate, reg): 0}
    seq: "list[tuple[str, Register]]" = [(cstate, reg)]
    consumed = 0
    while consumed < length:
        if consumed > walk_limit:
            raise ValueError("unary walk exceeded the configuration limit")
        outs = _quantum_outcomes(spec, cstate, sym, reg, precision_bits)
        if len(outs) != 1 or not isinstance(outs[0][2], Fraction) or outs[0][2] != 1:
            raise ValueError("unary fast path requires deterministic evolution")
        label, reg2, _ = outs[0]
        step = _classical_step(spec, cstate, sym, label)
        category = _decision(spec, step.state)
        if category == CATEGORY_CONTINUE:
            raise ValueError("unary fast path does not model mid-input restarts")
        if category is not None:
            return ("halt", category)
        cstate, reg = step.state, reg2
        consumed += 1
        key = (cstate, reg)
        if key in seen:
            start = seen[key]
            period = consumed - start
            final = start + (length - start) % period
            cstate, reg = seq[final]
            return ("live", cstate, reg)
        seen[key] = consumed
        seq.append(key)
    return ("live", cstate, reg)


def _unary_pfa(spec: MachineSpec, length: int) -> OutcomeDistribution:
    sym = spec.alphabet[0]
    order = spec.stochastic_delta[sym].order
    dist = {spec.initial_state: Fraction(1)}
    dist = spec.stochastic_delta[LEFT_MARKER].push(dist)
    vector = tuple(dist.get(s, Fraction(0)) for s in order)
    power = _matrix_power(spec.stochastic_delta[sym].rows, length)
    vector = tuple(
        sum(vector[i] * power[i][j] for i in range(len(order))) for j in range(len(order))
    )
    dist = {s: v for s, v in zip(order, vector) if v}
    final = spec.stochastic_delta[RIGHT_MARKER]
    if final.order != order:
        dist = {s: dist.get(s, Fraction(0)) for s in final.order}
    dist = final.push(dist)
    masses = _empty_masses()
    for state, mass in dist.items():
        category = _decision(spec, state) or CATEGORY_CONTINUE
        masses[category].append(ExactProb(mass))
    return _masses_to_distribution(masses)


def _matrix_power(rows, exponent: int):
    n = len(rows)
    result = tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(n)) for i in range(n)
    )
    base = tuple(tuple(Fraction(x) for x in row) for row in rows)
    while exponent:
        if exponent & 1:
            result = _matmul_rows(result, base)
        base = _matmul_rows(base, base)
        exponent >>= 1
    return result


def _matmul_rows(a, b):
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n)
    )
