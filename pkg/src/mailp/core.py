"""Discrete-time information-transfer dynamics for multi-agent learning.

Each of N agents holds information fractions about a set of targets: the
environment, plus groups of other agents.  Coordination weights C say how much
of an agent's final competence concerns each target (they sum to 1 per agent);
centralization weights K scale how fast information flows in from a target.
Per step, the component for target chi gains

    K[i, chi] * lam(C[i, chi] - I[i, chi])

while group components additionally lose a share of what the watched group
itself just learned -- the nonstationarity term: whatever the others learn
invalidates part of what was known about them.  The environment is stationary,
so environment components never lose.  The update is synchronous: all deltas
are computed from the previous state, then applied together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import InvariantError

#: Absolute tolerance for all state invariants.  Double-precision rounding over
#: any realistic run length stays orders of magnitude below this.
TOL = 1e-12


@dataclass(frozen=True)
class LearningFunction:
    """Per-step acquisition profile; satisfies 0 <= lam(x) <= x on [0, 1].

    Kinds: ``identity`` (lam(x) = x), ``scaled`` (lam(x) = beta * x with
    beta in (0, 1]), ``saturating`` (lam(x) = x * c / (c + x) with c > 0).
    All three are nonnegative and monotone nondecreasing on [0, 1].
    """

    kind: str
    param: float = 0.0

    @staticmethod
    def identity() -> "LearningFunction":
        return LearningFunction("identity")

    @staticmethod
    def scaled(beta: float) -> "LearningFunction":
        if not 0.0 < beta <= 1.0:
            raise ValueError(f"scaled learning function needs beta in (0, 1], got {beta}")
        return LearningFunction("scaled", beta)

    @staticmethod
    def saturating(c: float) -> "LearningFunction":
        if c <= 0.0:
            raise ValueError(f"saturating learning function needs c > 0, got {c}")
        return LearningFunction("saturating", c)

    def __call__(self, x: float) -> float:
        if self.kind == "identity":
            return x
        if self.kind == "scaled":
            return self.param * x
        if self.kind == "saturating":
            return x * self.param / (self.param + x)
        raise ValueError(f"unknown learning function kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "identity":
            return "identity"
        return f"{self.kind}({self.param:g})"


@dataclass(frozen=True)
class TargetKey:
    """What a component of an agent's information is about.

    ``agents is None`` means the environment; otherwise a nonempty group of
    other agents.  Group validity relative to the owner (the owner must not be
    a member) is checked by :class:`MailpSpec`.
    """

    agents: frozenset[int] | None = None

    @property
    def is_env(self) -> bool:
        return self.agents is None

    @staticmethod
    def group(agents: Iterable[int]) -> "TargetKey":
        members = frozenset(agents)
        if not members:
            raise ValueError("a group target needs at least one agent")
        return TargetKey(members)

    def __repr__(self) -> str:
        if self.agents is None:
            return "ENV"
        return f"Group({sorted(self.agents)})"


#: The environment target, shared by all agents.
ENV = TargetKey()


@dataclass(frozen=True)
class MailpSpec:
    """Static description of one information-transfer setting.

    ``coordination`` and ``centralization`` map (agent, target) pairs to C and
    K values over the same key set.  Per agent, coordination entries must sum
    to 1; centralization entries lie in (0, 1].
    """

    n_agents: int
    coordination: Mapping[tuple[int, TargetKey], float]
    centralization: Mapping[tuple[int, TargetKey], float]
    learning_fn: LearningFunction

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ValueError(f"need at least one agent, got {self.n_agents}")
        if set(self.coordination) != set(self.centralization):
            raise ValueError("coordination and centralization must cover the same (agent, target) keys")
        targets: dict[int, list[TargetKey]] = {i: [] for i in range(self.n_agents)}
        for (i, target), c in self.coordination.items():
            if i not in targets:
                raise ValueError(f"agent index {i} outside [0, {self.n_agents})")
            if not target.is_env:
                if i in target.agents:
                    raise ValueError(f"agent {i} cannot target a group containing itself")
                if not target.agents <= set(range(self.n_agents)):
                    raise ValueError(f"group {target} references unknown agents")
            if c < 0.0:
                raise ValueError(f"coordination weight for ({i}, {target}) is negative: {c}")
            k = self.centralization[(i, target)]
            if not 0.0 < k <= 1.0:
                raise ValueError(f"centralization weight for ({i}, {target}) must be in (0, 1], got {k}")
            targets[i].append(target)
        for i, tlist in targets.items():
            total = math.fsum(self.coordination[(i, t)] for t in tlist)
            if abs(total - 1.0) > TOL:
                raise ValueError(f"coordination weights of agent {i} sum to {total!r}, expected 1")
        object.__setattr__(self, "_targets", {i: tuple(t) for i, t in targets.items()})

    def targets(self, i: int) -> tuple[TargetKey, ...]:
        """Targets of agent ``i`` in insertion order."""
        return self._targets[i]


@dataclass(frozen=True)
class InformationState:
    """Information fractions at step ``t``, keyed like the spec's tensors."""

    t: int
    info: Mapping[tuple[int, TargetKey], float]

    def value(self, i: int, target: TargetKey) -> float:
        return self.info[(i, target)]


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of :func:`run_until`.

    ``steps`` is the first step index at which every agent's total reached the
    threshold, or None when the run hit ``max_t`` first.  The trajectory holds
    (t, per-agent totals) for every visited step including the start.
    """

    converged: bool
    steps: int | None
    trajectory: tuple[tuple[int, tuple[float, ...]], ...]


def validate_state(state: InformationState, spec: MailpSpec, tol: float = TOL) -> None:
    """Raise InvariantError when any component leaves [0, C] beyond ``tol``."""
    if set(state.info) != set(spec.coordination):
        raise KeyError("state entries do not match the spec's (agent, target) keys")
    for key, value in state.info.items():
        c = spec.coordination[key]
        if value < -tol or value > c + tol:
            raise InvariantError(f"information {value!r} for {key} outside [0, {c}]")
    for i in range(spec.n_agents):
        total = total_information(state, spec, i)
        if total < -tol or total > 1.0 + tol:
            raise InvariantError(f"total information {total!r} of agent {i} outside [0, 1]")


def total_information(state: InformationState, spec: MailpSpec, i: int) -> float:
    """Total information of agent ``i``: the sum over all its targets."""
    info = state.info
    return sum(info[(i, t)] for t in spec.targets(i))


def _gap(c: float, current: float, key) -> float:
    gap = c - current
    if gap < 0.0:
        if gap < -TOL:
            raise InvariantError(f"information {current!r} exceeds coordination {c!r} for {key}")
        return 0.0
    return gap


def info_gain(state: InformationState, spec: MailpSpec, i: int, target: TargetKey) -> float:
    """Single-component gain K * lam(C - I) computed from the current state."""
    key = (i, target)
    if key not in spec.coordination:
        raise KeyError(f"spec has no entry for agent {i}, target {target}")
    if key not in state.info:
        raise KeyError(f"state has no entry for agent {i}, target {target}")
    gap = _gap(spec.coordination[key], state.info[key], key)
    return spec.centralization[key] * spec.learning_fn(gap)


def group_info_gain(state: InformationState, spec: MailpSpec, group: Iterable[int]) -> float:
    """Aggregate gain of a group this step: sum of members' gains over all
    their targets (environment included)."""
    members = frozenset(group)
    if not members:
        raise ValueError("group must not be empty")
    return sum(info_gain(state, spec, j, t) for j in members for t in spec.targets(j))


def info_loss(state: InformationState, spec: MailpSpec, i: int, target: TargetKey) -> float:
    """Nonstationarity loss of agent ``i``'s component about group ``target``.

    The loss is gain_G * I / (I_G + gain_G) where gain_G is the group's
    aggregate gain this step and I_G the group's aggregate total information.
    Zero whenever the group learned nothing.
    """
    if target.is_env:
        raise ValueError("the environment component takes no loss term")
    key = (i, target)
    if key not in state.info:
        raise KeyError(f"state has no entry for agent {i}, target {target}")
    current = state.info[key]
    if current < 0.0:
        raise InvariantError(f"negative information {current!r} for {key}")
    group_gain = group_info_gain(state, spec, target.agents)
    if group_gain == 0.0:
        return 0.0
    group_total = sum(total_information(state, spec, j) for j in target.agents)
    if group_total < 0.0:
        raise InvariantError(f"negative group information {group_total!r} for {target}")
    return group_gain * current / (group_total + group_gain)


def step(state: InformationState, spec: MailpSpec) -> InformationState:
    """Advance one synchronous step.

    Equivalent to applying :func:`info_gain` and :func:`info_loss` to every
    component (all computed from the incoming state), but with the per-agent
    gains and totals shared across components instead of recomputed.
    """
    info = state.info
    coord = spec.coordination
    cent = spec.centralization
    lam = spec.learning_fn

    gains: dict[tuple[int, TargetKey], float] = {}
    agent_gain = [0.0] * spec.n_agents
    for key, c in coord.items():
        g = cent[key] * lam(_gap(c, info[key], key))
        gains[key] = g
        agent_gain[key[0]] += g
    agent_total = [total_information(state, spec, j) for j in range(spec.n_agents)]

    new_info: dict[tuple[int, TargetKey], float] = {}
    for key, g in gains.items():
        current = info[key]
        target = key[1]
        if target.is_env:
            new_info[key] = current + g
            continue
        group_gain = 0.0
        group_total = 0.0
        for j in target.agents:
            group_gain += agent_gain[j]
            group_total += agent_total[j]
        if group_gain > 0.0:
            loss = group_gain * current / (group_total + group_gain)
        else:
            loss = 0.0
        new_info[key] = current + g - loss

    new_state = InformationState(state.t + 1, new_info)
    validate_state(new_state, spec)
    return new_state


def run_until(
    state: InformationState,
    spec: MailpSpec,
    eps: float,
    max_t: int,
) -> ConvergenceReport:
    """Iterate :func:`step` until every agent's total reaches 1 - eps.

    Stops at ``max_t`` steps without raising; the report then has
    ``converged=False``.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    if max_t < 1:
        raise ValueError(f"max_t must be >= 1, got {max_t}")
    threshold = 1.0 - eps

    totals = tuple(total_information(state, spec, i) for i in range(spec.n_agents))
    trajectory = [(state.t, totals)]
    if min(totals) >= threshold:
        return ConvergenceReport(True, state.t, tuple(trajectory))
    while state.t < max_t:
        state = step(state, spec)
        totals = tuple(total_information(state, spec, i) for i in range(spec.n_agents))
        trajectory.append((state.t, totals))
        if min(totals) >= threshold:
            return ConvergenceReport(True, state.t, tuple(trajectory))
    return ConvergenceReport(False, None, tuple(trajectory))


def homogeneous_spec(
    n: int,
    c_env: float,
    k_star: float,
    learning_fn: LearningFunction,
    i0_star: float,
    eps: float,
    k_env: float = 1.0,
) -> tuple[MailpSpec, InformationState]:
    """Build the fully symmetric setting used by the multi-agent analysis.

    Every ordered pair (i, j) is a singleton target with coordination
    c_star = (1 - c_env) / (n - 1) and centralization ``k_star``; the
    environment carries the remaining weight ``c_env``.  Agents start with
    near-complete knowledge of the environment, (1 - eps) * c_env, and
    ``i0_star`` about every other agent.  ``k_env`` defaults to 1 so the
    environment component closes its (tiny) remaining gap immediately under
    the identity learning function.
    """
    if n < 2:
        raise ValueError(f"the symmetric setting needs n >= 2, got {n}")
    if not 0.0 <= c_env < 1.0:
        raise ValueError(f"c_env must be in [0, 1), got {c_env}")
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    c_star = (1.0 - c_env) / (n - 1)
    if not 0.0 <= i0_star <= c_star:
        raise ValueError(f"i0_star must be in [0, c_star={c_star}], got {i0_star}")

    coordination: dict[tuple[int, TargetKey], float] = {}
    centralization: dict[tuple[int, TargetKey], float] = {}
    info: dict[tuple[int, TargetKey], float] = {}
    for i in range(n):
        coordination[(i, ENV)] = c_env
        centralization[(i, ENV)] = k_env
        info[(i, ENV)] = (1.0 - eps) * c_env
        for j in range(n):
            if j == i:
                continue
            target = TargetKey.group([j])
            coordination[(i, target)] = c_star
            centralization[(i, target)] = k_star
            info[(i, target)] = i0_star
    spec = MailpSpec(n, coordination, centralization, learning_fn)
    state = InformationState(0, info)
    validate_state(state, spec)
    return spec, state


def single_agent_spec(
    k_env: float,
    learning_fn: LearningFunction,
    i0: float = 0.0,
) -> tuple[MailpSpec, InformationState]:
    """One agent, environment only (its coordination weight is therefore 1)."""
    spec = MailpSpec(1, {(0, ENV): 1.0}, {(0, ENV): k_env}, learning_fn)
    state = InformationState(0, {(0, ENV): i0})
    validate_state(state, spec)
    return spec, state
