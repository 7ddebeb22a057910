"""Finite partially observable stochastic games and shared-policy transforms.

A game is a finite tuple (states, per-agent actions, transition kernel,
per-agent rewards, per-agent observation spaces and observation kernels).
The transforms here are what lets one table serve every agent: tagging
observations with the observing agent's identity makes observation spaces
disjoint, disjoint spaces let per-agent policies merge into a single shared
table, and padding/trimming reconcile heterogeneous observation and action
sizes.  Everything is a value; operations never mutate their inputs.
"""

from __future__ import annotations

import ast
import json
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

PROB_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Posg:
    """Finite POSG with dense probability tables.

    ``transition`` has shape (S, A_1, ..., A_N, S) and sums to 1 over the last
    axis.  ``rewards[i]`` has the same shape.  ``obs_fns[i]`` has shape
    (A_i, S, O_i) and sums to 1 over the last axis: the probability of each
    observation given the agent's own last action and the current state.
    """

    states: tuple
    actions: tuple[tuple, ...]
    observations: tuple[tuple, ...]
    transition: np.ndarray
    rewards: tuple[np.ndarray, ...]
    obs_fns: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "transition", _frozen_array(self.transition))
        object.__setattr__(self, "rewards", tuple(_frozen_array(r) for r in self.rewards))
        object.__setattr__(self, "obs_fns", tuple(_frozen_array(o) for o in self.obs_fns))

        n = len(self.actions)
        if n == 0:
            raise ValueError("need at least one agent")
        if len(self.observations) != n or len(self.rewards) != n or len(self.obs_fns) != n:
            raise ValueError("actions, observations, rewards and obs_fns must all have one entry per agent")
        for label_set, what in ((self.states, "states"),) + tuple(
            (space, f"agent {i} {kind}")
            for kind, spaces in (("actions", self.actions), ("observations", self.observations))
            for i, space in enumerate(spaces)
        ):
            if len(set(label_set)) != len(label_set):
                raise ValueError(f"duplicate labels in {what}")
            if len(label_set) == 0:
                raise ValueError(f"{what} must not be empty")

        shape = (len(self.states),) + tuple(len(a) for a in self.actions) + (len(self.states),)
        if self.transition.shape != shape:
            raise ValueError(f"transition shape {self.transition.shape} != {shape}")
        if not np.allclose(self.transition.sum(axis=-1), 1.0, atol=PROB_TOL, rtol=0.0):
            raise ValueError("transition rows must sum to 1")
        for i, r in enumerate(self.rewards):
            if r.shape != shape:
                raise ValueError(f"reward table of agent {i} has shape {r.shape} != {shape}")
        for i, o in enumerate(self.obs_fns):
            oshape = (len(self.actions[i]), len(self.states), len(self.observations[i]))
            if o.shape != oshape:
                raise ValueError(f"observation table of agent {i} has shape {o.shape} != {oshape}")
            if not np.allclose(o.sum(axis=-1), 1.0, atol=PROB_TOL, rtol=0.0):
                raise ValueError(f"observation rows of agent {i} must sum to 1")

    @property
    def n_agents(self) -> int:
        return len(self.actions)


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def observation_spaces_disjoint(game: Posg) -> bool:
    """True iff no observation label appears in two agents' spaces."""
    seen: set = set()
    for space in game.observations:
        labels = set(space)
        if labels & seen:
            return False
        seen |= labels
    return True


def apply_agent_indication(game: Posg) -> Posg:
    """Tag every observation with its agent's index: label w becomes (w, i).

    The observation kernels are unchanged under the relabeling, so the result
    is equivalent to the input game while having disjoint observation spaces.
    Applying it twice tags twice: ((w, i), i).
    """
    tagged = tuple(
        tuple((obs, i) for obs in space) for i, space in enumerate(game.observations)
    )
    return Posg(game.states, game.actions, tagged, game.transition, game.rewards, game.obs_fns)


@dataclass(frozen=True)
class Policy:
    """Stochastic observation-to-action table.

    ``owner`` is the agent index, or None for a shared policy over union
    spaces.  ``probs`` is dense: one entry per (observation, action) pair,
    summing to 1 over the actions for each observation.
    """

    owner: int | None
    observations: tuple
    actions: tuple
    probs: dict[tuple, float]

    def __post_init__(self) -> None:
        expected = {(obs, act) for obs in self.observations for act in self.actions}
        if set(self.probs) != expected:
            raise ValueError("policy table must cover exactly observations x actions")
        for obs in self.observations:
            total = sum(self.probs[(obs, act)] for act in self.actions)
            if abs(total - 1.0) > PROB_TOL:
                raise ValueError(f"action probabilities for observation {obs!r} sum to {total!r}")

    def prob(self, obs, act) -> float:
        return self.probs[(obs, act)]


def random_policy(rng: random.Random, observations: Sequence, actions: Sequence, owner: int | None = None) -> Policy:
    probs: dict[tuple, float] = {}
    for obs in observations:
        weights = [rng.uniform(0.05, 1.0) for _ in actions]
        total = sum(weights)
        for act, w in zip(actions, weights):
            probs[(obs, act)] = w / total
    return Policy(owner, tuple(observations), tuple(actions), probs)


def merge_policies(game: Posg, policies: Sequence[Policy]) -> Policy:
    """Collapse per-agent policies into one shared table over union spaces.

    Requires disjoint observation spaces, so each observation identifies its
    agent.  For an observation of agent i the merged row copies pi_i and puts
    zero mass on actions outside agent i's action set; restricted back to
    (Omega_i, A_i) the merged policy equals pi_i exactly.
    """
    if not observation_spaces_disjoint(game):
        raise ValueError("merge requires disjoint observation spaces; apply agent indication first")
    if len(policies) != game.n_agents:
        raise ValueError(f"need one policy per agent, got {len(policies)}")
    for i, pi in enumerate(policies):
        if tuple(pi.observations) != tuple(game.observations[i]):
            raise ValueError(f"policy {i} does not match agent {i}'s observation space")
        if tuple(pi.actions) != tuple(game.actions[i]):
            raise ValueError(f"policy {i} does not match agent {i}'s action space")

    union_obs: list = []
    for space in game.observations:
        union_obs.extend(space)
    union_actions: list = []
    for space in game.actions:
        for act in space:
            if act not in union_actions:
                union_actions.append(act)

    probs: dict[tuple, float] = {}
    for i, pi in enumerate(policies):
        own_actions = set(game.actions[i])
        for obs in game.observations[i]:
            for act in union_actions:
                probs[(obs, act)] = pi.prob(obs, act) if act in own_actions else 0.0
    return Policy(None, tuple(union_obs), tuple(union_actions), probs)


@dataclass(frozen=True)
class PaddedObservation:
    """Fixed-length vector form of an observation, zero-padded on the right.

    When an agent id is attached it sits in the trailing slot(s) after the
    zeros; ``true_len`` records how many leading entries are payload.
    """

    data: tuple[float, ...]
    true_len: int
    agent_id: int | None = None


def pad_observation(
    values: Sequence[float],
    padded_len: int,
    agent_id: int | None = None,
    *,
    one_hot_agents: int | None = None,
) -> PaddedObservation:
    """Zero-pad ``values`` to ``padded_len``, optionally appending the agent id.

    By default the id is written as a scalar in the final slot; with
    ``one_hot_agents=m`` the final m slots hold a one-hot encoding instead
    (a scalar id imposes an artificial ordering metric on agents).
    """
    o = len(values)
    id_slots = 0
    if agent_id is not None:
        id_slots = 1 if one_hot_agents is None else one_hot_agents
        if one_hot_agents is not None and not 0 <= agent_id < one_hot_agents:
            raise ValueError(f"agent_id {agent_id} outside one-hot range [0, {one_hot_agents})")
    if o + id_slots > padded_len:
        raise ValueError(
            f"cannot fit {o} values plus {id_slots} id slot(s) into length {padded_len}"
        )
    data = [float(v) for v in values] + [0.0] * (padded_len - o - id_slots)
    if agent_id is not None:
        if one_hot_agents is None:
            data.append(float(agent_id))
        else:
            hot = [0.0] * one_hot_agents
            hot[agent_id] = 1.0
            data.extend(hot)
    return PaddedObservation(tuple(data), o, agent_id)


def unpad_observation(
    padded: PaddedObservation,
    *,
    one_hot_agents: int | None = None,
) -> tuple[tuple[float, ...], int | None]:
    """Invert :func:`pad_observation` using the recorded true length."""
    values = padded.data[: padded.true_len]
    if padded.agent_id is None:
        return values, None
    if one_hot_agents is None:
        decoded = int(padded.data[-1])
    else:
        block = padded.data[-one_hot_agents:]
        decoded = max(range(one_hot_agents), key=lambda j: block[j])
    if decoded != padded.agent_id:
        raise ValueError(f"decoded agent id {decoded} disagrees with recorded {padded.agent_id}")
    return values, decoded


def trim_action_vector(vec: Sequence[float], l: int) -> np.ndarray:
    """Keep the first ``l`` action weights and renormalize to a distribution.

    Renormalization preserves relative preferences among the retained actions;
    a zero-mass head falls back to uniform.
    """
    arr = np.asarray(vec, dtype=float)
    if arr.ndim != 1:
        raise ValueError("action vector must be one-dimensional")
    if not 1 <= l <= arr.shape[0]:
        raise ValueError(f"trim length {l} outside [1, {arr.shape[0]}]")
    if arr.min() < -PROB_TOL or arr.max() > 1.0 + PROB_TOL:
        raise ValueError("action vector entries must lie in [0, 1]")
    head = arr[:l]
    total = float(head.sum())
    if total > 0.0:
        return head / total
    return np.full(l, 1.0 / l)


# ---------------------------------------------------------------------------
# Serialization (structured text, used for test fixtures and replay)
# ---------------------------------------------------------------------------

def posg_to_text(game: Posg) -> str:
    """Serialize to JSON text; labels are stored as Python literals."""
    payload = {
        "states": [repr(s) for s in game.states],
        "actions": [[repr(a) for a in space] for space in game.actions],
        "observations": [[repr(o) for o in space] for space in game.observations],
        "transition": game.transition.tolist(),
        "rewards": [r.tolist() for r in game.rewards],
        "obs_fns": [o.tolist() for o in game.obs_fns],
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def posg_from_text(text: str) -> Posg:
    payload = json.loads(text)
    return Posg(
        states=tuple(ast.literal_eval(s) for s in payload["states"]),
        actions=tuple(tuple(ast.literal_eval(a) for a in space) for space in payload["actions"]),
        observations=tuple(
            tuple(ast.literal_eval(o) for o in space) for space in payload["observations"]
        ),
        transition=np.array(payload["transition"], dtype=float),
        rewards=tuple(np.array(r, dtype=float) for r in payload["rewards"]),
        obs_fns=tuple(np.array(o, dtype=float) for o in payload["obs_fns"]),
    )


# ---------------------------------------------------------------------------
# Randomized instances and the machine-checkable property suite
# ---------------------------------------------------------------------------

def random_posg(
    rng: random.Random,
    max_agents: int = 3,
    max_states: int = 3,
    max_actions: int = 3,
    max_obs: int = 3,
    disjoint_obs: bool = False,
) -> Posg:
    """Draw a small random game with overlapping label pools.

    Observation labels are drawn from a shared pool by default so agent
    indication has real work to do; ``disjoint_obs`` draws per-agent labels
    instead.
    """
    n_agents = rng.randint(1, max_agents)
    n_states = rng.randint(1, max_states)
    states = tuple(f"s{t}" for t in range(n_states))
    action_pool = [f"a{t}" for t in range(max_actions + 2)]
    obs_pool = [f"o{t}" for t in range(max_obs + 2)]

    actions = []
    observations = []
    for i in range(n_agents):
        n_act = rng.randint(1, max_actions)
        actions.append(tuple(sorted(rng.sample(action_pool, n_act))))
        n_ob = rng.randint(1, max_obs)
        if disjoint_obs:
            observations.append(tuple(f"g{i}o{t}" for t in range(n_ob)))
        else:
            observations.append(tuple(sorted(rng.sample(obs_pool, n_ob))))
    actions = tuple(actions)
    observations = tuple(observations)

    shape = (n_states,) + tuple(len(a) for a in actions) + (n_states,)
    transition = np.empty(shape)
    for idx in np.ndindex(shape[:-1]):
        row = [rng.uniform(0.1, 1.0) for _ in range(n_states)]
        total = sum(row)
        transition[idx] = [w / total for w in row]
    rewards = tuple(
        np.array([rng.uniform(-1.0, 1.0) for _ in range(int(np.prod(shape)))]).reshape(shape)
        for _ in range(n_agents)
    )
    obs_fns = []
    for i in range(n_agents):
        oshape = (len(actions[i]), n_states, len(observations[i]))
        table = np.empty(oshape)
        for idx in np.ndindex(oshape[:-1]):
            row = [rng.uniform(0.1, 1.0) for _ in range(oshape[-1])]
            total = sum(row)
            table[idx] = [w / total for w in row]
        obs_fns.append(table)
    return Posg(states, actions, observations, transition, rewards, tuple(obs_fns))


@dataclass
class PropertyResult:
    name: str
    trials: int
    failures: int
    detail: str = ""

    def record(self, ok: bool, detail: str) -> None:
        self.trials += 1
        if not ok:
            self.failures += 1
            if not self.detail:
                self.detail = detail


def run_property_suite(
    seed: int = 0,
    instances: int = 1000,
    max_agents: int = 3,
    max_states: int = 3,
    max_actions: int = 3,
    max_obs: int = 3,
) -> list[PropertyResult]:
    """Check the shared-policy transforms on randomized games.

    Per instance: agent indication must produce disjoint spaces and preserve
    every observation-kernel entry; merged policies must restrict back to the
    per-agent ones exactly (zeros elsewhere, rows still normalized); padding
    must round-trip and stay injective; trimming must preserve the argmax.
    """
    rng = random.Random(seed)
    res = {
        name: PropertyResult(name, 0, 0)
        for name in (
            "indication_disjoint",
            "indication_preserves_obs_fn",
            "merge_restriction",
            "padding_roundtrip",
            "padding_injective",
            "trim_argmax",
        )
    }

    for trial in range(instances):
        game = random_posg(rng, max_agents, max_states, max_actions, max_obs)
        tag = f"trial {trial}"

        tagged = apply_agent_indication(game)
        res["indication_disjoint"].record(observation_spaces_disjoint(tagged), tag)

        ok = True
        for i in range(game.n_agents):
            base_space = game.observations[i]
            for a in range(len(game.actions[i])):
                for s in range(len(game.states)):
                    for w, label in enumerate(base_space):
                        tagged_idx = tagged.observations[i].index((label, i))
                        if tagged.obs_fns[i][a, s, tagged_idx] != game.obs_fns[i][a, s, w]:
                            ok = False
        res["indication_preserves_obs_fn"].record(ok, tag)

        policies = [
            random_policy(rng, tagged.observations[i], tagged.actions[i], owner=i)
            for i in range(tagged.n_agents)
        ]
        merged = merge_policies(tagged, policies)
        ok = True
        for i, pi in enumerate(policies):
            own = set(tagged.actions[i])
            for obs in tagged.observations[i]:
                for act in merged.actions:
                    got = merged.prob(obs, act)
                    want = pi.prob(obs, act) if act in own else 0.0
                    if got != want:
                        ok = False
        res["merge_restriction"].record(ok, tag)

        length = rng.randint(0, 5)
        vec = tuple(rng.randint(0, 1000) / 1000 for _ in range(length))
        agent_id = rng.choice([None, rng.randint(0, 9)])
        padded_len = length + (1 if agent_id is not None else 0) + rng.randint(0, 3)
        padded = pad_observation(vec, padded_len, agent_id)
        values, decoded = unpad_observation(padded)
        res["padding_roundtrip"].record(values == vec and decoded == agent_id, tag)

        other_vec = tuple(rng.randint(0, 1000) / 1000 for _ in range(rng.randint(0, 5)))
        other_id = rng.choice([None, rng.randint(0, 9)])
        width = max(
            len(vec) + (1 if agent_id is not None else 0),
            len(other_vec) + (1 if other_id is not None else 0),
            padded_len,
        )
        first = pad_observation(vec, width, agent_id)
        second = pad_observation(other_vec, width, other_id)
        distinct_inputs = (vec, agent_id) != (other_vec, other_id)
        res["padding_injective"].record((first != second) == distinct_inputs, tag)

        alpha = rng.randint(1, 6)
        action_vec = [rng.randint(0, 1000) / 1000 for _ in range(alpha)]
        l = rng.randint(1, alpha)
        trimmed = trim_action_vector(action_vec, l)
        head = action_vec[:l]
        if sum(head) > 0.0:
            ok = int(np.argmax(head)) == int(np.argmax(trimmed))
        else:
            ok = bool(np.all(trimmed == trimmed[0]))
        res["trim_argmax"].record(ok, tag)

    return list(res.values())
