"""Tabular multi-agent Q-learning in two centralization modes.

``shared`` trains a single action-value table that every agent reads and
writes (updates applied sequentially in agent-index order within a step);
``independent`` gives each agent its own table.  Observation keys in shared
mode carry an indication tag so the one table can condition on who is
observing.  For homogeneous agents the tag is the agent *type* (identical for
all of them, so experience pools across agents -- this is what makes sharing
the most centralized arrangement); ``indication="identity"`` tags each agent
separately instead.

Everything is seed-deterministic: exploration, episode placement and
evaluation all derive their streams from the run seed, and evaluation
episodes use seeds common to every run so modes are compared on the same
initial conditions.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field

import numpy as np

from . import pursuit
from .errors import TrainingError


def obs_key(observation, agent_id, mode: str):
    """Canonical hashable key for an observation.

    Shared mode appends ``agent_id`` (the indication tag) to the encoding;
    independent mode returns the encoding alone, since independent tables are
    already per-agent.
    """
    enc = _encode(observation)
    if mode == "independent":
        return enc
    if mode != "shared":
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(enc, bytes) and 0 <= agent_id < 256:
        return enc + bytes((agent_id,))
    return (enc, agent_id)


def _encode(observation):
    if isinstance(observation, bytes):
        return observation
    if isinstance(observation, np.ndarray):
        return (str(observation.dtype), observation.shape, observation.tobytes())
    return observation


def _argmax(row) -> int:
    best = 0
    best_value = row[0]
    for a in range(1, len(row)):
        if row[a] > best_value:
            best = a
            best_value = row[a]
    return best


@dataclass(frozen=True)
class TrainConfig:
    mode: str
    episodes: int
    learning_rate: float = 0.1
    discount: float = 0.99
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_episodes: int | None = None  # None: 80% of episodes
    eval_every: int = 1000
    eval_episodes: int = 30
    indication: str = "type"
    seed: int | str = 0

    def __post_init__(self) -> None:
        if self.mode not in ("shared", "independent"):
            raise ValueError(f"mode must be 'shared' or 'independent', got {self.mode!r}")
        if self.indication not in ("type", "identity"):
            raise ValueError(f"indication must be 'type' or 'identity', got {self.indication!r}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must be in [0, 1), got {self.discount}")
        for name, value in (("eps_start", self.eps_start), ("eps_end", self.eps_end)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.episodes < 0:
            raise ValueError(f"episodes must be >= 0, got {self.episodes}")
        if self.eval_every < 1 or self.eval_episodes < 1:
            raise ValueError("eval cadence values must be >= 1")


@dataclass
class TabularPolicy:
    """Greedy view over learned tables; unseen keys act as all-zero rows."""

    mode: str
    n_agents: int
    n_actions: int
    indication: str
    tables: tuple[dict, ...]

    def table_for(self, agent: int) -> dict:
        return self.tables[0] if self.mode == "shared" else self.tables[agent]

    def tag_for(self, agent: int) -> int:
        return 0 if self.indication == "type" else agent

    def select(self, observation, agent: int, rng: random.Random | None = None) -> int:
        key = obs_key(observation, self.tag_for(agent), self.mode)
        row = self.table_for(agent).get(key)
        if row is None:
            return 0
        return _argmax(row)


@dataclass
class UniformRandomPolicy:
    """Stateless uniform policy; draws from the rng handed in per call."""

    n_actions: int

    def select(self, observation, agent: int, rng: random.Random) -> int:
        return rng.randrange(self.n_actions)


@dataclass(frozen=True)
class CurvePoint:
    episode: int
    mean_reward: float
    stderr: float


@dataclass
class TrainResult:
    policy: TabularPolicy
    curve: list[CurvePoint] = field(default_factory=list)


class PursuitTask:
    """Adapter giving the gridworld the small protocol the trainer consumes:
    reset/step over per-agent compact observations."""

    def __init__(self, config: pursuit.PursuitConfig):
        self.config = config
        self.n_agents = config.n_pursuers
        self.n_actions = pursuit.N_ACTIONS
        self._state: pursuit.PursuitState | None = None

    def reset(self, seed) -> list[bytes]:
        self._state = pursuit.reset(self.config, seed)
        return self._observations()

    def step(self, actions) -> tuple[list[bytes], list[float], bool, bool]:
        self._state, rewards, done, _events = pursuit.step(self._state, self.config, actions)
        terminal = not self._state.evaders
        return self._observations(), rewards, done, terminal

    def _observations(self) -> list[bytes]:
        state, config = self._state, self.config
        return [
            pursuit.compact_observation(state, config, i) for i in range(self.n_agents)
        ]


def make_task(env_config):
    if isinstance(env_config, pursuit.PursuitConfig):
        return PursuitTask(env_config)
    if all(hasattr(env_config, name) for name in ("reset", "step", "n_agents", "n_actions")):
        return env_config
    raise TypeError(f"cannot build a task from {type(env_config).__name__}")


def train(env_config, cfg: TrainConfig) -> TrainResult:
    """Q-learning over episodes; returns the learned policy and its curve.

    The curve holds a greedy evaluation every ``eval_every`` episodes plus one
    at the very end.  Truncation at the step limit bootstraps from the next
    observation; genuine termination (no evaders left) does not.
    """
    task = make_task(env_config)
    n_agents = task.n_agents
    n_actions = task.n_actions
    if cfg.mode == "shared":
        tables: tuple[dict, ...] = ({},)
    else:
        tables = tuple({} for _ in range(n_agents))
    policy = TabularPolicy(cfg.mode, n_agents, n_actions, cfg.indication, tables)
    tags = [policy.tag_for(i) for i in range(n_agents)]

    explore = random.Random(f"{cfg.seed}:explore")
    decay = cfg.eps_decay_episodes
    if decay is None:
        decay = max(1, int(cfg.episodes * 0.8))
    lr = cfg.learning_rate
    gamma = cfg.discount
    mode = cfg.mode
    curve: list[CurvePoint] = []

    for episode in range(cfg.episodes):
        frac = min(1.0, episode / decay) if decay > 0 else 1.0
        epsilon = cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac
        observations = task.reset(f"{cfg.seed}:ep:{episode}")
        keys = [obs_key(observations[i], tags[i], mode) for i in range(n_agents)]
        done = False
        while not done:
            actions = []
            for i in range(n_agents):
                if explore.random() < epsilon:
                    actions.append(explore.randrange(n_actions))
                else:
                    row = policy.table_for(i).get(keys[i])
                    actions.append(0 if row is None else _argmax(row))
            observations, rewards, done, terminal = task.step(actions)
            next_keys = [obs_key(observations[i], tags[i], mode) for i in range(n_agents)]
            for i in range(n_agents):
                table = policy.table_for(i)
                row = table.get(keys[i])
                if row is None:
                    row = table[keys[i]] = [0.0] * n_actions
                if terminal:
                    target = rewards[i]
                else:
                    next_row = table.get(next_keys[i])
                    target = rewards[i] + (gamma * max(next_row) if next_row else 0.0)
                updated = row[actions[i]] + lr * (target - row[actions[i]])
                if not math.isfinite(updated):
                    raise TrainingError(
                        f"non-finite value for agent {i} at episode {episode}"
                    )
                row[actions[i]] = updated
            keys = next_keys
        if (episode + 1) % cfg.eval_every == 0:
            index = (episode + 1) // cfg.eval_every
            mean, stderr = evaluate(policy, env_config, cfg.eval_episodes, f"eval:{index}")
            curve.append(CurvePoint(episode + 1, mean, stderr))
    if cfg.episodes > 0 and cfg.episodes % cfg.eval_every != 0:
        mean, stderr = evaluate(policy, env_config, cfg.eval_episodes, "eval:final")
        curve.append(CurvePoint(cfg.episodes, mean, stderr))
    return TrainResult(policy, curve)


def evaluate_episodes(policy, env_config, episodes: int, seed) -> list[float]:
    """Per-episode total rewards (summed over agents and steps) under ``policy``.

    Greedy policies break ties toward the lowest action index; evaluation
    never mutates the policy, so repeated calls are identical.
    """
    if episodes < 1:
        raise ValueError("need at least one evaluation episode")
    task = make_task(env_config)
    totals = []
    for e in range(episodes):
        rng = random.Random(f"{seed}:act:{e}")
        observations = task.reset(f"{seed}:{e}")
        total = 0.0
        done = False
        while not done:
            actions = [
                policy.select(observations[i], i, rng) for i in range(task.n_agents)
            ]
            observations, rewards, done, _terminal = task.step(actions)
            total += sum(rewards)
        totals.append(total)
    return totals


def evaluate(policy, env_config, episodes: int, seed) -> tuple[float, float]:
    """Mean and standard error of per-episode total reward under ``policy``."""
    totals = evaluate_episodes(policy, env_config, episodes, seed)
    mean = statistics.fmean(totals)
    stderr = statistics.stdev(totals) / math.sqrt(len(totals)) if len(totals) > 1 else 0.0
    return mean, stderr


# ---------------------------------------------------------------------------
# Structured-text serialization of learned tables
# ---------------------------------------------------------------------------

def _key_to_text(key) -> str:
    if isinstance(key, bytes):
        return "h:" + key.hex()
    return "r:" + repr(key)


def _key_from_text(text: str):
    prefix, _, body = text.partition(":")
    if prefix == "h":
        return bytes.fromhex(body)
    if prefix == "r":
        import ast

        return ast.literal_eval(body)
    raise ValueError(f"unknown key encoding {text!r}")


def save_policy_text(policy: TabularPolicy) -> str:
    import json

    payload = {
        "mode": policy.mode,
        "n_agents": policy.n_agents,
        "n_actions": policy.n_actions,
        "indication": policy.indication,
        "tables": [
            {_key_to_text(k): v for k, v in sorted(table.items(), key=lambda kv: _key_to_text(kv[0]))}
            for table in policy.tables
        ],
    }
    return json.dumps(payload, indent=1, sort_keys=True)


def load_policy_text(text: str) -> TabularPolicy:
    import json

    payload = json.loads(text)
    tables = tuple(
        {_key_from_text(k): list(v) for k, v in table.items()} for table in payload["tables"]
    )
    return TabularPolicy(
        payload["mode"],
        payload["n_agents"],
        payload["n_actions"],
        payload["indication"],
        tables,
    )
