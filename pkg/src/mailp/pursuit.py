"""Seed-deterministic pursuit gridworld.

Pursuers (controlled) and evaders (uniformly random) move on a rectangular
grid with a centered rectangular obstacle.  Pursuers earn a small reward for
touching an evader (cardinal adjacency) and a large one for taking part in a
capture: an evader whose four cardinal neighbors are all pursuer, obstacle or
off-grid, with at least one pursuer among them, is removed.

Step order, applied synchronously per tick: pursuers move (blocked moves
resolve to stay, contested cells go to the lowest agent index), evaders move
one at a time in index order, touch rewards, capture check, horizon check.
All randomness flows through the RNG state carried inside PursuitState, so a
(config, seed, action sequence) triple fully determines a trajectory.

Grid coordinates are (x, y) with the origin in the top-left corner; "up"
decreases y.  Actions: 0=up, 1=down, 2=left, 3=right, 4=stay.
"""

from __future__ import annotations

import json
import math
import random
import statistics
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError

ACTION_DELTAS = ((0, -1), (0, 1), (-1, 0), (1, 0), (0, 0))
N_ACTIONS = len(ACTION_DELTAS)
STAY = 4

# In-episode randomness runs on a splitmix64 stream: its state is a single
# integer, so carrying it inside the (immutable) state costs nothing, unlike
# snapshotting the stdlib Mersenne state every step.
_GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _seed_state(seed) -> int:
    import hashlib

    return int.from_bytes(hashlib.sha256(repr(seed).encode()).digest()[:8], "big")


@dataclass(frozen=True)
class PursuitConfig:
    grid_w: int = 16
    grid_h: int = 16
    n_pursuers: int = 8
    n_evaders: int = 30
    obs_range: int = 7
    max_steps: int = 500
    capture_reward: float = 5.0
    touch_reward: float = 0.01
    surround_rule: str = "all_open_cardinals"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.obs_range < 3 or self.obs_range % 2 == 0:
            raise ConfigError(f"obs_range must be odd and >= 3, got {self.obs_range}")
        if self.obs_range > 15:
            raise ConfigError("obs_range above 15 is not supported (window offsets are byte-coded)")
        if self.surround_rule != "all_open_cardinals":
            raise ConfigError(f"unknown surround rule {self.surround_rule!r}")
        if self.n_pursuers < 1:
            raise ConfigError("need at least one pursuer")
        if self.n_evaders < 0:
            raise ConfigError("evader count must be >= 0")
        if self.n_pursuers > 255 or self.n_evaders > 255:
            raise ConfigError("entity counts above 255 are not supported")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        layout = _layout(self)
        if self.n_pursuers + self.n_evaders > len(layout.free_cells):
            raise ConfigError(
                f"{self.n_pursuers + self.n_evaders} entities do not fit on "
                f"{len(layout.free_cells)} free cells"
            )


@dataclass(frozen=True)
class PursuitState:
    """Positions plus the carried RNG state; evaders shrink on capture."""

    pursuers: tuple[tuple[int, int], ...]
    evaders: tuple[tuple[int, int], ...]
    obstacles: tuple[tuple[int, int], ...]
    t: int
    rng_state: int


@dataclass(frozen=True)
class _Layout:
    """Static grid tables; cells are flattened as x + grid_w * y internally."""

    obstacles: frozenset[tuple[int, int]]
    obstacle_tuple: tuple[tuple[int, int], ...]
    free_cells: tuple[tuple[int, int], ...]
    patterns: dict[tuple[int, int], bytes]
    neighbors: dict[int, tuple[int, ...]]       # free cardinal neighbors per free cell
    move_target: dict[int, tuple[int, ...]]     # per action; obstacle/boundary moves stay


@lru_cache(maxsize=None)
def _layout(config: PursuitConfig) -> _Layout:
    w, h = config.grid_w, config.grid_h
    ow = math.ceil(w / 4)
    oh = math.ceil(h / 4)
    x0 = (w - ow) // 2
    y0 = (h - oh) // 2
    obstacles = frozenset(
        (x, y) for x in range(x0, x0 + ow) for y in range(y0, y0 + oh)
    )
    free = tuple(
        (x, y) for y in range(h) for x in range(w) if (x, y) not in obstacles
    )
    r = config.obs_range // 2
    size = config.obs_range
    patterns: dict[tuple[int, int], bytes] = {}
    for cx, cy in free:
        mask = np.zeros((size, size), dtype=np.uint8)
        for wy in range(size):
            gy = cy + wy - r
            for wx in range(size):
                gx = cx + wx - r
                if not (0 <= gx < w and 0 <= gy < h) or (gx, gy) in obstacles:
                    mask[wy, wx] = 1
        patterns[(cx, cy)] = np.packbits(mask.ravel()).tobytes()
    neighbors: dict[int, tuple[int, ...]] = {}
    move_target: dict[int, tuple[int, ...]] = {}
    for cx, cy in free:
        cell = cx + w * cy
        free_nb = []
        targets = []
        for dx, dy in ACTION_DELTAS:
            nx, ny = cx + dx, cy + dy
            open_cell = 0 <= nx < w and 0 <= ny < h and (nx, ny) not in obstacles
            if open_cell and (dx, dy) != (0, 0):
                free_nb.append(nx + w * ny)
            targets.append(nx + w * ny if open_cell else cell)
        neighbors[cell] = tuple(free_nb)
        move_target[cell] = tuple(targets)
    return _Layout(obstacles, tuple(sorted(obstacles)), free, patterns, neighbors, move_target)


# Identity-keyed front cache: hashing the whole config on every step is
# measurably slower than one dict probe.  Entries pin their config object, so
# a stored id can never be reused by a different live config.
_layout_by_id: dict[int, tuple[PursuitConfig, _Layout]] = {}


def _layout_fast(config: PursuitConfig) -> _Layout:
    entry = _layout_by_id.get(id(config))
    if entry is not None and entry[0] is config:
        return entry[1]
    lay = _layout(config)
    _layout_by_id[id(config)] = (config, lay)
    return lay


def reset(config: PursuitConfig, seed: int | str | None = None) -> PursuitState:
    """Place all entities uniformly at random on distinct free cells."""
    layout = _layout_fast(config)
    effective = config.seed if seed is None else seed
    rng = random.Random(effective)
    cells = rng.sample(layout.free_cells, config.n_pursuers + config.n_evaders)
    return PursuitState(
        pursuers=tuple(cells[: config.n_pursuers]),
        evaders=tuple(cells[config.n_pursuers :]),
        obstacles=layout.obstacle_tuple,
        t=0,
        rng_state=_seed_state(effective),
    )


def step(
    state: PursuitState,
    config: PursuitConfig,
    actions: Sequence[int],
) -> tuple[PursuitState, list[float], bool, tuple[tuple, ...]]:
    """Advance one tick; returns (state, per-pursuer rewards, done, events).

    Events are ("touch", pursuer_index, evader_cell) and
    ("capture", evader_cell, pursuer_indices); every nonzero reward traces
    back to exactly these.
    """
    n_p = config.n_pursuers
    if len(actions) != n_p:
        raise ValueError(f"need {n_p} actions, got {len(actions)}")
    layout = _layout_fast(config)
    move = layout.move_target
    nbrs = layout.neighbors
    w = config.grid_w
    rstate = state.rng_state

    # Pursuer moves: a target occupied before the move (by anyone), an
    # obstacle, or the boundary blocks; first claimant by index wins a cell.
    current = [x + w * y for x, y in state.pursuers]
    occupied = set(current)
    evader_cells = [x + w * y for x, y in state.evaders]
    evader_set = set(evader_cells)
    new_pursuers: list[int] = []
    claimed: set[int] = set()
    for idx, action in enumerate(actions):
        cell = current[idx]
        if not (isinstance(action, int) and 0 <= action < N_ACTIONS):
            raise ValueError(
                f"action {action!r} of pursuer {idx} outside [0, {N_ACTIONS})"
            )
        target = move[cell][action]
        if target != cell and (
            target in evader_set or target in occupied or target in claimed
        ):
            target = cell
        claimed.add(target)
        new_pursuers.append(target)
    pursuer_set = set(new_pursuers)

    # Evaders move sequentially, uniformly over stay plus free cardinal cells.
    for k in range(len(evader_cells)):
        cell = evader_cells[k]
        evader_set.discard(cell)
        options = [cell]
        for nb in nbrs[cell]:
            if nb not in pursuer_set and nb not in evader_set:
                options.append(nb)
        count = len(options)
        if count > 1:
            rstate = (rstate + _GAMMA) & _MASK
            cell = options[(_mix64(rstate) * count) >> 64]
            evader_cells[k] = cell
        evader_set.add(cell)

    rewards = [0.0] * n_p
    events: list[tuple] = []
    touch = config.touch_reward
    for idx, cell in enumerate(new_pursuers):
        for nb in nbrs[cell]:
            if nb in evader_set:
                rewards[idx] += touch
                events.append(("touch", idx, (nb % w, nb // w)))

    # Capture: all free cardinal neighbors are pursuers and there is at least
    # one of them (obstacle/boundary sides are pre-excluded from the table).
    pursuer_index = {cell: idx for idx, cell in enumerate(new_pursuers)}
    survivors: list[int] = []
    capture = config.capture_reward
    for cell in evader_cells:
        sides = nbrs[cell]
        if sides:
            adjacent: list[int] = []
            for nb in sides:
                p = pursuer_index.get(nb)
                if p is None:
                    break
                adjacent.append(p)
            else:
                for p in adjacent:
                    rewards[p] += capture
                events.append(("capture", (cell % w, cell // w), tuple(adjacent)))
                continue
        survivors.append(cell)

    t = state.t + 1
    done = t >= config.max_steps or not survivors
    new_state = PursuitState(
        tuple((c % w, c // w) for c in new_pursuers),
        tuple((c % w, c // w) for c in survivors),
        state.obstacles,
        t,
        rstate,
    )
    return new_state, rewards, done, tuple(events)


def observe(state: PursuitState, config: PursuitConfig, i: int) -> np.ndarray:
    """Binary window planes (pursuers, evaders, obstacles), centered on
    pursuer ``i``; off-grid cells are marked in the obstacle plane and the
    center of the pursuer plane marks the observer itself."""
    size = config.obs_range
    r = size // 2
    x0, y0 = state.pursuers[i]
    planes = np.zeros((3, size, size), dtype=np.uint8)
    for x, y in state.pursuers:
        dx, dy = x - x0, y - y0
        if -r <= dx <= r and -r <= dy <= r:
            planes[0, dy + r, dx + r] = 1
    for x, y in state.evaders:
        dx, dy = x - x0, y - y0
        if -r <= dx <= r and -r <= dy <= r:
            planes[1, dy + r, dx + r] = 1
    obstacles = _layout_fast(config).obstacles
    for wy in range(size):
        gy = y0 + wy - r
        for wx in range(size):
            gx = x0 + wx - r
            if not (0 <= gx < config.grid_w and 0 <= gy < config.grid_h) or (gx, gy) in obstacles:
                planes[2, wy, wx] = 1
    return planes


def compact_observation(state: PursuitState, config: PursuitConfig, i: int) -> bytes:
    """Injective byte encoding of exactly the window content of :func:`observe`.

    Layout: obstacle pattern of the observer's cell, then a count-prefixed
    sorted list of in-window pursuer offset codes (observer included), then
    the same for evaders; an offset (dx, dy) is coded as the single byte
    (dx + r) * obs_range + (dy + r).
    """
    size = config.obs_range
    r = size // 2
    x0, y0 = state.pursuers[i]
    base = (r * size + r) - (x0 * size + y0)

    codes = [0]
    for x, y in state.pursuers:
        if -r <= x - x0 <= r and -r <= y - y0 <= r:
            codes.append(x * size + y + base)
    codes[0] = len(codes) - 1
    codes[1:] = sorted(codes[1:])

    tail = []
    for x, y in state.evaders:
        if -r <= x - x0 <= r and -r <= y - y0 <= r:
            tail.append(x * size + y + base)
    tail.sort()
    codes.append(len(tail))
    codes.extend(tail)
    return _layout_fast(config).patterns[(x0, y0)] + bytes(codes)


def compact_observations(state: PursuitState, config: PursuitConfig) -> list[bytes]:
    """Compact observations of all pursuers, in agent order."""
    return [compact_observation(state, config, i) for i in range(config.n_pursuers)]


def decode_compact(obs: bytes, config: PursuitConfig) -> tuple[bytes, tuple, tuple]:
    """Split a compact observation back into (pattern, pursuer offsets, evader offsets)."""
    size = config.obs_range
    r = size // 2
    pattern_len = (size * size + 7) // 8
    pattern = obs[:pattern_len]
    pos = pattern_len
    groups = []
    for _ in range(2):
        count = obs[pos]
        pos += 1
        offsets = []
        for _ in range(count):
            code = obs[pos]
            offsets.append((code // size - r, code % size - r))
            pos += 1
        groups.append(tuple(offsets))
    return pattern, groups[0], groups[1]


# ---------------------------------------------------------------------------
# Episode rollouts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpisodeResult:
    episode: int
    total_reward: float
    steps: int
    captures: int


def run_episode(
    config: PursuitConfig,
    seed: int | str,
    action_fn: Callable[[PursuitState], Sequence[int]],
) -> tuple[EpisodeResult, PursuitState]:
    state = reset(config, seed)
    total = 0.0
    captures = 0
    while True:
        state, rewards, done, events = step(state, config, action_fn(state))
        total += sum(rewards)
        for event in events:
            if event[0] == "capture":
                captures += 1
        if done:
            break
    return EpisodeResult(0, total, state.t, captures), state


def random_episodes(
    config: PursuitConfig,
    episodes: int,
    base_seed: int | str | None = None,
) -> list[EpisodeResult]:
    """Roll out uniform-random joint actions; one result per episode."""
    if episodes < 1:
        raise ValueError("need at least one episode")
    base = config.seed if base_seed is None else base_seed
    results = []
    n_p = config.n_pursuers
    for e in range(episodes):
        uniform = random.Random(f"{base}:act:{e}").random

        def pick(_state: PursuitState) -> list[int]:
            return [int(uniform() * N_ACTIONS) for _ in range(n_p)]

        result, _ = run_episode(config, f"{base}:ep:{e}", pick)
        results.append(EpisodeResult(e, result.total_reward, result.steps, result.captures))
    return results


def random_baseline(
    config: PursuitConfig,
    episodes: int,
    base_seed: int | str | None = None,
) -> tuple[float, float]:
    """Mean and standard error of per-episode total reward under random play.

    Totals are summed over all pursuers and all steps within an episode.
    """
    totals = [r.total_reward for r in random_episodes(config, episodes, base_seed)]
    mean = statistics.fmean(totals)
    stderr = statistics.stdev(totals) / math.sqrt(len(totals)) if len(totals) > 1 else 0.0
    return mean, stderr


# ---------------------------------------------------------------------------
# Trajectory dumps (line-delimited JSON records for replay and debugging)
# ---------------------------------------------------------------------------

def trajectory_records(
    config: PursuitConfig,
    seed: int | str,
    action_fn: Callable[[PursuitState], Sequence[int]],
) -> list[dict]:
    state = reset(config, seed)
    records: list[dict] = []
    while True:
        actions = list(action_fn(state))
        new_state, rewards, done, events = step(state, config, actions)
        records.append(
            {
                "t": state.t,
                "pursuers": list(state.pursuers),
                "evaders": list(state.evaders),
                "actions": actions,
                "rewards": rewards,
                "events": [list(e) for e in events],
            }
        )
        state = new_state
        if done:
            break
    return records


def write_trajectory(path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")
