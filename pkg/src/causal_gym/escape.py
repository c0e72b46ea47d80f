"""Two-phase escape-room grid-world.

A 5x5 grid has buttons on three edges and a door on the fourth; exactly
one button (random per trial) opens the door for a few steps. First a
white box bounces between the buttons while the agent watches; then the
agent gets control of a gray object and must go press the right button
and reach the door cell in time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

GRID = 5

# Feature cells (impassable).
BUTTON_LEFT = (2, 0)
BUTTON_TOP = (0, 2)
BUTTON_BOTTOM = (4, 2)
DOOR = (2, 4)
BUTTONS = (BUTTON_LEFT, BUTTON_TOP, BUTTON_BOTTOM)
FEATURE_CELLS = frozenset(BUTTONS) | {DOOR}

# Pressing happens by standing on the unique interior neighbor of a button.
PRESS_CELLS = {BUTTON_LEFT: (2, 1), BUTTON_TOP: (1, 2), BUTTON_BOTTOM: (3, 2)}
DOOR_REWARD_CELL = (2, 3)

TRAVERSABLE = tuple(
    (r, c) for r in range(GRID) for c in range(GRID) if (r, c) not in FEATURE_CELLS
)

MOVES_8 = tuple(
    (dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)
)
CARDINAL = {0: (-1, 0), 1: (1, 0), 2: (0, -1), 3: (0, 1)}  # up, down, left, right

# Render palette; only white box, gray agent, green cue and the red press
# flash are externally fixed.
COLOR_BOX = (1.0, 1.0, 1.0)
COLOR_AGENT = (0.5, 0.5, 0.5)
COLOR_BUTTON = (0.0, 0.0, 1.0)
COLOR_BUTTON_PRESSED = (1.0, 0.0, 0.0)
COLOR_DOOR_CLOSED = (0.3, 0.3, 0.3)
COLOR_DOOR_OPEN = (1.0, 1.0, 1.0)
COLOR_CUE = (0.0, 1.0, 0.0)
CUE_PIXEL = (0, 0)


class Phase(enum.Enum):
    OBSERVE = "observe"
    ACT = "act"


@dataclass(frozen=True)
class EscapeParams:
    n_obs: int = 20
    n_act: int = 10
    door_open_steps: int = 5
    reward_door: float = 10.0

    def __post_init__(self) -> None:
        if min(self.n_obs, self.n_act, self.door_open_steps) < 1:
            raise ValueError("all phase lengths must be positive")


@dataclass
class EscapeState:
    phase: Phase
    t: int
    effective_button: tuple[int, int]
    bouncer_target: tuple[int, int]
    box_pos: tuple[int, int] | None
    agent_pos: tuple[int, int] | None
    door_timer: int = 0
    pressed_effective: bool = False  # effective button pressed this step


def in_bounds(cell: tuple[int, int]) -> bool:
    return 0 <= cell[0] < GRID and 0 <= cell[1] < GRID


def chebyshev(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def reset(rng: np.random.Generator, params: EscapeParams) -> EscapeState:
    return EscapeState(
        phase=Phase.OBSERVE,
        t=0,
        effective_button=BUTTONS[rng.integers(3)],
        bouncer_target=BUTTONS[rng.integers(3)],
        box_pos=TRAVERSABLE[rng.integers(len(TRAVERSABLE))],
        agent_pos=None,
    )


def bouncer_step(rng: np.random.Generator, state: EscapeState) -> EscapeState:
    """Move the box one step toward its target's press cell.

    Uniform choice among the 8-neighborhood moves that strictly shrink
    the Chebyshev distance and land on a traversable cell; on arrival the
    box picks a new target among the other two buttons.
    """
    if state.phase is not Phase.OBSERVE:
        raise RuntimeError("bouncer only moves during the observation phase")
    goal = PRESS_CELLS[state.bouncer_target]
    pos = state.box_pos
    dist = chebyshev(pos, goal)
    candidates = [
        (pos[0] + dr, pos[1] + dc)
        for dr, dc in MOVES_8
        if in_bounds((pos[0] + dr, pos[1] + dc))
        and (pos[0] + dr, pos[1] + dc) not in FEATURE_CELLS
        and chebyshev((pos[0] + dr, pos[1] + dc), goal) < dist
    ]
    new_pos = candidates[rng.integers(len(candidates))] if candidates else pos
    state.box_pos = new_pos
    if new_pos == goal:
        others = [b for b in BUTTONS if b != state.bouncer_target]
        state.bouncer_target = others[rng.integers(2)]
    return state


def press_and_door_update(
    state: EscapeState, occupant_pos: tuple[int, int] | None, door_open_steps: int
) -> EscapeState:
    """Evaluate a press at the occupant's cell, then tick the door timer.

    A press of the effective button refreshes the timer to its maximum
    (refresh wins over the per-step decrement); otherwise the timer loses
    one step.
    """
    state.pressed_effective = (
        occupant_pos is not None
        and occupant_pos == PRESS_CELLS[state.effective_button]
    )
    if state.pressed_effective:
        state.door_timer = door_open_steps
    else:
        state.door_timer = max(state.door_timer - 1, 0)
    return state


def agent_move(state: EscapeState, action: int) -> EscapeState:
    """Apply a cardinal move; ineffective in the observation phase.

    Blocked destinations (walls, buttons, door) leave the agent in place.
    """
    if state.phase is Phase.OBSERVE:
        return state
    dr, dc = CARDINAL[action]
    dest = (state.agent_pos[0] + dr, state.agent_pos[1] + dc)
    if in_bounds(dest) and dest not in FEATURE_CELLS:
        state.agent_pos = dest
    return state


def compute_reward(state: EscapeState, params: EscapeParams) -> float:
    if state.phase is not Phase.ACT:
        raise RuntimeError("reward only exists in the action phase")
    if state.agent_pos == DOOR_REWARD_CELL and state.door_timer > 0:
        return params.reward_door
    return 0.0


def render(state: EscapeState, params: EscapeParams) -> np.ndarray:
    frame = np.zeros((GRID, GRID, 3))
    for b in BUTTONS:
        frame[b] = COLOR_BUTTON
    if state.pressed_effective:
        frame[state.effective_button] = COLOR_BUTTON_PRESSED
    frame[DOOR] = COLOR_DOOR_OPEN if state.door_timer > 0 else COLOR_DOOR_CLOSED
    if state.phase is Phase.ACT:
        frame[CUE_PIXEL] = COLOR_CUE
    if state.box_pos is not None:
        frame[state.box_pos] = COLOR_BOX
    if state.agent_pos is not None:
        frame[state.agent_pos] = COLOR_AGENT
    return frame


def shortest_path_next(start: tuple[int, int], goal: tuple[int, int]) -> int | None:
    """First cardinal action of a shortest path over traversable cells.

    Returns None when already at the goal. BFS, deterministic tie-break
    by action index.
    """
    if start == goal:
        return None
    from collections import deque

    prev: dict = {start: None}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        if cell == goal:
            break
        for action in range(4):
            dr, dc = CARDINAL[action]
            nxt = (cell[0] + dr, cell[1] + dc)
            if in_bounds(nxt) and nxt not in FEATURE_CELLS and nxt not in prev:
                prev[nxt] = (cell, action)
                queue.append(nxt)
    if goal not in prev:
        return None
    cell = goal
    while prev[cell][0] != start:
        cell = prev[cell][0]
    return prev[cell][1]


class ScriptedEscapePolicy:
    """Cheating reference policy: knows the effective button.

    Walks the shortest path to the effective button's press cell, then to
    the door-adjacent cell. Used as the solvability ceiling.
    """

    def __init__(self) -> None:
        self._pressed = False

    def reset(self) -> None:
        self._pressed = False

    def act(self, state: EscapeState) -> int:
        if state.phase is Phase.OBSERVE or state.agent_pos is None:
            return 0
        press = PRESS_CELLS[state.effective_button]
        if self._pressed:
            action = shortest_path_next(state.agent_pos, DOOR_REWARD_CELL)
            return 0 if action is None else action
        if state.agent_pos == press:
            # Push into the button: the move is blocked, the agent stays put,
            # and the press is evaluated at this cell.
            self._pressed = True
            dr = state.effective_button[0] - press[0]
            dc = state.effective_button[1] - press[1]
            for action, delta in CARDINAL.items():
                if delta == (dr, dc):
                    return action
        action = shortest_path_next(state.agent_pos, press)
        return 0 if action is None else action


class EscapeEnv:
    """Episodic runner: n_obs bouncer steps, then up to n_act agent steps."""

    n_actions = 4

    def __init__(self, params: EscapeParams | None = None):
        self.params = params if params is not None else EscapeParams()
        self.obs_dim = GRID * GRID * 3
        self._done = True

    @property
    def episode_len(self) -> int:
        """Maximum number of decision points (reaching the door ends early)."""
        return self.params.n_obs + self.params.n_act

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self._rng = rng
        self.state = reset(rng, self.params)
        self._done = False
        return render(self.state, self.params)

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self._done:
            raise RuntimeError("step() called on a finished episode")
        st = self.state
        p = self.params
        reward = 0.0

        if st.phase is Phase.OBSERVE:
            bouncer_step(self._rng, st)
            press_and_door_update(st, st.box_pos, p.door_open_steps)
            st.t += 1
            if st.t >= p.n_obs:
                st.phase = Phase.ACT
                st.t = 0
                st.box_pos = None
                st.agent_pos = TRAVERSABLE[self._rng.integers(len(TRAVERSABLE))]
        else:
            agent_move(st, action)
            press_and_door_update(st, st.agent_pos, p.door_open_steps)
            reward = compute_reward(st, p)
            st.t += 1
            if reward > 0 or st.t >= p.n_act:
                self._done = True

        return render(st, p), reward, self._done
