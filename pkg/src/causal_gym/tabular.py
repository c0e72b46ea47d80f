"""Two-model binary causal environment with four information settings.

The environment state is three binary variables. Each trial one of two
dynamic structures is in force:

* chain:        s1 -> s2 -> s3, each edge with a one-step lag
* delayed fork: s1 -> s2 (lag 1) and s1 -> s3 (lag 2)

A node activates if its exogenous Bernoulli draw fires or if its parent
was active at the required lag (OR dynamics). The agent's job is to name
the structure at the end of the trial.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class ModelKind(enum.Enum):
    CHAIN = "chain"
    DELAYED_FORK = "delayed_fork"


class Setting(enum.Enum):
    CONFOUNDED = "confounded"
    OBSERVATIONAL = "observational"
    OFFPOLICY = "offpolicy"
    ONPOLICY = "onpolicy"


# Answer actions. In settings 1-3 the action space is just these two.
ANSWER_CHAIN = 0
ANSWER_FORK = 1

# On-policy action space: no-op, force z2, force z3, then the two answers.
OP_NOOP = 0
OP_SET_Z2 = 1
OP_SET_Z3 = 2
OP_ANSWER_CHAIN = 3
OP_ANSWER_FORK = 4


@dataclass(frozen=True)
class TabularParams:
    """Rates and trial length for the binary environment.

    The default trial length of 10 keeps the confounded setting close to
    chance (exact-Bayes accuracy ~0.54); at 20 steps the rare diagnostic
    events accumulate enough to push it near 0.58.
    """

    p1: float = 0.1
    p2: float = 0.01
    p3: float = 0.01
    p2_int: float = 0.1
    p3_int: float = 0.1
    n_steps: int = 10
    p_chain: float = 0.5

    def __post_init__(self) -> None:
        for name in ("p1", "p2", "p3", "p2_int", "p3_int", "p_chain"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.n_steps < 3:
            raise ValueError("n_steps must be >= 3 (the fork needs a 2-step lag)")


@dataclass
class TabularState:
    """Current node values plus the lagged history the dynamics need."""

    s: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.int64))
    s1_prev: int = 0
    s1_prev2: int = 0
    s2_prev: int = 0
    t: int = 0


@dataclass(frozen=True)
class ExogenousDraw:
    y: tuple[int, int, int]
    z: tuple[int, int]  # (z2, z3); node 1 is never perturbed


def n_actions_for(setting: Setting) -> int:
    return 5 if setting is Setting.ONPOLICY else 2


def obs_dim_for(setting: Setting) -> int:
    if setting is Setting.OFFPOLICY:
        return 5
    if setting is Setting.ONPOLICY:
        return 4
    return 3


def sample_model(rng: np.random.Generator, params: TabularParams) -> ModelKind:
    """Draw the trial's structure from the prior."""
    return ModelKind.CHAIN if rng.random() < params.p_chain else ModelKind.DELAYED_FORK


def draw_exogenous(
    rng: np.random.Generator,
    params: TabularParams,
    setting: Setting,
    agent_z: tuple[int, int] = (0, 0),
) -> ExogenousDraw:
    """Draw one step's exogenous variables.

    Perturbation indicators z force the matching y to 1. In the on-policy
    setting z is exactly the agent's choice; elsewhere agent_z must be zero.
    """
    if setting is not Setting.ONPOLICY and agent_z != (0, 0):
        raise ValueError("agent interventions are only legal in the on-policy setting")

    if setting is Setting.CONFOUNDED:
        z = (0, 0)
    elif setting is Setting.ONPOLICY:
        z = (int(agent_z[0]), int(agent_z[1]))
    else:
        z = (
            int(rng.random() < params.p2_int),
            int(rng.random() < params.p3_int),
        )

    y1 = int(rng.random() < params.p1)
    y2 = 1 if z[0] else int(rng.random() < params.p2)
    y3 = 1 if z[1] else int(rng.random() < params.p3)
    return ExogenousDraw(y=(y1, y2, y3), z=z)


def step_dynamics(state: TabularState, model: ModelKind, exo: ExogenousDraw) -> TabularState:
    """Advance one step. OR dynamics: y + (1-y)*parent on bits is y OR parent."""
    y1, y2, y3 = exo.y
    s1 = y1
    # Relative to the new step t: parent of s2 is s1 at t-1 (the incoming
    # state's current value); parent of s3 is s2 at t-1 (chain) or s1 at
    # t-2 (delayed fork).
    s2 = y2 | int(state.s[0])
    parent3 = int(state.s[1]) if model is ModelKind.CHAIN else state.s1_prev
    s3 = y3 | parent3
    return TabularState(
        s=np.array([s1, s2, s3], dtype=np.int64),
        s1_prev=int(state.s[0]),
        s1_prev2=state.s1_prev,
        s2_prev=int(state.s[1]),
        t=state.t + 1,
    )


def make_observation(
    state: TabularState,
    exo: ExogenousDraw,
    setting: Setting,
    t: int,
    n_steps: int,
) -> np.ndarray:
    """Build the agent-visible vector for the current step."""
    s = state.s.astype(np.float64)
    if setting is Setting.OFFPOLICY:
        return np.concatenate([s, np.asarray(exo.z, dtype=np.float64)])
    if setting is Setting.ONPOLICY:
        go = 1.0 if t == n_steps + 1 else 0.0
        return np.append(s, go)
    return s


def score_final(action: int, model: ModelKind, setting: Setting) -> float:
    """Terminal reward: 1 for naming the right structure, else 0."""
    if setting is Setting.ONPOLICY:
        answer_chain, answer_fork = OP_ANSWER_CHAIN, OP_ANSWER_FORK
    else:
        answer_chain, answer_fork = ANSWER_CHAIN, ANSWER_FORK
    if model is ModelKind.CHAIN:
        return 1.0 if action == answer_chain else 0.0
    return 1.0 if action == answer_fork else 0.0


class TabularEnv:
    """Episodic runner around the tabular dynamics.

    Settings 1-3: reset emits the first of n_steps observations; the action
    passed to the n_steps-th step call is read as the answer. On-policy:
    n_steps interaction steps whose actions choose the perturbation, then
    one extra go-cue step at which the answer is read.

    All randomness flows through the generator handed to reset.
    """

    def __init__(self, params: TabularParams, setting: Setting):
        self.params = params
        self.setting = setting
        self.n_actions = n_actions_for(setting)
        self.obs_dim = obs_dim_for(setting)
        self._rng: np.random.Generator | None = None
        self._done = True

    @property
    def episode_len(self) -> int:
        """Number of decision points per episode."""
        n = self.params.n_steps
        return n + 1 if self.setting is Setting.ONPOLICY else n

    @property
    def model(self) -> ModelKind:
        return self._model

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self._rng = rng
        self._model = sample_model(rng, self.params)
        self._state = TabularState()
        self._step_idx = 1  # index of the observation currently shown
        self._done = False
        exo = draw_exogenous(rng, self.params, self.setting)
        self._state = step_dynamics(self._state, self._model, exo)
        self._last_exo = exo
        return make_observation(
            self._state, exo, self.setting, self._step_idx, self.params.n_steps
        )

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self._done:
            raise RuntimeError("step() called on a finished episode")
        n = self.params.n_steps
        t = self._step_idx

        if self.setting is Setting.ONPOLICY:
            if t == n + 1:  # go-cue step: the action is the answer
                self._done = True
                reward = score_final(action, self._model, self.setting)
                obs = make_observation(self._state, self._last_exo, self.setting, t, n)
                return obs, reward, True
            agent_z = (
                (1, 0) if action == OP_SET_Z2 else (0, 1) if action == OP_SET_Z3 else (0, 0)
            )
            exo = draw_exogenous(self._rng, self.params, self.setting, agent_z)
        else:
            if t == n:  # final observation was shown; the action is the answer
                self._done = True
                reward = score_final(action, self._model, self.setting)
                obs = make_observation(self._state, self._last_exo, self.setting, t, n)
                return obs, reward, True
            exo = draw_exogenous(self._rng, self.params, self.setting)

        self._state = step_dynamics(self._state, self._model, exo)
        self._last_exo = exo
        self._step_idx = t + 1
        obs = make_observation(
            self._state, exo, self.setting, self._step_idx, n
        )
        return obs, 0.0, False
