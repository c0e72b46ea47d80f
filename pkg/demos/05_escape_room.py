"""Play the two-phase escape room with the scripted reference policy.

Observation phase: a white box bounces between three wall buttons; one
(random per trial) opens the door for a few steps. Action phase: the agent
is dropped in and must go press the right button, then reach the doorway.

Run: python demos/05_escape_room.py
"""
import numpy as np

from causal_gym.escape import (
    COLOR_AGENT,
    COLOR_BOX,
    COLOR_BUTTON,
    COLOR_BUTTON_PRESSED,
    COLOR_CUE,
    EscapeEnv,
    EscapeParams,
    Phase,
    ScriptedEscapePolicy,
)


def ascii_grid(frame: np.ndarray) -> str:
    legend = {
        COLOR_BOX: "W",             # white bouncer (or open door)
        COLOR_AGENT: "A",           # gray agent
        COLOR_BUTTON: "b",          # blue buttons
        COLOR_BUTTON_PRESSED: "R",  # effective button lit red
        COLOR_CUE: "G",             # green action-phase cue
        (0.3, 0.3, 0.3): "d",       # closed door
    }
    rows = []
    for r in range(frame.shape[0]):
        row = []
        for c in range(frame.shape[1]):
            px = tuple(frame[r, c])
            row.append(legend.get(px, "." if px == (0.0, 0.0, 0.0) else "?"))
        rows.append("".join(row))
    return "\n".join(rows)


def run_trial(env, policy, rng, show=()):
    obs = env.reset(rng)
    policy.reset()
    done = False
    total = 0.0
    t = 0
    while not done:
        action = policy.act(env.state)
        obs, reward, done = env.step(action)
        total += reward
        t += 1
        if t in show:
            phase = "action" if env.state.phase is Phase.ACT else "observe"
            print(f"\nt={t} ({phase})  reward so far {total:g}")
            print(ascii_grid(obs))
    return total


def main() -> None:
    env = EscapeEnv(EscapeParams())
    policy = ScriptedEscapePolicy()
    rng = np.random.default_rng(11)

    env.reset(rng)
    print(f"active button this trial: {env.state.effective_button}")
    env_total = run_trial(env, policy, np.random.default_rng(11),
                          show={1, 5, 21, 23, 25, 27})
    print(f"\nepisode reward: {env_total:g} (door reward is 10)")

    n = 500
    wins = sum(run_trial(env, policy, rng) > 0 for _ in range(n))
    print(f"scripted policy success over {n} random trials: {wins / n:.1%}")


if __name__ == "__main__":
    main()
