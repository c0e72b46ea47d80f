"""Walk through the two causal models and the four information settings.

Run: python demos/01_dynamics_and_settings.py
"""
import numpy as np

from causal_gym.tabular import (
    ModelKind,
    Setting,
    TabularEnv,
    TabularParams,
    ANSWER_CHAIN,
)


def show_episode(setting: Setting, seed: int = 3) -> None:
    params = TabularParams(n_steps=10)
    env = TabularEnv(params, setting)
    rng = np.random.default_rng(seed)
    obs = env.reset(rng)
    print(f"\n--- {setting.value}: hidden model is {env.model.name} ---")
    print(f"t= 0  obs {obs}")
    done = False
    t = 0
    while not done:
        # A lazy fixed policy: do nothing / always answer "chain".
        obs, reward, done = env.step(ANSWER_CHAIN)
        t += 1
        tag = f"  reward {reward:+g}" if done else ""
        print(f"t={t:2d}  obs {obs}{tag}")


def main() -> None:
    print("Two candidate dynamics over binary variables s1, s2, s3:")
    print("  chain:        s1 -> s2 -> s3   (each with a one-step delay)")
    print("  delayed fork: s1 -> s2, s1 -> s3 (s3 lags two steps)")
    print("Spontaneous rates p1=0.1, p2=p3=0.01; an intervention z_i forces y_i=1.")

    for setting in (
        Setting.CONFOUNDED,
        Setting.OBSERVATIONAL,
        Setting.OFFPOLICY,
        Setting.ONPOLICY,
    ):
        show_episode(setting)

    print("\nWhat each setting reveals:")
    print("  confounded     - states only; interventions never happen")
    print("  observational  - hidden spontaneous 'interventions' raise base rates")
    print("  offpolicy      - states plus visible random intervention flags [s, z]")
    print("  onpolicy       - the agent chooses interventions, then answers on a go cue")


if __name__ == "__main__":
    main()
