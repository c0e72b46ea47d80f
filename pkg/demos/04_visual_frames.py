"""Render the pixel version of the task and dump a trial's frames as PPM files.

Run: python demos/04_visual_frames.py [out_dir]
"""
import sys
from pathlib import Path

import numpy as np

from causal_gym.harness import write_ppm
from causal_gym.tabular import ANSWER_CHAIN, Setting, TabularParams
from causal_gym.visual import VisualEnv, VisualParams


def ascii_frame(frame: np.ndarray) -> str:
    """Crude luminance print, normalized so faint blurred blobs show up."""
    shades = " .:-=+*#%@"
    lum = frame.mean(axis=2)
    peak = lum.max()
    if peak > 0:
        lum = lum / peak
    rows = []
    for r in range(lum.shape[0]):
        rows.append("".join(shades[min(int(v * 9.99), 9)] for v in lum[r]))
    return "\n".join(rows)


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_frames")
    out_dir.mkdir(parents=True, exist_ok=True)

    env = VisualEnv(TabularParams(n_steps=20), Setting.OFFPOLICY, VisualParams())
    rng = np.random.default_rng(7)
    frame = env.reset(rng)
    print(f"hidden model: {env.model.name}")
    frames = [frame]
    done = False
    while not done:
        frame, _, done = env.step(ANSWER_CHAIN)
        frames.append(frame)

    for t, frame in enumerate(frames):
        write_ppm(out_dir / f"step_{t:03d}.ppm", frame)
    print(f"wrote {len(frames)} PPM frames to {out_dir}/")

    print("\nThe three node pixels flash white (red channel carries intervention")
    print("flags); a Gaussian blur plus 50-50 temporal mixing smears them out.")
    # Show the three busiest frames (normalized brightness).
    busiest = sorted(range(len(frames)), key=lambda t: -frames[t].sum())[:3]
    for t in sorted(busiest):
        print(f"\nframe {t} (brightness normalized):")
        print(ascii_frame(frames[t]))


if __name__ == "__main__":
    main()
