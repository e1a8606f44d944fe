"""Run a bundled head-to-head race through the library API and render frames.

Run: python demos/demo_race.py
"""

import json
from pathlib import Path

from tenthsim.harness import RenderOptions, load_scenario, replay_render, run_race
from tenthsim.harness.scenario import data_dir

out = Path("out/demo_race")
scenario = load_scenario(data_dir() / "race3_head_to_head.json")
print(f"scenario: {scenario.name} ({scenario.race_type}), "
      f"{len(scenario.agents)} agents, {scenario.laps} laps, seed {scenario.seed}")
for i, agent in enumerate(scenario.agents):
    print(f"  agent {i}: {agent.localization} + {agent.planner} + "
          f"{agent.controller} @ {agent.target_speed} m/s")

result = run_race(scenario, out)
print(f"\nwinner: {result.winner} ({result.termination})")
for i in range(len(scenario.agents)):
    best = result.best_laps[i]
    print(f"  agent {i}: laps={result.lap_counts[i]} "
          f"best={f'{best:.2f} s' if best else 'n/a'} "
          f"collision={result.collisions[i]}")

meta = json.loads((out / f"{scenario.name}_meta.json").read_text())
print(f"\nsimulated {meta['sim_seconds']:.1f} s in {meta['wall_seconds']:.1f} s "
      f"({meta['realtime_ratio']:.1f}x real time, full stack)")

frames = replay_render(result.log_path, out / "frames", RenderOptions(stride=100))
print(f"rendered {len(frames)} frames to {out / 'frames'}")
print(f"log: {result.log_path}")
