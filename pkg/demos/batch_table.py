"""Multi-episode comparison of the three planning policies.

Runs a seeded batch of fresh cities and prints the aggregate table: the
self-built-map policy should fly meaningfully faster and spend less of its
path NLoS than the map-blind baseline, approaching the full-knowledge oracle.

Run:  python3 demos/batch_table.py [episodes]
"""

import sys
import time

import edgeflight as ef
from edgeflight.planner import PlannerKind

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 8

cfg = ef.default_config(seed=0)
t0 = time.perf_counter()
print(f"running {episodes} episodes x 3 policies (fresh city per episode) ...")
done = set()


def progress(i, kind, metrics):
    if i not in done:
        done.add(i)
        print(f"  episode {i + 1}/{episodes}", flush=True)


result = ef.run_batch(cfg, episodes=episodes, progress=progress)
wall = time.perf_counter() - t0

print(f"\n{'policy':10s} {'mean duration':>13s} {'mean uplink':>12s} "
      f"{'nlos dist':>10s} {'stuck':>6s}")
for kind in PlannerKind:
    a = result.aggregate(kind)
    print(f"{kind.value:10s} {a['mean_duration_s']:11.1f} s "
          f"{a['avg_uplink_capacity_bps'] / 1e6:9.1f} Mbps "
          f"{a['nlos_distance_ratio'] * 100:9.1f}% {a['stuck_episodes']:6d}")

base = result.aggregate(PlannerKind.BASELINE)
expl = result.aggregate(PlannerKind.EXPLORED)
glob = result.aggregate(PlannerKind.GLOBAL)
print(f"\nexplored vs baseline: duration x{expl['mean_duration_s'] / base['mean_duration_s']:.2f}, "
      f"nlos x{expl['nlos_distance_ratio'] / base['nlos_distance_ratio']:.2f}")
print(f"explored vs oracle:   duration gap "
      f"{abs(expl['mean_duration_s'] - glob['mean_duration_s']) / glob['mean_duration_s']:.1%}")
print(f"({wall:.0f} s wall)")
