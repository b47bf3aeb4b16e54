"""Plain-CSMA saturation throughput and the jcsc/conventional delay ratio vs offered load.

Offered load is ``node_count * arrival_prob * frame_slots`` (frame airtime
demanded per slot). The saturation throughput sets what "a fraction of
capacity" means for the default MAC world.
"""
import argparse

import numpy as np

from jcsc_sim.mac import MacConfig, build_mac_world, run_mac, run_mac_sweep
from jcsc_sim.rng import RngHandle


def saturation_throughput(load, frame_slots, trials, seed):
    cfg = MacConfig(offered_load=load, trials=trials, horizon_slots=8000 * frame_slots, min_frames=0)
    thr = []
    for t in range(trials):
        h = RngHandle(seed).stream(t)
        res = run_mac(cfg, build_mac_world(cfg, h.child(0)), h.child(1), frame_slots, "conventional")
        thr.append(res.delivered * frame_slots / res.extra["horizon"])
    return float(np.mean(thr))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    print("offered  throughput (F=20)")
    for load in (1.0, 2.0, 4.0):
        print(f"{load:7.1f}  {saturation_throughput(load, 20, args.trials, args.seed):.3f}")

    print("\nload   " + "  ".join(f"F={f:<4d}" for f in MacConfig().frame_slots))
    for load in (0.3, 0.4, 0.5, 0.6):
        s = run_mac_sweep(MacConfig(offered_load=load, trials=args.trials), RngHandle(args.seed))
        cells = []
        for f in MacConfig().frame_slots:
            conv, jc = s.row(f, "conventional"), s.row(f, "jcsc")
            cells.append(f"{jc.mean / conv.mean:.3f}{'*' if conv.flag != 'ok' else ' '}")
        print(f"{load:4.1f}   " + "  ".join(cells))
    print("(* conventional row flagged)")
