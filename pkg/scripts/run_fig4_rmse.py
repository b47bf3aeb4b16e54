"""Run the bundled fig4_rmse scenario and write fig4_rmse.csv (extra args go to `jcsc-sim run`)."""
import sys

from jcsc_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "fig4_rmse", *sys.argv[1:]]))
