"""Run the bundled fig5_nd scenario and write fig5_nd.csv (extra args go to `jcsc-sim run`)."""
import sys

from jcsc_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "fig5_nd", *sys.argv[1:]]))
