"""Run the bundled fig6_mac scenario and write fig6_mac.csv (extra args go to `jcsc-sim run`)."""
import sys

from jcsc_sim.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "fig6_mac", *sys.argv[1:]]))
