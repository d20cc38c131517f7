"""Certified weights across dimensions, as the `report` command prints them."""

import sys

from cubeadv.cli import main

sys.exit(main(["report", "--range", "100:1000:100", "--seed", "42"]))
