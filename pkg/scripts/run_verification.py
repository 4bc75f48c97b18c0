#!/usr/bin/env python3
"""Full-scale verification run.

Drives the `fpkit verify` command on the standard boundary with the
fine residual grid (dt = dx = 1e-3) and writes residuals.json,
diagnostics.json, and the config sidecar into out/verify/.
Pass --fast for the coarse preset.
"""

import sys

from fpkit.cli import main

if __name__ == "__main__":
    extra = sys.argv[1:]
    sys.exit(main([
        "verify",
        "--boundary", "s=1; fprime=0.5,0.3",
        "--out", "out/verify",
        *extra,
    ]))
