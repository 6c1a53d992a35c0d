#!/usr/bin/env python3
"""
Knowledge-sharing sweep over a custom scenario file.

Usage:
    python subset_sweep.py room.yml [n_seeds]
"""

import sys
from pathlib import Path

from crosscam.config import ScenarioConfig, build_scenario
from crosscam.logging_config import PerformanceTimer, setup_logging
from crosscam.reports import save_sweep
from crosscam.server import sweep_knowledge_sharing


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(1)

    setup_logging("INFO")
    config_file = Path(sys.argv[1])
    n_seeds = int(sys.argv[2]) if len(sys.argv) > 2 else 10

    scenario = build_scenario(ScenarioConfig(config_file))
    with PerformanceTimer("sweep", seeds=n_seeds):
        rows = sweep_knowledge_sharing(scenario, n_seeds, workers=4, show_progress=True)

    for row in rows:
        print(
            f"{row.subset_size} camera(s): accuracy {row.mean_accuracy:.4f} "
            f"± {row.stddev:.4f}, fraction {row.mean_fraction:.4f}"
        )
    save_sweep(rows, config_file.with_suffix(".sweep.csv"))


if __name__ == "__main__":
    main()
