"""Regenerate the frozen scenario CSVs used by test_scenarios.py.

Run from the repository root:

    python3 tests/data/make_golden.py
"""

import pathlib
import shutil
import tempfile

from gemsim.scenarios import config_from_dict, parse_config_text, run_scenario

HERE = pathlib.Path(__file__).parent

BASE_TEXT = """
scenario = tem00_decay
grid.n = 128
grid.extent_mm = 15.36
memory.D_cm2_s = 13.2
storage.times_us = 0,30
pipeline.storage_steps = 8
"""


def main():
    for scenario in ("tem00_decay", "selective_recall"):
        values = parse_config_text(BASE_TEXT)
        values["scenario"] = scenario
        with tempfile.TemporaryDirectory() as tmp:
            values["output_dir"] = tmp
            result = run_scenario(config_from_dict(values))
            target = HERE / f"golden_{scenario}.csv"
            shutil.copy(result.csv_path, target)
            print(f"wrote {target}")


if __name__ == "__main__":
    main()
