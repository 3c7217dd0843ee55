"""
Scenario registry: every json/<id>.json descriptor, keyed by file stem.
"""

import json
import os

SCENARIOS = {}

scenarios_dir = os.path.join(os.path.dirname(__file__), "json")
if os.path.exists(scenarios_dir):
    for filename in sorted(os.listdir(scenarios_dir)):
        if filename.endswith(".json"):
            with open(os.path.join(scenarios_dir, filename), "r") as f:
                SCENARIOS[filename[:-5]] = json.load(f)


def scenario_ids():
    return sorted(SCENARIOS)
