# Copyright 2026 The Telewaypoint Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Teleoperation study core: maps, planning, bots and statistics."""

from pathlib import Path

from ._core import (
    InsufficientData,
    MalformedMap,
    Map,
    PlanningError,
    ReplayMismatch,
    WireFormatError,
    analysis_report,
    arc_landing,
    build_plan,
    decode_command,
    delay_experiment,
    f_cdf,
    f_sf,
    load_map,
    load_map_file,
    mirror_map,
    mixed_anova,
    paired_t,
    plan_path,
    replay_results_csv,
    reverse_map,
    run_bot_session,
    sus_score,
    t_cdf,
    tlx_raw,
)

_HERE = Path(__file__).resolve().parent
# Installed wheels carry the maps; editable installs read them from the repo.
_MAP_DIRS = (_HERE / "maps", _HERE.parents[1] / "assets" / "maps")


def shipped_map(name: str = "trial_forward") -> Map:
    """Loads one of the maps bundled with the package."""
    for d in _MAP_DIRS:
        path = d / f"{name}.map"
        if path.exists():
            return load_map_file(str(path))
    raise FileNotFoundError(f"no shipped map named {name!r}")


__all__ = [name for name in dir() if not name.startswith("_")]
