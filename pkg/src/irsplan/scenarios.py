"""Built-in demo scenarios.

A two-room indoor layout: the BS sits in the left room, a dividing wall with a
doorway-style opening blocks the direct view into the sensing area, and the
communication area occupies the right room. Candidate IRS sites line the far
walls where they can see both the BS (through the opening) and the shadowed
coverage areas.
"""

from __future__ import annotations

import json

# room: x in [0, 10], y in [0, 6], z in [0, 3]
_WALL = {"min": [4.0, 0.0, 0.0], "max": [4.2, 4.5, 3.0], "reflect": 0.6}
_FLOOR = {"min": [0.0, 0.0, -0.2], "max": [10.0, 6.0, 0.0], "reflect": 0.6}

_BS = [1.0, 5.5, 2.5]

# far-wall sites (x = 10) face -x; top-wall sites (y = 6) face -y
_DESK_SITES = [
    {"center": [10.0, 5.0, 2.5], "normal": [-1.0, 0.0, 0.0], "axis": [0.0, 1.0, 0.0]},
    {"center": [10.0, 3.0, 2.5], "normal": [-1.0, 0.0, 0.0], "axis": [0.0, 1.0, 0.0]},
    {"center": [10.0, 4.0, 1.5], "normal": [-1.0, 0.0, 0.0], "axis": [0.0, 0.0, 1.0]},
    {"center": [6.0, 6.0, 2.5], "normal": [0.0, -1.0, 0.0], "axis": [1.0, 0.0, 0.0]},
    {"center": [8.0, 6.0, 2.5], "normal": [0.0, -1.0, 0.0], "axis": [1.0, 0.0, 0.0]},
    # a site in the BS room: sees the BS but is cut off from both coverage areas
    {"center": [3.0, 0.0, 2.5], "normal": [0.0, 1.0, 0.0], "axis": [1.0, 0.0, 0.0]},
]


def _paper_sites() -> list[dict]:
    sites = []
    for i in range(8):  # far wall, x = 10
        sites.append({
            "center": [10.0, 1.5 + 0.5 * i, 2.5 if i % 2 == 0 else 1.5],
            "normal": [-1.0, 0.0, 0.0],
            "axis": [0.0, 1.0, 0.0],
        })
    for i in range(6):  # top wall, y = 6
        sites.append({
            "center": [5.0 + 0.8 * i, 6.0, 2.5],
            "normal": [0.0, -1.0, 0.0],
            "axis": [1.0, 0.0, 0.0],
        })
    for i in range(2):  # BS-room wall, y = 0
        sites.append({
            "center": [2.0 + 1.5 * i, 0.0, 2.5],
            "normal": [0.0, 1.0, 0.0],
            "axis": [1.0, 0.0, 0.0],
        })
    return sites


def demo_document(profile: str = "desk") -> dict:
    """Scenario document for the two-room demo at the given scale profile."""
    if profile == "desk":
        sites, n_sp, n_cp = _DESK_SITES, 10, 10
    elif profile == "paper":
        sites, n_sp, n_cp = _paper_sites(), 50, 50
    else:
        raise ValueError(f"unknown profile {profile!r}; expected 'desk' or 'paper'")
    return {
        "bs": _BS,
        "sites": sites,
        "obstacles": [_WALL, _FLOOR],
        "sensing_region": {"min": [5.0, 0.5, 1.0], "max": [7.0, 2.5, 1.0]},
        "comm_region": {"min": [7.5, 0.5, 1.5], "max": [9.5, 5.5, 1.5]},
        "frequency_hz": 3.5e9,
        "points": {"mode": "grid", "P": n_sp, "Q": n_cp, "seed": 0},
    }


def demo_text(profile: str = "desk") -> str:
    return json.dumps(demo_document(profile), indent=2, sort_keys=True)
