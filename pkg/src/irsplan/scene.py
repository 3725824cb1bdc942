"""Scenario geometry: obstacles, candidate IRS sites, and sampled coverage points.

All lengths are in meters. A scenario is described by a JSON document (see
``load_scenario``); once constructed, ``Scene`` and ``PointSet`` are immutable
and safe to share across threads.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ScenarioError

_UNIT_TOL = 1e-9
_CONTAIN_TOL = 1e-12

# face order used for per-face reflection coefficients
FACES = ("-x", "+x", "-y", "+y", "-z", "+z")


def _vec3(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (3,):
        raise ScenarioError(f"{name} must be a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ScenarioError(f"{name} has non-finite entries")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box given by its min and max corners."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", _vec3(self.lo, "box min"))
        object.__setattr__(self, "hi", _vec3(self.hi, "box max"))

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, p: np.ndarray, tol: float = _CONTAIN_TOL) -> bool:
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def strictly_contains(self, p: np.ndarray) -> bool:
        return bool(np.all(p > self.lo) and np.all(p < self.hi))

    def __eq__(self, other):
        return (
            isinstance(other, Box)
            and np.array_equal(self.lo, other.lo)
            and np.array_equal(self.hi, other.hi)
        )


@dataclass(frozen=True, eq=False)
class Obstacle(Box):
    """Rectangular slab with an amplitude reflection coefficient per face.

    ``reflect`` follows the face order ``FACES`` = (-x, +x, -y, +y, -z, +z);
    a scalar in the scenario document applies to all six faces.
    """

    reflect: np.ndarray = field(default_factory=lambda: np.full(6, 0.6))

    def __post_init__(self):
        super().__post_init__()
        r = np.atleast_1d(np.asarray(self.reflect, dtype=float))
        if r.shape == (1,):
            r = np.repeat(r, 6)
        if r.shape != (6,):
            raise ScenarioError("obstacle reflect must be a scalar or 6 values")
        r.setflags(write=False)
        object.__setattr__(self, "reflect", r)

    def __eq__(self, other):
        return (
            isinstance(other, Obstacle)
            and super().__eq__(other)
            and np.array_equal(self.reflect, other.reflect)
        )


@dataclass(frozen=True, eq=False)
class CandidateSite:
    """Candidate IRS location: array center, outward surface normal, and the
    axis along which the reflecting elements are laid out."""

    center: np.ndarray
    normal: np.ndarray
    axis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "site center"))
        object.__setattr__(self, "normal", _vec3(self.normal, "site normal"))
        object.__setattr__(self, "axis", _vec3(self.axis, "site axis"))

    def __eq__(self, other):
        return (
            isinstance(other, CandidateSite)
            and np.array_equal(self.center, other.center)
            and np.array_equal(self.normal, other.normal)
            and np.array_equal(self.axis, other.axis)
        )


@dataclass(frozen=True, eq=False)
class Scene:
    bs_location: np.ndarray
    candidate_sites: tuple[CandidateSite, ...]
    obstacles: tuple[Obstacle, ...]
    sensing_region: Box
    comm_region: Box
    carrier_frequency: float

    def __post_init__(self):
        object.__setattr__(self, "bs_location", _vec3(self.bs_location, "bs"))
        object.__setattr__(self, "candidate_sites", tuple(self.candidate_sites))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        violations = validate_scene(self)
        if violations:
            raise ScenarioError("scene invariant violation", violations)

    @property
    def num_sites(self) -> int:
        return len(self.candidate_sites)

    @property
    def wavelength(self) -> float:
        return 299792458.0 / self.carrier_frequency

    def __eq__(self, other):
        return (
            isinstance(other, Scene)
            and np.array_equal(self.bs_location, other.bs_location)
            and self.candidate_sites == other.candidate_sites
            and self.obstacles == other.obstacles
            and self.sensing_region == other.sensing_region
            and self.comm_region == other.comm_region
            and self.carrier_frequency == other.carrier_frequency
        )


@dataclass(frozen=True, eq=False)
class PointSet:
    sensing_points: np.ndarray  # (P, 3)
    comm_points: np.ndarray  # (Q, 3)

    def __post_init__(self):
        for name in ("sensing_points", "comm_points"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim != 2 or a.shape[1] != 3 or a.shape[0] < 1:
                raise ScenarioError(f"{name} must have shape (n>=1, 3)")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def num_sensing(self) -> int:
        return self.sensing_points.shape[0]

    @property
    def num_comm(self) -> int:
        return self.comm_points.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, PointSet)
            and np.array_equal(self.sensing_points, other.sensing_points)
            and np.array_equal(self.comm_points, other.comm_points)
        )


def validate_scene(scene: Scene) -> list[str]:
    """Collect every invariant violation (empty list means valid)."""
    bad: list[str] = []
    if scene.num_sites < 1:
        bad.append("at least one candidate site is required")
    if not (scene.carrier_frequency > 0):
        bad.append("carrier frequency must be positive")
    for i, s in enumerate(scene.candidate_sites):
        if abs(np.linalg.norm(s.normal) - 1.0) > _UNIT_TOL:
            bad.append(f"site {i}: normal is not unit length")
        if abs(np.linalg.norm(s.axis) - 1.0) > _UNIT_TOL:
            bad.append(f"site {i}: element axis is not unit length")
        if abs(float(s.normal @ s.axis)) > _UNIT_TOL:
            bad.append(f"site {i}: normal and element axis are not orthogonal")
    for i, ob in enumerate(scene.obstacles):
        if not np.all(ob.hi > ob.lo):
            bad.append(f"obstacle {i}: extent must be strictly positive on every axis")
        if np.any(ob.reflect < 0) or np.any(ob.reflect > 1):
            bad.append(f"obstacle {i}: reflection coefficients must lie in [0, 1]")
    for i, ob in enumerate(scene.obstacles):
        if np.all(ob.hi > ob.lo):
            if ob.strictly_contains(scene.bs_location):
                bad.append(f"BS lies inside obstacle {i}")
            for k, s in enumerate(scene.candidate_sites):
                if ob.strictly_contains(s.center):
                    bad.append(f"site {k} lies inside obstacle {i}")
    for region, name in ((scene.sensing_region, "sensing"), (scene.comm_region, "comm")):
        if np.any(region.hi < region.lo):
            bad.append(f"{name} region has inverted corners")
    return bad


def _grid_shape(count: int, extents: np.ndarray) -> tuple[int, ...]:
    """Factor ``count`` into per-axis grid sizes, near-equal over the axes with
    positive extent and 1 on degenerate axes; larger factors go to larger extents."""
    active = [i for i in range(3) if extents[i] > 0]
    shape = [1, 1, 1]
    if not active:
        return tuple(shape)
    # ascending extent: small axes take the small factors
    order = sorted(active, key=lambda i: extents[i])
    remaining = count
    for pos, axis in enumerate(order):
        m = len(order) - pos
        if m == 1:
            shape[axis] = remaining
            break
        target = remaining ** (1.0 / m)
        best = 1
        for d in range(1, remaining + 1):
            if remaining % d == 0 and d <= target + 1e-9:
                best = d
        shape[axis] = best
        remaining //= best
    return tuple(shape)


def sample_points(region: Box, count: int, seed: int = 0, mode: str = "grid") -> np.ndarray:
    """Discretize ``region`` into ``count`` points.

    ``grid`` mode places points at cell centers of a near-square lattice
    (deterministic, seed ignored); ``random`` mode draws uniformly with the
    given seed. Output shape is (count, 3) and every point lies inside the
    region.
    """
    if count < 1:
        raise ScenarioError("point count must be >= 1")
    if mode == "grid":
        shape = _grid_shape(count, region.extent)
        axes = []
        for i in range(3):
            n = shape[i]
            step = region.extent[i] / n
            axes.append(region.lo[i] + (np.arange(n) + 0.5) * step)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        if pts.shape[0] < count:  # fully degenerate region: repeat its single point
            pts = np.tile(pts, (count, 1))
        return pts
    if mode == "random":
        rng = np.random.default_rng(seed)
        return region.lo + rng.uniform(size=(count, 3)) * region.extent
    raise ScenarioError(f"unknown sampling mode {mode!r}")


def _box_from_doc(d, name: str) -> Box:
    if not isinstance(d, dict) or "min" not in d or "max" not in d:
        raise ScenarioError(f"{name} must be an object with 'min' and 'max'")
    return Box(_vec3(d["min"], f"{name}.min"), _vec3(d["max"], f"{name}.max"))


def load_scenario(text: str) -> tuple[Scene, PointSet]:
    """Parse and validate a UTF-8 JSON scenario document.

    Top-level keys: ``bs``, ``sites``, ``obstacles``, ``sensing_region``,
    ``comm_region``, ``frequency_hz``, ``points`` = {mode, P, Q, seed}.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario parse error at line {exc.lineno}, col {exc.colno}: {exc.msg}") from None
    missing = [k for k in ("bs", "sites", "sensing_region", "comm_region", "frequency_hz", "points") if k not in doc]
    if missing:
        raise ScenarioError("scenario document is missing keys", missing)

    sites = tuple(
        CandidateSite(s["center"], s["normal"], s["axis"]) for s in doc["sites"]
    )
    obstacles = tuple(
        Obstacle(o["min"], o["max"], reflect=o.get("reflect", 0.6)) for o in doc.get("obstacles", [])
    )
    scene = Scene(
        bs_location=doc["bs"],
        candidate_sites=sites,
        obstacles=obstacles,
        sensing_region=_box_from_doc(doc["sensing_region"], "sensing_region"),
        comm_region=_box_from_doc(doc["comm_region"], "comm_region"),
        carrier_frequency=float(doc["frequency_hz"]),
    )

    pts = doc["points"]
    mode = pts.get("mode", "grid")
    seed = int(pts.get("seed", 0))
    sp = sample_points(scene.sensing_region, int(pts["P"]), seed=seed, mode=mode)
    cp_ = sample_points(scene.comm_region, int(pts["Q"]), seed=seed + 1, mode=mode)
    points = PointSet(sp, cp_)

    bad = []
    for p in points.sensing_points:
        if not scene.sensing_region.contains(p):
            bad.append("sensing point outside sensing region")
    for p in points.comm_points:
        if not scene.comm_region.contains(p):
            bad.append("comm point outside comm region")
    if bad:
        raise ScenarioError("point containment violation", sorted(set(bad)))
    return scene, points


def scene_to_doc(scene: Scene, points_spec: dict | None = None) -> dict:
    """Inverse of ``load_scenario`` for the Scene part (round-trips exactly)."""
    doc = {
        "bs": scene.bs_location.tolist(),
        "sites": [
            {"center": s.center.tolist(), "normal": s.normal.tolist(), "axis": s.axis.tolist()}
            for s in scene.candidate_sites
        ],
        "obstacles": [
            {"min": o.lo.tolist(), "max": o.hi.tolist(), "reflect": o.reflect.tolist()}
            for o in scene.obstacles
        ],
        "sensing_region": {"min": scene.sensing_region.lo.tolist(), "max": scene.sensing_region.hi.tolist()},
        "comm_region": {"min": scene.comm_region.lo.tolist(), "max": scene.comm_region.hi.tolist()},
        "frequency_hz": scene.carrier_frequency,
    }
    if points_spec is not None:
        doc["points"] = dict(points_spec)
    return doc


def serialize_scene(scene: Scene) -> str:
    return json.dumps(scene_to_doc(scene), sort_keys=True)


def scene_hash(scene: Scene) -> str:
    """Stable content hash used to bind CKM caches to their generating scene."""
    return hashlib.sha256(serialize_scene(scene).encode()).hexdigest()
