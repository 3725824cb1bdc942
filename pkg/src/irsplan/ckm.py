"""Channel knowledge map: image-method ray tracing and persistence.

Paths are traced up to one specular bounce off obstacle faces. Each record
carries the geometric length, a complex amplitude (free-space amplitude times
the face reflection coefficient, with phase -2*pi*length/lambda), and unit
departure/arrival direction vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import CkmError, GeometryError
from .scene import FACES, PointSet, Scene, scene_hash

LOS = "los"
REFLECTED = "reflected"

_EPS_T = 1e-9  # endpoint exclusion in segment-parameter units
_CKM_VERSION = 1


@dataclass(frozen=True)
class PathRecord:
    kind: str  # LOS or REFLECTED
    length: float  # meters
    complex_gain: complex  # amplitude incl. phase e^{-j 2 pi length / lambda}
    aod: tuple[float, float, float]  # unit vector, departure direction at tx
    aoa: tuple[float, float, float]  # unit vector, rx -> incoming path
    bounce_point: tuple[float, float, float] | None = None

    def reversed(self) -> "PathRecord":
        """Same path seen from the other endpoint (reciprocity)."""
        return replace(self, aod=self.aoa, aoa=self.aod)


def _unit(v: np.ndarray) -> tuple[float, float, float]:
    u = v / np.linalg.norm(v)
    return (float(u[0]), float(u[1]), float(u[2]))


def segment_blocked(scene: Scene, a: np.ndarray, b: np.ndarray) -> bool:
    """True if the open segment a-b intersects any obstacle.

    Intersections within ``_EPS_T`` of either endpoint are ignored so that
    endpoints sitting on an obstacle face (e.g. a wall-mounted IRS) do not
    occlude their own paths. Tangential grazing in mid-segment counts as
    blocked (conservative).
    """
    d = b - a
    for ob in scene.obstacles:
        t_enter, t_exit = 0.0, 1.0
        miss = False
        for i in range(3):
            if abs(d[i]) < 1e-300:
                if a[i] < ob.lo[i] or a[i] > ob.hi[i]:
                    miss = True
                    break
                continue
            t1 = (ob.lo[i] - a[i]) / d[i]
            t2 = (ob.hi[i] - a[i]) / d[i]
            if t1 > t2:
                t1, t2 = t2, t1
            t_enter = max(t_enter, t1)
            t_exit = min(t_exit, t2)
            if t_enter > t_exit:
                miss = True
                break
        if miss:
            continue
        if t_exit > _EPS_T and t_enter < 1.0 - _EPS_T:
            return True
    return False


def _face_plane(ob, face_idx: int) -> tuple[int, float, float]:
    """Return (axis, plane coordinate, outward sign) for face ``face_idx``."""
    axis = face_idx // 2
    if face_idx % 2 == 0:
        return axis, float(ob.lo[axis]), -1.0
    return axis, float(ob.hi[axis]), 1.0


def trace_paths(scene: Scene, tx, rx) -> list[PathRecord]:
    """All LoS and single-bounce paths from tx to rx, sorted by length."""
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    if np.array_equal(tx, rx):
        raise GeometryError("tx and rx coincide")
    for i, ob in enumerate(scene.obstacles):
        if ob.strictly_contains(tx) or ob.strictly_contains(rx):
            raise GeometryError(f"endpoint inside obstacle {i}")

    lam = scene.wavelength
    records: list[PathRecord] = []

    if not segment_blocked(scene, tx, rx):
        dist = float(np.linalg.norm(rx - tx))
        amp = lam / (4.0 * math.pi * dist)
        gain = amp * np.exp(-2j * math.pi * dist / lam)
        records.append(
            PathRecord(LOS, dist, complex(gain), _unit(rx - tx), _unit(tx - rx))
        )

    for ob in scene.obstacles:
        for face_idx in range(6):
            axis, c, sign = _face_plane(ob, face_idx)
            # both endpoints strictly on the outward side of the face plane
            if sign * (tx[axis] - c) <= _EPS_T or sign * (rx[axis] - c) <= _EPS_T:
                continue
            mirrored = rx.copy()
            mirrored[axis] = 2.0 * c - rx[axis]
            denom = mirrored[axis] - tx[axis]
            t = (c - tx[axis]) / denom
            if not (0.0 < t < 1.0):
                continue
            bounce = tx + t * (mirrored - tx)
            bounce[axis] = c
            on_face = all(
                ob.lo[j] < bounce[j] < ob.hi[j] for j in range(3) if j != axis
            )
            if not on_face:  # edge/corner hits are treated as blocked
                continue
            if segment_blocked(scene, tx, bounce) or segment_blocked(scene, bounce, rx):
                continue
            dist = float(np.linalg.norm(mirrored - tx))
            amp = lam / (4.0 * math.pi * dist) * float(ob.reflect[face_idx])
            gain = amp * np.exp(-2j * math.pi * dist / lam)
            records.append(
                PathRecord(
                    REFLECTED,
                    dist,
                    complex(gain),
                    _unit(bounce - tx),
                    _unit(bounce - rx),
                    bounce_point=(float(bounce[0]), float(bounce[1]), float(bounce[2])),
                )
            )

    records.sort(key=lambda r: (r.length, r.kind != LOS, r.bounce_point or ()))
    return records


def endpoint_id(role: str, index: int | None = None) -> str:
    return role if index is None else f"{role}{index}"


@dataclass(frozen=True)
class CKM:
    """Location-indexed multipath database for all planner endpoint pairs."""

    endpoints: dict  # id -> (role, (x, y, z))
    paths: dict  # (tx_id, rx_id) -> tuple[PathRecord, ...]
    frequency_hz: float
    scene_hash: str

    def get_paths(self, tx_id: str, rx_id: str) -> tuple[PathRecord, ...]:
        if (tx_id, rx_id) in self.paths:
            return self.paths[(tx_id, rx_id)]
        if (rx_id, tx_id) in self.paths:
            return tuple(r.reversed() for r in self.paths[(rx_id, tx_id)])
        raise CkmError(f"pair ({tx_id}, {rx_id}) not present in CKM")

    def location(self, endpoint: str) -> np.ndarray:
        return np.asarray(self.endpoints[endpoint][1], dtype=float)


def build_ckm(scene: Scene, points: PointSet) -> CKM:
    """Trace every pair the optimizers consume: (BS, site_k), (site_k, SP_p),
    (site_k, CP_q), and (BS, CP_q)."""
    endpoints: dict = {"bs": ("BS", tuple(scene.bs_location.tolist()))}
    for k, s in enumerate(scene.candidate_sites):
        endpoints[f"site{k}"] = ("Site", tuple(s.center.tolist()))
    for p in range(points.num_sensing):
        endpoints[f"sp{p}"] = ("SP", tuple(points.sensing_points[p].tolist()))
    for q in range(points.num_comm):
        endpoints[f"cp{q}"] = ("CP", tuple(points.comm_points[q].tolist()))

    pairs = []
    for k in range(scene.num_sites):
        pairs.append(("bs", f"site{k}"))
    for k in range(scene.num_sites):
        for p in range(points.num_sensing):
            pairs.append((f"site{k}", f"sp{p}"))
        for q in range(points.num_comm):
            pairs.append((f"site{k}", f"cp{q}"))
    for q in range(points.num_comm):
        pairs.append(("bs", f"cp{q}"))

    table: dict = {}
    for tx_id, rx_id in pairs:
        tx = np.asarray(endpoints[tx_id][1])
        rx = np.asarray(endpoints[rx_id][1])
        try:
            table[(tx_id, rx_id)] = tuple(trace_paths(scene, tx, rx))
        except GeometryError as exc:
            raise GeometryError(f"pair ({tx_id}, {rx_id}): {exc}") from None
    return CKM(endpoints, table, scene.carrier_frequency, scene_hash(scene))


def _record_to_json(r: PathRecord) -> dict:
    return {
        "kind": r.kind,
        "length": r.length,
        "gain": [r.complex_gain.real, r.complex_gain.imag],
        "aod": list(r.aod),
        "aoa": list(r.aoa),
        "bounce": list(r.bounce_point) if r.bounce_point is not None else None,
    }


def _record_from_json(d: dict) -> PathRecord:
    return PathRecord(
        kind=d["kind"],
        length=d["length"],
        complex_gain=complex(d["gain"][0], d["gain"][1]),
        aod=tuple(d["aod"]),
        aoa=tuple(d["aoa"]),
        bounce_point=tuple(d["bounce"]) if d["bounce"] is not None else None,
    )


def save_ckm(ckm: CKM, path) -> None:
    """Write the CKM cache file (versioned JSON, byte-stable for equal maps)."""
    doc = {
        "version": _CKM_VERSION,
        "frequency_hz": ckm.frequency_hz,
        "scene_hash": ckm.scene_hash,
        "endpoints": {
            eid: {"role": role, "xyz": list(xyz)} for eid, (role, xyz) in sorted(ckm.endpoints.items())
        },
        "paths": [
            {"tx": tx, "rx": rx, "records": [_record_to_json(r) for r in recs]}
            for (tx, rx), recs in sorted(ckm.paths.items())
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))


def load_ckm(path, expected_scene: Scene | None = None) -> CKM:
    """Load a CKM cache; verifies the scene hash when a scene is supplied."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, OSError) as exc:
        raise CkmError(f"corrupt or unreadable CKM file: {exc}") from None
    if doc.get("version") != _CKM_VERSION:
        raise CkmError(f"unsupported CKM version {doc.get('version')!r}")
    for key in ("frequency_hz", "scene_hash", "endpoints", "paths"):
        if key not in doc:
            raise CkmError(f"corrupt CKM file: missing {key!r}")
    ckm = CKM(
        endpoints={eid: (e["role"], tuple(e["xyz"])) for eid, e in doc["endpoints"].items()},
        paths={
            (e["tx"], e["rx"]): tuple(_record_from_json(r) for r in e["records"])
            for e in doc["paths"]
        },
        frequency_hz=doc["frequency_hz"],
        scene_hash=doc["scene_hash"],
    )
    if expected_scene is not None and scene_hash(expected_scene) != ckm.scene_hash:
        raise CkmError("CKM scene hash does not match the supplied scene")
    return ckm
