"""Narrowband channel synthesis from CKM path records.

Array phase reference is element 0; the per-path phase is carried entirely in
the record's complex gain. SPs and CPs are isotropic single-element receivers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ckm import CKM, LOS, PathRecord
from .errors import CkmError, IrsPlanError
from .scene import PointSet, Scene

_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element axis, element count, spacing in wavelengths."""

    axis: tuple[float, float, float]
    n_elements: int
    spacing_wavelengths: float = 0.5

    @staticmethod
    def point() -> "ArrayGeometry":
        return ArrayGeometry((1.0, 0.0, 0.0), 1)


@dataclass(frozen=True)
class ArrayConfig:
    """System-level array dimensions that are not part of the scenario geometry."""

    n_bs_antennas: int = 4
    n_irs_elements: int = 8
    spacing_wavelengths: float = 0.5
    bs_axis: tuple[float, float, float] = (1.0, 0.0, 0.0)


@dataclass(frozen=True)
class ChannelSet:
    """All channel matrices/vectors the optimizers consume.

    H0k[k]  : (M, Nt) BS -> IRS k, all paths combined.
    h0q[q]  : (Nt,)  conjugated direct channel to CP q (stored as h_{0,q}).
    hkq[k][q]: (M,)  conjugated IRS-k -> CP q channel, all paths combined.
    gkp[k][p]: (M,)  conjugated IRS-k -> SP p channel, LoS path only (zero when blocked).
    """

    H0k: np.ndarray  # (K, M, Nt) complex
    h0q: np.ndarray  # (Q, Nt) complex
    hkq: np.ndarray  # (K, Q, M) complex
    gkp: np.ndarray  # (K, P, M) complex
    dims: tuple[int, int, int, int, int] = field(default=None)  # (K, M, Nt, P, Q)

    def __post_init__(self):
        K, M, Nt = self.H0k.shape
        Q = self.h0q.shape[0]
        P = self.gkp.shape[1]
        for a in (self.H0k, self.h0q, self.hkq, self.gkp):
            if not np.all(np.isfinite(a.view(float))):
                raise IrsPlanError("channel set contains non-finite entries")
        object.__setattr__(self, "dims", (K, M, Nt, P, Q))

    @property
    def K(self):
        return self.dims[0]

    @property
    def M(self):
        return self.dims[1]

    @property
    def Nt(self):
        return self.dims[2]

    @property
    def P(self):
        return self.dims[3]

    @property
    def Q(self):
        return self.dims[4]


def array_response(direction, axis, n_elements: int, spacing_wavelengths: float) -> np.ndarray:
    """ULA steering vector: element i gets phase 2*pi*spacing*i*<direction, axis>."""
    direction = np.asarray(direction, dtype=float)
    axis = np.asarray(axis, dtype=float)
    if n_elements < 1:
        raise IrsPlanError("n_elements must be >= 1")
    for name, v in (("direction", direction), ("axis", axis)):
        if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
            raise IrsPlanError(f"{name} must be a unit vector")
    proj = float(direction @ axis)
    idx = np.arange(n_elements)
    return np.exp(2j * np.pi * spacing_wavelengths * idx * proj)


def synthesize_channel(records, tx_geom: ArrayGeometry, rx_geom: ArrayGeometry) -> np.ndarray:
    """Sum of rank-one terms gain * a_rx(aoa) a_tx(aod)^H over the path records."""
    H = np.zeros((rx_geom.n_elements, tx_geom.n_elements), dtype=complex)
    for r in records:
        a_tx = array_response(r.aod, tx_geom.axis, tx_geom.n_elements, tx_geom.spacing_wavelengths)
        a_rx = array_response(r.aoa, rx_geom.axis, rx_geom.n_elements, rx_geom.spacing_wavelengths)
        H += r.complex_gain * np.outer(a_rx, a_tx.conj())
    return H


def _los_only(records) -> list[PathRecord]:
    return [r for r in records if r.kind == LOS]


def assemble_channel_set(
    ckm: CKM,
    scene: Scene,
    points: PointSet,
    arrays: ArrayConfig | None = None,
) -> ChannelSet:
    """Build every matrix/vector downstream optimizers need.

    Communication channels combine all paths; sensing channels keep only the
    LoS record (zero vector when the LoS is blocked).
    """
    arrays = arrays or ArrayConfig()
    K = scene.num_sites
    M, Nt = arrays.n_irs_elements, arrays.n_bs_antennas
    P, Q = points.num_sensing, points.num_comm
    sp = arrays.spacing_wavelengths

    bs_geom = ArrayGeometry(tuple(arrays.bs_axis), Nt, sp)
    site_geoms = [
        ArrayGeometry(tuple(s.axis.tolist()), M, sp) for s in scene.candidate_sites
    ]
    pt = ArrayGeometry.point()

    H0k = np.zeros((K, M, Nt), dtype=complex)
    h0q = np.zeros((Q, Nt), dtype=complex)
    hkq = np.zeros((K, Q, M), dtype=complex)
    gkp = np.zeros((K, P, M), dtype=complex)

    for k in range(K):
        H0k[k] = synthesize_channel(ckm.get_paths("bs", f"site{k}"), bs_geom, site_geoms[k])
        for q in range(Q):
            row = synthesize_channel(ckm.get_paths(f"site{k}", f"cp{q}"), site_geoms[k], pt)
            hkq[k, q] = row.conj().ravel()
        for p in range(P):
            los = _los_only(ckm.get_paths(f"site{k}", f"sp{p}"))
            if los:
                row = synthesize_channel(los, site_geoms[k], pt)
                gkp[k, p] = row.conj().ravel()
    for q in range(Q):
        row = synthesize_channel(ckm.get_paths("bs", f"cp{q}"), bs_geom, pt)
        h0q[q] = row.conj().ravel()

    return ChannelSet(H0k=H0k, h0q=h0q, hkq=hkq, gkp=gkp)


def dump_channel_set(channels: ChannelSet) -> dict:
    """JSON-friendly dump (re/im pairs) for external cross-checking."""

    def ri(a: np.ndarray):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}

    return {
        "dims": list(channels.dims),
        "H0k": ri(channels.H0k),
        "h0q": ri(channels.h0q),
        "hkq": ri(channels.hkq),
        "gkp": ri(channels.gkp),
    }
