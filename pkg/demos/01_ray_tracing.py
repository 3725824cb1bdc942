"""Walk through the image-method ray tracer on a tiny single-slab scene.

A transmitter and receiver sit in front of a reflecting slab. With the
carrier chosen so the wavelength is exactly 1 m, the free-space amplitudes
come out as clean closed forms you can check by hand.
"""

import numpy as np

from irsplan.ckm import trace_paths
from irsplan.scene import Box, CandidateSite, Obstacle, Scene

C_LIGHT = 299792458.0  # lambda = c / f = 1 m

scene = Scene(
    bs_location=[0.0, 0.5, 0.5],
    candidate_sites=(CandidateSite([9, 0.5, 0.5], [-1, 0, 0], [0, 1, 0]),),
    obstacles=(Obstacle([2.0, 0.0, 0.0], [2.5, 1.0, 1.0], reflect=0.5),),
    sensing_region=Box([5, 0, 0.5], [6, 1, 0.5]),
    comm_region=Box([7, 0, 0.5], [8, 1, 0.5]),
    carrier_frequency=C_LIGHT,
)

tx = np.array([0.0, 0.5, 0.5])
rx = np.array([1.0, 0.5, 0.5])

print(f"tracing {tx} -> {rx} past a slab with face at x = 2 (reflect 0.5)\n")
for r in trace_paths(scene, tx, rx):
    print(f"{r.kind:9s} length {r.length:6.3f} m   gain {r.complex_gain:+.6f}")
    if r.bounce_point:
        print(f"{'':9s} bounce at {np.round(r.bounce_point, 6)}")
print()
print("check: LoS gain = 1/(4*pi)          =", 1 / (4 * np.pi))
print("check: bounce gain = 0.5/(4*pi*3)   =", 0.5 / (12 * np.pi))
print("(the mirror image of rx across x=2 lies at x=3, so the path is 3 m long)")
