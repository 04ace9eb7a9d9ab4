"""Dynamic time warping as a similarity measure for windows.

DTW aligns two series before summing pointwise distances, so a shifted
copy of a series costs far less than the raw pointwise comparison
suggests. The exhaustive path-enumeration oracle confirms the dynamic
program on small inputs; the mean DTW over a validation split is the
model-selection objective for the autoencoders (it is not differentiable,
so training itself uses MSE).
"""

import numpy as np

from t2vad.dtw import dtw_bruteforce, dtw_distance
from t2vad.rng import make_rng

t = np.linspace(0, 4 * np.pi, 60)
wave = np.sin(t)[:, None]
shifted = np.sin(t - 0.8)[:, None]

pointwise = float(np.linalg.norm(wave - shifted, axis=1).sum())
print(f"sum of pointwise distances (no alignment): {pointwise:7.3f}")
print(f"dtw distance (optimal monotone alignment): {dtw_distance(wave, shifted):7.3f}")

# identical series cost nothing; scaling both scales the distance linearly
print(f"dtw(x, x) = {dtw_distance(wave, wave):.1f}")
print(f"dtw(3x, 3y) / dtw(x, y) = "
      f"{dtw_distance(3 * wave, 3 * shifted) / dtw_distance(wave, shifted):.3f}")

# the dynamic program equals brute-force path enumeration on small pairs
rng = make_rng(5)
worst = 0.0
for _ in range(50):
    a = rng.normal(size=(int(rng.integers(1, 7)), 2))
    b = rng.normal(size=(int(rng.integers(1, 7)), 2))
    worst = max(worst, abs(dtw_distance(a, b) - dtw_bruteforce(a, b)))
print(f"max |DP - bruteforce| over 50 random small pairs: {worst:.2e}")
