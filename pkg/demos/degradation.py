"""
Building a semi-blind test case
===============================

The observation is y = (k0 + e) * x + n: the solver only sees k0, while the
true kernel carries a small Gaussian error e.
"""
from pathlib import Path

import numpy as np

from deframe import DegradationSpec, degrade, load_image, psf_motion, psnr

here = Path(__file__).resolve().parent
clean = load_image(here.parent / "manifests" / "images" / "camera256.png")

# motion blur is the coverage of a unit-width bar; axis-aligned bars end in half pixels
print("motion length 10, 0 deg:", np.round(psf_motion(10, 0)[0] * 10, 3))
print("motion length 10, 45 deg support:", psf_motion(10, 45).shape)

spec = DegradationSpec("gaussian", {"size": (15, 15), "sigma": 1.5}, std=0.001, noise_dbm=4, seed=1)
y, k0, truth = degrade(clean, spec)
print("kernel error std:", truth.error.std())
print("noise std (4 dBm -> 10^-1.3):", truth.noise.std())
print("observed range:", y.min(), y.max())  # not clipped
print("PSNR of clip(y):", psnr(np.clip(y, 0, 1), clean))

# same seed, same draws
y2, _, _ = degrade(clean, spec)
print("repeatable:", y.tobytes() == y2.tobytes())
