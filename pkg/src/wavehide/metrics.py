import math

import numpy as np

from .imageio import Image


def psnr(a: Image, b: Image) -> float:
    """Peak signal-to-noise ratio in dB for 8-bit images; inf when identical."""
    pa = np.asarray(a.pixels if isinstance(a, Image) else a, dtype=np.float64)
    pb = np.asarray(b.pixels if isinstance(b, Image) else b, dtype=np.float64)
    if pa.shape != pb.shape:
        raise ValueError(f"image sizes differ: {pa.shape} vs {pb.shape}")
    mse = float(np.mean((pa - pb) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)
