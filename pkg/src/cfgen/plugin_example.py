"""Worked example of an external target.

Reference it from a config as::

    "target": {"type": "external",
               "plugin": "cfgen.plugin_example:product_laplace",
               "args": {"d": 2, "scale": 0.7}}

or point ``plugin`` at a file, e.g. ``"my_targets.py:make_cf"``.  The
factory returns any object with ``dim`` and ``eval_batch(Z)``.
"""

import numpy as np

from .charfn import CharFn


class ProductLaplaceCF(CharFn):
    """i.i.d. Laplace(0, b) coordinates: ``prod_k 1 / (1 + b^2 z_k^2)``."""

    def __init__(self, d, scale=1.0):
        self.dim = int(d)
        self.scale = float(scale)

    def eval_batch(self, Z):
        Z = self._check_batch(Z)
        return np.prod(1.0 / (1.0 + (self.scale * Z) ** 2), axis=1).astype(complex)


def product_laplace(d=2, scale=1.0):
    return ProductLaplaceCF(d, scale)
