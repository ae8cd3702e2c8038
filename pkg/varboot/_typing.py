"""Module contains array type aliases."""
from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import NDArray


__all__ = (
    "FloatArray",
)


FloatArray = NDArray[np.floating[Any]]
