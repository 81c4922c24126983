"""Indoor/outdoor context detection from lower-back inertial gait data."""

import os

# skip the TBB probe (and its version warning) unless a user asked otherwise
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

from .errors import DegenerateTraining, GaitCtxError, InvalidInput, NotFitted  # noqa: E402

__version__ = "0.1.0"
__all__ = ["GaitCtxError", "InvalidInput", "DegenerateTraining", "NotFitted", "__version__"]
