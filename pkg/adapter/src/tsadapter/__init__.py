"""Reference stdio adapter for serving time-series classifiers."""

from .models import NearestCentroidModel, TrainedModelStub, UniformModel
from .server import AdapterSession, serve

__all__ = [
    "AdapterSession",
    "NearestCentroidModel",
    "TrainedModelStub",
    "UniformModel",
    "serve",
]
