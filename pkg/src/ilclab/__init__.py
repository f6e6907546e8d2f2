"""Inter-layer connection deployment for stacked Walker-Delta constellations."""

__version__ = "0.1.0"
