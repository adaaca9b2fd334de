"""Dynamic mmWave IAB network simulator with learned scheduling and slicing."""

__version__ = "0.1.0"
