"""prewet: exact transfer-operator computations and seeded simulation for
area-tilted random walks pinned to a hard wall."""

__version__ = "0.1.0"
