"""Python surface of the quasiperiodic Jacobi operator laboratory."""

try:
    from ._qjlab import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:  # build-tree layout: extension next to the package dir
    from _qjlab import *  # noqa: F401,F403

__version__ = "0.1.0"
