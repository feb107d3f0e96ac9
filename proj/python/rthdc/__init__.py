"""Racetrack compute-in-memory HDC language recognizer.

Thin Python surface over the C++ core: text normalization, the software
reference encoder, synthetic datasets, and the device-backed pipeline with
its energy/latency reports.
"""

try:
    from ._rthdc import *  # noqa: F401,F403  (installed package layout)
    from ._rthdc import __doc__ as _core_doc  # noqa: F401
except ImportError:  # in-tree build: module on PYTHONPATH next to the package
    from _rthdc import *  # noqa: F401,F403

__all__ = [
    "normalize",
    "render",
    "encode",
    "hamming",
    "Dataset",
    "load_dataset",
    "synth_corpus",
    "write_dataset",
    "Pipeline",
    "load_pipeline",
    "selftest",
    "ConfigError",
    "PreconditionError",
]
