"""Tornado early detection from daily gridded weather snapshots.

Modules
-------
schema, ingestion
    Snapshot, window and dataset types, file formats and negative sampling.
features
    Quadrant mean/std feature vectors and standardization.
classifiers
    Six binary classifiers behind one fit/predict interface.
evaluation
    POD/FAR, the year split and the day-window ablation.
synth
    Seeded synthetic data with a Bayes-optimal oracle.
monitor, cli
    Rolling-buffer alerting and the ``tornadet`` command line.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND  # noqa: E402

__all__ = ["KERNEL_BACKEND", "__version__"]
