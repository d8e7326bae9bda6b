"""Evolve the internal unitaries of a quantum computation from input-target
pairs with a simple generational genetic algorithm, and analyze what the
search finds (rotation geometry, superposition balance, run-time scaling)."""

__version__ = "0.1.0"

from . import analysis, files, ga, genome, linalg, tasks
from .ga import GAConfig, Population, RunRecord, run
from .genome import CodecConfig
from .tasks import TaskSpec, deutsch_task

__all__ = [
    "CodecConfig",
    "GAConfig",
    "Population",
    "RunRecord",
    "TaskSpec",
    "__version__",
    "analysis",
    "deutsch_task",
    "files",
    "ga",
    "genome",
    "linalg",
    "run",
    "tasks",
]
