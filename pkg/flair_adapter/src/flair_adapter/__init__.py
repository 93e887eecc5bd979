"""Adapter that runs an external sequence-labeling model over a corpus and
emits the tag-interchange format."""

from .adapter import AdapterConfig, RunSummary, run_adapter
from .models import AdapterError, PatternModel, load_model

__version__ = "0.1.0"
