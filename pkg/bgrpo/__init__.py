"""B-GRPO: batch-as-group policy optimization for classifier refinement."""

__version__ = "0.1.0"
