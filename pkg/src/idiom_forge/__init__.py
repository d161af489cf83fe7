"""Idiom translation tooling: data preparation, MTQE rewards, GRPO batch export,
structured prompting and evaluation."""

__version__ = "0.1.0"
