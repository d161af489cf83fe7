"""Three-stage training-free prompting: explanation, literal gloss, final translation."""

from .pipeline import (
    STAGES,
    PipelineStageError,
    PromptTrace,
    build_explanation_prompt,
    build_final_prompt,
    build_literal_prompt,
    load_traces,
    run_batch,
    run_pipeline,
    save_traces,
)
from .templates import TEMPLATE_SHA256, load_template

__all__ = [
    "STAGES", "PipelineStageError", "PromptTrace", "build_explanation_prompt",
    "build_final_prompt", "build_literal_prompt", "load_traces", "run_batch", "run_pipeline",
    "save_traces", "TEMPLATE_SHA256", "load_template",
]
