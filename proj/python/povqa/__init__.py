"""Benchmark forge for densely annotated multi-POV gameplay timelines.

Thin re-export of the compiled extension.  Structured data crosses the
boundary as plain dicts/lists that mirror the CLI's canonical JSON layouts.
"""

from ._povqa import (  # noqa: F401
    ModelClient,
    MockClient,
    TextClient,
    __version__,
    all_codes,
    analyze,
    apply_ablation,
    apply_filter,
    blind_filter,
    build_blind_prompt,
    build_prompt,
    canonical_line,
    decision_density,
    fast_letter,
    frame_plan,
    generate,
    judge_extract,
    make_client,
    paraphrase,
    parse_code,
    parse_instance,
    question_key,
    render_prompt_text,
    render_stem,
    run_eval,
    serialize_instance,
    stratified_downsample,
    synth_instance,
    validate_instance,
)

__all__ = [
    "ModelClient",
    "MockClient",
    "TextClient",
    "__version__",
    "all_codes",
    "analyze",
    "apply_ablation",
    "apply_filter",
    "blind_filter",
    "build_blind_prompt",
    "build_prompt",
    "canonical_line",
    "decision_density",
    "fast_letter",
    "frame_plan",
    "generate",
    "judge_extract",
    "make_client",
    "paraphrase",
    "parse_code",
    "parse_instance",
    "question_key",
    "render_prompt_text",
    "render_stem",
    "run_eval",
    "serialize_instance",
    "stratified_downsample",
    "synth_instance",
    "validate_instance",
]
