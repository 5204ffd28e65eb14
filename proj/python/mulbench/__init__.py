"""Multiplication benchmark generation and probing toolkit."""

from mulbench._core import (  # noqa: F401
    __version__,
    build_hds,
    compute_load,
    cosine_similarity,
    count_carries,
    exact_multiply,
    extract_answer,
    fit_error_rate,
    fit_logistic,
    gen_contrastive_pair,
    gen_trace,
    heuristic_costs,
    label_target,
    length_normalized_loss,
    llr,
    parse_words,
    render_image,
    render_prompt,
    sample_operand,
    to_words,
    verify_step,
    verify_trace,
)
