from .pipeline import (
    RetrievalRequest,
    AugmentedPrompt,
    render_system_prompt,
    build_rewrite_request,
    rewrite_query,
    effective_k,
    retrieve,
    augment_prompt,
    MEMORY_HEADER,
    CONTEXT_LABEL,
)

__all__ = [
    'RetrievalRequest',
    'AugmentedPrompt',
    'render_system_prompt',
    'build_rewrite_request',
    'rewrite_query',
    'effective_k',
    'retrieve',
    'augment_prompt',
    'MEMORY_HEADER',
    'CONTEXT_LABEL',
]
