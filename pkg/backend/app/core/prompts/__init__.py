from .renderer import (
    PromptLibrary,
    default_prompts,
    render_string,
    template_fields,
    TEMPLATES_DIR,
)

__all__ = [
    'PromptLibrary',
    'default_prompts',
    'render_string',
    'template_fields',
    'TEMPLATES_DIR',
]
