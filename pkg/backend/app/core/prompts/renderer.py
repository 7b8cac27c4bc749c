from pathlib import Path
from string import Formatter
from typing import Any, Dict, List, Optional, Union

from backend.app.config import get_logger
from backend.app.utils.exceptions import TemplateRenderError

logger = get_logger(__name__)

TEMPLATES_DIR = Path(__file__).resolve().parent / "templates"


def template_fields(template: str) -> List[str]:
    """Placeholder names in order of appearance. Only bare `{name}` is allowed."""
    fields = []
    try:
        parsed = list(Formatter().parse(template))
    except ValueError as e:
        raise TemplateRenderError(message=f"Malformed template: {e}")

    for _, field, format_spec, conversion in parsed:
        if field is None:
            continue
        if not field.isidentifier() or format_spec or conversion:
            raise TemplateRenderError(
                message=f"Unsupported placeholder '{{{field}}}'",
                details={"placeholder": field}
            )
        fields.append(field)
    return fields


def render_string(template: str, values: Dict[str, Any]) -> str:
    missing = [name for name in template_fields(template) if name not in values]
    if missing:
        raise TemplateRenderError(
            message=f"No value for placeholder(s): {', '.join(sorted(set(missing)))}",
            details={"missing": sorted(set(missing))}
        )
    return template.format_map({key: str(value) for key, value in values.items()})


class PromptLibrary:
    """
    UTF-8 prompt assets with `{name}` placeholders. Point `templates_dir` at
    a copy of the bundled directory to localize prompts without code changes.
    """

    def __init__(self, templates_dir: Optional[Union[str, Path]] = None):
        self.templates_dir = Path(templates_dir) if templates_dir else TEMPLATES_DIR
        self._cache: Dict[str, str] = {}

    def load(self, name: str) -> str:
        if name not in self._cache:
            path = self.templates_dir / f"{name}.txt"
            try:
                self._cache[name] = path.read_text(encoding="utf-8")
            except OSError as e:
                logger.error("Prompt template unavailable", template=name, path=str(path))
                raise TemplateRenderError(
                    message=f"Prompt template '{name}' not found",
                    details={"path": str(path), "error": str(e)}
                )
        return self._cache[name]

    def render(self, name: str, **values: Any) -> str:
        return render_string(self.load(name), values)


default_prompts = PromptLibrary()
