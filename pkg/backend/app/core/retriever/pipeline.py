from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator

from backend.app.config import get_logger
from backend.app.core.embedders import BaseEmbedder
from backend.app.core.llm_adapters import BaseLLMAdapter
from backend.app.core.prompts import PromptLibrary, default_prompts
from backend.app.core.stores import FlatVectorStore, IndexView, RetrievalResult
from backend.app.utils.exceptions import AlignmentMismatchError, InputValidationError

logger = get_logger(__name__)

MEMORY_HEADER = "## Relevant past reflections"
CONTEXT_LABEL = "Dialogue context:"
ABLATION_K = 1


class RetrievalRequest(BaseModel):
    query: str = Field(..., min_length=1)
    context: str = ""
    k: Optional[int] = Field(default=None, ge=1)
    requesting_user: Optional[str] = None

    @field_validator("query")
    @classmethod
    def query_not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("query must not be blank")
        return v


class AugmentedPrompt(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    injected_orb_ids: List[str] = Field(default_factory=list)


def render_system_prompt(
    platform: str = "",
    shop_id: str = "",
    user_id: str = "",
    prompts: PromptLibrary = default_prompts
) -> str:
    return prompts.render("system", platform=platform, shop_id=shop_id, user_id=user_id)


def build_rewrite_request(query: str, context: str = "") -> str:
    if context:
        return f"{query}\n{CONTEXT_LABEL}\n{context}"
    return query


def rewrite_query(
    model: BaseLLMAdapter,
    query: str,
    context: str = "",
    prompts: PromptLibrary = default_prompts
) -> str:
    if not query:
        raise InputValidationError(message="query must not be empty")
    prompt = prompts.render("rewrite", request=build_rewrite_request(query, context))
    return model.complete(prompt)


def effective_k(request: RetrievalRequest, k_default: int = 5, cross_user: bool = True) -> int:
    # Cross-user ablation is operationalized as single-orb retrieval.
    if not cross_user:
        return ABLATION_K
    return request.k if request.k is not None else k_default


def retrieve(
    request: RetrievalRequest,
    model: BaseLLMAdapter,
    embedder: BaseEmbedder,
    vector_store: FlatVectorStore,
    k_default: int = 5,
    cross_user: bool = True,
    view: Optional[IndexView] = None,
    prompts: PromptLibrary = default_prompts
) -> RetrievalResult:
    k = effective_k(request, k_default, cross_user)
    rewritten = rewrite_query(model, request.query, request.context, prompts)
    embedding = embedder.embed(rewritten)
    result = vector_store.query_topk(embedding, k, view=view)

    logger.debug(
        "Retrieval completed",
        k=k,
        hits=len(result.hits),
        requesting_user=request.requesting_user,
    )
    return result


def augment_prompt(base: str, result: RetrievalResult, orb_texts: Sequence[str]) -> AugmentedPrompt:
    if len(orb_texts) != len(result.hits):
        raise AlignmentMismatchError(
            message="orb_texts must align with retrieval hits",
            details={"hits": len(result.hits), "texts": len(orb_texts)}
        )
    if not result.hits:
        return AugmentedPrompt(text=base, injected_orb_ids=[])

    lines = [MEMORY_HEADER]
    for hit, text in zip(result.hits, orb_texts):
        lines.append(f"- [{hit.orb_id[:8]}] {text}")

    return AugmentedPrompt(
        text="\n".join(lines) + "\n\n" + base,
        injected_orb_ids=result.orb_ids,
    )
