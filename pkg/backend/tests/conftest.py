from datetime import datetime, timedelta, timezone
from typing import Callable, List, Optional

import pytest
from fastapi.testclient import TestClient

from backend.app.config import Settings
from backend.app.core.embedders import HashingEmbedder
from backend.app.core.llm_adapters import build_scripted_backend
from backend.app.core.orbs import RewardDetail, Trajectory, Turn
from backend.app.main import create_app
from backend.app.services import MemoryEngine

FIXED_NOW = datetime(2025, 3, 14, 9, 26, 53, 589793, tzinfo=timezone.utc)

SUCCESS = RewardDetail(reward=1.0, action=1.0, search=1.0, output=1.0)
FAILURE = RewardDetail(reward=0.0, action=0.0, search=1.0, output=0.0)


def make_trajectory(
    utterances: Optional[List[str]] = None,
    reward: Optional[RewardDetail] = FAILURE,
    user_id: str = "user-001",
    scenario: str = "Customer wants a refund for a damaged kettle.",
    shop_id: str = "shop-001",
    platform: str = "test-mall",
) -> Trajectory:
    utterances = utterances or ["My kettle arrived dented.", "This is really frustrating."]
    turns = [Turn(user_utterance=text, agent_action=f"reply {i}") for i, text in enumerate(utterances[:-1])]
    turns.append(Turn(user_utterance=utterances[-1], reward=reward))
    return Trajectory(turns=turns, scenario=scenario, user_id=user_id, shop_id=shop_id, platform=platform)


def build_engine(data_dir=None, dim: int = 768, **kwargs) -> MemoryEngine:
    return MemoryEngine(
        reflection_model=kwargs.pop("reflection_model", None) or build_scripted_backend(),
        embedder=kwargs.pop("embedder", None) or HashingEmbedder(dim=dim),
        data_dir=data_dir,
        fsync=False,
        **kwargs
    )


@pytest.fixture
def fixed_now() -> datetime:
    return FIXED_NOW


@pytest.fixture
def trajectory_factory() -> Callable[..., Trajectory]:
    return make_trajectory


@pytest.fixture
def embedder() -> HashingEmbedder:
    return HashingEmbedder(dim=768)


@pytest.fixture
def engine() -> MemoryEngine:
    return build_engine()


@pytest.fixture
def disk_engine_factory(tmp_path) -> Callable[..., MemoryEngine]:
    def factory(**kwargs) -> MemoryEngine:
        return build_engine(data_dir=tmp_path / "memory", **kwargs)
    return factory


@pytest.fixture
def test_settings(tmp_path) -> Settings:
    return Settings(DATA_DIR=str(tmp_path / "memory"), LOG_TO_FILE=False, CORS_ORIGINS="*")


@pytest.fixture
def client(engine, test_settings) -> TestClient:
    with TestClient(create_app(engine=engine, settings=test_settings)) as test_client:
        yield test_client


def episode_payload(trajectory: Trajectory, now: Optional[datetime] = None, memory_context: str = "") -> dict:
    payload = {"trajectory": trajectory.model_dump(mode="json"), "memory_context": memory_context}
    if now is not None:
        payload["now"] = now.isoformat()
    return payload


def staggered(now: datetime, index: int) -> datetime:
    return now + timedelta(seconds=index)
