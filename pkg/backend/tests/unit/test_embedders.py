import httpx
import numpy as np
import pytest

from backend.app.config import Settings
from backend.app.core.embedders import (
    EmbedderFactory,
    EmbeddingVector,
    HashingEmbedder,
    RemoteEmbedder,
    create_embedder,
)
from backend.app.utils.exceptions import (
    DimensionMismatchError,
    EmbedderTransportError,
    InputValidationError,
    InvalidConfigurationError,
)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    return a.dot(b)


class TestHashingEmbedder:
    def test_deterministic(self, embedder):
        assert np.array_equal(embedder.embed("abc").values, embedder.embed("abc").values)

    def test_separate_instances_agree(self):
        assert np.array_equal(HashingEmbedder(64).embed("order 1").values, HashingEmbedder(64).embed("order 1").values)

    def test_embed_many_matches_embed(self, embedder):
        texts = ["refund the kettle", "", "change my address"]
        batch = embedder.embed_many(texts)
        assert len(batch) == 3
        for text, vector in zip(texts, batch):
            assert np.array_equal(vector.values, embedder.embed(text).values)
        assert embedder.embed_many([]) == []

    def test_empty_text_is_zero_vector(self, embedder):
        vector = embedder.embed("")
        assert vector.dim == 768
        assert vector.norm == 0.0

    def test_unit_norm(self, embedder):
        assert embedder.embed("return the red shirt").norm == pytest.approx(1.0, abs=1e-6)

    def test_similarity_ordering(self, embedder):
        query = embedder.embed("return the red shirt")
        near = embedder.embed("refund the red shirt")
        far = embedder.embed("quantum flux capacitor")
        assert cosine(query, near) > cosine(query, far)

    def test_short_input_uses_whole_token_sequence(self, embedder):
        assert embedder.extract_features("Hi there")[0] == "w:hi there"

    def test_seed_changes_buckets(self):
        assert not np.array_equal(
            HashingEmbedder(64, seed=1).embed("same text").values,
            HashingEmbedder(64, seed=2).embed("same text").values,
        )

    def test_invalid_dim(self):
        with pytest.raises(InputValidationError):
            HashingEmbedder(dim=0)


class TestEmbeddingVector:
    def test_read_only(self):
        vector = EmbeddingVector.from_sequence([1.0, 0.0])
        with pytest.raises(ValueError):
            vector.values[0] = 2.0

    def test_non_finite_rejected(self):
        with pytest.raises(InputValidationError):
            EmbeddingVector.from_sequence([1.0, float("nan")])

    def test_dot_dim_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            EmbeddingVector.from_sequence([1.0]).dot(EmbeddingVector.from_sequence([1.0, 0.0]))


def remote(handler, dim: int = 4) -> RemoteEmbedder:
    return RemoteEmbedder("http://encoder.test/embed", dim=dim, client=httpx.Client(transport=httpx.MockTransport(handler)))


class TestRemoteEmbedder:
    def test_normalizes_response(self):
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["body"] = request.read()
            return httpx.Response(200, json={"embedding": [3.0, 4.0, 0.0, 0.0]})

        vector = remote(handler).embed("hello")
        assert b'"text"' in seen["body"]
        assert vector.to_list() == pytest.approx([0.6, 0.8, 0.0, 0.0])

    def test_wrong_dim(self):
        embedder = remote(lambda request: httpx.Response(200, json={"embedding": [1.0, 0.0]}))
        with pytest.raises(DimensionMismatchError):
            embedder.embed("hello")

    def test_transport_failure(self):
        def handler(request):
            raise httpx.ConnectError("refused", request=request)

        with pytest.raises(EmbedderTransportError):
            remote(handler).embed("hello")

    def test_http_error_status(self):
        with pytest.raises(EmbedderTransportError):
            remote(lambda request: httpx.Response(503)).embed("hello")


class TestEmbedderFactory:
    def test_hashing_by_default(self):
        embedder = EmbedderFactory.from_settings(Settings(EMBED_DIM=32))
        assert isinstance(embedder, HashingEmbedder)
        assert embedder.dim == 32

    def test_remote_when_endpoint_configured(self):
        embedder = EmbedderFactory.from_settings(Settings(EMBED_DIM=8, EMBED_ENDPOINT="http://encoder.test/embed"))
        try:
            assert isinstance(embedder, RemoteEmbedder)
        finally:
            embedder.close()

    def test_unknown_name(self):
        with pytest.raises(InvalidConfigurationError):
            create_embedder("bge")
