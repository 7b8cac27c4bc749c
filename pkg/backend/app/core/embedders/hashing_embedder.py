import hashlib
import re
from typing import Any, Dict, List

import numpy as np

from backend.app.core.embedders.base_embedder import (
    DEFAULT_DIM,
    BaseEmbedder,
    EmbeddingVector,
    l2_normalize,
)

HASHING_SEED = 0x5EED_00B5

TOKEN_PATTERN = re.compile(r"\w+", re.UNICODE)

WORD_NGRAM = 3
CHAR_NGRAM = 4


class HashingEmbedder(BaseEmbedder):
    """
    Signed feature hashing of word 3-grams and character 4-grams into `dim`
    buckets, then L2 normalization. Deterministic across processes and
    platforms: blake2b keyed with a fixed seed, no Python hash().
    """

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = HASHING_SEED, **kwargs):
        super().__init__(dim, **kwargs)
        self.seed = seed
        self._key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")

    def embed(self, text: str) -> EmbeddingVector:
        features = self.extract_features(text)
        if not features:
            return EmbeddingVector.zeros(self.dim)

        indices = np.empty(len(features), dtype=np.int64)
        signs = np.empty(len(features), dtype=np.float64)
        for i, feature in enumerate(features):
            indices[i], signs[i] = self._hash_feature(feature)

        buckets = np.zeros(self.dim, dtype=np.float64)
        np.add.at(buckets, indices, signs)

        return EmbeddingVector(l2_normalize(buckets))

    def extract_features(self, text: str) -> List[str]:
        tokens = TOKEN_PATTERN.findall((text or "").lower())
        if not tokens:
            return []

        features = []
        if len(tokens) < WORD_NGRAM:
            features.append("w:" + " ".join(tokens))
        else:
            for i in range(len(tokens) - WORD_NGRAM + 1):
                features.append("w:" + " ".join(tokens[i:i + WORD_NGRAM]))

        padded = f" {' '.join(tokens)} "
        for i in range(len(padded) - CHAR_NGRAM + 1):
            features.append("c:" + padded[i:i + CHAR_NGRAM])

        return features

    def _hash_feature(self, feature: str):
        digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8, key=self._key).digest()
        value = int.from_bytes(digest, "little", signed=False)
        sign = -1.0 if value >> 63 else 1.0
        return value % self.dim, sign

    def get_embedder_info(self) -> Dict[str, Any]:
        return {
            "name": "hashing",
            "dim": self.dim,
            "seed": hex(self.seed),
            "features": [f"word_{WORD_NGRAM}gram", f"char_{CHAR_NGRAM}gram"],
        }
