"""Embedding abstraction: a deterministic offline embedder plus an HTTP adapter.

The offline embedder is a hashed bag of words: terms are hashed with 64-bit
FNV-1a into one of ``dim`` buckets, counted, and L2-normalized. It is fully
deterministic across runs and platforms, which makes retrieval pipelines
golden-file testable. Real embedding models are reached over HTTP only; the
engine never executes a model in-process.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, TransportError
from .httputil import post_json
from .textutil import terms

DEFAULT_DIM = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash. The documented, platform-stable token hash."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _FNV_MASK
    return h


def token_bucket(token: str, dim: int) -> int:
    return fnv1a64(token.encode("utf-8")) % dim


@dataclass(frozen=True)
class EmbedderSpec:
    """How to turn text into vectors.

    kind is ``hashed_bow`` (offline, deterministic) or ``http``. HTTP embedders
    POST ``{"input": text}`` and expect ``{"embedding": [floats]}`` of length
    ``dim`` back; the auth token is read from the environment variable named by
    ``auth_env`` when set.
    """

    kind: str = "hashed_bow"
    dim: int = DEFAULT_DIM
    endpoint_url: str | None = None
    auth_env: str | None = None

    def __post_init__(self):
        if self.kind not in ("hashed_bow", "http"):
            raise ContractError(f"unknown embedder kind {self.kind!r}")
        if self.dim <= 0:
            raise ContractError("embedding dim must be positive")
        if self.kind == "http" and not self.endpoint_url:
            raise ContractError("http embedder requires endpoint_url")


@dataclass
class EmbeddingVector:
    """Unit-norm float vector. ``empty`` flags the all-zero vector of empty text."""

    values: np.ndarray
    empty: bool = False

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def tolist(self) -> list[float]:
        return [float(v) for v in self.values]


def _normalize(vec: np.ndarray) -> tuple[np.ndarray, bool]:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return vec, True
    return vec / norm, False


def embed(text: str, spec: EmbedderSpec) -> EmbeddingVector:
    """Embed one text per the spec. Deterministic for ``hashed_bow``."""
    if spec.kind == "hashed_bow":
        vec = np.zeros(spec.dim, dtype=np.float64)
        for term in terms(text):
            vec[token_bucket(term, spec.dim)] += 1.0
        values, is_zero = _normalize(vec)
        return EmbeddingVector(values=values, empty=is_zero)
    return _embed_http(text, spec)


def _embed_http(text: str, spec: EmbedderSpec) -> EmbeddingVector:
    reply = post_json(spec.endpoint_url, {"input": text}, auth_env=spec.auth_env)
    try:
        raw = reply["embedding"]
        vec = np.asarray([float(v) for v in raw], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise TransportError(f"malformed embedding response: {exc}") from exc
    if vec.shape[0] != spec.dim:
        raise ContractError(
            f"embedding endpoint returned dim {vec.shape[0]}, expected {spec.dim}"
        )
    if not np.all(np.isfinite(vec)):
        raise ContractError("embedding endpoint returned non-finite values")
    values, is_zero = _normalize(vec)
    return EmbeddingVector(values=values, empty=is_zero)


def make_embedder(spec: EmbedderSpec):
    """Bind a spec into a plain ``text -> EmbeddingVector`` callable."""

    def _embed(text: str) -> EmbeddingVector:
        return embed(text, spec)

    return _embed


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity in [-1, 1]; 0.0 when either vector has zero norm."""
    if a.dim != b.dim:
        raise ContractError(f"dimension mismatch: {a.dim} vs {b.dim}")
    na = float(np.linalg.norm(a.values))
    nb = float(np.linalg.norm(b.values))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a.values, b.values) / (na * nb))


def spec_from_dict(raw: dict) -> EmbedderSpec:
    return EmbedderSpec(
        kind=raw.get("kind", "hashed_bow"),
        dim=int(raw.get("dim", DEFAULT_DIM)),
        endpoint_url=raw.get("endpoint_url"),
        auth_env=raw.get("auth_env"),
    )


def spec_to_dict(spec: EmbedderSpec) -> dict:
    out = {"kind": spec.kind, "dim": spec.dim}
    if spec.endpoint_url:
        out["endpoint_url"] = spec.endpoint_url
    if spec.auth_env:
        out["auth_env"] = spec.auth_env
    return out
