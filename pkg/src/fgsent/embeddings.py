"""Embedding providers and the binary embedding file they share.

Two providers sit behind one interface: a deterministic hashed-static
provider (seeded random unit vector per token string, averaged over a
context window) and a file-backed provider reading precomputed contextual
vectors keyed by sent_id.

File format (little-endian): magic "FGSE", u32 version=1, u32 d,
u32 sentence count; per sentence: u32 sent_id byte length, UTF-8 sent_id,
u32 n, n*d float32 token vectors (row-major), d float32 sentence vector.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"FGSE"
VERSION = 1

SEP_TOKEN = "[SEP]"


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingMatrix:
    token_vectors: np.ndarray   # (n, d) float32
    sentence_vector: np.ndarray  # (d,) float32

    def __post_init__(self):
        tv, sv = self.token_vectors, self.sentence_vector
        if tv.ndim != 2 or sv.ndim != 1 or tv.shape[1] != sv.shape[0]:
            raise EmbeddingError(f"inconsistent shapes {tv.shape} / {sv.shape}")

    @property
    def dimension(self) -> int:
        return self.token_vectors.shape[1]

    def __len__(self) -> int:
        return self.token_vectors.shape[0]


class HashedStaticProvider:
    """Deterministic stand-in for a contextual encoder.

    Each token string hashes (with the seed) to a unit-norm base vector;
    the contextual vector at position i averages base vectors over the
    window [i-w, i+w]; the sentence vector averages the contextual rows.
    "[SEP]" gets the zero base vector.
    """

    kind = "hashed-static"

    def __init__(self, dimension: int = 64, seed: int = 0, window: int = 1):
        if dimension < 1:
            raise EmbeddingError(f"dimension must be positive, got {dimension}")
        if window < 0:
            raise EmbeddingError(f"window must be non-negative, got {window}")
        self.dimension = dimension
        self.seed = seed
        self.window = window
        self._cache: dict[str, np.ndarray] = {}

    @property
    def params(self) -> dict:
        """Everything needed to rebuild this provider (stored with models)."""
        return {"seed": self.seed, "window": self.window}

    def _base_vector(self, token: str) -> np.ndarray:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        if token == SEP_TOKEN:
            vec = np.zeros(self.dimension, dtype=np.float32)
        else:
            digest = hashlib.blake2b(f"{self.seed}:{token}".encode("utf-8"),
                                     digest_size=8).digest()
            rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))
            raw = rng.standard_normal(self.dimension)
            vec = (raw / np.linalg.norm(raw)).astype(np.float32)
        self._cache[token] = vec
        return vec

    def embed(self, tokens, sent_id: str | None = None) -> EmbeddingMatrix:
        tokens = list(tokens)
        if not tokens:
            raise EmbeddingError("cannot embed an empty token sequence")
        base = np.stack([self._base_vector(t) for t in tokens])
        n = len(tokens)
        w = self.window
        if w == 0:
            contextual = base
        else:
            contextual = np.empty_like(base)
            for i in range(n):
                lo, hi = max(0, i - w), min(n, i + w + 1)
                contextual[i] = base[lo:hi].mean(axis=0)
        sentence = contextual.mean(axis=0)
        return EmbeddingMatrix(contextual.astype(np.float32), sentence.astype(np.float32))


class FileBackedProvider:
    """Serves vectors read verbatim from one or more embedding files."""

    kind = "file-backed"

    def __init__(self, paths):
        if isinstance(paths, (str, Path)):
            paths = [paths]
        if not paths:
            raise EmbeddingError("no embedding files given")
        self.paths = [Path(p) for p in paths]
        self.dimension: int | None = None
        self._records: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for path in self.paths:
            d, records = read_embeddings(path)
            if self.dimension is None:
                self.dimension = d
            elif d != self.dimension:
                raise EmbeddingError(
                    f"{path}: dimension {d} differs from {self.dimension} of earlier files")
            for sent_id, rec in records.items():
                if sent_id in self._records:
                    raise EmbeddingError(f"{path}: duplicate sent_id {sent_id!r} across files")
                self._records[sent_id] = rec

    def __len__(self) -> int:
        return len(self._records)

    @property
    def params(self) -> dict:
        return {}  # file paths are supplied at load time, not stored in models

    def sentence_record(self, sent_id: str) -> tuple[np.ndarray, np.ndarray]:
        try:
            return self._records[sent_id]
        except KeyError:
            raise EmbeddingError(f"sent_id {sent_id!r} not present in embedding file(s) "
                                 f"{', '.join(str(p) for p in self.paths)}") from None

    def embed(self, tokens, sent_id: str | None = None) -> EmbeddingMatrix:
        if sent_id is None:
            raise EmbeddingError("file-backed provider needs a sent_id")
        token_vectors, sentence_vector = self.sentence_record(sent_id)
        n = len(list(tokens))
        if token_vectors.shape[0] != n:
            raise EmbeddingError(
                f"sent_id {sent_id!r}: embedding file has {token_vectors.shape[0]} rows "
                f"but the sequence has {n} tokens (augment mode mismatch?)")
        return EmbeddingMatrix(token_vectors, sentence_vector)


def write_embeddings(path: str | Path, dimension: int, records) -> None:
    """Write (sent_id, token_vectors, sentence_vector) records atomically."""
    path = Path(path)
    records = list(records)
    chunks = [MAGIC, struct.pack("<III", VERSION, dimension, len(records))]
    for sent_id, token_vectors, sentence_vector in records:
        tv = np.ascontiguousarray(token_vectors, dtype="<f4")
        sv = np.ascontiguousarray(sentence_vector, dtype="<f4")
        if tv.ndim != 2 or tv.shape[1] != dimension or sv.shape != (dimension,):
            raise EmbeddingError(f"record {sent_id!r}: shapes {tv.shape}/{sv.shape} "
                                 f"do not match d={dimension}")
        sid = sent_id.encode("utf-8")
        chunks.append(struct.pack("<I", len(sid)))
        chunks.append(sid)
        chunks.append(struct.pack("<I", tv.shape[0]))
        chunks.append(tv.tobytes())
        chunks.append(sv.tobytes())
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(b"".join(chunks))
    os.replace(tmp, path)


def read_embeddings(path: str | Path):
    """Read an embedding file; returns (d, {sent_id: (token_vectors, sentence_vector)})."""
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise EmbeddingError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 16:
        raise EmbeddingError(f"{path}: truncated header")
    version, d, count = struct.unpack_from("<III", data, 4)
    if version != VERSION:
        raise EmbeddingError(f"{path}: unsupported version {version}")
    if d < 1:
        raise EmbeddingError(f"{path}: invalid dimension {d}")

    offset = 16
    records: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    def take(nbytes: int) -> bytes:
        nonlocal offset
        if offset + nbytes > len(data):
            raise EmbeddingError(f"{path}: truncated at byte {offset}")
        out = data[offset : offset + nbytes]
        offset += nbytes
        return out

    for _ in range(count):
        (sid_len,) = struct.unpack("<I", take(4))
        sent_id = take(sid_len).decode("utf-8")
        if sent_id in records:
            raise EmbeddingError(f"{path}: duplicate sent_id {sent_id!r}")
        (n,) = struct.unpack("<I", take(4))
        tv = np.frombuffer(take(4 * n * d), dtype="<f4").reshape(n, d)
        sv = np.frombuffer(take(4 * d), dtype="<f4")
        records[sent_id] = (tv, sv)
    if offset != len(data):
        raise EmbeddingError(f"{path}: {len(data) - offset} trailing bytes")
    return d, records
