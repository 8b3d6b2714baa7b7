from __future__ import annotations

import numpy as np
import pytest

from fgsent.embeddings import (
    SEP_TOKEN,
    EmbeddingError,
    EmbeddingMatrix,
    FileBackedProvider,
    HashedStaticProvider,
    read_embeddings,
    write_embeddings,
)


class TestHashedStatic:
    def test_shapes_and_dtype(self):
        p = HashedStaticProvider(dimension=16, seed=0, window=1)
        m = p.embed(["a", "b", "c"])
        assert m.token_vectors.shape == (3, 16)
        assert m.token_vectors.dtype == np.float32
        assert m.sentence_vector.shape == (16,)

    def test_deterministic_per_seed(self):
        a = HashedStaticProvider(dimension=8, seed=3).embed(["x", "y"])
        b = HashedStaticProvider(dimension=8, seed=3).embed(["x", "y"])
        c = HashedStaticProvider(dimension=8, seed=4).embed(["x", "y"])
        assert np.array_equal(a.token_vectors, b.token_vectors)
        assert not np.array_equal(a.token_vectors, c.token_vectors)

    def test_base_vectors_unit_norm(self):
        p = HashedStaticProvider(dimension=32, seed=0, window=0)
        m = p.embed(["some", "words", "here"])
        norms = np.linalg.norm(m.token_vectors, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-6)

    def test_same_token_same_row_at_window_zero(self):
        p = HashedStaticProvider(dimension=16, seed=1, window=0)
        m = p.embed(["dog", "cat", "dog"])
        assert np.array_equal(m.token_vectors[0], m.token_vectors[2])
        assert not np.array_equal(m.token_vectors[0], m.token_vectors[1])

    def test_window_average_two_tokens(self):
        p0 = HashedStaticProvider(dimension=16, seed=5, window=0)
        p1 = HashedStaticProvider(dimension=16, seed=5, window=1)
        base = p0.embed(["left", "right"]).token_vectors
        ctx = p1.embed(["left", "right"]).token_vectors
        want = base.astype(np.float64).mean(axis=0).astype(np.float32)
        np.testing.assert_allclose(ctx[0], want, atol=1e-6)
        np.testing.assert_allclose(ctx[1], want, atol=1e-6)

    def test_window_clipped_at_edges(self):
        p0 = HashedStaticProvider(dimension=8, seed=5, window=0)
        p1 = HashedStaticProvider(dimension=8, seed=5, window=1)
        base = p0.embed(["a", "b", "c"]).token_vectors.astype(np.float64)
        ctx = p1.embed(["a", "b", "c"]).token_vectors
        np.testing.assert_allclose(ctx[0], base[:2].mean(axis=0), atol=1e-6)
        np.testing.assert_allclose(ctx[1], base.mean(axis=0), atol=1e-6)
        np.testing.assert_allclose(ctx[2], base[1:].mean(axis=0), atol=1e-6)

    def test_sentence_vector_is_contextual_mean(self):
        p = HashedStaticProvider(dimension=16, seed=2, window=1)
        m = p.embed(["a", "b", "c", "d"])
        want = m.token_vectors.astype(np.float64).mean(axis=0)
        np.testing.assert_allclose(m.sentence_vector, want, atol=1e-6)

    def test_single_token_sentence(self):
        p = HashedStaticProvider(dimension=8, seed=0, window=2)
        m = p.embed(["only"])
        np.testing.assert_array_equal(m.token_vectors[0], m.sentence_vector)

    def test_separator_embeds_to_zero(self):
        p = HashedStaticProvider(dimension=8, seed=0, window=0)
        m = p.embed(["a", SEP_TOKEN, "b"])
        assert m.token_vectors[0].any()      # ordinary token is nonzero
        assert not m.token_vectors[1].any()  # separator row is exactly zero

    def test_params_round_trip(self):
        p = HashedStaticProvider(dimension=8, seed=9, window=2)
        assert p.params == {"seed": 9, "window": 2}

    def test_rejects_bad_arguments(self):
        with pytest.raises(EmbeddingError):
            HashedStaticProvider(dimension=0)
        with pytest.raises(EmbeddingError):
            HashedStaticProvider(dimension=8, window=-1)
        with pytest.raises(EmbeddingError):
            HashedStaticProvider(dimension=8).embed([])


class TestMatrixType:
    def test_dimension_consistency_enforced(self):
        with pytest.raises(EmbeddingError):
            EmbeddingMatrix(np.zeros((2, 4), dtype=np.float32),
                            np.zeros(5, dtype=np.float32))

    def test_len_and_dimension(self):
        m = EmbeddingMatrix(np.zeros((3, 4), dtype=np.float32),
                            np.zeros(4, dtype=np.float32))
        assert len(m) == 3 and m.dimension == 4


def fake_records(d=6, n_sent=3):
    rng = np.random.default_rng(7)
    out = []
    for i in range(n_sent):
        n = i + 2
        out.append((f"sent-{i}",
                    rng.standard_normal((n, d)).astype(np.float32),
                    rng.standard_normal(d).astype(np.float32)))
    return out


class TestFileFormat:
    def test_write_read_bit_exact(self, tmp_path):
        path = tmp_path / "vecs.fgse"
        records = fake_records()
        write_embeddings(path, 6, records)
        d, got = read_embeddings(path)
        assert d == 6
        assert list(got) == [sid for sid, _, _ in records]
        for sid, tw, sw in records:
            tg, sg = got[sid]
            assert tw.tobytes() == tg.tobytes()
            assert sw.tobytes() == sg.tobytes()

    def test_header_layout(self, tmp_path):
        path = tmp_path / "vecs.fgse"
        write_embeddings(path, 6, fake_records(n_sent=2))
        raw = path.read_bytes()
        assert raw[:4] == b"FGSE"
        assert int.from_bytes(raw[4:8], "little") == 1
        assert int.from_bytes(raw[8:12], "little") == 6
        assert int.from_bytes(raw[12:16], "little") == 2

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "x.fgse"
        p.write_bytes(b"NOPE" + b"\x00" * 12)
        with pytest.raises(EmbeddingError, match="magic"):
            read_embeddings(p)

    def test_bad_version(self, tmp_path):
        p = tmp_path / "x.fgse"
        p.write_bytes(b"FGSE" + (2).to_bytes(4, "little") + b"\x00" * 8)
        with pytest.raises(EmbeddingError, match="version"):
            read_embeddings(p)

    def test_truncated_file(self, tmp_path):
        p = tmp_path / "x.fgse"
        write_embeddings(p, 6, fake_records(n_sent=2))
        p.write_bytes(p.read_bytes()[:-7])
        with pytest.raises(EmbeddingError, match="truncated"):
            read_embeddings(p)

    def test_trailing_bytes(self, tmp_path):
        p = tmp_path / "x.fgse"
        write_embeddings(p, 6, fake_records(n_sent=2))
        p.write_bytes(p.read_bytes() + b"junk")
        with pytest.raises(EmbeddingError, match="trailing"):
            read_embeddings(p)

    def test_write_dimension_mismatch(self, tmp_path):
        bad = [("s", np.zeros((2, 3), dtype=np.float32), np.zeros(3, dtype=np.float32))]
        with pytest.raises(EmbeddingError):
            write_embeddings(tmp_path / "x.fgse", 4, bad)


class TestFileBacked:
    def test_lookup_and_embed(self, tmp_path):
        path = tmp_path / "vecs.fgse"
        records = fake_records()
        write_embeddings(path, 6, records)
        p = FileBackedProvider([path])
        assert p.dimension == 6
        tok, sv = p.sentence_record("sent-1")
        assert tok.tobytes() == records[1][1].tobytes()
        m = p.embed(["t"] * 3, sent_id="sent-1")
        assert m.token_vectors.tobytes() == records[1][1].tobytes()
        assert np.array_equal(m.sentence_vector, records[1][2])

    def test_token_count_must_match(self, tmp_path):
        path = tmp_path / "vecs.fgse"
        write_embeddings(path, 6, fake_records())
        p = FileBackedProvider([path])
        with pytest.raises(EmbeddingError, match="token"):
            p.embed(["a", "b"], sent_id="sent-1")  # record holds 3 rows

    def test_missing_sent_id(self, tmp_path):
        path = tmp_path / "vecs.fgse"
        write_embeddings(path, 6, fake_records())
        p = FileBackedProvider([path])
        with pytest.raises(EmbeddingError, match="ghost"):
            p.sentence_record("ghost")

    def test_merges_multiple_files(self, tmp_path):
        a, b = tmp_path / "a.fgse", tmp_path / "b.fgse"
        recs = fake_records(n_sent=4)
        write_embeddings(a, 6, recs[:2])
        write_embeddings(b, 6, recs[2:])
        p = FileBackedProvider([a, b])
        assert len(p) == 4

    def test_duplicate_sent_id_across_files(self, tmp_path):
        a, b = tmp_path / "a.fgse", tmp_path / "b.fgse"
        recs = fake_records(n_sent=2)
        write_embeddings(a, 6, recs)
        write_embeddings(b, 6, recs[:1])
        with pytest.raises(EmbeddingError, match="duplicate"):
            FileBackedProvider([a, b])

    def test_dimension_mismatch_across_files(self, tmp_path):
        a, b = tmp_path / "a.fgse", tmp_path / "b.fgse"
        write_embeddings(a, 6, fake_records(n_sent=1))
        write_embeddings(b, 4, [("other", np.zeros((2, 4), np.float32),
                                 np.zeros(4, np.float32))])
        with pytest.raises(EmbeddingError, match="dimension"):
            FileBackedProvider([a, b])
