import json
import math
import random

import numpy as np
import pytest

from cogito.backends import OfflineGateway, hash_embed
from cogito.errors import DimensionMismatch, EmptyContext, ZeroNorm
from cogito.matching import (
    EmbeddingVector,
    best_match,
    cosine_similarity,
    rank_contexts,
)

from conftest import BUNDLE_DIR, KEYS_NEED_TEXT, KEYS_TOP_SENTENCE, TABLE_SCORES, TABLE_SENTENCES, make_sentence


def vec(*values) -> EmbeddingVector:
    return EmbeddingVector(np.array(values, dtype=np.float64))


def oracle_cosine(a, b) -> float:
    """Independent scalar cosine: fsum-based, no numpy."""
    dot = math.fsum(x * y for x, y in zip(a, b))
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(y * y for y in b))
    return dot / (na * nb)


def oracle_top1(need_values, contexts):
    """Independent O(n) max-scan with the documented tie rule:
    score desc, then text asc, then input index."""
    best = None
    for index, (sid, text, values) in enumerate(contexts):
        score = oracle_cosine(need_values, values)
        key = (-score, text, index)
        if best is None or key < best[0]:
            best = (key, sid)
    return best[1]


class TestCosine:
    def test_identical_vectors(self):
        assert cosine_similarity(vec(1, 0, 0), vec(1, 0, 0)) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity(vec(1, 0), vec(0, 1)) == 0.0

    def test_hand_evaluated_example(self):
        # oracle: dot=1, norms sqrt(2) and 1
        expected = oracle_cosine([1.0, 1.0], [1.0, 0.0])
        assert abs(expected - 0.7071067811865475) < 1e-12
        assert cosine_similarity(vec(1, 1), vec(1, 0)) == pytest.approx(expected, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_similarity(vec(1, 0), vec(1, 0, 0))

    def test_zero_norm_is_an_error_not_zero(self):
        with pytest.raises(ZeroNorm):
            cosine_similarity(vec(0, 0), vec(1, 0))


class TestCosineInvariants:
    def test_thousand_random_pairs(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            dim = int(rng.integers(2, 32))
            a = rng.normal(size=dim)
            b = rng.normal(size=dim)
            va, vb = EmbeddingVector(a), EmbeddingVector(b)
            ab = cosine_similarity(va, vb)
            ba = cosine_similarity(vb, va)
            assert abs(ab - ba) <= 1e-12
            assert -1.0 <= ab <= 1.0
            assert cosine_similarity(va, va) == pytest.approx(1.0, abs=1e-9)

    def test_argmax_invariant_under_positive_scaling(self):
        rng = np.random.default_rng(7)
        for trial in range(50):
            n = int(rng.integers(2, 12))
            dim = 16
            need = EmbeddingVector(rng.normal(size=dim))
            base = [(str(i), rng.normal(size=dim)) for i in range(n)]
            lam = float(rng.uniform(0.001, 1000.0))
            plain = rank_contexts(need, [(s, EmbeddingVector(v)) for s, v in base])
            scaled = rank_contexts(need, [(s, EmbeddingVector(lam * v)) for s, v in base])
            assert [sid for sid, _ in plain.entries] == [sid for sid, _ in scaled.entries]


class TestRankContexts:
    def test_single_context(self):
        need = vec(1, 0)
        ranking = rank_contexts(need, [("a", vec(0.5, 0.5))])
        assert len(ranking.entries) == 1
        assert ranking.entries[0][0] == "a"

    def test_identical_vectors_break_ties_lexicographically(self):
        need = vec(1, 0)
        same = vec(1, 1)
        ranking = rank_contexts(
            need,
            [("1", same), ("2", same)],
            texts={"1": "zebra crossing", "2": "apple tree"},
        )
        assert [sid for sid, _ in ranking.entries] == ["2", "1"]

    def test_entries_are_a_permutation_of_inputs(self):
        rng = np.random.default_rng(3)
        need = EmbeddingVector(rng.normal(size=8))
        pairs = [(str(i), EmbeddingVector(rng.normal(size=8))) for i in range(20)]
        ranking = rank_contexts(need, pairs)
        assert sorted(sid for sid, _ in ranking.entries) == sorted(p[0] for p in pairs)

    def test_scores_non_increasing(self):
        rng = np.random.default_rng(4)
        need = EmbeddingVector(rng.normal(size=8))
        pairs = [(str(i), EmbeddingVector(rng.normal(size=8))) for i in range(20)]
        scores = [score for _, score in rank_contexts(need, pairs).entries]
        assert all(a >= b for a, b in zip(scores, scores[1:]))

    def test_empty_context_rejected(self):
        with pytest.raises(EmptyContext):
            rank_contexts(vec(1, 0), [])


def random_words(rng: random.Random, n: int) -> str:
    vocab = ["cup", "table", "door", "keys", "laptop", "water", "chair", "light",
             "paper", "bag", "window", "bottle", "desk", "floor"]
    return " ".join(rng.choice(vocab) for _ in range(n))


class TestOracleEquivalence:
    def test_best_match_equals_brute_force_over_random_corpora(self):
        rng = random.Random(2024)
        gateway = OfflineGateway(embed_dim=64)
        for trial in range(50):
            texts = []
            seen = set()
            for i in range(rng.randint(2, 50)):
                t = random_words(rng, rng.randint(3, 8)) + f" #{i}"
                if t not in seen:
                    seen.add(t)
                    texts.append(t)
            contexts = [make_sentence(t, sid=str(i + 10)) for i, t in enumerate(texts)]
            need = make_sentence(random_words(rng, 5), sid="1")

            winner, _ = best_match(need, contexts, gateway)

            need_vals = hash_embed(need.text, 64).values.tolist()
            oracle_entries = [
                (c.id, c.text, hash_embed(c.text, 64).values.tolist()) for c in contexts
            ]
            assert winner.id == oracle_top1(need_vals, oracle_entries)

    def test_best_match_single_context(self):
        gateway = OfflineGateway()
        only = make_sentence("a cup on a table", sid="9")
        winner, _ = best_match(make_sentence("anything at all", sid="1"), [only], gateway)
        assert winner.id == "9"

    def test_best_match_empty_context(self):
        with pytest.raises(EmptyContext):
            best_match(make_sentence("x"), [], OfflineGateway())


class TestReferenceTableReplay:
    def test_keys_need_selects_the_keys_sentence(self):
        table = json.loads((BUNDLE_DIR / "embeddings.json").read_text())
        need_vec = EmbeddingVector(np.array(table[KEYS_NEED_TEXT]))
        pairs = []
        texts = {}
        for i, text in enumerate(TABLE_SENTENCES):
            sid = str(i + 1)
            pairs.append((sid, EmbeddingVector(np.array(table[text]))))
            texts[sid] = text
        ranking = rank_contexts(need_vec, pairs, texts=texts)
        top_id, top_score = ranking.top()
        assert texts[top_id] == KEYS_TOP_SENTENCE
        assert top_score == pytest.approx(0.4531, abs=0.02)

    def test_every_table_score_reproduces(self):
        table = json.loads((BUNDLE_DIR / "embeddings.json").read_text())
        need_vec = EmbeddingVector(np.array(table[KEYS_NEED_TEXT]))
        for text, expected in zip(TABLE_SENTENCES, TABLE_SCORES):
            score = cosine_similarity(need_vec, EmbeddingVector(np.array(table[text])))
            assert f"{score:.4f}" == f"{expected:.4f}"
