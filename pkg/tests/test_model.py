import numpy as np
import pytest

from sysask import numerics as nm
from sysask.corpus.types import ClaritDialogue
from sysask.model.config import ModelConfig
from sysask.model.network import Mas2sModel
from sysask.tokenizer import (
    build_vocab,
    encode_dialogue,
    encode_knowledge,
    encode_profile,
)


def tiny_corpus():
    return [
        ClaritDialogue("a", "can I apply", ["I work daily."],
                       "the rule says apply", [("do you work ?", "Yes")], "Yes"),
        ClaritDialogue("b", "can I claim", ["I do not work."],
                       "the rule says claim", [("do you work ?", "No")], "No"),
    ]


@pytest.fixture(scope="module")
def vocab():
    return build_vocab(tiny_corpus())


def make_model(vocab, **overrides):
    defaults = dict(hidden=16, layers=1, heads=2, max_len=64, dropout=0.0,
                    max_decode_len=8)
    defaults.update(overrides)
    return Mas2sModel(ModelConfig(**defaults), vocab, seed=0)


@pytest.fixture
def model(vocab):
    return make_model(vocab)


class TestEncoders:
    def test_dialogue_shape(self, model, vocab):
        enc = encode_dialogue("can I apply", [("do you work ?", "Yes")], vocab)
        s_d = model.encode_dialogue_seq(enc)
        assert s_d.shape == (len(enc.ids), model.config.hidden)

    def test_zero_layer_encoder_is_embeddings(self, vocab):
        m = make_model(vocab, layers=0)
        enc = encode_knowledge("the rule", vocab)
        s = m.encode_sequence(enc.ids)
        expected = m.params["embed"].values[enc.ids] + m.params["pos"].values[: len(enc.ids)]
        np.testing.assert_allclose(s.values, expected)

    def test_position_sensitivity(self, model, vocab):
        a = model.encode_sequence(vocab.encode_text("work rule says"))
        b = model.encode_sequence(vocab.encode_text("says rule work"))
        assert not np.allclose(a.values, b.values)

    def test_empty_profile_two_rows(self, model, vocab):
        s_u = model.encode_profile_seq(encode_profile([], vocab))
        assert s_u.shape == (2, model.config.hidden)

    def test_knowledge_vector_shape(self, model, vocab):
        s_t = model.encode_knowledge_seq(encode_knowledge("the rule says apply", vocab))
        assert s_t.shape == (model.config.hidden,)

    def test_length_exceeded(self, vocab):
        from sysask.model.network import LengthExceeded
        m = make_model(vocab, max_len=8)
        with pytest.raises(LengthExceeded):
            m.encode_sequence(list(range(4)) * 5)


class TestKnowledgeAttention:
    def test_single_row_is_one(self, model):
        s = nm.Tensor(np.random.default_rng(0).normal(size=(1, 16)))
        s_t = nm.Tensor(np.random.default_rng(1).normal(size=16))
        a = model.knowledge_attention(s, s_t, model.params["W_d"])
        np.testing.assert_allclose(a.values, [1.0])

    def test_identical_rows_equal_weights(self, model):
        v = np.random.default_rng(2).normal(size=16)
        s = nm.Tensor(np.stack([v, v]))
        s_t = nm.Tensor(np.random.default_rng(3).normal(size=16))
        a = model.knowledge_attention(s, s_t, model.params["W_d"])
        np.testing.assert_allclose(a.values, [0.5, 0.5])

    def test_zero_bilinear_uniform(self, model):
        s = nm.Tensor(np.random.default_rng(4).normal(size=(5, 16)))
        s_t = nm.Tensor(np.random.default_rng(5).normal(size=16))
        a = model.knowledge_attention(s, s_t, nm.Tensor(np.zeros((16, 16))))
        np.testing.assert_allclose(a.values, np.full(5, 0.2))

    def test_sums_to_one_both_paths(self, vocab):
        rng = np.random.default_rng(6)
        for literal in (False, True):
            m = make_model(vocab, literal_eq4=literal)
            s = nm.Tensor(rng.normal(size=(7, 16)))
            s_t = nm.Tensor(rng.normal(size=16))
            a = m.knowledge_attention(s, s_t, m.params["W_d"])
            assert abs(a.values.sum() - 1.0) < 1e-9

    def test_literal_path_differs(self, vocab):
        rng = np.random.default_rng(7)
        s_raw = rng.normal(size=(4, 16)) * 2
        s_t_raw = rng.normal(size=16)
        results = []
        for literal in (False, True):
            m = make_model(vocab, literal_eq4=literal)
            a = m.knowledge_attention(nm.Tensor(s_raw), nm.Tensor(s_t_raw),
                                      m.params["W_d"])
            results.append(a.values)
        assert not np.allclose(results[0], results[1])


class TestAttendedRepresentation:
    def test_one_hot_selects_row(self, model):
        s = nm.Tensor(np.random.default_rng(8).normal(size=(3, 16)))
        a = nm.Tensor(np.array([0.0, 1.0, 0.0]))
        out = Mas2sModel.attended_representation(s, a)
        np.testing.assert_allclose(out.values, s.values[1])

    def test_equal_rows_give_that_row(self, model):
        v = np.random.default_rng(9).normal(size=16)
        s = nm.Tensor(np.stack([v, v, v]))
        a = nm.Tensor(np.array([0.2, 0.3, 0.5]))
        out = Mas2sModel.attended_representation(s, a)
        np.testing.assert_allclose(out.values, v)

    def test_convex_hull(self, model):
        rng = np.random.default_rng(10)
        s = nm.Tensor(rng.normal(size=(4, 16)))
        w = rng.random(4)
        a = nm.Tensor(w / w.sum())
        out = Mas2sModel.attended_representation(s, a).values
        assert (out <= s.values.max(axis=0) + 1e-12).all()
        assert (out >= s.values.min(axis=0) - 1e-12).all()

    def test_mismatched_weights(self, model):
        with pytest.raises(nm.ShapeMismatch):
            Mas2sModel.attended_representation(
                nm.Tensor(np.ones((3, 16))), nm.Tensor(np.ones(4) / 4))


class TestConfidenceEmbedding:
    def test_zero_mlp_gives_zero(self, model):
        for name in ("mlp.w1", "mlp.b1", "mlp.w2", "mlp.b2"):
            model.params[name].values[:] = 0.0
        d = nm.Tensor(np.ones(16))
        u = nm.Tensor(np.ones(16))
        c = model.confidence_embedding(d, u)
        np.testing.assert_allclose(c.values, np.zeros(16))

    def test_output_shape_and_determinism(self, model):
        rng = np.random.default_rng(11)
        d = nm.Tensor(rng.normal(size=16))
        u = nm.Tensor(rng.normal(size=16))
        c1 = model.confidence_embedding(d, u)
        c2 = model.confidence_embedding(d, u)
        assert c1.shape == (16,)
        np.testing.assert_array_equal(c1.values, c2.values)


class TestOutputDistribution:
    def test_zero_hidden_uniform(self, model, vocab):
        h = nm.Tensor(np.zeros((1, 16)))
        model.params["b_v"].values[:] = 0.0
        p = model.output_distribution(h).values[0]
        np.testing.assert_allclose(p, np.full(len(vocab), 1 / len(vocab)))

    def test_sums_to_one(self, model):
        h = nm.Tensor(np.random.default_rng(12).normal(size=(3, 16)))
        p = model.output_distribution(h).values
        np.testing.assert_allclose(p.sum(axis=1), np.ones(3), atol=1e-9)

    def test_bias_monotonicity(self, model):
        h = nm.Tensor(np.random.default_rng(13).normal(size=(1, 16)))
        base = model.output_distribution(h).values[0]
        model.params["b_v"].values[5] += 50.0
        boosted = model.output_distribution(h).values[0]
        assert boosted[5] > base[5] and boosted[5] > 0.99

    def test_argmax_shift_invariant(self, model):
        h = nm.Tensor(np.random.default_rng(14).normal(size=(1, 16)))
        base = np.argmax(model.output_distribution(h).values[0])
        model.params["b_v"].values += 3.7
        shifted = np.argmax(model.output_distribution(h).values[0])
        assert base == shifted


def build_memory(model, vocab, request="can I apply", profile=("I work daily.",),
                 knowledge="the rule says apply", history=()):
    return model.build_memory(
        encode_dialogue(request, list(history), vocab),
        encode_profile(list(profile), vocab),
        encode_knowledge(knowledge, vocab),
    )


class TestMemoryAndDecoder:
    def test_confidence_memory_single_row(self, model, vocab):
        memory = build_memory(model, vocab)
        assert memory.shape == (1, model.config.hidden)

    def test_wocen_memory_three_rows(self, vocab):
        m = make_model(vocab, use_confidence_network=False)
        memory = build_memory(m, vocab)
        assert memory.shape == (3, m.config.hidden)

    def test_profile_invariance_without_profile(self, vocab):
        m = make_model(vocab, use_profile=False)
        a = build_memory(m, vocab, profile=("I work daily.",))
        b = build_memory(m, vocab, profile=("I do not work.", "I am old."))
        np.testing.assert_array_equal(a.values, b.values)

    def test_profile_sensitivity_with_profile(self, model, vocab):
        a = build_memory(model, vocab, profile=("I work daily.",))
        b = build_memory(model, vocab, profile=("I do not work.",))
        assert not np.allclose(a.values, b.values)

    def test_decoder_hidden_shape_and_determinism(self, model, vocab):
        memory = build_memory(model, vocab)
        h1 = model.decoder_hidden(memory, [0, 5, 6])
        h2 = model.decoder_hidden(memory, [0, 5, 6])
        assert h1.shape == (3, model.config.hidden)
        np.testing.assert_array_equal(h1.values, h2.values)


class TestGeneration:
    def test_beam_one_equals_greedy(self, vocab):
        for seed in range(10):
            m = Mas2sModel(ModelConfig(hidden=16, layers=1, heads=2, dropout=0.0,
                                       max_decode_len=6), vocab, seed=seed)
            memory = build_memory(m, vocab)
            greedy = m.generate(memory, mode="greedy")
            beam1 = m.generate(memory, mode="beam", beam_size=1)
            assert greedy.ids == beam1.ids
            assert greedy.log_prob == pytest.approx(beam1.log_prob)

    def test_beam_five_dominates_greedy(self, vocab):
        for seed in range(10):
            m = Mas2sModel(ModelConfig(hidden=16, layers=1, heads=2, dropout=0.0,
                                       max_decode_len=6), vocab, seed=seed)
            memory = build_memory(m, vocab)
            greedy = m.generate(memory, mode="greedy")
            beam5 = m.generate(memory, mode="beam", beam_size=5)
            assert beam5.log_prob >= greedy.log_prob - 1e-12

    def test_log_prob_is_sum_of_steps(self, model, vocab):
        memory = build_memory(model, vocab)
        result = model.generate(memory, mode="greedy", keep_distributions=True)
        from sysask.tokenizer import CLS
        total = 0.0
        ids = result.ids + [CLS]
        for p, tok in zip(result.step_distributions, ids):
            total += np.log(p[tok])
        assert result.log_prob == pytest.approx(total)


class TestFullModelGradients:
    def test_full_loss_gradient_check_small_dims(self, vocab):
        m = Mas2sModel(ModelConfig(hidden=8, layers=1, heads=2, dropout=0.0,
                                   max_len=32), vocab, seed=0)
        d = encode_dialogue("can I", [("work", "Yes")], vocab)
        u = encode_profile(["I work daily."], vocab)
        t = encode_knowledge("the rule", vocab)
        target = vocab.encode_text("do you work ?") + [0]

        # check a representative subset of parameter groups to keep runtime low
        names = ["W_d", "W_u", "mlp.w1", "mlp.b2", "W_v", "b_v",
                 "enc.l0.self.wq", "dec.l0.cross.wk", "embed"]
        params = {n: m.params[n] for n in names}

        def f():
            return m.instance_loss(d, u, t, target)

        assert nm.grad_check(f, params, h=1e-5) <= 1e-4
