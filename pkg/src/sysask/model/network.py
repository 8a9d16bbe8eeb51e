"""The multi-attention seq2seq network.

One shared transformer encoder stack embeds the dialogue, the user
profile, and the task knowledge. A bilinear attention over the dialogue
and profile sequences against the knowledge vector yields attended
representations d and u; an MLP over their concatenation produces the
answer confidence embedding c, which is the decoder's sole cross-attention
memory. The output head is a softmax over the joint vocabulary (word
tokens plus single-entry answer candidates).

Ablations: use_confidence_network=False swaps the memory for the mean
dialogue embedding, mean profile embedding, and knowledge vector;
use_profile=False replaces every profile-derived vector with a learned
null vector, making outputs independent of the profile text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import numerics as nm
from ..numerics import Tensor
from ..tokenizer import CLS, EncodedSequence, Vocabulary
from .config import ModelConfig

EQ4_EXP_CAP = 30.0


class LengthExceeded(ValueError):
    pass


@dataclass
class GenerationResult:
    ids: list[int]
    log_prob: float
    is_answer: bool
    step_distributions: list[np.ndarray] | None = None


def _init_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    scale = math.sqrt(2.0 / (rows + cols))
    return rng.normal(0.0, scale, size=(rows, cols))


class Mas2sModel:
    def __init__(self, config: ModelConfig, vocab: Vocabulary, seed: int = 0,
                 params: dict[str, np.ndarray] | None = None):
        self.config = config
        self.vocab = vocab
        self.params: dict[str, Tensor] = {}
        self._dropout_rng: np.random.Generator | None = None
        if params is None:
            self._init_params(np.random.default_rng(seed))
        else:
            for name, values in params.items():
                self.params[name] = Tensor(values.copy(), name=name)

    # ---------------------------------------------------------------- setup

    def _param(self, name: str, values: np.ndarray) -> None:
        self.params[name] = Tensor(values, name=name)

    def _init_attention(self, rng, prefix: str, h: int) -> None:
        for w in ("wq", "wk", "wv", "wo"):
            self._param(f"{prefix}.{w}", _init_matrix(rng, h, h))

    def _init_block(self, rng, prefix: str, h: int, f: int, cross: bool) -> None:
        self._init_attention(rng, f"{prefix}.self", h)
        if cross:
            self._init_attention(rng, f"{prefix}.cross", h)
            self._param(f"{prefix}.ln3.g", np.ones(h))
            self._param(f"{prefix}.ln3.b", np.zeros(h))
        self._param(f"{prefix}.ffn.w1", _init_matrix(rng, h, f))
        self._param(f"{prefix}.ffn.b1", np.zeros(f))
        self._param(f"{prefix}.ffn.w2", _init_matrix(rng, f, h))
        self._param(f"{prefix}.ffn.b2", np.zeros(h))
        self._param(f"{prefix}.ln1.g", np.ones(h))
        self._param(f"{prefix}.ln1.b", np.zeros(h))
        self._param(f"{prefix}.ln2.g", np.ones(h))
        self._param(f"{prefix}.ln2.b", np.zeros(h))

    def _init_params(self, rng: np.random.Generator) -> None:
        cfg = self.config
        h, f, v = cfg.hidden, cfg.hidden * cfg.ffn_mult, len(self.vocab)
        self._param("embed", _init_matrix(rng, v, h))
        self._param("pos", _init_matrix(rng, cfg.max_len, h))
        for i in range(cfg.layers):
            self._init_block(rng, f"enc.l{i}", h, f, cross=False)
            self._init_block(rng, f"dec.l{i}", h, f, cross=True)
        self._param("W_d", _init_matrix(rng, h, h))
        self._param("W_u", _init_matrix(rng, h, h))
        self._param("mlp.w1", _init_matrix(rng, 2 * h, h))
        self._param("mlp.b1", np.zeros(h))
        self._param("mlp.w2", _init_matrix(rng, h, h))
        self._param("mlp.b2", np.zeros(h))
        self._param("u_null", rng.normal(0.0, 0.02, size=h))
        self._param("W_v", _init_matrix(rng, v, h))
        self._param("b_v", np.zeros(v))

    # ------------------------------------------------------------- training

    def set_dropout_rng(self, rng: np.random.Generator | None) -> None:
        """Enable (training) or disable (evaluation) dropout masks."""
        self._dropout_rng = rng

    def _drop(self, x: Tensor) -> Tensor:
        return nm.dropout(x, self.config.dropout, self._dropout_rng)

    # ----------------------------------------------------------- sub-layers

    def _attention(self, prefix: str, x: Tensor, memory: Tensor,
                   causal: bool) -> Tensor:
        out = nm.multi_head_attention(
            x, memory,
            self.params[f"{prefix}.wq"], self.params[f"{prefix}.wk"],
            self.params[f"{prefix}.wv"], self.params[f"{prefix}.wo"],
            heads=self.config.heads, causal=causal,
        )
        return self._drop(out)

    def _ffn(self, prefix: str, x: Tensor) -> Tensor:
        y = nm.relu(nm.linear(x, self.params[f"{prefix}.w1"], self.params[f"{prefix}.b1"]))
        return self._drop(nm.linear(y, self.params[f"{prefix}.w2"], self.params[f"{prefix}.b2"]))

    def _ln(self, prefix: str, x: Tensor) -> Tensor:
        return nm.layer_norm_rows(x, self.params[f"{prefix}.g"], self.params[f"{prefix}.b"])

    def _embed(self, ids: list[int]) -> Tensor:
        if len(ids) > self.config.max_len:
            raise LengthExceeded(f"sequence of {len(ids)} tokens exceeds {self.config.max_len}")
        tok = nm.embed_lookup(self.params["embed"], ids)
        pos = nm.embed_lookup(self.params["pos"], list(range(len(ids))))
        return self._drop(nm.add(tok, pos))

    # ------------------------------------------------------------- encoders

    def encode_sequence(self, ids: list[int]) -> Tensor:
        """Shared encoder stack: (n,) ids -> (n, H) embeddings."""
        x = self._embed(ids)
        for i in range(self.config.layers):
            p = f"enc.l{i}"
            x = self._ln(f"{p}.ln1", nm.add(x, self._attention(f"{p}.self", x, x, causal=False)))
            x = self._ln(f"{p}.ln2", nm.add(x, self._ffn(f"{p}.ffn", x)))
        return x

    def encode_dialogue_seq(self, enc: EncodedSequence) -> Tensor:
        s_d = self.encode_sequence(enc.ids)
        assert s_d.shape == (enc.request_len + enc.history_len + 3, self.config.hidden)
        return s_d

    def encode_profile_seq(self, enc: EncodedSequence) -> Tensor:
        s_u = self.encode_sequence(enc.ids)
        assert s_u.shape == (enc.body_len + 2, self.config.hidden)
        return s_u

    def encode_knowledge_seq(self, enc: EncodedSequence) -> Tensor:
        """Returns the final-position output vector s_t of shape (H,)."""
        s = self.encode_sequence(enc.ids)
        s_t = nm.row(s, len(enc.ids) - 1)
        assert s_t.shape == (self.config.hidden,)
        return s_t

    # --------------------------------------------------- confidence network

    def knowledge_attention(self, s: Tensor, s_t: Tensor, w: Tensor) -> Tensor:
        """Bilinear attention of sequence `s` (n, H) against knowledge s_t."""
        scores = nm.matmul(nm.matmul(s, w), s_t)
        if self.config.literal_eq4:
            scores = nm.exp_clamped(scores, EQ4_EXP_CAP)
        a = nm.softmax_rows(scores)
        assert a.shape == (s.shape[0],)
        return a

    @staticmethod
    def attended_representation(s: Tensor, a: Tensor) -> Tensor:
        """Convex combination of the rows of `s` weighted by `a`."""
        if a.shape[0] != s.shape[0]:
            raise nm.ShapeMismatch(f"{a.shape} weights vs {s.shape} rows")
        return nm.matmul(a, s)

    def confidence_embedding(self, d: Tensor, u: Tensor) -> Tensor:
        x = nm.concat([d, u], axis=0)
        y = nm.relu(nm.add(nm.matmul(x, self.params["mlp.w1"]), self.params["mlp.b1"]))
        c = nm.add(nm.matmul(y, self.params["mlp.w2"]), self.params["mlp.b2"])
        assert c.shape == (self.config.hidden,)
        return c

    # ------------------------------------------------------------ full pass

    def build_memory(self, dialogue: EncodedSequence, profile: EncodedSequence,
                     knowledge: EncodedSequence) -> Tensor:
        """Cross-attention memory for the decoder: (1, H) or (3, H)."""
        cfg = self.config
        s_d = self.encode_dialogue_seq(dialogue)
        s_t = self.encode_knowledge_seq(knowledge)
        s_u = self.encode_profile_seq(profile) if cfg.use_profile else None

        if not cfg.use_confidence_network:
            u_mean = nm.mean_rows(s_u) if s_u is not None else self.params["u_null"]
            return nm.stack_rows([nm.mean_rows(s_d), u_mean, s_t])

        a_d = self.knowledge_attention(s_d, s_t, self.params["W_d"])
        d = self.attended_representation(s_d, a_d)
        if s_u is not None:
            a_u = self.knowledge_attention(s_u, s_t, self.params["W_u"])
            u = self.attended_representation(s_u, a_u)
        else:
            u = self.params["u_null"]
        c = self.confidence_embedding(d, u)
        return nm.stack_rows([c])

    def decoder_hidden(self, memory: Tensor, input_ids: list[int]) -> Tensor:
        """Causal decoder stack over the target prefix: (T,) -> (T, H)."""
        x = self._embed(input_ids)
        for i in range(self.config.layers):
            p = f"dec.l{i}"
            x = self._ln(f"{p}.ln1", nm.add(x, self._attention(f"{p}.self", x, x, causal=True)))
            x = self._ln(f"{p}.ln3", nm.add(x, self._attention(f"{p}.cross", x, memory, causal=False)))
            x = self._ln(f"{p}.ln2", nm.add(x, self._ffn(f"{p}.ffn", x)))
        return x

    def output_distribution(self, h: Tensor) -> Tensor:
        """Softmax over the joint vocabulary for each hidden row."""
        logits = nm.add(nm.matmul(h, nm.transpose(self.params["W_v"])), self.params["b_v"])
        p = nm.softmax_rows(logits)
        assert p.shape[-1] == len(self.vocab)
        return p

    def sequence_distributions(self, memory: Tensor, target_ids: list[int]) -> Tensor:
        """Teacher-forced per-position distributions: (T, |V|) rows."""
        input_ids = [CLS] + list(target_ids[:-1])
        return self.output_distribution(self.decoder_hidden(memory, input_ids))

    def instance_loss(self, dialogue: EncodedSequence, profile: EncodedSequence,
                      knowledge: EncodedSequence, target_ids: list[int]) -> Tensor:
        memory = self.build_memory(dialogue, profile, knowledge)
        p = self.sequence_distributions(memory, target_ids)
        return nm.cross_entropy_rows(p, target_ids)

    # ------------------------------------------------------------ inference

    def first_step_distribution(self, memory: Tensor) -> np.ndarray:
        return self.output_distribution(self.decoder_hidden(memory, [CLS])).values[-1]

    def generate(self, memory: Tensor, mode: str = "beam",
                 beam_size: int | None = None,
                 max_decode_len: int | None = None,
                 keep_distributions: bool = False) -> GenerationResult:
        """Greedy or beam decode; terminates on the end pseudo-token [CLS]."""
        if mode == "greedy":
            beam_size = 1
        elif beam_size is None:
            beam_size = self.config.beam_size
        max_t = max_decode_len or self.config.max_decode_len

        # beams: (ids-without-end, log_prob, done, distributions)
        beams = [([], 0.0, False, [])]
        for _ in range(max_t):
            if all(done for _, _, done, _ in beams):
                break
            candidates = []
            for ids, logp, done, dists in beams:
                if done:
                    candidates.append((ids, logp, True, dists))
                    continue
                p = self.output_distribution(
                    self.decoder_hidden(memory, [CLS] + ids)
                ).values[-1]
                logs = np.log(np.maximum(p, nm.tensor.PROB_FLOOR))
                top = sorted(range(len(logs)), key=lambda j: (-logs[j], j))[:beam_size]
                new_dists = dists + [p] if keep_distributions else dists
                for j in top:
                    if j == CLS:
                        candidates.append((ids, logp + logs[j], True, new_dists))
                    else:
                        candidates.append((ids + [j], logp + logs[j], False, new_dists))
            candidates.sort(key=lambda b: (-b[1], b[0]))
            beams = candidates[:beam_size]
        best = max(beams, key=lambda b: (b[1], [-i for i in b[0]]))
        ids, logp, _, dists = best
        return GenerationResult(
            ids=ids,
            log_prob=logp,
            is_answer=len(ids) == 1 and ids[0] in self.vocab.answer_candidates,
            step_distributions=dists if keep_distributions else None,
        )

    # ---------------------------------------------------------- persistence

    def raw_params(self) -> dict[str, np.ndarray]:
        return {name: p.values for name, p in self.params.items()}

    def zero_grads(self) -> None:
        for p in self.params.values():
            p.zero_grad()
