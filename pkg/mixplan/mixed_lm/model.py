"""
Mixed content-item-conditioned language model.

One pre-norm transformer encoder-decoder is shared by every content item. Each item is
encoded on its own, every item's decoder reads the same target prefix, and a two-layer
plan scorer turns each item's summary and decoder state into a per-step distribution d
over items. The next-token distribution is the d-weighted sum of the per-item
distributions.
"""
from dataclasses import dataclass
from typing import Optional, Sequence
import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..config import ModelConfig
from .data import Batch, collate, EncodedExample, encode_item_tokens
from .vocab import Vocabulary

class MultiHeadAttention(nn.Module):
    def __init__(self, hidden_size: int, num_heads: int):
        super().__init__()
        self.num_heads = num_heads
        self.head_size = hidden_size // num_heads
        self.query = nn.Linear(hidden_size, hidden_size)
        self.key = nn.Linear(hidden_size, hidden_size)
        self.value = nn.Linear(hidden_size, hidden_size)
        self.output = nn.Linear(hidden_size, hidden_size)

    def forward(self, queries: torch.Tensor, keys: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """
        Args:
            queries: [R, Tq, H]
            keys: [R, Tk, H]
            mask: [R, Tq, Tk] or broadcastable, True where attention is allowed;
                every query row must allow at least one key
        """
        rows, query_len, hidden = queries.shape
        key_len = keys.shape[1]

        def heads(x: torch.Tensor, length: int) -> torch.Tensor:
            return x.view(rows, length, self.num_heads, self.head_size).transpose(1, 2)

        q = heads(self.query(queries), query_len)
        k = heads(self.key(keys), key_len)
        v = heads(self.value(keys), key_len)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_size)
        scores = scores.masked_fill(~mask.unsqueeze(1), float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        context = (weights @ v).transpose(1, 2).reshape(rows, query_len, hidden)
        return self.output(context)

class FeedForward(nn.Module):
    def __init__(self, hidden_size: int, ffn_size: int):
        super().__init__()
        self.inner = nn.Linear(hidden_size, ffn_size)
        self.outer = nn.Linear(ffn_size, hidden_size)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.outer(F.gelu(self.inner(x)))

class EncoderLayer(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.attention_norm = nn.LayerNorm(config.hidden_size)
        self.attention = MultiHeadAttention(config.hidden_size, config.num_heads)
        self.ffn_norm = nn.LayerNorm(config.hidden_size)
        self.ffn = FeedForward(config.hidden_size, config.ffn_size)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        normed = self.attention_norm(x)
        x = x + self.attention(normed, normed, mask)
        return x + self.ffn(self.ffn_norm(x))

class DecoderLayer(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.self_attention_norm = nn.LayerNorm(config.hidden_size)
        self.self_attention = MultiHeadAttention(config.hidden_size, config.num_heads)
        self.cross_attention_norm = nn.LayerNorm(config.hidden_size)
        self.cross_attention = MultiHeadAttention(config.hidden_size, config.num_heads)
        self.ffn_norm = nn.LayerNorm(config.hidden_size)
        self.ffn = FeedForward(config.hidden_size, config.ffn_size)

    def forward(
        self, x: torch.Tensor, memory: torch.Tensor, self_mask: torch.Tensor, memory_mask: torch.Tensor
    ) -> torch.Tensor:
        normed = self.self_attention_norm(x)
        x = x + self.self_attention(normed, normed, self_mask)
        x = x + self.cross_attention(self.cross_attention_norm(x), memory, memory_mask)
        return x + self.ffn(self.ffn_norm(x))

class PlanScorer(nn.Module):
    """e = W_o tanh(W_d [h; s])"""

    def __init__(self, hidden_size: int, plan_hidden_size: int):
        super().__init__()
        self.hidden_size = hidden_size
        self.W_d = nn.Linear(2 * hidden_size, plan_hidden_size, bias=False)
        self.W_o = nn.Linear(plan_hidden_size, 1, bias=False)

    def forward(self, summaries: torch.Tensor, states: torch.Tensor) -> torch.Tensor:
        """summaries and states share their shape [..., H]; returns scores of shape [...]."""
        return self.W_o(torch.tanh(self.W_d(torch.cat([summaries, states], dim=-1)))).squeeze(-1)

@dataclass
class EncodedItems:
    """Encoder states [B, N, L, H], summaries h [B, N, H] and the key mask [B, N, L]."""
    states: torch.Tensor
    summaries: torch.Tensor
    mask: torch.Tensor
    present: torch.Tensor

@dataclass
class MixtureOutput:
    """
    item_log_probs: [B, N, T, V] per-item next-token log-probabilities
    plan_scores: [B, T, N] raw scores e, -inf for empty item slots
    plan_distribution: [B, T, N] softmax of plan_scores over items
    """
    item_log_probs: torch.Tensor
    plan_scores: torch.Tensor
    plan_distribution: torch.Tensor

    def mixture(self, plan_distribution: Optional[torch.Tensor] = None) -> torch.Tensor:
        """Mixed next-token probabilities [B, T, V]."""
        weights = self.plan_distribution if plan_distribution is None else plan_distribution
        return torch.einsum("btn,bntv->btv", weights, self.item_log_probs.exp())

class MixedLMModel(nn.Module):
    def __init__(self, config: ModelConfig, vocab: Vocabulary, seed: Optional[int] = None):
        super().__init__()
        self.config = config
        self.vocab = vocab
        if seed is None:
            self._build()
        else:
            with torch.random.fork_rng(devices=[]):
                torch.manual_seed(seed)
                self._build()
        self.to(config.torch_dtype)

    def _build(self) -> None:
        config = self.config
        self.embedding = nn.Embedding(len(self.vocab), config.embedding_size)
        if config.embedding_size == config.hidden_size:
            self.projection = nn.Identity()
        else:
            self.projection = nn.Linear(config.embedding_size, config.hidden_size)
        self.encoder_positions = nn.Embedding(config.max_item_len, config.hidden_size)
        # One extra position for the EOS step
        self.decoder_positions = nn.Embedding(config.max_target_len + 1, config.hidden_size)
        self.encoder_layers = nn.ModuleList(EncoderLayer(config) for _ in range(config.num_layers))
        self.decoder_layers = nn.ModuleList(DecoderLayer(config) for _ in range(config.num_layers))
        self.encoder_norm = nn.LayerNorm(config.hidden_size)
        self.decoder_norm = nn.LayerNorm(config.hidden_size)
        self.output = nn.Linear(config.hidden_size, len(self.vocab))
        self.plan_scorer = PlanScorer(config.hidden_size, config.plan_hidden_size)

    @property
    def decoder_capacity(self) -> int:
        return self.decoder_positions.num_embeddings

    def num_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def _embed(self, ids: torch.Tensor, positions: nn.Embedding) -> torch.Tensor:
        index = torch.arange(ids.shape[-1], device=ids.device)
        return self.projection(self.embedding(ids)) + positions(index)

    def encode(self, item_ids: torch.Tensor, item_mask: torch.Tensor, item_present: torch.Tensor) -> EncodedItems:
        """Encode every item independently; h_i is the final state of the item's first token."""
        batch, num_items, length = item_ids.shape
        flat_ids = item_ids.reshape(batch * num_items, length)
        flat_mask = item_mask.reshape(batch * num_items, length)
        x = self._embed(flat_ids, self.encoder_positions)
        attention_mask = flat_mask.unsqueeze(1)
        for layer in self.encoder_layers:
            x = layer(x, attention_mask)
        states = self.encoder_norm(x).view(batch, num_items, length, -1)
        return EncodedItems(states=states, summaries=states[:, :, 0], mask=item_mask, present=item_present)

    def decode_states(self, encoded: EncodedItems, decoder_input: torch.Tensor) -> torch.Tensor:
        """Per-item decoder states [B, N, T, H] for a shared target prefix [B, T]."""
        batch, num_items, length, hidden = encoded.states.shape
        target_len = decoder_input.shape[1]
        memory = encoded.states.reshape(batch * num_items, length, hidden)
        memory_mask = encoded.mask.reshape(batch * num_items, 1, length)
        prefix = decoder_input.unsqueeze(1).expand(batch, num_items, target_len).reshape(batch * num_items, target_len)
        x = self._embed(prefix, self.decoder_positions)
        causal = torch.ones(target_len, target_len, dtype=torch.bool, device=x.device).tril().unsqueeze(0)
        for layer in self.decoder_layers:
            x = layer(x, memory, causal, memory_mask)
        return self.decoder_norm(x).view(batch, num_items, target_len, hidden)

    def item_log_probs(self, states: torch.Tensor) -> torch.Tensor:
        return F.log_softmax(self.output(states), dim=-1)

    def plan_logits(self, encoded: EncodedItems, states: torch.Tensor) -> torch.Tensor:
        """Plan scores e [B, T, N]; empty item slots score -inf."""
        summaries = encoded.summaries.unsqueeze(2).expand_as(states)
        scores = self.plan_scorer(summaries, states).transpose(1, 2)
        return scores.masked_fill(~encoded.present.unsqueeze(1), float("-inf"))

    def forward(self, batch: Batch) -> MixtureOutput:
        encoded = self.encode(batch.item_ids, batch.item_mask, batch.item_present)
        states = self.decode_states(encoded, batch.decoder_input)
        scores = self.plan_logits(encoded, states)
        return MixtureOutput(
            item_log_probs=self.item_log_probs(states),
            plan_scores=scores,
            plan_distribution=torch.softmax(scores, dim=-1),
        )

def encode_items(model: MixedLMModel, items: Sequence[Sequence[str]]) -> EncodedItems:
    """
    Encode serialized items (token sequences) for a single example.

    Raises:
        DataError: The item list is empty or longer than the item cap
    """
    ids = encode_item_tokens(items, model.vocab, model.config)
    batch = collate([EncodedExample(example_id="items", items=ids, target=[], plan_labels=[])])
    with torch.no_grad():
        encoded = model.encode(batch.item_ids, batch.item_mask, batch.item_present)
    return EncodedItems(
        states=encoded.states[0],
        summaries=encoded.summaries[0],
        mask=encoded.mask[0],
        present=encoded.present[0],
    )
