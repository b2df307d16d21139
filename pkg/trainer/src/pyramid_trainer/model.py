"""Tiny byte-level encoder-decoder and checkpoint (de)serialization.

The vocabulary is the 256 byte values plus PAD/BOS/EOS markers, so any
UTF-8 text round-trips without a learned tokenizer. The default
architecture is a few hundred thousand parameters: big enough to show
a learning signal on a handful of examples, small enough to train on
one CPU core in seconds.
"""

import hashlib
from pathlib import Path

import torch
from torch import nn

PAD = 256
BOS = 257
EOS = 258
VOCAB = 259

# Positions cover the default 1024/128 truncation budget with headroom.
MAX_POS = 2048

CHECKPOINT_FORMAT = "pyramid-trainer/1"
CHECKPOINT_FILE = "checkpoint.pt"
DIGEST_FILE = "checkpoint.digest"


def encode_text(text: str, limit: int) -> list[int]:
    """UTF-8 bytes of text, truncated so the EOS marker fits inside limit."""
    if limit < 1:
        raise ValueError(f"length limit must be >= 1, got {limit}")
    return list(text.encode("utf-8"))[: limit - 1] + [EOS]


class TinySeq2Seq(nn.Module):
    """Pre-norm transformer encoder-decoder over byte ids."""

    def __init__(
        self,
        d_model: int = 64,
        n_heads: int = 4,
        enc_layers: int = 2,
        dec_layers: int = 2,
        ff_dim: int = 128,
        max_pos: int = MAX_POS,
    ):
        super().__init__()
        self.config = {
            "d_model": d_model,
            "n_heads": n_heads,
            "enc_layers": enc_layers,
            "dec_layers": dec_layers,
            "ff_dim": ff_dim,
            "max_pos": max_pos,
        }
        self.tok = nn.Embedding(VOCAB, d_model, padding_idx=PAD)
        self.pos = nn.Embedding(max_pos, d_model)
        enc_layer = nn.TransformerEncoderLayer(
            d_model, n_heads, ff_dim, dropout=0.0, batch_first=True, norm_first=True
        )
        dec_layer = nn.TransformerDecoderLayer(
            d_model, n_heads, ff_dim, dropout=0.0, batch_first=True, norm_first=True
        )
        self.encoder = nn.TransformerEncoder(
            enc_layer, enc_layers, norm=nn.LayerNorm(d_model), enable_nested_tensor=False
        )
        self.decoder = nn.TransformerDecoder(dec_layer, dec_layers, norm=nn.LayerNorm(d_model))
        self.head = nn.Linear(d_model, VOCAB)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        if ids.size(1) > self.config["max_pos"]:
            raise ValueError(f"sequence length {ids.size(1)} exceeds max_pos {self.config['max_pos']}")
        positions = torch.arange(ids.size(1), device=ids.device)
        return self.tok(ids) + self.pos(positions)

    def encode(self, src: torch.Tensor, src_pad: torch.Tensor) -> torch.Tensor:
        return self.encoder(self._embed(src), src_key_padding_mask=src_pad)

    def decode(
        self,
        tgt_in: torch.Tensor,
        memory: torch.Tensor,
        src_pad: torch.Tensor,
        tgt_pad: torch.Tensor | None = None,
    ) -> torch.Tensor:
        t = tgt_in.size(1)
        causal = torch.triu(torch.ones(t, t, dtype=torch.bool, device=tgt_in.device), diagonal=1)
        hidden = self.decoder(
            self._embed(tgt_in),
            memory,
            tgt_mask=causal,
            tgt_key_padding_mask=tgt_pad,
            memory_key_padding_mask=src_pad,
        )
        return self.head(hidden)

    def forward(
        self,
        src: torch.Tensor,
        tgt_in: torch.Tensor,
        src_pad: torch.Tensor,
        tgt_pad: torch.Tensor | None = None,
    ) -> torch.Tensor:
        return self.decode(tgt_in, self.encode(src, src_pad), src_pad, tgt_pad)


def param_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def state_digest(state: dict) -> str:
    """SHA-256 over a canonical serialization of the weights.

    Keyed by sorted parameter name with dtype, shape, and raw bytes, so
    the digest identifies the weights regardless of how the checkpoint
    file itself was serialized.
    """
    h = hashlib.sha256()
    for name in sorted(state):
        array = state[name].detach().cpu().contiguous().numpy()
        h.update(name.encode("utf-8"))
        h.update(b"\x00")
        h.update(str(array.dtype).encode("ascii"))
        h.update(b"\x00")
        h.update(",".join(str(d) for d in array.shape).encode("ascii"))
        h.update(b"\x00")
        h.update(array.tobytes())
    return h.hexdigest()


def save_checkpoint(model: TinySeq2Seq, out_dir: str | Path) -> str:
    """Write checkpoint.pt and checkpoint.digest under out_dir; return the digest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    state = model.state_dict()
    torch.save(
        {"format": CHECKPOINT_FORMAT, "model": dict(model.config), "state": state},
        out_dir / CHECKPOINT_FILE,
    )
    digest = state_digest(state)
    (out_dir / DIGEST_FILE).write_text(digest + "\n", encoding="utf-8")
    return digest


def load_checkpoint(path: str | Path) -> TinySeq2Seq:
    """Rebuild a model from a checkpoint file or a directory containing one."""
    from .errors import CheckpointError

    path = Path(path)
    if path.is_dir():
        path = path / CHECKPOINT_FILE
    if not path.is_file():
        raise CheckpointError(f"no checkpoint at {path}")
    try:
        payload = torch.load(path, map_location="cpu")
    except Exception as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT} checkpoint")
    model = TinySeq2Seq(**payload["model"])
    model.load_state_dict(payload["state"])
    model.eval()
    return model
