"""Self-describing binary checkpoints with bit-exact round-trips.

Layout: magic line, 8-byte big-endian header length, JSON header (sorted
keys), then the named tensors as little-endian float64 C-order payloads in
header order (names sorted). The same model state always serializes to
the same bytes, which is what the determinism guarantees rest on; zip
containers were rejected because they embed timestamps.

The header carries everything inference needs: the model config, the
vocabulary, the thesaurus entries and segmentation lexicon counts, and
tensor names/shapes. A checkpoint is therefore a standalone artifact: the
predict path needs no access to the original resource files.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .model import ModelConfig
from .nd import Tensor
from .preprocess import SegmentationLexicon
from .resources import Thesaurus, Vocabulary

MAGIC = b"EMOSENT-CHECKPOINT-1\n"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """A checkpoint file is malformed or inconsistent with its request."""


@dataclass
class Checkpoint:
    config: ModelConfig
    params: dict[str, Tensor]
    vocab: Vocabulary
    thesaurus: Thesaurus
    lexicon: SegmentationLexicon
    meta: dict


def save_checkpoint(
    path,
    config: ModelConfig,
    params: dict[str, Tensor],
    vocab: Vocabulary,
    thesaurus: Thesaurus | None = None,
    lexicon: SegmentationLexicon | None = None,
    meta: dict | None = None,
) -> None:
    names = sorted(params)
    header = {
        "format_version": FORMAT_VERSION,
        "config": asdict(config),
        "vocab": vocab.words,
        "thesaurus": dict(sorted(thesaurus.entries.items())) if thesaurus else {},
        "lexicon": dict(sorted(lexicon.counts.items())) if lexicon else {},
        "tensors": [{"name": n, "shape": list(params[n].shape)} for n in names],
        "meta": dict(sorted((meta or {}).items())),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(blob).to_bytes(8, "big"))
        fh.write(blob)
        for name in names:
            fh.write(np.ascontiguousarray(params[name].data, dtype="<f8").tobytes())


def load_checkpoint(path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a model checkpoint (bad magic)")
    offset = len(MAGIC)
    header_len = int.from_bytes(raw[offset : offset + 8], "big")
    offset += 8
    try:
        header = json.loads(raw[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt header: {exc}") from None
    offset += header_len
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {header.get('format_version')!r}"
        )
    config = ModelConfig(**header["config"])
    params: dict[str, Tensor] = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(raw):
            raise CheckpointError(f"{path}: truncated payload at tensor {entry['name']!r}")
        data = np.frombuffer(raw[offset:end], dtype="<f8").astype(np.float64).reshape(shape)
        requires_grad = entry["name"] != "embedding" or config.train_embeddings
        params[entry["name"]] = Tensor(data, requires_grad=requires_grad)
        offset = end
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes")
    words = list(header["vocab"])
    vocab = Vocabulary(words, {w: i for i, w in enumerate(words)})
    return Checkpoint(
        config=config,
        params=params,
        vocab=vocab,
        thesaurus=Thesaurus(header.get("thesaurus", {})),
        lexicon=SegmentationLexicon(header.get("lexicon", {})),
        meta=header.get("meta", {}),
    )
