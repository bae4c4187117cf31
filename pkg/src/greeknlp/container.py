"""Binary model container: magic, JSON manifest, tensor table, checksum.

Layout (all integers little-endian uint32):

    magic b"GRNLP1"
    manifest_length, manifest (canonical JSON, UTF-8)
    tensor_count, then per tensor sorted by name:
        name_length, name, ndim, dims..., float32 little-endian data
    sha256 checksum of everything above (32 bytes)

The manifest declares every tensor's shape, so loads validate structure as
well as integrity. Saving is canonical: save(load(save(m))) is
byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from .charlm import CharNgramLM
from .encoder import EncoderConfig, EncoderModel, SubwordVocab
from .g2g import MappingTable
from .ner import NerModel
from .parser import ParserConfig, ParserModel
from .tagger import TaggerModel, HEAD_NAMES

MAGIC = b"GRNLP1"
FORMAT_VERSION = 1


class ContainerError(ValueError):
    """Corrupt, mismatched or structurally invalid container file."""


@dataclass
class ModelContainer:
    manifest: dict
    tensors: dict[str, np.ndarray]

    @property
    def component(self) -> str:
        return self.manifest["component"]


def _canonical_manifest(manifest: dict) -> bytes:
    return json.dumps(manifest, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")).encode("utf-8")


def container_bytes(container: ModelContainer) -> bytes:
    manifest = dict(container.manifest)
    manifest["tensors"] = {name: list(t.shape) for name, t in container.tensors.items()}
    blob = bytearray()
    blob += MAGIC
    mbytes = _canonical_manifest(manifest)
    blob += struct.pack("<I", len(mbytes))
    blob += mbytes
    blob += struct.pack("<I", len(container.tensors))
    for name in sorted(container.tensors):
        data = np.ascontiguousarray(container.tensors[name], dtype="<f4")
        nbytes = name.encode("utf-8")
        blob += struct.pack("<I", len(nbytes))
        blob += nbytes
        blob += struct.pack("<I", data.ndim)
        blob += struct.pack(f"<{data.ndim}I", *data.shape)
        blob += data.tobytes()
    blob += hashlib.sha256(bytes(blob)).digest()
    return bytes(blob)


def save_container(container: ModelContainer, path) -> None:
    with open(path, "wb") as fh:
        fh.write(container_bytes(container))


def parse_container(blob: bytes) -> ModelContainer:
    if len(blob) < len(MAGIC) + 4 + 32:
        raise ContainerError("truncated container")
    body, checksum = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != checksum:
        raise ContainerError("checksum mismatch")
    if body[:len(MAGIC)] != MAGIC:
        raise ContainerError(f"bad magic {body[:len(MAGIC)]!r}")
    off = len(MAGIC)

    def u32() -> int:
        nonlocal off
        val = struct.unpack_from("<I", body, off)[0]
        off += 4
        return val

    mlen = u32()
    manifest = json.loads(body[off:off + mlen].decode("utf-8"))
    off += mlen
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ContainerError(
            f"format version {manifest.get('format_version')} != {FORMAT_VERSION}")
    count = u32()
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        nlen = u32()
        name = body[off:off + nlen].decode("utf-8")
        off += nlen
        ndim = u32()
        shape = tuple(u32() for _ in range(ndim))
        size = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(body, dtype="<f4", count=size, offset=off).reshape(shape)
        off += size * 4
        tensors[name] = data.copy()
    declared = manifest.get("tensors", {})
    if set(declared) != set(tensors):
        raise ContainerError("manifest tensor names do not match tensor table")
    for name, shape in declared.items():
        if tuple(shape) != tensors[name].shape:
            raise ContainerError(f"tensor {name}: declared shape {shape} != stored {list(tensors[name].shape)}")
    return ModelContainer(manifest, tensors)


def load_container(path) -> ModelContainer:
    with open(path, "rb") as fh:
        return parse_container(fh.read())


# --- per-component packing ------------------------------------------------------

def _encoder_manifest(enc: EncoderModel) -> dict:
    return {
        "dim": enc.config.dim,
        "layers": enc.config.layers,
        "max_words": enc.config.max_words,
        "seed": enc.config.seed,
        "vocab_pieces": list(enc.vocab.pieces),
        "vocab_hash": enc.vocab.hash(),
    }


def _encoder_from_manifest(data: dict, tensors: dict[str, np.ndarray],
                           prefix: str = "enc.") -> EncoderModel:
    vocab = SubwordVocab(tuple(data["vocab_pieces"]))
    if vocab.hash() != data["vocab_hash"]:
        raise ContainerError("encoder vocab hash mismatch")
    config = EncoderConfig(dim=data["dim"], layers=data["layers"],
                           max_words=data["max_words"], seed=data["seed"])
    params = {name[len(prefix):]: tensors[name].astype(np.float64)
              for name in tensors if name.startswith(prefix)}
    return EncoderModel(config, vocab, params)


def pack_tagger(model: TaggerModel) -> ModelContainer:
    manifest = {
        "component": "pos",
        "format_version": FORMAT_VERSION,
        "encoder": _encoder_manifest(model.encoder),
        "label_vocabs": {h: list(v) for h, v in model.label_vocabs.items()},
    }
    return ModelContainer(manifest, dict(model.params))


def unpack_tagger(container: ModelContainer) -> TaggerModel:
    if container.component != "pos":
        raise ContainerError(f"expected pos container, got {container.component!r}")
    enc = _encoder_from_manifest(container.manifest["encoder"], container.tensors)
    vocabs = {h: tuple(v) for h, v in container.manifest["label_vocabs"].items()}
    params = {f"enc.{k}": v for k, v in enc.params.items()}
    for name in HEAD_NAMES:
        params[f"head.{name}"] = container.tensors[f"head.{name}"].astype(np.float64)
    return TaggerModel(enc, vocabs, params)


def pack_ner(model: NerModel) -> ModelContainer:
    manifest = {
        "component": "ner",
        "format_version": FORMAT_VERSION,
        "encoder": _encoder_manifest(model.encoder),
    }
    return ModelContainer(manifest, dict(model.params))


def unpack_ner(container: ModelContainer) -> NerModel:
    if container.component != "ner":
        raise ContainerError(f"expected ner container, got {container.component!r}")
    enc = _encoder_from_manifest(container.manifest["encoder"], container.tensors)
    params = {f"enc.{k}": v for k, v in enc.params.items()}
    params["head.NER"] = container.tensors["head.NER"].astype(np.float64)
    return NerModel(enc, params)


def pack_parser(model: ParserModel) -> ModelContainer:
    manifest = {
        "component": "dp",
        "format_version": FORMAT_VERSION,
        "encoder": _encoder_manifest(model.encoder),
        "parser": {"proj_dim": model.config.proj_dim, "rel_concat": model.config.rel_concat},
        "labels": list(model.labels),
    }
    return ModelContainer(manifest, dict(model.params))


def unpack_parser(container: ModelContainer) -> ParserModel:
    if container.component != "dp":
        raise ContainerError(f"expected dp container, got {container.component!r}")
    enc = _encoder_from_manifest(container.manifest["encoder"], container.tensors)
    pconf = ParserConfig(proj_dim=container.manifest["parser"]["proj_dim"],
                         rel_concat=container.manifest["parser"]["rel_concat"])
    params = {f"enc.{k}": v for k, v in enc.params.items()}
    for name in container.tensors:
        if not name.startswith("enc."):
            params[name] = container.tensors[name].astype(np.float64)
    return ParserModel(enc, pconf, tuple(container.manifest["labels"]), params)


def pack_g2g(table: MappingTable, lm: CharNgramLM,
             lm_weight: float = 1.0, beam_width: int = 8) -> ModelContainer:
    manifest = {
        "component": "g2g",
        "format_version": FORMAT_VERSION,
        "table": table.dump(),
        "lm": lm.to_manifest(),
        "lm_weight": lm_weight,
        "beam_width": beam_width,
    }
    return ModelContainer(manifest, {})


def unpack_g2g(container: ModelContainer) -> tuple[MappingTable, CharNgramLM, float, int]:
    if container.component != "g2g":
        raise ContainerError(f"expected g2g container, got {container.component!r}")
    table = MappingTable.parse(container.manifest["table"])
    lm = CharNgramLM.from_manifest(container.manifest["lm"])
    return table, lm, float(container.manifest["lm_weight"]), int(container.manifest["beam_width"])
