"""
Checkpoint I/O - Versioned single-file model archives.

Layout (all integers little-endian):

    b"PSEMCKPT"  u32 version
    u32 n  + n bytes   run-config echo (JSON)
    u32 n  + n bytes   vocabularies (JSON)
    u32 count, then per tensor:
        u16 n + n bytes name, u8 rank, u32 x rank dims, '<f8' row-major values
    32 bytes           SHA-256 of everything above
"""

import hashlib
import json
import logging
import struct
from pathlib import Path

import numpy as np
import torch

from patchsem.autodiff import Tensor
from patchsem.core.config import RunConfig
from patchsem.core.exceptions import PatchSemError
from patchsem.models.params import InvalidConfig, ModelParams, param_specs
from patchsem.schemas.patch import VocabSet

logger = logging.getLogger(__name__)

MAGIC = b"PSEMCKPT"
FORMAT_VERSION = 1
_DIGEST_SIZE = hashlib.sha256().digest_size


class CheckpointError(PatchSemError):
    """Raised when a checkpoint cannot be read, written or does not fit its config."""

    pass


class ChecksumMismatch(CheckpointError):
    """The trailing checksum does not match the file contents."""

    pass


class VersionUnsupported(CheckpointError):
    """The file was written by an unknown format version."""

    pass


def _blob(data: bytes) -> bytes:
    return struct.pack("<I", len(data)) + data


def encode_checkpoint(params: ModelParams, run_config: RunConfig, vocabs: VocabSet) -> bytes:
    """Serialize to the checkpoint byte layout."""
    vocab_json = json.dumps(vocabs.model_dump(), sort_keys=True, separators=(",", ":"))
    parts = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        _blob(run_config.echo().encode("utf-8")),
        _blob(vocab_json.encode("utf-8")),
        struct.pack("<I", len(params.named())),
    ]
    for name, tensor in params.named():
        encoded_name = name.encode("utf-8")
        shape = tensor.shape
        parts.append(struct.pack("<H", len(encoded_name)) + encoded_name)
        parts.append(struct.pack("<B", len(shape)) + struct.pack(f"<{len(shape)}I", *shape))
        parts.append(np.ascontiguousarray(tensor.data.numpy(), dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def save_checkpoint(path: Path | str, params: ModelParams, run_config: RunConfig, vocabs: VocabSet) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_checkpoint(params, run_config, vocabs))
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint {path}: {e}") from e
    logger.info("Saved checkpoint (%d parameters) to %s", params.parameter_count, path)


class _Reader:
    """Bounds-checked cursor over the checkpoint body."""

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise CheckpointError("checkpoint is truncated")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def blob(self) -> bytes:
        (size,) = self.unpack("<I")
        return self.take(size)


def decode_checkpoint(data: bytes) -> tuple[ModelParams, RunConfig, VocabSet]:
    """
    Parse and validate checkpoint bytes.

    Raises:
        ChecksumMismatch: If the trailing SHA-256 does not match
        VersionUnsupported: If the format version is unknown
        CheckpointError: On a bad magic tag, truncation or tensors that do not
            fit the embedded config
    """
    if len(data) < len(MAGIC) + 4 + _DIGEST_SIZE:
        raise CheckpointError("file is too short to be a checkpoint")
    body, digest = data[:-_DIGEST_SIZE], data[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumMismatch("checkpoint checksum mismatch; the file is corrupted")

    reader = _Reader(body)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("not a patchsem checkpoint")
    (version,) = reader.unpack("<I")
    if version != FORMAT_VERSION:
        raise VersionUnsupported(f"checkpoint format version {version} is not supported (expected {FORMAT_VERSION})")

    try:
        run_config = RunConfig.from_echo(reader.blob().decode("utf-8"))
        vocabs = VocabSet.model_validate_json(reader.blob())
    except ValueError as e:
        raise CheckpointError(f"invalid embedded config or vocabularies: {e}") from e

    model_config = run_config.model_config_for(len(vocabs.token), len(vocabs.line), len(vocabs.description))
    frozen = {spec.name: spec.frozen_rows for spec in param_specs(model_config)}

    (count,) = reader.unpack("<I")
    tensors: dict[str, Tensor] = {}
    for _ in range(count):
        (name_size,) = reader.unpack("<H")
        name = reader.take(name_size).decode("utf-8")
        (rank,) = reader.unpack("<B")
        shape = reader.unpack(f"<{rank}I") if rank else ()
        numel = int(np.prod(shape)) if shape else 1
        values = np.frombuffer(reader.take(8 * numel), dtype="<f8").reshape(shape)
        tensors[name] = Tensor(
            torch.tensor(values.astype(np.float64)),
            requires_grad=True,
            name=name,
            frozen_rows=frozen.get(name, ()),
        )
    if reader.offset != len(body):
        raise CheckpointError("unexpected trailing data in checkpoint")

    try:
        params = ModelParams(model_config, tensors)
    except InvalidConfig as e:
        raise CheckpointError(f"tensors do not match the embedded config: {e}") from e
    return params, run_config, vocabs


def load_checkpoint(path: Path | str) -> tuple[ModelParams, RunConfig, VocabSet]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    params, run_config, vocabs = decode_checkpoint(data)
    logger.info("Loaded checkpoint %s (%s variant)", path, run_config.levels.variant)
    return params, run_config, vocabs
