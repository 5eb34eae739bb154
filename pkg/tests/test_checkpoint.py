import hashlib
import struct

import pytest

from patchsem.models import score_records
from patchsem.services import (
    CheckpointError,
    ChecksumMismatch,
    VersionUnsupported,
    load_checkpoint,
    save_checkpoint,
)
from patchsem.schemas.config import LevelToggles
from patchsem.services.checkpoint import MAGIC, decode_checkpoint, encode_checkpoint


def _resign(body: bytes) -> bytes:
    return body + hashlib.sha256(body).digest()


@pytest.fixture
def trained(tiny_config, build_model):
    params, encoded, vocabs = build_model(tiny_config, seed=3)
    return params, encoded, vocabs, tiny_config


class TestCheckpointRoundTrip:
    def test_bit_identical_params_and_scores(self, tmp_path, trained):
        params, encoded, vocabs, run_config = trained
        path = tmp_path / "model.psem"
        save_checkpoint(path, params, run_config, vocabs)
        loaded, loaded_config, loaded_vocabs = load_checkpoint(path)

        assert loaded.bitwise_equal(params)
        assert loaded_config.echo() == run_config.echo()
        assert loaded_vocabs == vocabs
        assert score_records(loaded, encoded) == score_records(params, encoded)
        assert loaded["token.embedding"].frozen_rows == (0,)

    def test_encoding_is_deterministic(self, trained):
        params, _, vocabs, run_config = trained
        assert encode_checkpoint(params, run_config, vocabs) == encode_checkpoint(params.clone(), run_config, vocabs)

    def test_paths_are_not_embedded(self, trained, tmp_path):
        params, _, vocabs, run_config = trained
        elsewhere = run_config.model_copy(update={"paths": run_config.paths.model_copy(update={"out": tmp_path})})
        assert encode_checkpoint(params, elsewhere, vocabs) == encode_checkpoint(params, run_config, vocabs)

    def test_description_ablation_has_no_description_tensors(self, tiny_config, build_model):
        run_config = tiny_config.model_copy(update={"levels": LevelToggles(description=False)})
        params, _, vocabs = build_model(run_config)
        loaded, loaded_config, _ = decode_checkpoint(encode_checkpoint(params, run_config, vocabs))
        assert not any(name.startswith("description.") for name in loaded)
        assert loaded_config.levels.variant == "DL-"


class TestCheckpointErrors:
    def test_flipped_byte(self, trained):
        params, _, vocabs, run_config = trained
        data = bytearray(encode_checkpoint(params, run_config, vocabs))
        data[len(data) // 2] ^= 0xFF
        with pytest.raises(ChecksumMismatch):
            decode_checkpoint(bytes(data))

    def test_unknown_version(self, trained):
        params, _, vocabs, run_config = trained
        body = encode_checkpoint(params, run_config, vocabs)[:-32]
        body = body[: len(MAGIC)] + struct.pack("<I", 2) + body[len(MAGIC) + 4 :]
        with pytest.raises(VersionUnsupported):
            decode_checkpoint(_resign(body))

    def test_bad_magic(self, trained):
        params, _, vocabs, run_config = trained
        body = encode_checkpoint(params, run_config, vocabs)[:-32]
        with pytest.raises(CheckpointError):
            decode_checkpoint(_resign(b"NOTACKPT" + body[len(MAGIC) :]))

    def test_truncated(self, trained):
        params, _, vocabs, run_config = trained
        body = encode_checkpoint(params, run_config, vocabs)[:-32]
        with pytest.raises(CheckpointError):
            decode_checkpoint(_resign(body[:-8]))
        with pytest.raises(CheckpointError):
            decode_checkpoint(b"PSEM")

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.psem")
