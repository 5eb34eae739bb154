"""
Shared fixtures: run configs at two scales, synthetic corpora and the
real-world diff samples under tests/data/diffs.
"""

import os
from pathlib import Path

import pytest

from patchsem.core.config import RunConfig
from patchsem.models import init_params
from patchsem.services import encode_records, fit_vocabs, generate_synthetic_corpus

DATA_DIR = Path(__file__).parent / "data"
DIFF_DIR = DATA_DIR / "diffs"
CONFIG_DIR = Path(__file__).parent.parent / "configs"

# Small enough that a full central-difference sweep stays quick
TINY_OVERRIDES = {
    "ingest": {"token_limit": 4, "line_limit": 3, "description_limit": 3, "min_freq": 1},
    "model": {
        "embed_dim": 4,
        "kernel_sizes": [1, 3],
        "conv_out": 4,
        "residual_blocks": 1,
        "residual_out": 4,
        "pool_window": 2,
        "refine_dim": 4,
        "attn_dim": 4,
    },
}


@pytest.fixture(autouse=True)
def _isolated_environment(monkeypatch):
    """Keep PATCHSEM_* variables of the calling shell out of every test."""
    for key in list(os.environ):
        if key.upper().startswith("PATCHSEM_"):
            monkeypatch.delenv(key, raising=False)


@pytest.fixture
def tiny_config() -> RunConfig:
    return RunConfig.load(overrides=TINY_OVERRIDES)


@pytest.fixture
def toy_config() -> RunConfig:
    return RunConfig.toy()


@pytest.fixture(scope="session")
def synthetic_records():
    return generate_synthetic_corpus(32, seed=0)


@pytest.fixture
def build_model(synthetic_records):
    """
    Factory: (run_config, records=None, seed=0) -> (params, encoded, vocabs).

    Vocabularies are fitted on the given records (the 32-patch synthetic
    corpus by default).
    """

    def _build(run_config: RunConfig, records=None, seed: int = 0):
        records = synthetic_records if records is None else records
        vocabs = fit_vocabs(records, run_config.ingest.min_freq)
        encoded = encode_records(records, vocabs, run_config.ingest)
        model_config = run_config.model_config_for(len(vocabs.token), len(vocabs.line), len(vocabs.description))
        return init_params(model_config, seed=seed), encoded, vocabs

    return _build


@pytest.fixture(scope="session")
def diff_files() -> list[Path]:
    files = sorted(DIFF_DIR.iterdir())
    assert len(files) == 10
    return files
