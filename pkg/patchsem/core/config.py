"""
Run configuration using pydantic-settings.

Sources, highest priority first: command-line overrides, environment
variables (PATCHSEM_SECTION__KEY), the TOML config file, defaults.
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from contextvars import ContextVar
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from patchsem.core.exceptions import PatchSemError
from patchsem.schemas.config import (
    ArchitectureConfig,
    IngestConfig,
    LevelToggles,
    ModelConfig,
    TrainConfig,
)


class ConfigFileError(PatchSemError):
    """Raised when the config file is missing or not valid TOML."""

    pass


class PathsConfig(BaseModel):
    """File locations for a run. Not part of the config echo."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    data: Path | None = Field(None, description="Training / evaluation JSONL dataset")
    valid: Path | None = Field(None, description="Validation JSONL dataset")
    out: Path | None = Field(None, description="Checkpoint path written by train")
    model: Path | None = Field(None, description="Checkpoint path read by eval / predict")
    report: Path | None = Field(None, description="Optional metrics report written by eval")


# The TOML file is chosen per call, so the settings source reads it from here
_active_config_file: ContextVar[Path | None] = ContextVar("patchsem_config_file", default=None)

# Desk-scale preset used by gradcheck and the test-suite
TOY_OVERRIDES: dict[str, Any] = {
    "ingest": {"token_limit": 12, "line_limit": 6, "description_limit": 6, "min_freq": 1},
    "model": {
        "embed_dim": 8,
        "kernel_sizes": [1, 3],
        "conv_out": 8,
        "residual_blocks": 1,
        "residual_out": 8,
        "pool_window": 2,
        "refine_dim": 8,
        "attn_dim": 8,
    },
}


class RunConfig(BaseSettings):
    """Effective configuration of one CLI invocation."""

    ingest: IngestConfig = Field(default_factory=IngestConfig)
    model: ArchitectureConfig = Field(default_factory=ArchitectureConfig)
    levels: LevelToggles = Field(default_factory=LevelToggles)
    train: TrainConfig = Field(default_factory=TrainConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    model_config = SettingsConfigDict(
        env_prefix="PATCHSEM_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="forbid",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        sources: list[PydanticBaseSettingsSource] = [init_settings, env_settings]
        config_file = _active_config_file.get()
        if config_file is not None:
            sources.append(TomlConfigSettingsSource(settings_cls, toml_file=config_file))
        return tuple(sources)

    @classmethod
    def load(
        cls, config_file: Path | None = None, overrides: dict[str, Any] | None = None
    ) -> "RunConfig":
        """
        Build the effective config.

        Args:
            config_file: Optional TOML file
            overrides: Nested dict of command-line values (highest priority)

        Raises:
            ConfigFileError: If the file is missing or unparsable
            pydantic.ValidationError: On unknown keys or invalid values
        """
        if config_file is not None:
            config_file = Path(config_file)
            if not config_file.is_file():
                raise ConfigFileError(f"Config file not found: {config_file}")
            try:
                tomllib.loads(config_file.read_text(encoding="utf-8"))
            except UnicodeDecodeError as e:
                raise ConfigFileError(f"Config file {config_file} is not valid UTF-8: {e}") from e
            except tomllib.TOMLDecodeError as e:
                raise ConfigFileError(f"Invalid TOML in {config_file}: {e}") from e

        token = _active_config_file.set(config_file)
        try:
            return cls(**(overrides or {}))
        finally:
            _active_config_file.reset(token)

    @classmethod
    def toy(cls, overrides: dict[str, Any] | None = None) -> "RunConfig":
        """The desk-scale preset, optionally adjusted."""
        return cls.load(overrides=merge_overrides(TOY_OVERRIDES, overrides or {}))

    def model_config_for(
        self, token_vocab_size: int, line_vocab_size: int, desc_vocab_size: int
    ) -> ModelConfig:
        """Full graph config once the vocabulary sizes are known."""
        return ModelConfig.assemble(
            self.model,
            self.ingest,
            self.levels,
            token_vocab_size=token_vocab_size,
            line_vocab_size=line_vocab_size,
            desc_vocab_size=desc_vocab_size,
        )

    def echo(self) -> str:
        """
        Canonical JSON of the effective config, embedded in every artifact.

        Paths are invocation details and are left out so that identical
        runs written to different files stay byte-identical.
        """
        return self.model_dump_json(exclude={"paths"})

    @classmethod
    def from_echo(cls, text: str) -> "RunConfig":
        """Rebuild a config from an embedded echo (no env, no file)."""
        return cls.model_validate_json(text)


def parse_override(assignment: str) -> dict[str, Any]:
    """
    Turn 'section.key=value' into {'section': {'key': value}}.

    Values are read as TOML literals (numbers, booleans, arrays, quoted
    strings); anything else is kept as a bare string.
    """
    if "=" not in assignment:
        raise ConfigFileError(f"Override must look like section.key=value, got '{assignment}'")
    dotted, raw = assignment.split("=", 1)
    keys = [k.strip() for k in dotted.split(".") if k.strip()]
    if not keys:
        raise ConfigFileError(f"Override has an empty key: '{assignment}'")
    try:
        value: Any = tomllib.loads(f"value = {raw.strip()}")["value"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()

    nested: dict[str, Any] = {keys[-1]: value}
    for key in reversed(keys[:-1]):
        nested = {key: nested}
    return nested


def merge_overrides(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
    """Recursive dict merge; values in `extra` win."""
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged
