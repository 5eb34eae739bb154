"""
Pydantic schemas for patch ingestion: raw records, parsed hunks,
vocabularies and encoded model inputs.
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


class PatchRecord(BaseModel):
    """One raw patch as stored in the JSONL dataset."""

    model_config = ConfigDict(populate_by_name=True, extra="ignore", frozen=True)

    id: str = Field(..., description="Opaque record identifier")
    diff_text: str = Field(..., alias="diff", description="Unified-diff text")
    description: str = Field(..., alias="message", description="Commit message")
    label: int = Field(..., ge=0, le=1, strict=True, description="1 = security, 0 = non-security")

    def to_json_record(self) -> dict:
        """Serialize with the dataset's external key names."""
        return self.model_dump(by_alias=True)


class DiffHunks(BaseModel):
    """Code lines of a diff, classified by their leading marker."""

    model_config = ConfigDict(frozen=True)

    added_lines: list[str] = Field(default_factory=list)
    removed_lines: list[str] = Field(default_factory=list)
    context_lines: list[str] = Field(default_factory=list)

    @property
    def changed_lines(self) -> list[str]:
        """Removed lines followed by added lines (the model's reading order)."""
        return [*self.removed_lines, *self.added_lines]


class Vocab(BaseModel):
    """
    Dense id space for one input level.

    Ids 0 and 1 are reserved for PAD and UNK; corpus entries start at 2.
    """

    model_config = ConfigDict(frozen=True)

    id_to_token: list[str] = Field(default_factory=lambda: [PAD_TOKEN, UNK_TOKEN])
    min_freq: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_specials(self) -> "Vocab":
        if self.id_to_token[:2] != [PAD_TOKEN, UNK_TOKEN]:
            raise ValueError("vocabulary must start with the PAD and UNK specials")
        if len(set(self.id_to_token)) != len(self.id_to_token):
            raise ValueError("vocabulary entries must be unique")
        return self

    @property
    def token_to_id(self) -> dict[str, int]:
        # Built lazily; frozen models cannot cache on self.
        return {token: i for i, token in enumerate(self.id_to_token)}

    def __len__(self) -> int:
        return len(self.id_to_token)

    def lookup(self, tokens: list[str]) -> list[int]:
        """Map entries to ids, UNK for anything unseen."""
        index = self.token_to_id
        return [
            index.get(token, UNK_ID) if token not in (PAD_TOKEN, UNK_TOKEN) else UNK_ID
            for token in tokens
        ]


class EncodedPatch(BaseModel):
    """Fixed-length id sequences for the token, line and description levels."""

    model_config = ConfigDict(frozen=True)

    id: str = ""
    token_ids: tuple[int, ...]
    line_ids: tuple[int, ...]
    desc_ids: tuple[int, ...]
    label: int = Field(..., ge=0, le=1)

    @property
    def token_mask(self) -> tuple[bool, ...]:
        return tuple(i != PAD_ID for i in self.token_ids)

    @property
    def line_mask(self) -> tuple[bool, ...]:
        return tuple(i != PAD_ID for i in self.line_ids)

    @property
    def desc_mask(self) -> tuple[bool, ...]:
        return tuple(i != PAD_ID for i in self.desc_ids)


class VocabSet(BaseModel):
    """The three vocabularies a model is trained with."""

    model_config = ConfigDict(frozen=True)

    token: Vocab = Field(default_factory=Vocab)
    line: Vocab = Field(default_factory=Vocab)
    description: Vocab = Field(default_factory=Vocab)
