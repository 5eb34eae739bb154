"""
Learnable parameters of the classifier graph.

Tensor names and shapes are a pure function of ModelConfig:

    {level}.embedding                  [V x d]        (PAD row 0 frozen at zero)
    {level}.conv{i}.weight / .bias     [k_i x d x d^f] / [d^f]
    {level}.conv{i}.block{j}.w1 / .b1  [k_i x d^p x d^p] / [d^p]
    {level}.conv{i}.block{j}.w2 / .b2  [k_i x d^p x d^p] / [d^p]
    {level}.conv{i}.block{j}.w3 / .b3  [1 x d^p x d^p]   / [d^p]
    align.query, align.key             [F x attn]     (pool_score = dot)
    align.score                        [F]            (pool_score = linear)
    refine.weight / .bias              [F x refine] / [refine]
    attention.query / .key / .value    [refine x attn]
    head.weight / .bias                [attn] / []

with level in (token, line, description) for the enabled levels only and
F = m * d^p.
"""

import logging
import math
from collections.abc import Iterator

import torch
from pydantic import ValidationError

from patchsem.autodiff import DTYPE, Tensor
from patchsem.core.exceptions import PatchSemError
from patchsem.schemas.config import ModelConfig
from patchsem.schemas.patch import PAD_ID

logger = logging.getLogger(__name__)

# Input level -> (toggle attribute on LevelToggles, vocab size attribute on ModelConfig)
LEVELS: dict[str, tuple[str, str]] = {
    "token": ("token", "token_vocab_size"),
    "line": ("sentence", "line_vocab_size"),
    "description": ("description", "desc_vocab_size"),
}


class InvalidConfig(PatchSemError):
    """Raised when a model config cannot produce a parameter set."""

    pass


class ParamSpec:
    """Shape and fan-in of one named tensor."""

    __slots__ = ("name", "shape", "fan_in", "is_bias", "frozen_rows")

    def __init__(self, name: str, shape: tuple[int, ...], fan_in: int, is_bias: bool = False, frozen_rows=()):
        self.name = name
        self.shape = shape
        self.fan_in = fan_in
        self.is_bias = is_bias
        self.frozen_rows = tuple(frozen_rows)


def enabled_levels(config: ModelConfig) -> list[str]:
    """Enabled input levels in graph order."""
    return [level for level, (toggle, _) in LEVELS.items() if getattr(config.levels, toggle)]


def param_specs(config: ModelConfig) -> list[ParamSpec]:
    """Every tensor of the model in initialization order."""
    d = config.embed_dim
    width = config.residual_out
    specs: list[ParamSpec] = []

    for level in enabled_levels(config):
        vocab_size = getattr(config, LEVELS[level][1])
        specs.append(ParamSpec(f"{level}.embedding", (vocab_size, d), d, frozen_rows=(PAD_ID,)))
        for i, k in enumerate(config.kernel_sizes):
            prefix = f"{level}.conv{i}"
            specs.append(ParamSpec(f"{prefix}.weight", (k, d, config.conv_out), k * d))
            specs.append(ParamSpec(f"{prefix}.bias", (config.conv_out,), 0, is_bias=True))
            for j in range(config.residual_blocks):
                block = f"{prefix}.block{j}"
                specs += [
                    ParamSpec(f"{block}.w1", (k, width, width), k * width),
                    ParamSpec(f"{block}.b1", (width,), 0, is_bias=True),
                    ParamSpec(f"{block}.w2", (k, width, width), k * width),
                    ParamSpec(f"{block}.b2", (width,), 0, is_bias=True),
                    ParamSpec(f"{block}.w3", (1, width, width), width),
                    ParamSpec(f"{block}.b3", (width,), 0, is_bias=True),
                ]

    features = config.feature_width
    if config.aligned_length > 0:
        if config.pool_score == "dot":
            specs.append(ParamSpec("align.query", (features, config.attn_dim), features))
            specs.append(ParamSpec("align.key", (features, config.attn_dim), features))
        else:
            specs.append(ParamSpec("align.score", (features,), features))

    specs += [
        ParamSpec("refine.weight", (features, config.refine_dim), features),
        ParamSpec("refine.bias", (config.refine_dim,), 0, is_bias=True),
        ParamSpec("attention.query", (config.refine_dim, config.attn_dim), config.refine_dim),
        ParamSpec("attention.key", (config.refine_dim, config.attn_dim), config.refine_dim),
        ParamSpec("attention.value", (config.refine_dim, config.attn_dim), config.refine_dim),
        ParamSpec("head.weight", (config.attn_dim,), config.attn_dim),
        ParamSpec("head.bias", (), 0, is_bias=True),
    ]
    return specs


def uniform_init(shape: tuple[int, ...], fan_in: int, generator: torch.Generator) -> torch.Tensor:
    """Draw from U(-1/sqrt(fan_in), +1/sqrt(fan_in))."""
    bound = 1.0 / math.sqrt(fan_in)
    return (torch.rand(shape, generator=generator, dtype=DTYPE) * 2.0 - 1.0) * bound


class ModelParams:
    """
    Named parameter tensors plus the config they were built for.

    Usage:
        params = init_params(config, seed=0)
        params["head.weight"]
        for name, tensor in params.named(): ...
    """

    def __init__(self, config: ModelConfig, tensors: dict[str, Tensor]):
        expected = {spec.name: spec for spec in param_specs(config)}
        if set(tensors) != set(expected):
            missing = sorted(set(expected) - set(tensors))
            extra = sorted(set(tensors) - set(expected))
            raise InvalidConfig(f"parameter names do not match config (missing={missing}, unexpected={extra})")
        for name, spec in expected.items():
            if tensors[name].shape != spec.shape:
                raise InvalidConfig(f"{name}: shape {tensors[name].shape} != {spec.shape} from config")
        self.config = config
        # Keep config order regardless of the order tensors were passed in
        self._tensors = {name: tensors[name] for name in expected}

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def named(self) -> list[tuple[str, Tensor]]:
        return list(self._tensors.items())

    def tensors(self) -> list[Tensor]:
        return list(self._tensors.values())

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def clone(self) -> "ModelParams":
        """Independent copy of the values (gradients are not copied)."""
        copies = {
            name: Tensor(t.data.clone(), requires_grad=t.requires_grad, name=name, frozen_rows=t.frozen_rows)
            for name, t in self._tensors.items()
        }
        return ModelParams(self.config, copies)

    def bitwise_equal(self, other: "ModelParams") -> bool:
        if list(self) != list(other):
            return False
        return all(torch.equal(self[name].data, other[name].data) for name in self)

    @property
    def parameter_count(self) -> int:
        return parameter_count(self)


def parameter_count(params: ModelParams) -> int:
    """Total number of scalar parameters."""
    return sum(tensor.numel for tensor in params.tensors())


def init_params(config: ModelConfig, seed: int = 0) -> ModelParams:
    """
    Draw a fresh parameter set.

    Weights are uniform in +-1/sqrt(fan_in), drawn in `param_specs` order from
    one seeded generator; biases are zero; embedding PAD rows are zero.

    Raises:
        InvalidConfig: If `config` does not validate as a ModelConfig
    """
    if not isinstance(config, ModelConfig):
        try:
            config = ModelConfig.model_validate(config)
        except ValidationError as e:
            raise InvalidConfig(f"Invalid model config: {e}") from e

    generator = torch.Generator().manual_seed(seed)
    tensors: dict[str, Tensor] = {}
    for spec in param_specs(config):
        if spec.is_bias:
            value = torch.zeros(spec.shape, dtype=DTYPE)
        else:
            value = uniform_init(spec.shape, spec.fan_in, generator)
        for row in spec.frozen_rows:
            value[row] = 0.0
        tensors[spec.name] = Tensor(value, requires_grad=True, name=spec.name, frozen_rows=spec.frozen_rows)

    params = ModelParams(config, tensors)
    logger.debug("Initialized %d tensors, %d parameters (seed=%d)", len(tensors), params.parameter_count, seed)
    return params
