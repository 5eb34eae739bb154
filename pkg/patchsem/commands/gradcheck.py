"""
Gradcheck Command - Verify recorded gradients of the full model loss.

Runs central differences over every parameter on a generated 2-patch batch.
Without --config the desk-scale preset is used.

Usage:
    patchsem gradcheck [--config toy.toml] [--seed 0] [--set levels.description=false]
"""

import argparse
import logging

import torch

from patchsem.autodiff import DTYPE, GradCheckReport, GradientCheckFailed, finite_diff_check
from patchsem.core.config import RunConfig
from patchsem.models import ModelParams, batch_loss, init_params, param_specs
from patchsem.services import encode_records, fit_vocabs, generate_synthetic_corpus

from .common import add_config_options, load_run_config

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
BIAS_JITTER = 0.1


def jitter_biases(params: ModelParams, seed: int) -> None:
    """
    Move every bias off zero.

    Zero biases leave padded positions at exactly 0 before the ReLU, where
    a central difference straddles the kink.
    """
    generator = torch.Generator().manual_seed(seed + 1)
    for spec in param_specs(params.config):
        if spec.is_bias:
            noise = (torch.rand(spec.shape, generator=generator, dtype=DTYPE) * 2.0 - 1.0) * BIAS_JITTER
            params[spec.name].data.copy_(noise)


def check_model_gradients(
    run_config: RunConfig, seed: int = 0, batch_size: int = 2, eps: float = 1e-5
) -> GradCheckReport:
    """Finite-difference report for the model loss on a synthetic batch."""
    records = generate_synthetic_corpus(batch_size, seed=seed)
    vocabs = fit_vocabs(records, min_freq=1)
    batch = encode_records(records, vocabs, run_config.ingest)
    model_config = run_config.model_config_for(len(vocabs.token), len(vocabs.line), len(vocabs.description))
    params = init_params(model_config, seed=seed)
    jitter_biases(params, seed)
    logger.info(
        "Checking %d parameters of the %s variant (eps=%g)", params.parameter_count, run_config.levels.variant, eps
    )
    return finite_diff_check(lambda: batch_loss(batch, params), dict(params.named()), eps=eps)


def run(args: argparse.Namespace) -> int:
    run_config = load_run_config(args, toy=True)
    result = check_model_gradients(run_config, seed=args.seed, eps=args.eps)

    width = max(len(name) for name in result.worst_by_param)
    for name, error in result.worst_by_param.items():
        print(f"{name:<{width}}  {error:.3e}")
    print(f"max relative error {result.max_error:.3e} ({result.checked_elements} elements, worst: {result.worst_param})")
    if not result.passed(args.tolerance):
        raise GradientCheckFailed(result, args.tolerance)
    print("OK")
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("gradcheck", help="Compare gradients against central differences")
    parser.add_argument("--seed", type=int, default=0, help="Parameter and batch seed")
    parser.add_argument("--eps", type=float, default=1e-5, help="Finite-difference step")
    parser.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE, help="Maximum relative error")
    add_config_options(parser)
    parser.set_defaults(handler=run)
