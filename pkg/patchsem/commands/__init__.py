# CLI commands - Export all subcommand registrations for easy wiring
from .ablate import register as register_ablate
from .evaluate import register as register_eval
from .gradcheck import register as register_gradcheck
from .predict import register as register_predict
from .synth import register as register_synth
from .train import register as register_train

__all__ = [
    "register_ablate",
    "register_eval",
    "register_gradcheck",
    "register_predict",
    "register_synth",
    "register_train",
]
