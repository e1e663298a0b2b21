from .networks import (
    Generator,
    PatchDiscriminator,
    build_translation_models,
    discriminator_forward,
    generator_forward,
    instance_normalize,
)
from .losses import (
    adversarial_loss_discriminator,
    adversarial_loss_generator,
    cycle_loss,
)
from .train import (
    TranslationCheckpoint,
    TranslationTrainer,
    load_translation_checkpoint,
    save_translation_checkpoint,
    translate,
)

__all__ = [
    "Generator",
    "PatchDiscriminator",
    "build_translation_models",
    "generator_forward",
    "discriminator_forward",
    "instance_normalize",
    "adversarial_loss_discriminator",
    "adversarial_loss_generator",
    "cycle_loss",
    "TranslationCheckpoint",
    "TranslationTrainer",
    "translate",
    "save_translation_checkpoint",
    "load_translation_checkpoint",
]
