from .config import ModelConfig
from .network import GenerationResult, LengthExceeded, Mas2sModel

__all__ = ["ModelConfig", "GenerationResult", "LengthExceeded", "Mas2sModel"]
