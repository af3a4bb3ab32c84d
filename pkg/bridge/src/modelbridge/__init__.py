"""Hard-label model server speaking the attack engine's wire protocol."""

from .models import ModelSpec, ServedModel, load_model, spec_for
from .server import BridgeServer, serve

__version__ = "0.1.0"

__all__ = ["BridgeServer", "ModelSpec", "ServedModel", "load_model", "serve", "spec_for"]
