"""Served models: torchvision classifiers plus a tiny deterministic test net.

The wire payload is a flat (width, height, channel-innermost) float32 image
in [0, 1]. All normalization lives here on the server side, so the attack
engine perturbs raw pixels exactly as the classifier's preprocessing expects
them to arrive.
"""

import re
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

# The six supported ImageNet classifiers, all driven at 224x224x3.
TORCHVISION_MODELS = {
    "vgg19": "vgg19",
    "resnet50": "resnet50",
    "inception-v3": "inception_v3",
    "vit-b32": "vit_b_32",
    "densenet161": "densenet161",
    "efficientnet-b0": "efficientnet_b0",
}

IMAGENET_SIDE = 224
IMAGENET_CLASSES = 1000


@dataclass(frozen=True)
class ModelSpec:
    """Shape contract a served model advertises in the handshake."""

    model_id: str
    width: int
    height: int
    channels: int
    class_count: int

    @property
    def n(self):
        return self.width * self.height * self.channels


def spec_for(model_id):
    """Handshake metadata for a model id, without loading any weights."""
    if model_id in TORCHVISION_MODELS:
        return ModelSpec(model_id, IMAGENET_SIDE, IMAGENET_SIDE, 3, IMAGENET_CLASSES)
    tiny = re.fullmatch(r"tiny:(\d+)x(\d+)", model_id)
    if tiny:
        return ModelSpec(model_id, int(tiny.group(1)), int(tiny.group(2)), 3, 10)
    raise ValueError(f"unknown model id {model_id!r}")


class TinyNet(nn.Module):
    """Small seeded CNN; deterministic stand-in when no weights are available."""

    def __init__(self, classes=10):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(3, 8, 3, padding=1), nn.ReLU(),
            nn.Conv2d(8, 16, 3, padding=1), nn.ReLU(),
            nn.AdaptiveAvgPool2d(4),
        )
        self.head = nn.Linear(16 * 16, classes)

    def forward(self, x):
        x = self.features(x)
        return self.head(torch.flatten(x, 1))


@dataclass
class ServedModel:
    """A loaded classifier plus the preprocessing it expects."""

    spec: ModelSpec
    module: torch.nn.Module
    mean: torch.Tensor
    std: torch.Tensor
    device: torch.device

    def classify(self, payload):
        """Hard label for one flat float32 payload in [0, 1]."""
        flat = np.frombuffer(payload, dtype="<f4", count=self.spec.n)
        grid = flat.reshape(self.spec.width, self.spec.height, self.spec.channels)
        chw = np.ascontiguousarray(np.transpose(grid, (2, 1, 0)))
        batch = torch.from_numpy(chw.copy()).to(self.device, dtype=torch.float32)
        batch = (batch - self.mean) / self.std
        with torch.no_grad():
            logits = self.module(batch.unsqueeze(0))
        return int(torch.argmax(logits, dim=1).item())


def load_model(model_id, weights="default", device="cpu", seed=0):
    """Build a ServedModel.

    weights: "default" loads the published pretrained checkpoint through
    torchvision (needs the download cache or network), "none" keeps a seeded
    random initialization (protocol testing only), anything else is a local
    state-dict path.
    """
    spec = spec_for(model_id)
    dev = torch.device("cuda" if device == "accelerator" else device)
    torch.manual_seed(seed)

    if model_id.startswith("tiny:"):
        module = TinyNet(classes=spec.class_count)
        mean = torch.zeros(3, 1, 1)
        std = torch.ones(3, 1, 1)
    else:
        import torchvision.models as tvm

        name = TORCHVISION_MODELS[model_id]
        if weights == "default":
            module = tvm.get_model(name, weights="DEFAULT")
        else:
            module = tvm.get_model(name, weights=None)
            if weights != "none":
                state = torch.load(weights, map_location="cpu")
                module.load_state_dict(state)
        mean = torch.tensor(IMAGENET_MEAN).view(3, 1, 1)
        std = torch.tensor(IMAGENET_STD).view(3, 1, 1)

    module.eval()
    module.to(dev)
    return ServedModel(spec=spec, module=module, mean=mean.to(dev), std=std.to(dev),
                       device=dev)
