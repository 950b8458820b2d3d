"""Pretrained-CNN backbone wrapper emitting fixed-dimension feature vectors.

The backbone is any torchvision classifier; features are the pooled
penultimate-layer activations (2048-wide for the default ResNet-50). Images
are preprocessed identically everywhere: convert to RGB, resize to 224x224,
scale to [0, 1], normalize with the ImageNet statistics. Occlusion-swept
variants produced upstream are plain pixel edits, so they pass through the
very same preprocessing — occlusion happens before normalization, in pixel
space.

``weights`` accepts:
  - "pretrained": the torchvision ImageNet weights (downloads on first use),
  - "random": seeded random initialization — deterministic, useful for
    hermetic tests and protocol work where semantic quality is irrelevant,
  - a filesystem path to a state-dict checkpoint.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision import models

IMAGE_SIZE = 224
_IMAGENET_MEAN = torch.tensor([0.485, 0.456, 0.406]).view(3, 1, 1)
_IMAGENET_STD = torch.tensor([0.229, 0.224, 0.225]).view(3, 1, 1)

_BACKBONES = {
    "resnet50": (models.resnet50, "ResNet50_Weights"),
    "resnet101": (models.resnet101, "ResNet101_Weights"),
    "inception_v3": (models.inception_v3, "Inception_V3_Weights"),
}


class Backbone:
    def __init__(self, name: str = "resnet50", weights: str = "pretrained",
                 seed: int = 0):
        if name not in _BACKBONES:
            raise ValueError(
                f"unknown backbone {name!r}; choose from {sorted(_BACKBONES)}"
            )
        ctor, weights_enum_name = _BACKBONES[name]
        kwargs = {"aux_logits": False, "init_weights": True} if name == "inception_v3" else {}
        if weights == "pretrained":
            weights_enum = getattr(models, weights_enum_name).IMAGENET1K_V1
            if name == "inception_v3":
                kwargs = {}
            model = ctor(weights=weights_enum, **kwargs)
        elif weights == "random":
            torch.manual_seed(seed)
            model = ctor(weights=None, **kwargs)
        else:
            model = ctor(weights=None, **kwargs)
            state = torch.load(weights, map_location="cpu", weights_only=True)
            model.load_state_dict(state)
        model.eval()
        # Pooled penultimate activations: replace the classifier head with
        # identity so forward() returns the feature vector directly.
        model.fc = torch.nn.Identity()
        self.model = model
        self.name = name
        with torch.no_grad():
            probe = torch.zeros(1, 3, IMAGE_SIZE, IMAGE_SIZE)
            self.dim = int(self.model(probe).shape[1])

    def preprocess(self, image: Image.Image) -> torch.Tensor:
        image = image.convert("RGB")
        if image.size != (IMAGE_SIZE, IMAGE_SIZE):
            image = image.resize((IMAGE_SIZE, IMAGE_SIZE), Image.BILINEAR)
        tensor = torch.from_numpy(
            np.asarray(image, dtype=np.float32).copy()
        ).permute(2, 0, 1) / 255.0
        return (tensor - _IMAGENET_MEAN) / _IMAGENET_STD

    @torch.no_grad()
    def extract(self, images: list[Image.Image]) -> np.ndarray:
        """(n, dim) float64 feature matrix for a batch of images."""
        if not images:
            return np.zeros((0, self.dim))
        batch = torch.stack([self.preprocess(img) for img in images])
        return self.model(batch).double().numpy()

    def extract_one(self, image: Image.Image) -> np.ndarray:
        return self.extract([image])[0]

    def extract_bytes(self, raw: bytes) -> np.ndarray:
        with Image.open(io.BytesIO(raw)) as img:
            img.load()
            return self.extract_one(img)

    def extract_path(self, path: str | Path) -> np.ndarray:
        with Image.open(path) as img:
            img.load()
            return self.extract_one(img)
