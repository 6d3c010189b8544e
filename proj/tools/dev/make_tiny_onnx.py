#!/usr/bin/env python3
"""Exports the tiny ONNX embedder used by the adapter tests.

The model maps a 3x32x32 image to a 512-d embedding and exposes the last
convolutional feature map (8x8x8) as a second output named "features".
A reference forward pass on a constant image is written next to the model.
"""
import json
import pathlib

import torch
import torch.nn as nn

OUT = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "onnx"


class Tiny(nn.Module):
    def __init__(self):
        super().__init__()
        self.conv1 = nn.Conv2d(3, 4, 3, stride=2, padding=1)
        self.conv2 = nn.Conv2d(4, 8, 3, stride=2, padding=1)
        self.pool = nn.AvgPool2d(4)
        self.fc = nn.Linear(8 * 2 * 2, 512)

    def forward(self, x):
        f = torch.relu(self.conv2(torch.relu(self.conv1(x))))
        return self.fc(torch.flatten(self.pool(f), 1)), f


def main():
    torch.manual_seed(0)
    model = Tiny().eval()
    OUT.mkdir(parents=True, exist_ok=True)
    torch.onnx.export(model, torch.zeros(1, 3, 32, 32), OUT / "tiny_embedder.onnx",
                      input_names=["input"], output_names=["embedding", "features"],
                      opset_version=11, dynamo=False)
    # RGB (100, 120, 140) scaled by 1/255, no mean subtraction.
    x = torch.empty(1, 3, 32, 32)
    for c, v in enumerate((100, 120, 140)):
        x[0, c] = v / 255.0
    with torch.no_grad():
        emb, feat = model(x)
    ref = {"input_rgb": [100, 120, 140], "scale": 1.0 / 255.0,
           "embedding": [round(float(v), 7) for v in emb[0]],
           "features_shape": list(feat.shape[1:])}
    (OUT / "tiny_embedder_reference.json").write_text(json.dumps(ref) + "\n")


if __name__ == "__main__":
    main()
