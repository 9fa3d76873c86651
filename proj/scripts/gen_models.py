#!/usr/bin/env python3
"""Generate the large bundled model descriptors (ResNet-50/152, RetinaNet).

Emits data/models/{resnet50,resnet152,retinanet}.json. The descriptors carry
full layer shapes so headline FLOP counts come out right; pooling at the tail
of the ResNets is encoded as max pooling (the runtime supports no average
pooling) which does not affect FLOP accounting.

RetinaNet note: the FPN top-down upsample+add arms are omitted because the
layer vocabulary has no upsample kind; they contribute no conv FLOPs.
"""
import json
import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "data", "models")


def conv(name, inputs, out_ch, in_ch, k, stride=1, pad=0, groups=1, relu=False):
    layer = {
        "name": name,
        "type": "conv",
        "out_channels": out_ch,
        "in_channels": in_ch,
        "kernel_size": k,
        "stride": stride,
        "padding": pad,
    }
    if inputs is not None:
        layer["inputs"] = [inputs] if isinstance(inputs, str) else inputs
    if groups != 1:
        layer["groups"] = groups
    if relu:
        layer["relu"] = True
    return layer


def resnet(name, blocks, num_classes=1000, input_hw=224):
    layers = []
    layers.append(conv("conv1", "input", 64, 3, 7, stride=2, pad=3, relu=True))
    layers.append({"name": "pool1", "type": "maxpool", "window": 3, "stride": 2,
                   "inputs": ["conv1"]})
    h = (input_hw + 2 * 3 - 7) // 2 + 1
    h = (h - 3) // 2 + 1

    prev = "pool1"
    in_ch = 64
    stage_mid = [64, 128, 256, 512]
    for si, nb in enumerate(blocks):
        mid = stage_mid[si]
        out_ch = mid * 4
        for b in range(nb):
            stride = 2 if (si > 0 and b == 0) else 1
            tag = f"res{si + 2}_{b + 1}"
            skip = prev
            layers.append(conv(f"{tag}_branch2a", prev, mid, in_ch, 1, relu=True))
            layers.append(conv(f"{tag}_branch2b", f"{tag}_branch2a", mid, mid, 3,
                               stride=stride, pad=1, relu=True))
            layers.append(conv(f"{tag}_branch2c", f"{tag}_branch2b", out_ch, mid, 1))
            if b == 0:
                layers.append(conv(f"{tag}_branch1", skip, out_ch, in_ch, 1, stride=stride))
                skip = f"{tag}_branch1"
            layers.append({"name": tag, "type": "eltwise",
                           "inputs": [f"{tag}_branch2c", skip], "relu": True})
            prev = tag
            in_ch = out_ch
            if stride == 2:
                h = (h + 2 - 3) // 2 + 1
    # Global pooling expressed as a full-window max pool.
    layers.append({"name": "pool_final", "type": "maxpool", "window": h, "stride": 1,
                   "inputs": [prev]})
    layers.append({"name": "fc1000", "type": "fc", "out_channels": num_classes,
                   "in_channels": in_ch, "inputs": ["pool_final"]})
    return {"name": name, "input_shape": [3, input_hw, input_hw], "layers": layers}


def retinanet(input_hw=800, num_classes=80, anchors=9):
    backbone = resnet("retinanet", [3, 4, 6, 3], input_hw=input_hw)
    layers = [l for l in backbone["layers"] if l["name"] not in ("pool_final", "fc1000")]
    # Last block of each backbone stage.
    c_feats = {"C2": ("res2_3", 256), "C3": ("res3_4", 512),
               "C4": ("res4_6", 1024), "C5": ("res5_3", 2048)}

    # FPN: lateral 1x1 + 3x3 smoothing on C3..C5; P6/P7 by strided 3x3.
    pyramids = []
    for cname in ("C3", "C4", "C5"):
        src, ch = c_feats[cname]
        p = "p" + cname[1]
        layers.append(conv(f"{p}_lateral", src, 256, ch, 1))
        layers.append(conv(p, f"{p}_lateral", 256, 256, 3, pad=1))
        pyramids.append(p)
    layers.append(conv("p6", c_feats["C5"][0], 256, 2048, 3, stride=2, pad=1))
    layers.append(conv("p7_relu", "p6", 256, 256, 3, stride=2, pad=1, relu=True))
    pyramids += ["p6", "p7_relu"]

    # Classification and box towers on every pyramid level.
    for p in pyramids:
        for branch, out_ch in (("cls", anchors * num_classes), ("box", anchors * 4)):
            prev = p
            for i in range(4):
                name = f"{p}_{branch}{i}"
                layers.append(conv(name, prev, 256, 256, 3, pad=1, relu=True))
                prev = name
            layers.append(conv(f"{p}_{branch}_out", prev, out_ch, 256, 3, pad=1))
    return {"name": "retinanet", "input_shape": [3, input_hw, input_hw], "layers": layers}


def emit(model):
    path = os.path.join(OUT_DIR, model["name"] + ".json")
    with open(path, "w") as f:
        json.dump(model, f, indent=1)
        f.write("\n")
    print(f"wrote {path} ({len(model['layers'])} layers)")


if __name__ == "__main__":
    emit(resnet("resnet50", [3, 4, 6, 3]))
    emit(resnet("resnet152", [3, 8, 36, 3]))
    emit(retinanet())
