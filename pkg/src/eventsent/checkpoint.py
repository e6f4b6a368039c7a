"""Checkpoint directories: metadata.json + weights.npz.

Layout contract: a checkpoint is a directory holding
  - metadata.json  architecture + vocab metadata; `format_version` mandatory
  - weights.npz    one named float array per parameter tensor

Loading validates shapes against the receiving module and names every
offending tensor in the error.
"""

from __future__ import annotations

import json
import os

import numpy as np
import torch

FORMAT_VERSION = 1

METADATA_FILE = "metadata.json"
WEIGHTS_FILE = "weights.npz"


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path: str | os.PathLike, metadata: dict, tensors: dict) -> None:
    os.makedirs(path, exist_ok=True)
    meta = dict(metadata)
    meta.setdefault("format_version", FORMAT_VERSION)
    with open(os.path.join(path, METADATA_FILE), "w", encoding="utf-8") as handle:
        json.dump(meta, handle, ensure_ascii=False, indent=2, sort_keys=True)
    arrays = {}
    for name, tensor in tensors.items():
        if isinstance(tensor, torch.Tensor):
            arrays[name] = tensor.detach().cpu().numpy()
        else:
            arrays[name] = np.asarray(tensor)
    np.savez(os.path.join(path, WEIGHTS_FILE), **arrays)


def load_checkpoint(path: str | os.PathLike) -> tuple[dict, dict]:
    meta_path = os.path.join(path, METADATA_FILE)
    weights_path = os.path.join(path, WEIGHTS_FILE)
    if not os.path.isdir(path):
        raise FileNotFoundError(f"checkpoint directory not found: {path}")
    if not os.path.exists(meta_path):
        raise FileNotFoundError(f"checkpoint metadata not found: {meta_path}")
    if not os.path.exists(weights_path):
        raise FileNotFoundError(f"checkpoint weights not found: {weights_path}")
    with open(meta_path, "r", encoding="utf-8") as handle:
        metadata = json.load(handle)
    if "format_version" not in metadata:
        raise CheckpointError(f"checkpoint metadata missing format_version: {meta_path}")
    with np.load(weights_path) as archive:
        tensors = {name: archive[name] for name in archive.files}
    return metadata, tensors


def module_tensors(module: torch.nn.Module) -> dict:
    return {name: param for name, param in module.state_dict().items()}


def load_state_into(module: torch.nn.Module, tensors: dict) -> None:
    """Copy named arrays into the module, validating names and shapes."""
    state = module.state_dict()
    missing = sorted(set(state) - set(tensors))
    unexpected = sorted(set(tensors) - set(state))
    mismatched = [
        f"{name} (checkpoint {tuple(np.asarray(tensors[name]).shape)} vs model {tuple(state[name].shape)})"
        for name in sorted(set(state) & set(tensors))
        if tuple(np.asarray(tensors[name]).shape) != tuple(state[name].shape)
    ]
    problems = []
    if missing:
        problems.append("missing tensors: " + ", ".join(missing))
    if unexpected:
        problems.append("unexpected tensors: " + ", ".join(unexpected))
    if mismatched:
        problems.append("shape mismatches: " + "; ".join(mismatched))
    if problems:
        raise CheckpointError("checkpoint does not fit model: " + " | ".join(problems))
    new_state = {
        name: torch.as_tensor(np.asarray(tensors[name]), dtype=state[name].dtype)
        for name in state
    }
    module.load_state_dict(new_state)
