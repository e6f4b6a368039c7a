from __future__ import annotations

import pytest

from eventsent.corpus.splits import split_corpus
from eventsent.corpus.synthetic import SynthConfig, generate_synthetic
from eventsent.training import TrainConfig, build_model


@pytest.fixture(scope="session")
def synth_corpus():
    """A moderately sized generated corpus shared by read-only tests."""
    return generate_synthetic(SynthConfig(n_docs=120), seed=3)


@pytest.fixture(scope="session")
def synth_splits(synth_corpus):
    return split_corpus(synth_corpus, (0.8, 0.1, 0.1), seed=0)


@pytest.fixture(scope="session")
def tiny_train_config():
    """Small architecture used wherever training speed matters more than
    accuracy."""
    return TrainConfig(
        hidden=16, n_layers=1, n_heads=2, feat_dim=8, clip_radius=16,
        epochs=1, seeds=(0,), batch_size=4, max_seq_len=64,
    )


@pytest.fixture()
def untrained_model(synth_splits, tiny_train_config):
    """Freshly initialized (never optimized) model over the synthetic vocab."""
    import torch

    torch.manual_seed(0)
    return build_model(tiny_train_config, synth_splits[0])
