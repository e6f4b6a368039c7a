"""Shared test helpers: document builders and independent decoder oracles.

The decoder oracles reimplement the span-pairing rules by naive enumeration
so the production decoders can be checked against them on random inputs.
"""

from __future__ import annotations

from eventsent.corpus.data import Document, Event


def make_doc(tokens, events=None, doc_id="doc-0", boundaries=None):
    doc = Document(
        doc_id=doc_id,
        text=" ".join(tokens),
        tokens=list(tokens),
        sentence_boundaries=list(boundaries) if boundaries is not None else ([0] if tokens else []),
        events=[],
    )
    for fields in events or []:
        doc.events.append(make_event(doc, **fields))
    doc.validate()
    return doc


def make_event(doc, trigger, subject=None, object=None, time=None, location=None, polarity="O"):
    def span(pair):
        return None if pair is None else doc.make_span(pair[0], pair[1])

    return Event(
        trigger=span(trigger),
        subject=span(subject),
        object=span(object),
        time=span(time),
        location=span(location),
        polarity=polarity,
    )


def oracle_trigger_decode(p_start, p_end, n_tokens, threshold=0.5, max_len=10):
    """Naive per-start scan: walk forward from each start until the length
    cap or the next start, and take the first end at or above threshold."""
    starts = [i for i in range(n_tokens) if p_start[i] >= threshold]
    spans = []
    for rank, i in enumerate(starts):
        limit = starts[rank + 1] if rank + 1 < len(starts) else n_tokens
        end = None
        j = i
        while j < n_tokens and j < limit and j - i + 1 <= max_len:
            if p_end[j] >= threshold:
                end = j
                break
            j += 1
        spans.append((i, end if end is not None else i))
    return spans


def oracle_role_decode(p_start, p_end, n_tokens, threshold=0.5, max_offset=30):
    """Full enumeration of qualifying (i, j) pairs; the best is the maximal
    product with ties resolved to the lowest start then the lowest end."""
    candidates = []
    for i in range(n_tokens):
        for j in range(i, n_tokens):
            if j - i > max_offset:
                break
            if p_start[i] >= threshold and p_end[j] >= threshold:
                candidates.append((-float(p_start[i]) * float(p_end[j]), i, j))
    if not candidates:
        return None
    candidates.sort()
    _, i, j = candidates[0]
    return (i, j)


def make_tiny_model(seed=0, **overrides):
    """A small untrained joint model over a fixed toy vocabulary."""
    import torch

    from eventsent.encoder import SPECIAL_WORDS, TokenVocab
    from eventsent.features import RULE_NER_TAGS, RULE_POS_TAGS, TagVocab
    from eventsent.model import JointModel, ModelConfig

    base = dict(
        hidden=16,
        n_layers=1,
        n_heads=2,
        feat_dim=8,
        clip_radius=16,
        max_seq_len=64,
        dropout=0.0,
    )
    base.update(overrides)
    torch.manual_seed(seed)
    model = JointModel(
        ModelConfig(**base),
        TokenVocab(list(SPECIAL_WORDS) + ["alpha", "beta", "gamma", "delta"]),
        TagVocab(RULE_POS_TAGS),
        TagVocab(RULE_NER_TAGS),
    )
    model.eval()
    return model
