from __future__ import annotations

import pytest
import torch

from eventsent.features import (
    FeatureEmbeddings,
    N_ROLE_IDS,
    PAD_ID,
    ROLE_ID_ORDER,
    RULE_POS_TAGS,
    RuleTagger,
    TagVocab,
    TaggerUnavailableError,
    UNK_ID,
    featurize,
    make_tagger,
    relative_position_ids,
    role_ids,
    role_ids_from_spans,
)

from util import make_doc, make_event


# ---- tag vocabularies ---------------------------------------------------


def test_tag_vocab_requires_pad_and_unk_prefix():
    with pytest.raises(ValueError):
        TagVocab(["NOUN", "VERB"])
    vocab = TagVocab(RULE_POS_TAGS)
    assert vocab.id_of("<pad>") == PAD_ID == 0
    assert vocab.id_of("NOUN") == RULE_POS_TAGS.index("NOUN")
    assert vocab.id_of("MYSTERY") == UNK_ID == 1


def test_tag_vocab_round_trips_through_json(tmp_path):
    path = tmp_path / "pos.json"
    TagVocab(RULE_POS_TAGS).save(path)
    assert TagVocab.load(path).tags == list(RULE_POS_TAGS)


# ---- rule tagger --------------------------------------------------------


def test_rule_tagger_empty_token_list_gives_empty_vectors():
    pos, ner = RuleTagger().tag([])
    assert pos == [] and ner == []


def test_rule_tagger_lexicon_words_become_verbs():
    tagger = RuleTagger(verb_lexicon={"increase"})
    assert tagger.pos_tag_of("increase") == "VERB"


def test_rule_tagger_is_deterministic():
    tokens = ["Revenue", "rose", "7%", "in", "June", "at", "Acme", "Corp", "."]
    tagger = RuleTagger(verb_lexicon={"rose"})
    assert tagger.tag(tokens) == tagger.tag(tokens)


@pytest.mark.parametrize(
    "token,expected_pos",
    [
        ("7%", "NUM"),
        ("$5", "NUM"),
        (".", "PUNCT"),
        ("in", "ADP"),
        ("the", "DET"),
        ("it", "PRON"),
        ("sharply", "ADV"),
        ("surged", "VERB"),
        ("Acme", "PROPN"),
        ("revenue", "NOUN"),
    ],
)
def test_rule_tagger_pos_cases(token, expected_pos):
    assert RuleTagger().pos_tag_of(token) == expected_pos


@pytest.mark.parametrize(
    "token,expected_ner",
    [
        ("7%", "PERCENT"),
        ("$5", "MONEY"),
        ("2023", "DATE"),
        ("june", "DATE"),
        ("Shanghai", "GPE"),
        ("Corp", "ORG"),
        ("revenue", "O"),
    ],
)
def test_rule_tagger_ner_cases(token, expected_ner):
    assert RuleTagger().ner_tag_of(token) == expected_ner


def test_make_tagger_rejects_unknown_backend():
    with pytest.raises(ValueError):
        make_tagger("imaginary")


def test_external_backend_fails_loudly_without_the_toolkit():
    try:
        import stanza  # noqa: F401
    except ImportError:
        with pytest.raises(TaggerUnavailableError):
            make_tagger("external")
    else:
        pytest.skip("external tagger toolkit installed; unavailability not testable")


# ---- featurize ----------------------------------------------------------


def test_featurize_pads_boundary_slots_with_pad_id():
    doc = make_doc(["revenue", "rose", "."])
    tagger = RuleTagger()
    feats = featurize(doc, tagger, tagger.pos_vocab, tagger.ner_vocab)
    assert feats.pos_ids.shape == (5,)
    assert feats.pos_ids[-2:].tolist() == [PAD_ID, PAD_ID]
    assert feats.ner_ids[-2:].tolist() == [PAD_ID, PAD_ID]
    assert feats.pos_ids[0] == tagger.pos_vocab.id_of("NOUN")


def test_featurize_accepts_raw_token_lists():
    tagger = RuleTagger()
    feats = featurize(["in", "June"], tagger, tagger.pos_vocab, tagger.ner_vocab)
    assert feats.pos_ids[0] == tagger.pos_vocab.id_of("ADP")
    assert feats.ner_ids[1] == tagger.ner_vocab.id_of("DATE")


# ---- relative positions -------------------------------------------------


def test_relative_position_ids_match_the_formula():
    ids = relative_position_ids(5, trigger_start=2, clip_radius=256)
    assert ids.tolist() == [254, 255, 256, 257, 258]


def test_relative_position_id_is_radius_at_the_trigger_start():
    ids = relative_position_ids(9, trigger_start=4, clip_radius=16)
    assert ids[4] == 16


def test_relative_position_ids_clip_at_the_radius():
    ids = relative_position_ids(600, trigger_start=0, clip_radius=256)
    assert ids.max() == 512
    assert (ids <= 512).all()
    assert ids[300:].tolist() == [512] * 300


def test_relative_position_ids_are_translation_covariant():
    base = relative_position_ids(10, trigger_start=3, clip_radius=64)
    shifted = relative_position_ids(12, trigger_start=5, clip_radius=64)
    assert base.tolist() == shifted[2:].tolist()


# ---- role ids -----------------------------------------------------------


def test_role_ids_trigger_only():
    doc = make_doc([f"w{i}" for i in range(6)])
    event = make_event(doc, trigger=(2, 3))
    assert role_ids(6, event).tolist() == [0, 0, 1, 1, 0, 0]


def test_role_ids_disjoint_roles():
    doc = make_doc([f"w{i}" for i in range(6)])
    event = make_event(doc, trigger=(2, 2), subject=(0, 1), time=(4, 4))
    assert role_ids(6, event).tolist() == [2, 2, 1, 0, 4, 0]


def test_role_ids_trigger_wins_overlaps():
    doc = make_doc([f"w{i}" for i in range(6)])
    event = make_event(doc, trigger=(2, 2), subject=(1, 3))
    ids = role_ids(6, event)
    assert ids[2] == ROLE_ID_ORDER.index("trigger")
    assert ids[1] == ids[3] == ROLE_ID_ORDER.index("subject")


def test_role_ids_priority_among_arguments():
    ids = role_ids_from_spans(
        6, trigger=(5, 5), spans={"subject": (0, 2), "object": (2, 4)}
    )
    assert ids.tolist() == [2, 2, 2, 3, 3, 1]


def test_role_ids_cover_exactly_the_event_spans():
    doc = make_doc([f"w{i}" for i in range(8)])
    event = make_event(doc, trigger=(3, 3), subject=(0, 0), location=(6, 7))
    ids = role_ids(8, event)
    covered = {i for i in range(8) if ids[i] > 0}
    assert covered == {0, 3, 6, 7}


# ---- embedding tables ---------------------------------------------------


def test_embedding_tables_have_declared_shapes():
    emb = FeatureEmbeddings(n_pos=13, n_ner=8, feat_dim=32, clip_radius=16)
    assert emb.pos_table.weight.shape == (13, 32)
    assert emb.ner_table.weight.shape == (8, 32)
    assert emb.position_table.weight.shape == (33, 32)
    assert emb.role_table.weight.shape == (N_ROLE_IDS, 32)


def test_pad_id_embeds_to_the_zero_row():
    emb = FeatureEmbeddings(n_pos=13, n_ner=8, feat_dim=16, clip_radius=8)
    out = emb.pos(torch.tensor([PAD_ID]))
    assert torch.equal(out, torch.zeros(1, 16))
    out = emb.ner(torch.tensor([PAD_ID]))
    assert torch.equal(out, torch.zeros(1, 16))


def test_embedding_lookup_is_pure():
    emb = FeatureEmbeddings(n_pos=13, n_ner=8, feat_dim=16, clip_radius=8)
    ids = torch.tensor([3, 5])
    assert torch.equal(emb.role(ids), emb.role(ids))
