from pathlib import Path
from types import SimpleNamespace

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def small_config(mode="M2", **overrides):
    """Model sized for the 16-dim fixture embeddings."""
    from emosent.model import ModelConfig

    settings = dict(
        mode=mode,
        embed_dim=16,
        lstm_hidden=8,
        context_dim=4,
        dt_k=4,
        dropout_rate=0.0,
    )
    settings.update(overrides)
    return ModelConfig(**settings)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def lexicon():
    from emosent.preprocess import SegmentationLexicon

    return SegmentationLexicon.from_file(FIXTURES / "lexicon.txt")


@pytest.fixture(scope="session")
def bundle(lexicon):
    """Fixture corpus fully loaded and encoded, shared across test modules."""
    from emosent.resources import (
        Thesaurus,
        build_vocab,
        encode_corpus,
        load_corpus,
        load_embeddings,
        vocab_embedding_rows,
    )

    embeddings = load_embeddings(FIXTURES / "embeddings.txt", 16)
    thesaurus = Thesaurus.from_file(FIXTURES / "thesaurus.tsv")
    train_corpus = load_corpus(FIXTURES / "corpus_train.tsv")
    test_corpus = load_corpus(FIXTURES / "corpus_test.tsv")
    vocab = build_vocab(train_corpus, embeddings, thesaurus)
    return SimpleNamespace(
        embeddings=embeddings,
        thesaurus=thesaurus,
        lexicon=lexicon,
        train_corpus=train_corpus,
        test_corpus=test_corpus,
        vocab=vocab,
        embedding_rows=vocab_embedding_rows(vocab, embeddings),
        train_examples=encode_corpus(train_corpus, vocab, thesaurus),
        test_examples=encode_corpus(test_corpus, vocab, thesaurus),
    )
