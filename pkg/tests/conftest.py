"""
Shared fixtures
"""

import os
import pytest
from app.services.lm_service import NGramScorer, train_ngram_from_texts
from app.services.metrics_service import build_lexicon
from app.utils.file_utils import read_text_lines

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS_FILE = os.path.join(ROOT, "data", "corpus", "fables.txt")
PROMPTS_FILE = os.path.join(ROOT, "data", "prompts.json")


@pytest.fixture(scope="session")
def corpus_texts():
    return read_text_lines(CORPUS_FILE)


@pytest.fixture(scope="session")
def corpus_lexicon(corpus_texts):
    return build_lexicon(corpus_texts)


@pytest.fixture(scope="session")
def corpus_lm(corpus_texts):
    return NGramScorer(train_ngram_from_texts(corpus_texts, order=3, alpha=0.01, num_merges=400))


@pytest.fixture
def tiny_texts():
    return [
        "the cat sat on the mat.",
        "the dog sat on the rug.",
        "a cat and a dog met on the mat.",
    ]
