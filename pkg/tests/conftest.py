import random

import hypothesis
import pytest

from simulmt.stub_server import running_stub

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile("ci")

VOCAB = ["der", "die", "das", "Haus", "ist", "klein", "ich", "gehe", "nach", "heute", "morgen", "wir", "sehen", "ein", "Buch"]
LEXICON = {
    "der": "the", "die": "the", "das": "the", "Haus": "house", "ist": "is", "klein": "small",
    "ich": "I", "gehe": "go", "nach": "to", "heute": "today", "morgen": "tomorrow",
    "wir": "we", "sehen": "see", "ein": "a", "Buch": "book",
}


def toy_corpus(n=100, seed=7):
    rng = random.Random(seed)
    return [[rng.choice(VOCAB) for _ in range(rng.randint(1, 12))] for _ in range(n)]


@pytest.fixture
def lexicon():
    return dict(LEXICON)


@pytest.fixture
def corpus():
    return toy_corpus()


@pytest.fixture
def stub(lexicon):
    with running_stub(lexicon) as srv:
        yield srv
