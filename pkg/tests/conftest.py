import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from mtpipe.corpus import Direction, ParallelCorpus, SentencePair
from mtpipe.registry import languages

settings.register_profile(
    "mtpipe", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("mtpipe")

CODES = tuple(lang.code for lang in languages())

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def make_direction_strings(rng: random.Random, n: int) -> list[str]:
    directions: set[str] = set()
    while len(directions) < n:
        a, b = rng.sample(CODES, 2)
        directions.add(f"{a}-{b}")
    return sorted(directions)


def make_scheduler_instance(rng: random.Random):
    """One randomized scheduler problem: direction counts plus knobs."""
    counts = {}
    for d in make_direction_strings(rng, rng.randint(1, 10)):
        counts[d] = rng.randint(0, 1000)
    if not any(counts.values()):
        counts[min(counts)] = rng.randint(1, 1000)
    batch_size = rng.randint(1, 64)
    seed = rng.randrange(2**32)
    s_low = rng.randint(10, 200)
    s_high = rng.randint(20, 400)
    cutover = rng.randint(20, 800)
    return counts, batch_size, seed, s_high, s_low, cutover


def corpus_of(direction: str, pairs: list[tuple[str, str]], origin: str = "original") -> ParallelCorpus:
    d = Direction.parse(direction)
    return ParallelCorpus(d, tuple(SentencePair(a, b) for a, b in pairs), origin)


@pytest.fixture
def tiny_corpus_dir(tmp_path) -> Path:
    root = tmp_path / "corpus"
    root.mkdir()
    data = {
        "fr-en": [
            ("le chat dort.", "the cat sleeps."),
            ("un bon livre", "a good book"),
            ("il pleut fort", "it rains hard"),
            ("nous partons demain", "we leave tomorrow"),
        ],
        "de-en": [
            ("der hund läuft", "the dog runs"),
            ("ein rotes auto", "a red car"),
            ("wir essen brot", "we eat bread"),
        ],
        "zh-en": [
            ("猫在睡觉。", "the cat is sleeping."),
            ("天气很好", "the weather is nice"),
        ],
    }
    for name, pairs in data.items():
        root.joinpath(f"{name}.tsv").write_text(
            "".join(f"{a}\t{b}\n" for a, b in pairs), "utf-8"
        )
    return root
