"""Synthetic keyword-planted corpora with a programmatic labeling oracle.

Each requirement class owns a small set of made-up keywords; a segment
of that class plants a few of them among neutral filler words. The
mapping from segment to class is returned alongside the corpus, so
experiments can consult a perfect oracle instead of human annotators.

The confusable variant builds two deliberately confusable class pairs.
Both members of a pair draw from one shared keyword stem; the second
member additionally plants one pair of words from its own private
vocabulary, the way a specialized disclosure reads like its general
sibling plus a telltale phrase. A model only tells the members apart
for the private units it has seen labeled, so those segments hug the
decision boundary in exactly the regime where uncertainty-driven
querying should beat uniform sampling. Every segment also carries a
few one-off noise words, which keeps "contains an unfamiliar word"
from standing in for the pair distinction.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .corpus import PolicyDocument, Segment
from .labels import N_REQUIREMENTS

# one stem per requirement class, fused with number words to form keywords
_STEMS = (
    "acorn", "bramble", "cinder", "dapple", "ember", "fjord",
    "grotto", "harbor", "inkwell", "juniper", "kestrel", "lantern",
    "meadow", "nimbus", "orchid", "pebble", "quartz", "russet",
)
_NUMBERS = ("one", "two", "three", "four", "five", "six", "seven", "eight")

_FILLER = (
    "website", "page", "notice", "visitors", "services", "account",
    "settings", "review", "section", "update", "terms", "general",
    "contact", "email", "address", "device", "browser", "online",
)

# class pairs that share a keyword stem in the confusable variant;
# the second member of each pair is the specialized one
_CONFUSABLE_PAIRS = ((1, 2), (3, 4))
_SHARED_STEMS = {(1, 2): "glimmer", (3, 4): "thistle"}

BASE_MEMBERS = tuple(pair[0] for pair in _CONFUSABLE_PAIRS)
SPECIALIZED_MEMBERS = tuple(pair[1] for pair in _CONFUSABLE_PAIRS)

# words per private unit; planting companions together gives each unit
# a private co-occurrence cluster, which keeps its embedding identity
# from washing out into the contexts every pair segment shares
_UNIT_WORDS = 2

_WORD_LEN = 7


@dataclass(frozen=True)
class SynthConfig:
    """Shape of a generated corpus."""

    n_docs: int = 60
    min_segments: int = 6
    max_segments: int = 10
    keywords_per_class: int = 6
    min_planted: int = 2
    max_planted: int = 4
    min_filler: int = 4
    max_filler: int = 8
    filler_segment_rate: float = 0.0
    confusable: bool = False
    confusable_own: int = 0
    pair_rate: float = 0.0
    noise_words: int = 0
    doc_prefix: str = "synth"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_docs < 1:
            raise ValueError("n_docs must be positive")
        if not 1 <= self.min_segments <= self.max_segments:
            raise ValueError("bad segment count range")
        if not 1 <= self.min_planted <= self.max_planted:
            raise ValueError("bad planted keyword range")
        if not 0 <= self.min_filler <= self.max_filler:
            raise ValueError("bad filler range")
        if not 0.0 <= self.filler_segment_rate < 1.0:
            raise ValueError("filler_segment_rate must lie in [0, 1)")
        if not 2 <= self.keywords_per_class <= len(_NUMBERS):
            raise ValueError(
                "keywords_per_class must lie in 2..%d" % (len(_NUMBERS),)
            )
        if self.confusable:
            if not 1 <= self.confusable_own <= 64:
                raise ValueError("confusable_own must lie in 1..64")
        elif self.confusable_own:
            raise ValueError("confusable_own requires confusable")
        if self.pair_rate:
            if not self.confusable:
                raise ValueError("pair_rate requires confusable")
            if not 0.0 < self.pair_rate < 1.0:
                raise ValueError("pair_rate must lie in (0, 1)")
        if not 0 <= self.noise_words <= 4:
            raise ValueError("noise_words must lie in 0..4")
        if not self.doc_prefix:
            raise ValueError("doc_prefix must be non-empty")


def class_keywords(config: SynthConfig) -> dict[int, list[str]]:
    """Keyword vocabulary per class code.

    In the confusable variant the two members of a pair share one
    keyword stem. The first member has nothing else; the second member
    appends confusable_own private units of a few companion words
    each, every word an unrelated string of random letters. Telling the
    members apart therefore hinges on recognizing the private units,
    and every one of them has to show up in labeled data before it
    pulls predictions its way.
    """
    table: dict[int, list[str]] = {}
    per_class = _UNIT_WORDS * config.confusable_own
    own = _own_words(len(SPECIALIZED_MEMBERS) * per_class)
    for code in range(1, N_REQUIREMENTS + 1):
        pair = next((p for p in _CONFUSABLE_PAIRS if code in p), None)
        if config.confusable and pair is not None:
            shared = [
                _SHARED_STEMS[pair] + n
                for n in _NUMBERS[: config.keywords_per_class]
            ]
            if code == pair[1]:
                i = SPECIALIZED_MEMBERS.index(code)
                shared = shared + own[i * per_class : (i + 1) * per_class]
            table[code] = shared
        else:
            stem = _STEMS[code - 1]
            table[code] = [stem + n for n in _NUMBERS[: config.keywords_per_class]]
    return table


def _own_words(count: int) -> list[str]:
    """Private vocabulary for the specialized pair members.

    Uniform random letters keep the words from sharing character
    n-grams with each other or with the rest of the corpus, so subword
    hashing cannot smuggle similarity between them. The constant seed
    keeps the table independent of the corpus seed.
    """
    rng = np.random.default_rng(131)
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < count:
        word = _random_word(rng)
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _random_word(rng) -> str:
    return "".join(chr(97 + int(c)) for c in rng.integers(0, 26, size=_WORD_LEN))


def synthetic_corpus(config: SynthConfig):
    """Generate documents plus the oracle mapping segment ref to class.

    Returns
    -------
    docs : list of PolicyDocument
    oracle : dict mapping (doc_id, seg_id) to a class code, 0 for pure
        filler segments.
    """
    rng = np.random.default_rng(config.seed)
    keywords = class_keywords(config)
    fetched_at = datetime(2026, 1, 1, tzinfo=timezone.utc)
    class_probs = _class_probabilities(config)

    docs = []
    oracle: dict[tuple[str, int], int] = {}
    for d in range(config.n_docs):
        doc_id = "%s-%04d" % (config.doc_prefix, d)
        n_segments = int(rng.integers(config.min_segments, config.max_segments + 1))
        segments = []
        for s in range(n_segments):
            if config.filler_segment_rate and rng.random() < config.filler_segment_rate:
                code = 0
            elif class_probs is None:
                code = int(rng.integers(1, N_REQUIREMENTS + 1))
            else:
                code = 1 + int(rng.choice(N_REQUIREMENTS, p=class_probs))
            tokens = _draw_tokens(code, keywords, config, rng)
            text = " ".join(tokens) + "."
            segments.append(Segment(doc_id=doc_id, seg_id=s, text=text, tokens=tokens))
            oracle[(doc_id, s)] = code
        docs.append(
            PolicyDocument(
                doc_id=doc_id,
                url="https://example.test/%s-%04d" % (config.doc_prefix, d),
                fetched_at=fetched_at,
                plaintext="\n\n".join(seg.text for seg in segments),
                segments=segments,
            )
        )
    return docs, oracle


def _class_probabilities(config: SynthConfig):
    """Non-uniform class frequencies, or None for the uniform draw.

    With pair_rate r, the four confusable pair members split a total
    frequency of r among themselves while the remaining classes stay
    uniform. Rarity is what separates uncertainty-driven labeling from
    uniform labeling: a uniform sample hardly ever hits the segments
    that decide the pair boundary.
    """
    if not config.pair_rate:
        return None
    members = {c for pair in _CONFUSABLE_PAIRS for c in pair}
    probs = np.full(
        N_REQUIREMENTS,
        (1.0 - config.pair_rate) / (N_REQUIREMENTS - len(members)),
        dtype=np.float64,
    )
    for code in members:
        probs[code - 1] = config.pair_rate / len(members)
    return probs


def _draw_tokens(code: int, keywords, config: SynthConfig, rng,
                 own_index: int | None = None) -> list[str]:
    n_filler = int(rng.integers(config.min_filler, config.max_filler + 1))
    tokens = list(rng.choice(_FILLER, size=n_filler, replace=True))
    for _ in range(config.noise_words):
        tokens.append(_random_word(rng))
    if code != 0:
        pool = keywords[code]
        if config.confusable and code in SPECIALIZED_MEMBERS:
            # two shared-stem keywords, then one private unit; the
            # segment reads like the base member of the pair except
            # for that giveaway phrase, with the first companion
            # doubled so the unit outweighs the stem keywords
            shared = pool[: config.keywords_per_class]
            planted = [str(t) for t in rng.choice(shared, size=2, replace=False)]
            own = pool[config.keywords_per_class :]
            if own_index is None:
                own_index = int(rng.integers(len(own) // _UNIT_WORDS))
            first, second = (
                own[_UNIT_WORDS * own_index],
                own[_UNIT_WORDS * own_index + 1],
            )
            planted += [str(first), str(first), str(second)]
        else:
            n_planted = int(rng.integers(config.min_planted, config.max_planted + 1))
            planted = [str(t) for t in rng.choice(pool, size=n_planted, replace=True)]
        tokens += planted
    rng.shuffle(tokens)
    return [str(t) for t in tokens]


def planted_policy(config: SynthConfig, doc_id: str = "planted-0000",
                   own_index: int | None = None) -> PolicyDocument:
    """One document with exactly one segment per requirement class.

    A model trained on the matching synthetic corpus should flag all 18
    requirements as covered for this document. own_index pins which
    private unit the specialized pair members use, so stacked seed
    documents can be kept from covering more of the private vocabulary
    than intended.
    """
    rng = np.random.default_rng(config.seed + 104729)
    keywords = class_keywords(config)
    segments = []
    for code in range(1, N_REQUIREMENTS + 1):
        tokens = _draw_tokens(code, keywords, config, rng, own_index=own_index)
        segments.append(
            Segment(doc_id=doc_id, seg_id=code - 1,
                    text=" ".join(tokens) + ".", tokens=tokens)
        )
    return PolicyDocument(
        doc_id=doc_id,
        url="https://example.test/planted",
        fetched_at=datetime(2026, 1, 1, tzinfo=timezone.utc),
        plaintext="\n\n".join(seg.text for seg in segments),
        segments=segments,
    )


def labeled_segments(docs, oracle):
    """Oracle-labeled requirement segments, ready for training.

    Pure filler segments (oracle code 0) are left out, the same way
    human-rejected or catch-all segments never reach the classifier.
    """
    from .classifier import LabeledSegment

    out = []
    for doc in docs:
        for seg in doc.segments:
            code = oracle.get((doc.doc_id, seg.seg_id), 0)
            if code != 0:
                out.append(LabeledSegment(segment=seg, label_code=code))
    return out
