"""Deterministic synthetic corpus generator with planted ground truth.

Generates a small corpus whose social graph, sentiment vectors and community
energies are fully determined by one seed. Topic popularity can be planted as
a linear function of the community energy (or of per-edge energies with
per-edge weights) and is realized as actual test-window tweets, so the whole
pipeline, hashtag counting included, can be exercised end to end against
known parameters.

Every user gets a latent stance per topic and emits emoticons consistent
with it; roughly ``emoticon_rate`` of tweets carry emoticons. The expected
values file records the planted parameters, each topic's community energy,
its exact (unrounded) target and the realized tweet count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CorpusWindow, EmoticonLexicon, parse_tweet_line
from .manifest import atomic_write_text
from .energy import EnergyFunction, per_edge_energies
from .graph import Edge, build_graph, extract_community
from .sentiment import community_topic_vectors, group_tweets_by_user
from .topics import Topic

MONTH_SECONDS = 30 * 24 * 3600
SYNTH_WINDOW = CorpusWindow(
    train_start=0,
    train_end=4 * MONTH_SECONDS,
    test_start=4 * MONTH_SECONDS,
    test_end=6 * MONTH_SECONDS,
)
FIRST_TEST_MONTH_END = SYNTH_WINDOW.test_start + MONTH_SECONDS

MAX_TOTAL_TWEETS = 200_000
_N_FILLERS = 200
_N_STOPWORDS = 10

_POS_TOKENS = tuple(f"[p{i}]" for i in range(5))
_NEG_TOKENS = tuple(f"[n{i}]" for i in range(5))
_NEU_TOKENS = tuple(f"[z{i}]" for i in range(3))


class InfeasibleConfigError(ValueError):
    """The requested configuration cannot be realized as a corpus."""


@dataclass(frozen=True)
class PlantedLinear:
    """popularity ~ alpha * community_energy + beta + noise."""

    alpha: float
    beta: float
    noise_sigma: float = 0.0  # fraction of the mean noiseless popularity


@dataclass(frozen=True)
class PlantedEdgeWeights:
    """popularity ~ sum(omega_e * edge_energy_e) + rho + noise."""

    weight_lo: float
    weight_hi: float
    rho: float
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.weight_lo > self.weight_hi:
            raise ValueError("weight_lo must be <= weight_hi")


@dataclass(frozen=True)
class SynthConfig:
    rng_seed: int = 0
    n_users: int = 50
    edge_density: float = 0.1
    n_topics: int = 20
    m: int = 10
    emoticon_rate: float = 0.5
    planted: PlantedLinear | PlantedEdgeWeights | None = None
    tweets_per_user: int = 8
    care_range: tuple[float, float] = (0.15, 0.6)
    max_depth: int = 3
    popularity_range: tuple[int, int] = (100, 500)  # used when planted is None

    def __post_init__(self):
        if self.n_users < 2:
            raise ValueError("n_users must be >= 2")
        if not 0.0 < self.edge_density <= 1.0:
            raise ValueError("edge_density must be in (0, 1]")
        if not 0.0 <= self.emoticon_rate <= 1.0:
            raise ValueError("emoticon_rate must be in [0, 1]")
        if not 1 <= self.n_topics <= 999:
            raise ValueError("n_topics must be in [1, 999]")
        if not 1 <= self.m <= 99:
            raise ValueError("m must be in [1, 99]")
        if self.tweets_per_user < 1:
            raise ValueError("tweets_per_user must be >= 1")
        lo, hi = self.care_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError("care_range must satisfy 0 <= lo <= hi <= 1")


@dataclass
class GeneratedCorpus:
    corpus_path: Path
    lexicon_path: Path
    stopwords_path: Path
    expected_path: Path
    window: CorpusWindow
    seed_user: str
    max_depth: int
    n_train_tweets: int
    n_test_tweets: int


@dataclass(frozen=True)
class ExpectedTopic:
    hashtag: str
    energy: float
    exact_target: float
    popularity: int


@dataclass
class ExpectedValues:
    params: dict[str, str] = field(default_factory=dict)
    topics: list[ExpectedTopic] = field(default_factory=list)
    edge_weights: dict[Edge, float] = field(default_factory=dict)


def synthetic_lexicon() -> EmoticonLexicon:
    entries: dict[str, str] = {}
    for token in _POS_TOKENS:
        entries[token] = "positive"
    for token in _NEG_TOKENS:
        entries[token] = "negative"
    for token in _NEU_TOKENS:
        entries[token] = "neutral"
    return EmoticonLexicon(entries)


def _user_name(i: int) -> str:
    return f"u{i:05d}"


def _hashtag(k: int) -> str:
    return f"t{k:03d}"


def _phrases(k: int, m: int) -> tuple[str, ...]:
    # fixed-width names: lexicographic order equals planted order, and no
    # phrase is a substring of another
    return tuple(f"k{k:03d}p{n:02d}" for n in range(m))


def _filler(i: int) -> str:
    return f"w{i % _N_FILLERS:03d}"


def _emoticon_tokens(rng: np.random.Generator, stance: float, rate: float) -> list[str]:
    tokens: list[str] = []
    if rng.random() < rate:
        total = int(rng.integers(1, 4))
        pos = int(rng.binomial(total, (1.0 + stance) / 2.0))
        neg = total - pos
        tokens.extend(_POS_TOKENS[i % len(_POS_TOKENS)] for i in range(pos))
        tokens.extend(_NEG_TOKENS[i % len(_NEG_TOKENS)] for i in range(neg))
        if rng.random() < 0.25:
            tokens.append(_NEU_TOKENS[total % len(_NEU_TOKENS)])
    return tokens


def generate(config: SynthConfig, out_dir: str | Path) -> GeneratedCorpus:
    """Write corpus, lexicon, stopword and expected-value files into ``out_dir``."""
    rng = np.random.default_rng(config.rng_seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    users = [_user_name(i) for i in range(config.n_users)]
    seed_user = users[0]
    lexicon = synthetic_lexicon()
    window = SYNTH_WINDOW
    train_len = window.train_end - window.train_start
    test_len = window.test_end - window.test_start

    # social graph (Erdos-Renyi); keep the seed attached to the graph
    edges: list[Edge] = []
    for i in range(config.n_users):
        for j in range(i + 1, config.n_users):
            if rng.random() < config.edge_density:
                edges.append((users[i], users[j]))
    if not any(seed_user in e for e in edges):
        edges.append((users[0], users[1]))
    edges.sort()

    stances = rng.uniform(-1.0, 1.0, size=(config.n_users, config.n_topics))
    care_probs = np.linspace(config.care_range[0], config.care_range[1], config.n_topics)
    cares = rng.random(size=(config.n_users, config.n_topics)) < care_probs[None, :]

    phrase_lists = [_phrases(k, config.m) for k in range(config.n_topics)]

    train_lines: list[str] = []
    for idx, (a, b) in enumerate(edges):
        ts = window.train_start + idx % train_len
        if idx % 2 == 0:
            train_lines.append(f"r{idx:07d}\t{a}\t{ts}\t-\t@{b} {_filler(idx)}")
        else:
            train_lines.append(f"r{idx:07d}\t{a}\t{ts}\t{b}\tfwd {_filler(idx)}")

    counter = 0
    for u_idx, user in enumerate(users):
        cared = [k for k in range(config.n_topics) if cares[u_idx, k]]
        for t in range(config.tweets_per_user):
            ts = window.train_start + (counter * 53 + 11) % train_len
            if cared:
                k = cared[t % len(cared)]
                mask = rng.random(config.m) < 0.7
                if not mask.any():
                    mask[0] = True
                tokens = [p for p, keep in zip(phrase_lists[k], mask) if keep]
                tokens.append(_filler(counter * 3))
                tokens.extend(_emoticon_tokens(rng, float(stances[u_idx, k]), config.emoticon_rate))
            else:
                tokens = [_filler(counter * 3), _filler(counter * 3 + 1)]
            train_lines.append(f"s{counter:07d}\t{user}\t{ts}\t-\t" + " ".join(tokens))
            counter += 1

    # run the just-generated training corpus through the real pipeline to
    # learn each topic's community energy before planting popularity
    train_tweets = [parse_tweet_line(line, lexicon) for line in train_lines]
    graph = build_graph(train_tweets)
    community = extract_community(graph, seed_user, config.max_depth)
    tweets_by_user = group_tweets_by_user(train_tweets)
    community_edges: list[Edge] = community.sorted_edges()

    edge_energy_matrix = np.zeros((config.n_topics, len(community_edges)))
    for k in range(config.n_topics):
        topic = Topic(
            hashtag=_hashtag(k), start_time=window.test_start, popularity=1,
            key_phrases=phrase_lists[k],
        )
        vectors = community_topic_vectors(community.members, topic, tweets_by_user)
        _, values = per_edge_energies(community, vectors, EnergyFunction.COSINE)
        edge_energy_matrix[k] = values
    energies = edge_energy_matrix.sum(axis=1)

    omegas: np.ndarray | None = None
    if config.planted is None:
        lo, hi = config.popularity_range
        exact = rng.uniform(float(lo), float(hi), config.n_topics)
        noise_sigma = 0.0
    elif isinstance(config.planted, PlantedLinear):
        exact = config.planted.alpha * energies + config.planted.beta
        noise_sigma = config.planted.noise_sigma
    else:
        omegas = rng.uniform(
            config.planted.weight_lo, config.planted.weight_hi, len(community_edges)
        )
        exact = edge_energy_matrix @ omegas + config.planted.rho
        noise_sigma = config.planted.noise_sigma

    if noise_sigma > 0.0:
        exact = exact + rng.normal(0.0, noise_sigma * float(np.mean(exact)), config.n_topics)

    pops = np.rint(exact).astype(np.int64)
    if np.any(pops < 1):
        raise InfeasibleConfigError(
            f"planted popularity drops below 1 (min {pops.min()}); raise the intercept"
        )
    # popularity values must be distinct or the catalog dedupe would drop topics
    order = sorted(range(config.n_topics), key=lambda k: (pops[k], k))
    prev = 0
    for k in order:
        if pops[k] <= prev:
            pops[k] = prev + 1
        prev = int(pops[k])
    total_tweets = len(train_lines) + int(pops.sum())
    if total_tweets > MAX_TOTAL_TWEETS:
        raise InfeasibleConfigError(
            f"would generate {total_tweets} tweets (cap {MAX_TOTAL_TWEETS})"
        )

    test_lines: list[str] = []
    counter = 0
    for k in range(config.n_topics):
        tag = _hashtag(k)
        body = " ".join(phrase_lists[k])
        spacing = max(1, (test_len * 9 // 10) // int(pops[k]))
        for j in range(int(pops[k])):
            ts = window.test_start + j * spacing
            author = users[(counter + j) % config.n_users]
            fillers = f"{_filler(2 * counter)} {_filler(2 * counter + 1)}"
            test_lines.append(f"p{counter:07d}\t{author}\t{ts}\t-\t#{tag}# {body} {fillers}")
            counter += 1

    corpus_path = out / "corpus.tsv"
    lexicon_path = out / "lexicon.tsv"
    stopwords_path = out / "stopwords.tsv"
    expected_path = out / "expected.tsv"

    atomic_write_text(corpus_path, "\n".join(train_lines + test_lines) + "\n")
    atomic_write_text(
        lexicon_path,
        "".join(f"{token}\t{polarity}\n" for token, polarity in sorted(lexicon.entries.items())),
    )
    atomic_write_text(
        stopwords_path, "".join(f"{_filler(i)}\n" for i in range(_N_STOPWORDS))
    )

    planted_kind = (
        "none"
        if config.planted is None
        else ("linear" if isinstance(config.planted, PlantedLinear) else "edge_weights")
    )
    rows: list[str] = []

    def param(name: str, value) -> None:
        rows.append(f"param\t{name}\t{value}")

    param("rng_seed", config.rng_seed)
    param("n_users", config.n_users)
    param("edge_density", repr(config.edge_density))
    param("n_topics", config.n_topics)
    param("m", config.m)
    param("emoticon_rate", repr(config.emoticon_rate))
    param("tweets_per_user", config.tweets_per_user)
    param("seed_user", seed_user)
    param("max_depth", config.max_depth)
    param("planted", planted_kind)
    param("noise_sigma", repr(float(noise_sigma)))
    param("energy_model", "mrf")
    param("energy_function", "cosine")
    param("train_start", window.train_start)
    param("train_end", window.train_end)
    param("test_start", window.test_start)
    param("test_end", window.test_end)
    param("first_month_end", FIRST_TEST_MONTH_END)
    param("n_community_edges", len(community_edges))
    param("n_train_tweets", len(train_lines))
    param("n_test_tweets", len(test_lines))
    if isinstance(config.planted, PlantedLinear):
        param("alpha", repr(config.planted.alpha))
        param("beta", repr(config.planted.beta))
    if isinstance(config.planted, PlantedEdgeWeights):
        param("rho", repr(config.planted.rho))
    for k in range(config.n_topics):
        rows.append(
            f"topic\t{_hashtag(k)}\t{float(energies[k])!r}\t{float(exact[k])!r}\t{int(pops[k])}"
        )
    if omegas is not None:
        for (a, b), w in zip(community_edges, omegas):
            rows.append(f"edge\t{a}\t{b}\t{float(w)!r}")
    atomic_write_text(expected_path, "\n".join(rows) + "\n")

    return GeneratedCorpus(
        corpus_path=corpus_path,
        lexicon_path=lexicon_path,
        stopwords_path=stopwords_path,
        expected_path=expected_path,
        window=window,
        seed_user=seed_user,
        max_depth=config.max_depth,
        n_train_tweets=len(train_lines),
        n_test_tweets=len(test_lines),
    )


def load_expected(path: str | Path) -> ExpectedValues:
    out = ExpectedValues()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if fields[0] == "param" and len(fields) == 3:
                out.params[fields[1]] = fields[2]
            elif fields[0] == "topic" and len(fields) == 5:
                out.topics.append(
                    ExpectedTopic(
                        hashtag=fields[1],
                        energy=float(fields[2]),
                        exact_target=float(fields[3]),
                        popularity=int(fields[4]),
                    )
                )
            elif fields[0] == "edge" and len(fields) == 4:
                out.edge_weights[(fields[1], fields[2])] = float(fields[3])
            else:
                raise ValueError(f"{path}: bad expected-values row at line {line_no}")
    return out
