"""Community sentiment energy models and topic popularity prediction."""

__version__ = "0.1.0"

from .corpus import (
    CorpusWindow,
    EmoticonCounts,
    EmoticonLexicon,
    LexiconError,
    ParseError,
    Tweet,
    load_lexicon,
    parse_tweet_line,
    stream_corpus,
)
from .energy import (
    CommunityEnergy,
    EnergyFunction,
    EnergyModel,
    clique_energy_avglen,
    clique_energy_cosine,
    community_energy_entropy,
    community_energy_mrf,
    edge_probability,
)
from .graph import CommunityGraph, SocialGraph, build_graph, extract_community
from .predictor import (
    EdgeModel,
    LinearModel,
    TopicSample,
    TrainConfig,
    TrainingDiverged,
    evaluate,
    split_train_test,
    train,
)
from .sentiment import (
    SentimentVector,
    phrase_sentiment,
    tweet_sentiment,
    user_phrase_sentiment,
    user_topic_vector,
)
from .stats import (
    CorrelationReport,
    Strength,
    classify_strength,
    paired_t_test,
    pearson,
    r_squared,
    rse,
)
from .topics import (
    GapDataset,
    Topic,
    dedupe_equal_popularity,
    extract_key_phrases,
    extract_topics,
    gap_filter,
)

__all__ = [
    "CommunityEnergy",
    "CommunityGraph",
    "CorpusWindow",
    "CorrelationReport",
    "EdgeModel",
    "EmoticonCounts",
    "EmoticonLexicon",
    "EnergyFunction",
    "EnergyModel",
    "GapDataset",
    "LexiconError",
    "LinearModel",
    "ParseError",
    "SentimentVector",
    "SocialGraph",
    "Strength",
    "Topic",
    "TopicSample",
    "TrainConfig",
    "TrainingDiverged",
    "Tweet",
    "build_graph",
    "classify_strength",
    "clique_energy_avglen",
    "clique_energy_cosine",
    "community_energy_entropy",
    "community_energy_mrf",
    "dedupe_equal_popularity",
    "edge_probability",
    "evaluate",
    "extract_community",
    "extract_key_phrases",
    "extract_topics",
    "gap_filter",
    "load_lexicon",
    "paired_t_test",
    "parse_tweet_line",
    "pearson",
    "phrase_sentiment",
    "r_squared",
    "rse",
    "split_train_test",
    "stream_corpus",
    "train",
    "tweet_sentiment",
    "user_phrase_sentiment",
    "user_topic_vector",
]
