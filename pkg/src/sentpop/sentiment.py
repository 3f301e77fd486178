"""Emoticon-derived sentiment at tweet, key-phrase and user level.

A user's sentiment on a topic is an m-vector, one entry per key phrase: the
mean, over all of the user's training tweets, of the tweet's emoticon score
where the phrase occurs (and 0 where it does not). Tweets without emoticons
contribute neutral mass to that mean.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Tweet
from .topics import Topic


@dataclass(frozen=True, eq=False)
class SentimentVector:
    """Per-key-phrase sentiment of one user on one topic; entries in [-1, 1]."""

    topic: str
    user: str
    values: np.ndarray


def tweet_sentiment(pos: int, neg: int) -> float:
    """(pos - neg) / (pos + neg); 0 when the tweet has no signed emoticons."""
    if pos < 0 or neg < 0:
        raise ValueError("emoticon counts must be non-negative")
    total = pos + neg
    if total == 0:
        return 0.0
    return (pos - neg) / total


def phrase_sentiment(tweet: Tweet, phrase: str) -> float:
    """Tweet score if ``phrase`` occurs in the text (raw substring test), else 0."""
    if not phrase:
        raise ValueError("phrase must be non-empty")
    if phrase not in tweet.text:
        return 0.0
    return tweet_sentiment(tweet.emoticon_counts.pos, tweet.emoticon_counts.neg)


def user_phrase_sentiment(
    user_tweets: Sequence[Tweet],
    phrase: str,
    mean_over_matching: bool = False,
) -> float:
    """Mean phrase sentiment over a user's tweets; 0 for a user with none.

    By default every tweet divides the sum, matching or not. With
    ``mean_over_matching`` only tweets containing the phrase divide it.
    """
    if not user_tweets:
        return 0.0
    if mean_over_matching:
        matches = 0
        total = 0.0
        for tweet in user_tweets:
            if phrase in tweet.text:
                matches += 1
                total += tweet_sentiment(
                    tweet.emoticon_counts.pos, tweet.emoticon_counts.neg
                )
        return total / matches if matches else 0.0
    total = sum(phrase_sentiment(tweet, phrase) for tweet in user_tweets)
    return total / len(user_tweets)


def user_topic_vector(
    user: str,
    topic: Topic,
    train_tweets: Iterable[Tweet],
    mean_over_matching: bool = False,
) -> SentimentVector:
    """Sentiment vector of ``user`` over the topic's key phrases."""
    if not topic.key_phrases:
        raise ValueError(f"topic {topic.hashtag!r} has no key phrases")
    own = [t for t in train_tweets if t.user == user]
    values = np.array(
        [user_phrase_sentiment(own, p, mean_over_matching) for p in topic.key_phrases],
        dtype=np.float64,
    )
    return SentimentVector(topic=topic.hashtag, user=user, values=values)


def group_tweets_by_user(tweets: Iterable[Tweet]) -> dict[str, list[Tweet]]:
    by_user: defaultdict[str, list[Tweet]] = defaultdict(list)
    for tweet in tweets:
        by_user[tweet.user].append(tweet)
    return dict(by_user)


def community_topic_vectors(
    members: Iterable[str],
    topic: Topic,
    tweets_by_user: Mapping[str, Sequence[Tweet]],
    mean_over_matching: bool = False,
) -> dict[str, np.ndarray]:
    """Nonzero sentiment vectors for community members (absent user = zero vector).

    Only tweets with at least one signed emoticon can contribute to the sums,
    so the inner scan is restricted to those.
    """
    if not topic.key_phrases:
        raise ValueError(f"topic {topic.hashtag!r} has no key phrases")
    phrases = topic.key_phrases
    vectors: dict[str, np.ndarray] = {}
    for user in sorted(set(members)):
        tweets = tweets_by_user.get(user, ())
        if not tweets:
            continue
        if mean_over_matching:
            values = np.array(
                [user_phrase_sentiment(tweets, p, True) for p in phrases],
                dtype=np.float64,
            )
        else:
            scored = [
                (t.text, tweet_sentiment(t.emoticon_counts.pos, t.emoticon_counts.neg))
                for t in tweets
                if t.emoticon_counts.pos + t.emoticon_counts.neg > 0
            ]
            if not scored:
                continue
            values = np.array(
                [
                    sum(score for text, score in scored if p in text)
                    for p in phrases
                ],
                dtype=np.float64,
            )
            values /= len(tweets)
        if np.any(values != 0.0):
            vectors[user] = values
    return vectors


def save_vectors(
    vectors_by_topic: Mapping[str, Mapping[str, np.ndarray]], path: str | Path
) -> int:
    """Persist nonzero vectors as ``hashtag<TAB>user<TAB>v1,...,v_m`` rows."""
    rows = 0
    with open(path, "w", encoding="utf-8") as fh:
        for hashtag in sorted(vectors_by_topic):
            per_user = vectors_by_topic[hashtag]
            for user in sorted(per_user):
                joined = ",".join(repr(float(v)) for v in per_user[user])
                fh.write(f"{hashtag}\t{user}\t{joined}\n")
                rows += 1
    return rows


def load_vectors(path: str | Path) -> dict[str, dict[str, np.ndarray]]:
    vectors: dict[str, dict[str, np.ndarray]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}: bad vector row at line {line_no}")
            hashtag, user, joined = fields
            values = np.array([float(v) for v in joined.split(",")], dtype=np.float64)
            vectors.setdefault(hashtag, {})[user] = values
    return vectors
