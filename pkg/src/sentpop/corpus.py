"""Tweet corpus and emoticon lexicon parsing.

Corpus files are UTF-8 with one record per line:
``id<TAB>user<TAB>timestamp<TAB>retweet_of_or_dash<TAB>text``.
Hashtags, mentions and emoticon counts are extracted from the text at parse
time, so a serialized tweet always round-trips to identical fields.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

# Hashtags are paired '#...#' spans; an unpaired trailing '#' yields nothing.
_HASHTAG_RE = re.compile(r"#([^#]+)#")
# Mentions run from '@' to the first non-word character.
_MENTION_RE = re.compile(r"@(\w+)")
# Emoticons are bracketed tokens; only tokens present in the lexicon count.
_EMOTICON_RE = re.compile(r"\[[^\[\]]+\]")

POLARITIES = ("positive", "negative", "neutral")

NO_RETWEET = "-"

SPLITS = ("train", "test", "all")


class ParseError(ValueError):
    """A malformed corpus record."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class LexiconError(ValueError):
    """A malformed or inconsistent emoticon lexicon file."""


class EmoticonCounts(NamedTuple):
    pos: int
    neg: int
    neu: int


@dataclass(frozen=True)
class EmoticonLexicon:
    """Maps bracketed emoticon tokens (e.g. ``[smile]``) to a polarity."""

    entries: dict[str, str]

    def __post_init__(self):
        for token, polarity in self.entries.items():
            if polarity not in POLARITIES:
                raise LexiconError(f"unknown polarity {polarity!r} for {token!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def count(self, text: str) -> EmoticonCounts:
        """Count lexicon emoticons in ``text`` by polarity.

        Bracketed tokens absent from the lexicon are ignored.
        """
        pos = neg = neu = 0
        for token in _EMOTICON_RE.findall(text):
            polarity = self.entries.get(token)
            if polarity == "positive":
                pos += 1
            elif polarity == "negative":
                neg += 1
            elif polarity == "neutral":
                neu += 1
        return EmoticonCounts(pos, neg, neu)


@dataclass(frozen=True)
class Tweet:
    id: str
    user: str
    timestamp: int
    text: str
    hashtags: tuple[str, ...]
    mentions: tuple[str, ...]
    retweet_of: str | None
    emoticon_counts: EmoticonCounts


@dataclass(frozen=True)
class CorpusWindow:
    """Half-open train and test intervals, in UTC seconds."""

    train_start: int
    train_end: int
    test_start: int
    test_end: int

    def __post_init__(self):
        if not (self.train_start < self.train_end <= self.test_start < self.test_end):
            raise ValueError(
                "window must satisfy train_start < train_end <= test_start < test_end"
            )

    def contains(self, timestamp: int, split: str) -> bool:
        """True if ``timestamp`` falls in the requested split.

        Intervals are half-open ``[start, end)`` so a tweet exactly at
        ``train_end`` belongs to the test side (if the intervals touch).
        ``split="all"`` means either interval, not the span between them.
        """
        in_train = self.train_start <= timestamp < self.train_end
        in_test = self.test_start <= timestamp < self.test_end
        if split == "train":
            return in_train
        if split == "test":
            return in_test
        if split == "all":
            return in_train or in_test
        raise ValueError(f"unknown split {split!r}")


def extract_hashtags(text: str) -> tuple[str, ...]:
    return tuple(_HASHTAG_RE.findall(text))


def extract_mentions(text: str) -> tuple[str, ...]:
    return tuple(_MENTION_RE.findall(text))


def parse_tweet_line(
    line: str, lexicon: EmoticonLexicon, line_no: int | None = None
) -> Tweet:
    """Parse one corpus record into a :class:`Tweet`.

    Raises :class:`ParseError` (carrying ``line_no``) for malformed records.
    """
    fields = line.rstrip("\n").split("\t")
    if len(fields) != 5:
        raise ParseError(f"expected 5 tab-separated fields, got {len(fields)}", line_no)
    tweet_id, user, ts_raw, retweet_raw, text = fields
    if not tweet_id or not user:
        raise ParseError("empty id or user field", line_no)
    try:
        timestamp = int(ts_raw)
    except ValueError:
        raise ParseError(f"bad timestamp {ts_raw!r}", line_no) from None
    retweet_of = None if retweet_raw == NO_RETWEET else retweet_raw
    if retweet_of == "":
        raise ParseError("empty retweet field (use '-' for none)", line_no)
    return Tweet(
        id=tweet_id,
        user=user,
        timestamp=timestamp,
        text=text,
        hashtags=extract_hashtags(text),
        mentions=extract_mentions(text),
        retweet_of=retweet_of,
        emoticon_counts=lexicon.count(text),
    )


def format_tweet_line(tweet: Tweet) -> str:
    """Serialize a tweet back to the corpus line format (no newline)."""
    if "\t" in tweet.text or "\n" in tweet.text:
        raise ValueError("tweet text may not contain tab or newline")
    retweet = tweet.retweet_of if tweet.retweet_of is not None else NO_RETWEET
    return f"{tweet.id}\t{tweet.user}\t{tweet.timestamp}\t{retweet}\t{tweet.text}"


def load_lexicon(path: str | Path) -> EmoticonLexicon:
    """Load a ``token<TAB>polarity`` TSV lexicon.

    Duplicate tokens and unknown polarity labels are errors.
    """
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise LexiconError(f"line {line_no}: expected 2 fields, got {len(fields)}")
            token, polarity = fields
            if polarity not in POLARITIES:
                raise LexiconError(f"line {line_no}: unknown polarity {polarity!r}")
            if token in entries:
                raise LexiconError(f"line {line_no}: duplicate token {token!r}")
            entries[token] = polarity
    return EmoticonLexicon(entries)


def stream_corpus(
    path: str | Path,
    lexicon: EmoticonLexicon,
    window: CorpusWindow,
    split: str = "all",
) -> Iterator[Tweet]:
    """Yield tweets whose timestamp falls in the requested split, in file order."""
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}, got {split!r}")
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            tweet = parse_tweet_line(line, lexicon, line_no)
            if window.contains(tweet.timestamp, split):
                yield tweet
