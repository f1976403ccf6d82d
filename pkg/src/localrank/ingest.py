"""Pageview log parsing, sessionization and referrer subgraph extraction.

A log line is five tab-separated fields::

    bcookie <TAB> timestamp <TAB> referrer_url <TAB> url <TAB> user_agent

Per-user activity is cut into sessions by two rules: an inactivity timeout,
and a forced cut whenever a pageview arrives with a referrer from an external
domain (a returning visitor), even when the timeout has not elapsed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .graph import BrowseGraph, build_graph

__all__ = [
    "PageviewRecord",
    "Session",
    "LogParseResult",
    "DEFAULT_BROWSER_TOKENS",
    "DEFAULT_TIMEOUT_MINUTES",
    "DIRECT_DOMAIN",
    "normalize_domain",
    "parse_log",
    "filter_crawlers",
    "sessionize",
    "extract_referrer_subgraph",
    "save_sessions_jsonl",
    "load_sessions_jsonl",
]

DEFAULT_TIMEOUT_MINUTES = 25.0
DEFAULT_BROWSER_TOKENS = frozenset(
    {"mozilla", "chrome", "safari", "opera", "msie", "edge"}
)
# Sentinel domain for sessions opened with an empty referrer.
DIRECT_DOMAIN = "direct"


@dataclass(frozen=True)
class PageviewRecord:
    """One HTTP request line of the browsing log."""

    bcookie: str
    timestamp: float
    referrer_url: str
    url: str
    user_agent: str


@dataclass
class Session:
    """Time-ordered pageviews of one user between two session cuts."""

    bcookie: str
    pageviews: list[PageviewRecord] = field(default_factory=list)
    initial_referrer_domain: str = DIRECT_DOMAIN

    def __len__(self) -> int:
        return len(self.pageviews)

    def transitions(self) -> Iterator[tuple[str, str]]:
        """Consecutive (url, next_url) pairs inside the session."""
        for a, b in zip(self.pageviews, self.pageviews[1:]):
            yield a.url, b.url


@dataclass
class LogParseResult:
    records: list[PageviewRecord]
    malformed: int


def normalize_domain(url: str) -> str:
    """Registered domain of a URL: lowercase host, no "www.", last two labels.

    Returns :data:`DIRECT_DOMAIN` for empty input.  The two-label rule is a
    deliberate simplification (no public-suffix list); it maps
    "http://www.news.google.com/x" to "google.com" and leaves bare hosts like
    "t.co" untouched.
    """
    if not url:
        return DIRECT_DOMAIN
    rest = url
    if "://" in rest:
        rest = rest.split("://", 1)[1]
    host = rest.split("/", 1)[0].split("?", 1)[0]
    host = host.split("@")[-1].split(":")[0].lower().strip(".")
    if host.startswith("www."):
        host = host[4:]
    if not host:
        return DIRECT_DOMAIN
    labels = host.split(".")
    if len(labels) > 2:
        host = ".".join(labels[-2:])
    return host


def parse_log(stream: IO[str] | Iterable[str]) -> LogParseResult:
    """Parse a line-oriented 5-field TSV log.

    Malformed lines (wrong field count, empty URL, bad or negative timestamp)
    are skipped and counted; everything else is returned in input order.
    """
    records: list[PageviewRecord] = []
    malformed = 0
    for line in stream:
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            malformed += 1
            continue
        bcookie, ts_str, referrer, url, agent = parts
        try:
            ts = float(ts_str)
        except ValueError:
            malformed += 1
            continue
        if ts < 0 or not url:
            malformed += 1
            continue
        records.append(PageviewRecord(bcookie, ts, referrer, url, agent))
    return LogParseResult(records, malformed)


def filter_crawlers(
    records: Iterable[PageviewRecord],
    allowlist: Iterable[str] = DEFAULT_BROWSER_TOKENS,
) -> list[PageviewRecord]:
    """Keep records whose user agent contains any allowlisted browser token.

    Matching is case-insensitive substring containment; everything else is
    treated as crawler traffic and dropped.
    """
    tokens = [t.lower() for t in allowlist]
    kept = []
    for rec in records:
        agent = rec.user_agent.lower()
        if any(t in agent for t in tokens):
            kept.append(rec)
    return kept


def sessionize(
    records: Iterable[PageviewRecord],
    timeout_minutes: float = DEFAULT_TIMEOUT_MINUTES,
    internal_domains: Iterable[str] = (),
) -> list[Session]:
    """Split per-user pageviews into sessions.

    A new session starts when the inactivity gap exceeds *timeout_minutes*,
    or when the record carries a referrer whose domain is external to
    *internal_domains* (even within the timeout).  Records with an empty
    referrer never force a cut on their own.  Users are processed in first
    appearance order and each user's records are stably time-sorted, so the
    result is deterministic given the input order.
    """
    internal = {normalize_domain(d if "://" in d else "http://" + d)
                for d in internal_domains}
    timeout_s = timeout_minutes * 60.0

    per_user: dict[str, list[PageviewRecord]] = {}
    for rec in records:
        per_user.setdefault(rec.bcookie, []).append(rec)

    sessions: list[Session] = []
    for bcookie, recs in per_user.items():
        recs = sorted(recs, key=lambda r: r.timestamp)  # stable: ties keep input order
        current: Session | None = None
        last_ts = 0.0
        for rec in recs:
            domain = normalize_domain(rec.referrer_url)
            external = domain != DIRECT_DOMAIN and domain not in internal
            if current is None or rec.timestamp - last_ts > timeout_s or external:
                current = Session(bcookie, [], domain)
                sessions.append(current)
            current.pageviews.append(rec)
            last_ts = rec.timestamp
    return sessions


def extract_referrer_subgraph(sessions: Iterable[Session], domain: str) -> BrowseGraph:
    """Browse graph of the sessions whose initial referrer domain is *domain*.

    Edge weights accumulate consecutive within-session transitions across all
    matching sessions; length-1 sessions match but contribute no edges.
    """
    def gen():
        for s in sessions:
            if s.initial_referrer_domain == domain:
                yield from s.transitions()

    return build_graph(gen())


def build_full_graph(sessions: Iterable[Session]) -> BrowseGraph:
    """Browse graph of all sessions regardless of referrer."""
    def gen():
        for s in sessions:
            yield from s.transitions()

    return build_graph(gen())


# ---- session persistence -----------------------------------------------------

def save_sessions_jsonl(sessions: Iterable[Session], path) -> None:
    """One session per line: bcookie, initial referrer domain, pageview rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sessions:
            row = {
                "bcookie": s.bcookie,
                "domain": s.initial_referrer_domain,
                "pageviews": [[r.timestamp, r.referrer_url, r.url, r.user_agent]
                              for r in s.pageviews],
            }
            fh.write(json.dumps(row, separators=(",", ":"), sort_keys=True) + "\n")


def load_sessions_jsonl(path) -> list[Session]:
    sessions = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            views = [PageviewRecord(row["bcookie"], t, ref, url, ua)
                     for t, ref, url, ua in row["pageviews"]]
            sessions.append(Session(row["bcookie"], views, row["domain"]))
    return sessions
