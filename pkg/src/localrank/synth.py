"""Synthetic browse-log generator with per-referrer ground truth.

Each referrer profile is a small Markov model over page topics: sessions
enter on a topic drawn from the profile's entry distribution, hop between
topics along a row-stochastic transition matrix, and pick a concrete page
uniformly inside the current topic.  Session lengths are geometric.  The
emitted log is the 5-column TSV the ingest module consumes, and a JSON-lines
ground-truth file records every generated session, so ingestion round-trips
are exactly checkable.

The default configuration ships seven profiles whose traffic volumes mimic a
news portal's mix (search engines largest, link aggregators smallest) and
whose topic signatures overlap just enough to share a common page core while
staying clearly distinguishable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = ["ReferrerProfile", "SyntheticCorpus", "GeneratedSession",
           "generate_corpus", "default_profiles", "measured_profiles",
           "save_profiles_json", "load_profiles_json", "INTERNAL_DOMAIN",
           "DEFAULT_PAGES_PER_TOPIC", "MEASURED_PROFILE_NAMES"]

INTERNAL_DOMAIN = "news.example"
DEFAULT_PAGES_PER_TOPIC = 400

_BROWSER_AGENTS = (
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) Gecko/20100101 Firefox/115.0",
    "Mozilla/5.0 (Macintosh; Intel Mac OS X 13_2) AppleWebKit/605.1 Safari/605.1",
    "Mozilla/5.0 (X11; Linux x86_64) AppleWebKit/537.36 Chrome/120.0 Safari/537.36",
    "Opera/9.80 (Windows NT 6.1) Presto/2.12 Version/12.16",
)

# gaps inside a session stay far below the default 25-minute timeout
_IN_SESSION_GAP = (30.0, 600.0)
_TIMEOUT_GAP = (1800.0, 5400.0)   # forces a timeout split
_SHORT_GAP = (120.0, 900.0)       # below timeout; splits only via referrer rule


@dataclass
class ReferrerProfile:
    """Markov browsing model for traffic arriving from one domain."""

    name: str
    entry_distribution: np.ndarray
    topic_transition_matrix: np.ndarray
    session_length_p: float
    volume: int
    domain: str = ""

    def __post_init__(self):
        self.entry_distribution = np.asarray(self.entry_distribution, dtype=float)
        self.topic_transition_matrix = np.asarray(
            self.topic_transition_matrix, dtype=float)
        if not self.domain:
            self.domain = f"{self.name}.test"
        k = self.entry_distribution.size
        if self.topic_transition_matrix.shape != (k, k):
            raise ValueError(f"profile {self.name}: matrix must be {k}x{k}")
        if abs(float(self.entry_distribution.sum()) - 1.0) > 1e-9:
            raise ValueError(f"profile {self.name}: entry distribution must sum to 1")
        rows = self.topic_transition_matrix.sum(axis=1)
        if np.abs(rows - 1.0).max() > 1e-12:
            raise ValueError(f"profile {self.name}: matrix rows must sum to 1")
        if not 0.0 < self.session_length_p < 1.0:
            raise ValueError(f"profile {self.name}: length parameter must be in (0,1)")
        if self.volume < 1:
            raise ValueError(f"profile {self.name}: volume must be >= 1")


@dataclass(frozen=True)
class GeneratedSession:
    bcookie: str
    profile: str
    domain: str
    start_ts: float
    urls: tuple[str, ...]


@dataclass
class SyntheticCorpus:
    """Log lines plus the ground truth that produced them."""

    log_lines: list[str]
    sessions: list[GeneratedSession]
    profiles: list[ReferrerProfile] = field(default_factory=list)

    def write_log(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in self.log_lines:
                fh.write(line + "\n")

    def write_truth(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for s in self.sessions:
                fh.write(json.dumps({
                    "bcookie": s.bcookie,
                    "profile": s.profile,
                    "domain": s.domain,
                    "start_ts": s.start_ts,
                    "urls": list(s.urls),
                }, separators=(",", ":"), sort_keys=True) + "\n")


def _page_url(topic: int, page: int) -> str:
    return f"http://{INTERNAL_DOMAIN}/t{topic}/p{page}"


def _zipf_weights(pages_per_topic: int, exponent: float = 1.05) -> np.ndarray:
    """Within-topic page popularity: a few hub pages, a long tail."""
    w = 1.0 / np.arange(1, pages_per_topic + 1) ** exponent
    return w / w.sum()


def generate_corpus(
    profiles: Sequence[ReferrerProfile],
    pages_per_topic: int = DEFAULT_PAGES_PER_TOPIC,
    seed: int = 0,
) -> SyntheticCorpus:
    """Generate a pageview log with known session/referrer ground truth.

    Every profile contributes exactly ``volume`` sessions.  Sessions enter on
    a hub page of the entry topic (page popularity within a topic is Zipf,
    and the hub pages take the head), then hop topics along the profile's
    transition matrix.  Users own one to three consecutive sessions of the
    same profile; between two sessions of a user the gap either exceeds the
    ingest timeout or, when the profile's referrer is external, may stay
    below it (the referrer rule still splits).  Log lines are globally
    time-sorted.  Each session draws its own RNG stream from *seed*, so
    generation is order-independent.
    """
    if len(profiles) < 1:
        raise ValueError("need at least one profile")
    if pages_per_topic < 1:
        raise ValueError("pages_per_topic must be >= 1")

    planner = np.random.default_rng(np.random.SeedSequence((seed, 0xC0FFEE)))
    total_sessions = sum(p.volume for p in profiles)
    streams = np.random.SeedSequence(seed).spawn(total_sessions)
    page_weights = _zipf_weights(pages_per_topic)
    # Every profile ranks a topic's pages in its own order: audiences from
    # different referrers favor different articles on the same subject.
    # Topics 0-1 are the shared front-section core: popularity there is the
    # same (and flatter) for everyone, which keeps all subgraphs overlapping
    # without forcing them to agree on a single head ordering.
    core_weights = _zipf_weights(pages_per_topic, exponent=1.3)
    shared_pref = np.arange(pages_per_topic)
    page_prefs = {p.name: planner.permutation(pages_per_topic)
                  for p in profiles}
    n_core_topics = 2

    sessions: list[GeneratedSession] = []
    records: list[tuple[float, str, str, str, str]] = []
    stream_idx = 0
    user_counter = 0
    for profile in profiles:
        external = profile.domain != INTERNAL_DOMAIN
        remaining = profile.volume
        while remaining > 0:
            per_user = min(int(planner.integers(1, 4)), remaining)
            remaining -= per_user
            bcookie = f"u{user_counter:06d}"
            user_counter += 1
            ts = float(planner.uniform(0, 86400.0))
            agent = _BROWSER_AGENTS[int(planner.integers(len(_BROWSER_AGENTS)))]
            prefs = page_prefs[profile.name]

            def pick_page(rng, topic):
                if topic < n_core_topics:
                    return int(shared_pref[rng.choice(pages_per_topic,
                                                      p=core_weights)])
                return int(prefs[rng.choice(pages_per_topic, p=page_weights)])

            for s in range(per_user):
                rng = np.random.default_rng(streams[stream_idx])
                stream_idx += 1
                length = int(rng.geometric(profile.session_length_p))
                topic = int(rng.choice(profile.entry_distribution.size,
                                       p=profile.entry_distribution))
                # sessions land on the profile's top page for the topic: the
                # one page per (profile, topic) that its own traffic is sure
                # to revisit, keeping every entry point reachable in-graph
                order = shared_pref if topic < n_core_topics else prefs
                page = int(order[0])
                urls = [_page_url(topic, page)]
                for _ in range(length - 1):
                    topic = int(rng.choice(
                        profile.topic_transition_matrix.shape[0],
                        p=profile.topic_transition_matrix[topic]))
                    urls.append(_page_url(topic, pick_page(rng, topic)))

                referrer = f"http://www.{profile.domain}/found-a-link" if external \
                    else f"http://{INTERNAL_DOMAIN}/"
                start_ts = ts
                for i, url in enumerate(urls):
                    ref = referrer if i == 0 else urls[i - 1]
                    records.append((ts, bcookie, ref, url, agent))
                    if i + 1 < len(urls):
                        ts += float(rng.uniform(*_IN_SESSION_GAP))
                sessions.append(GeneratedSession(
                    bcookie, profile.name, profile.domain, start_ts, tuple(urls)))
                if s + 1 < per_user:
                    # external referrers may split within the timeout window;
                    # internal ones must rely on the timeout itself
                    if external and rng.random() < 0.6:
                        ts += float(rng.uniform(*_SHORT_GAP))
                    else:
                        ts += float(rng.uniform(*_TIMEOUT_GAP))

    records.sort(key=lambda r: (r[0], r[1]))
    lines = [f"{bcookie}\t{ts!r}\t{ref}\t{url}\t{agent}"
             for ts, bcookie, ref, url, agent in records]
    sessions.sort(key=lambda s: (s.start_ts, s.bcookie))
    return SyntheticCorpus(lines, sessions, list(profiles))


def _focus_row(n_topics: int, weights: dict[int, float], mix: float) -> np.ndarray:
    """Row with `mix` spread uniformly and the rest on the focus weights."""
    row = np.full(n_topics, mix / n_topics)
    total = sum(weights.values())
    for t, w in weights.items():
        row[t] += (1.0 - mix) * w / total
    return row / row.sum()


def _profile_matrix(n_topics: int, rows: dict[int, dict[int, float]],
                    default_stay: float, mix: float) -> np.ndarray:
    mat = np.empty((n_topics, n_topics))
    for t in range(n_topics):
        focus = rows.get(t)
        if focus is None:
            focus = {t: default_stay, (t + 1) % n_topics: 1.0 - default_stay}
        mat[t] = _focus_row(n_topics, focus, mix)
    return mat


MEASURED_PROFILE_NAMES = ("google", "yahoo", "bing", "homepage",
                          "facebook", "twitter", "reddit")


def default_profiles(n_topics: int = 24, volume_scale: float = 1.0,
                     include_background: bool = True) -> list[ReferrerProfile]:
    """Stock profiles: seven measured referrers plus unmeasured background.

    Each measured profile lives on its own slice of the topic range (search
    engines on wide overlapping slices with different hop offsets, social
    profiles sticking to a topic pair), with a small mixing mass over all
    topics.  Background profiles are broad, anonymous traffic sources; they
    make the full graph several times larger than any measured subgraph, the
    way a portal's whole log dwarfs any single referrer's slice.
    """
    mix = 0.04

    def with_core(mat: np.ndarray, core_mass: float = 0.08) -> np.ndarray:
        # every profile regularly passes through the shared topics 0-1;
        # narrow-slice social profiles lean on the core hardest
        core = np.zeros(n_topics)
        core[0] = core[1] = 0.5
        return (1.0 - core_mass) * mat + core_mass * core[None, :]

    def entry_on(topics: dict[int, float]) -> np.ndarray:
        # entries never leak outside the profile's own landing topics
        return _focus_row(n_topics, topics, 0.0)

    def slice_hop_matrix(slice_topics: range, offset: int, stay: float) -> np.ndarray:
        members = list(slice_topics)
        rows = {}
        for i, t in enumerate(members):
            rows[t] = {t: stay, members[(i + offset) % len(members)]: 1.0 - stay}
        for t in range(n_topics):
            if t not in rows:  # mixing jump landed outside: drift back in
                rows[t] = {m: 1.0 for m in members}
        return with_core(_profile_matrix(n_topics, rows, stay, mix))

    def hop_matrix(offset: int, stay: float) -> np.ndarray:
        rows = {t: {t: stay, (t + offset) % n_topics: 1.0 - stay}
                for t in range(n_topics)}
        return _profile_matrix(n_topics, rows, stay, mix)

    def hub_and_spoke_matrix(stay: float) -> np.ndarray:
        # wander within the current section, leave it through the shared
        # front-section core; the core routes uniformly to every section
        rows: dict[int, dict[int, float]] = {}
        for t in range(n_topics):
            if t < 2:
                rows[t] = {u: 1.0 for u in range(n_topics)}
            else:
                rows[t] = {t: stay, 0: (1.0 - stay) / 2, 1: (1.0 - stay) / 2}
        return _profile_matrix(n_topics, rows, stay, 0.01)

    def sticky_matrix(pair: tuple[int, int], stay: float) -> np.ndarray:
        a, b = pair
        rows = {}
        for t in range(n_topics):
            if t == a:
                rows[t] = {a: stay, b: 1.0 - stay}
            elif t == b:
                rows[t] = {b: stay, a: 1.0 - stay}
            else:
                rows[t] = {a: 0.5, b: 0.5}
        return with_core(_profile_matrix(n_topics, rows, stay, mix),
                         core_mass=0.12)

    def vol(v: int) -> int:
        return max(1, round(v * volume_scale))

    def slice_entry(slice_topics: range) -> np.ndarray:
        return entry_on({t: 1.0 for t in slice_topics})

    half = n_topics // 2
    profiles = [
        ReferrerProfile("google", slice_entry(range(0, half)),
                        slice_hop_matrix(range(0, half), 1, 0.45), 0.15, vol(700)),
        ReferrerProfile("yahoo", slice_entry(range(2, 2 + half)),
                        slice_hop_matrix(range(2, 2 + half), 2, 0.50), 0.17, vol(500)),
        ReferrerProfile("bing", slice_entry(range(4, 4 + half)),
                        slice_hop_matrix(range(4, 4 + half), 3, 0.40), 0.18, vol(380)),
        ReferrerProfile("homepage", entry_on({0: 0.4, 1: 0.3, 2: 0.2, 3: 0.1}),
                        slice_hop_matrix(range(0, max(6, half - 2)), 1, 0.15),
                        0.16, vol(350), domain=INTERNAL_DOMAIN),
        ReferrerProfile("facebook",
                        entry_on({n_topics - 6: 0.6, n_topics - 5: 0.4}),
                        sticky_matrix((n_topics - 6, n_topics - 5), 0.70),
                        0.35, vol(200)),
        ReferrerProfile("twitter",
                        entry_on({n_topics - 4: 0.6, n_topics - 3: 0.4}),
                        sticky_matrix((n_topics - 4, n_topics - 3), 0.72),
                        0.38, vol(150)),
        ReferrerProfile("reddit",
                        entry_on({n_topics - 2: 0.6, n_topics - 1: 0.4}),
                        sticky_matrix((n_topics - 2, n_topics - 1), 0.70),
                        0.40, vol(150)),
    ]
    if include_background:
        # background roams the search/editorial territory (everything except
        # the last six social topics); the social communities own their turf,
        # so their local rankings track the global ones there
        bg_slice = range(0, max(2, n_topics - 6))
        for k in range(10):
            profiles.append(ReferrerProfile(
                f"bg{k}", slice_entry(bg_slice),
                slice_hop_matrix(bg_slice, k + 1, 0.30), 0.22, vol(300)))
    return profiles


def measured_profiles(profiles: Sequence[ReferrerProfile]) -> list[ReferrerProfile]:
    """The seven referrers the experiments track, in canonical order."""
    by_name = {p.name: p for p in profiles}
    return [by_name[name] for name in MEASURED_PROFILE_NAMES if name in by_name]


# ---- profile configuration files ----------------------------------------------

def save_profiles_json(profiles: Sequence[ReferrerProfile], path,
                       pages_per_topic: int = DEFAULT_PAGES_PER_TOPIC) -> None:
    doc = {
        "pages_per_topic": pages_per_topic,
        "profiles": [
            {
                "name": p.name,
                "domain": p.domain,
                "entry": [float(v) for v in p.entry_distribution],
                "matrix": [[float(v) for v in row]
                           for row in p.topic_transition_matrix],
                "p": p.session_length_p,
                "volume": p.volume,
            }
            for p in profiles
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_profiles_json(path) -> tuple[list[ReferrerProfile], int]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    profiles = [
        ReferrerProfile(p["name"], np.array(p["entry"]), np.array(p["matrix"]),
                        p["p"], p["volume"], p.get("domain", ""))
        for p in doc["profiles"]
    ]
    return profiles, int(doc.get("pages_per_topic", DEFAULT_PAGES_PER_TOPIC))
