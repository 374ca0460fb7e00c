import random

import pytest

from attnet.events import Event, FollowEdge, Kind

TW, RT = Kind.TWEET, Kind.RETWEET


def timeline_events():
    """Two timelines: v posts i, retweets l, posts j; u retweets i and l afterwards, j before."""
    return [
        Event("v", 10, TW, "i", ("x",)),
        Event("u", 15, RT, "i", ("x",)),
        Event("u", 25, RT, "j", ()),
        Event("v", 30, TW, "j", ()),
        Event("v", 40, RT, "l", ("y",)),
        Event("u", 45, RT, "l", ("y",)),
        Event("u", 50, TW, "own", ()),
        Event("v", 55, TW, "other", ()),
    ]


@pytest.fixture
def timeline():
    return [FollowEdge("u", "v")], timeline_events()


def random_instance(rng: random.Random, max_users=50, max_events=500):
    """Random follower graph and event log with heavy content reuse and timestamp ties."""
    n_users = rng.randint(2, max_users)
    users = [f"p{i}" for i in range(n_users)]
    edges = set()
    for _ in range(rng.randint(0, n_users * 4)):
        a, b = rng.sample(users, 2)
        edges.add(FollowEdge(a, b))
    n_contents = rng.randint(1, 40)
    events = []
    for _ in range(rng.randint(0, max_events)):
        kind = RT if rng.random() < 0.6 else TW
        events.append(Event(rng.choice(users), rng.randint(0, 200), kind, f"c{rng.randrange(n_contents)}", ()))
    return sorted(edges), events
