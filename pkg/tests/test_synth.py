import filecmp

import pytest

from attnet.attention import social_attention
from attnet.events import Kind
from attnet.networks import build_follower_network, build_retweet_network
from attnet.synth import SynthConfig, expected_degree, generate, write_dataset


def test_infeasible():
    with pytest.raises(ValueError):
        generate(SynthConfig(n_users=5, followees_per_user=5))
    with pytest.raises(ValueError):
        generate(SynthConfig(concentration=1.5))
    with pytest.raises(ValueError):
        generate(SynthConfig(followees_per_user=3, shares=[0.5, 0.5]))


def test_expected_degree():
    assert expected_degree([0.4, 0.4, 0.1, 0.1], 1000).expected_a == pytest.approx(50 / 17)
    assert expected_degree([1.0, 0, 0], 10) == (1.0, 0.0)


def test_planted_edges_recovered_exactly():
    ds = generate(SynthConfig(n_users=30, followees_per_user=4, events_per_user=40, seed=3))
    f = build_follower_network(ds.follows)
    rn = build_retweet_network(f, ds.events)
    planted = {}
    by_id = {}
    for e in ds.events:
        if e.kind is Kind.TWEET:
            by_id[e.content_id] = e.user_id
        else:
            key = (e.user_id, by_id[e.content_id])
            planted[key] = planted.get(key, 0) + 1
    assert {(u, v): w for u, v, w in rn.edges()} == planted
    timestamps = [e.timestamp for e in ds.events]
    assert timestamps == sorted(set(timestamps))


@pytest.mark.parametrize("config", [
    SynthConfig(n_users=40, followees_per_user=6, events_per_user=600, seed=1),
    SynthConfig(n_users=40, followees_per_user=6, events_per_user=600, concentration=1.0, seed=2),
    SynthConfig(n_users=40, followees_per_user=4, events_per_user=600, shares=[0.4, 0.4, 0.1, 0.1], seed=3),
    SynthConfig(n_users=40, followees_per_user=[3, 8], events_per_user=600, concentration=0.5, seed=4),
])
def test_ground_truth_bands(config):
    ds = generate(config)
    att = social_attention(build_retweet_network(build_follower_network(ds.follows), ds.events))
    misses = [u for u, gt in ds.ground_truth.items() if abs(att[u] - gt.expected_a) > gt.tolerance]
    # A 3-sigma band: allow the odd miss.
    assert len(misses) <= 2


def test_byte_identical(tmp_path):
    config = SynthConfig(n_users=20, followees_per_user=3, events_per_user=10, homophily=0.5, seed=42)
    write_dataset(generate(config), tmp_path / "a")
    write_dataset(generate(config), tmp_path / "b")
    names = ["events.jsonl", "follows.csv", "ground_truth.csv", "config.json"]
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert match == names
    other = SynthConfig(**{**config.__dict__, "seed": 43})
    write_dataset(generate(other), tmp_path / "c")
    assert (tmp_path / "a" / "events.jsonl").read_bytes() != (tmp_path / "c" / "events.jsonl").read_bytes()
