"""Shared fixtures: a session-wide cache of built communication graphs.

Graph construction dominates test runtime, and many tests want the same
(n, range, seed) triple, so builds are memoized for the whole session.
"""

from __future__ import annotations

import pytest

from skeleton_nav.field import build_comm_graph, generate_field


@pytest.fixture(scope="session")
def graph_cache():
    cache = {}

    def get(n: int, radio_range: float = 3.0, seed: int = 0):
        key = (n, radio_range, seed)
        if key not in cache:
            cache[key] = build_comm_graph(generate_field(n, radio_range, seed))
        return cache[key]

    return get
