"""Smoke test for the hamcycles extension.

Build and install first:  pip install -e crates/py --no-build-isolation
Then run:                  python3 python/smoke_test.py
"""

import itertools
import json
import math

import hamcycles as hc


def brute_hamilton(d):
    n = d.n
    total = 0
    for rest in itertools.permutations(range(1, n)):
        order = (0,) + rest
        if all(d.has_arc(order[i], order[(i + 1) % n]) for i in range(n)):
            total += 1
    return total


def main():
    assert hc.count_hamilton(hc.Digraph.complete(5)) == 24

    for seed in range(10):
        d = hc.Digraph.sample(7, 0.5, seed)
        assert hc.count_hamilton(d) == brute_hamilton(d), seed

    k = hc.BipartiteGraph.complete(6, 6)
    assert hc.count_perfect_matchings(k) == math.factorial(6)
    assert abs(hc.vdw_bound(6, 6) - math.log(math.factorial(6))) < 1e-9

    g = hc.BipartiteGraph.random_regular(20, 5, seed=3)
    pms = hc.hall_decompose(g, 5)
    assert len(pms) == 5
    assert sorted((a, b) for pm in pms for a, b in enumerate(pm)) == sorted(g.edges())

    h = hc.BipartiteGraph.random_regular(12, 1, seed=1)
    full = hc.complete_r_factor(hc.BipartiteGraph.complete(12, 12), h, 4)
    assert not any(h.has_edge(a, b) for a, b in full.edges())
    assert len(full.edges()) + len(h.edges()) == 12 * 4

    d = hc.Digraph.sample(150, 0.5, seed=3)
    packed = hc.pack(d, seed=3)
    assert packed.audit_passed and packed.cycles
    assert all(d.is_hamilton_cycle(c) for c in packed.cycles)
    used = [(c[i], c[(i + 1) % len(c)]) for c in packed.cycles for i in range(len(c))]
    assert len(used) == len(set(used))

    covered = hc.cover(hc.Digraph.sample(100, 0.4, seed=5), seed=5)
    assert covered.audit_passed and not covered.uncovered

    d = hc.Digraph.sample(16, 0.5, seed=4)
    c = hc.count(d, seed=4)
    assert c.certified <= c.exact == hc.count_hamilton(d)
    assert json.loads(c.json)["exact_count"] == c.exact

    assert hc.check_pseudorandom(hc.Digraph.complete(40), 0.5).p1

    try:
        hc.parameter_policy(100, 0.001, "pack")
    except hc.RefusedError:
        pass
    else:
        raise AssertionError("sparse pack was not refused")

    print(f"ok: {len(packed.cycles)} packed, {len(covered.cycles)} covering, certified {c.certified} of {c.exact}")


if __name__ == "__main__":
    main()
