"""Reproduce the measured constants frozen into the test suite.

Every numeric bound the tests pin (size bands, stretch means, slopes,
message counts, trace strings) was first measured here and then frozen
with a margin.  Run a section again before touching a constant:

    python3 scripts/measure_baselines.py --section sizes --section stretch

With no --section the whole sweep runs; the gate-level sections take
about a minute combined.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from skeleton_nav.adaptive import (_CrossTester, build_adaptive_skeleton,
                                   build_quadtree, clusters_at_level,
                                   detect_voronoi_nodes,
                                   simulate_cluster_retirement)
from skeleton_nav.danger import (DangerZone, PotentialModel, path_exposure,
                                 perimeter_length, points_in_region,
                                 well_behaved_check, zone_node_mask)
from skeleton_nav.distsim import (centralized_bfs, centralized_min_exposure,
                                  run_bfs_flood, run_min_exposure)
from skeleton_nav.field import (SensorField, build_comm_graph,
                                connectivity_census, generate_field, hop_bfs)
from skeleton_nav.harness import (Scenario, auto_tune_epsilon, build_world,
                                  fixture_zone, run_query, run_scenario,
                                  sample_queries)
from skeleton_nav.skeleton import attach_offstreet_endpoints
from skeleton_nav.uniform import (UniformStreetConfig, build_uniform_skeleton,
                                  prune_street)

INF = math.inf


def graph(n: int, seed: int):
    return build_comm_graph(generate_field(n, 3.0, seed))


def section_census():
    print("== connectivity census n=64, seeds 0..9 ==")
    print("r=3.0:", connectivity_census(64, 3.0, range(10)))
    print("r=1.0:", connectivity_census(64, 1.0, range(10)))


def section_grid():
    print("== uniform n=1024 eps=1/6 no zone, seeds 0..2 ==")
    for sd in (0, 1, 2):
        sk = build_uniform_skeleton(graph(1024, sd), None,
                                    UniformStreetConfig(epsilon=1 / 6))
        print("seed", sd, "size", sk.size)

    print("== shift overlap n=4096 eps=1/6 seed 2 ==")
    g4 = graph(4096, 2)
    s_sep = UniformStreetConfig(epsilon=1 / 6).separation(4096)
    awakes = {}
    for frac in (0.0, 0.25, 0.5, 0.75):
        c = UniformStreetConfig(epsilon=1 / 6, shift=frac * s_sep)
        awakes[frac] = build_uniform_skeleton(g4, None, c).awake
    base, half = awakes[0.0], awakes[0.5]
    print("size shift0:", len(base), "shift s/2:", len(half))
    print("overlap frac:", len(base & half) / len(base))
    union = frozenset().union(*awakes.values())
    print("union size:", len(union),
          "ratio vs single:", len(union) / len(base))

    print("== auto tune eps, n=1024 no zone, target 300 ==")
    base = Scenario(n=1024, seed=0, zone_kind="none", skeleton="uniform")
    eps, size = auto_tune_epsilon(base, 300.0)
    print("eps:", eps, "size:", size)


def section_voronoi():
    g1 = graph(1024, 3)

    print("== voronoi 2 sources n=1024 seed 3 ==")
    band2 = detect_voronoi_nodes(g1, [(8.0, 16.0), (24.0, 16.0)])
    xs = g1.field.positions[sorted(band2.nodes), 0]
    print("band size:", len(band2.nodes), "degenerate:", band2.degenerate)
    print("mean |x-16|:", float(np.mean(np.abs(xs - 16.0))),
          "max:", float(np.max(np.abs(xs - 16.0))))

    print("== voronoi 3 sources n=1024 seed 3 ==")
    sites = np.array([(6.0, 6.0), (26.0, 8.0), (16.0, 26.0)])
    band3 = detect_voronoi_nodes(g1, sites)
    vals = []
    for v in sorted(band3.nodes):
        d = np.hypot(*(sites - g1.field.positions[v]).T)
        order = np.argsort(d)
        i, j = int(order[0]), int(order[1])
        ab = float(np.hypot(*(sites[i] - sites[j])))
        vals.append(abs(d[i] ** 2 - d[j] ** 2) / (2 * ab))
    print("band size:", len(band3.nodes), "degenerate:", band3.degenerate)
    print("bisector dist mean:", float(np.mean(vals)), "max:", max(vals))

    print("== collocated sources ==")
    bandc = detect_voronoi_nodes(g1, [(10.0, 10.0), (10.0, 10.0)])
    print("band size:", len(bandc.nodes), "of", g1.n,
          "degenerate:", bandc.degenerate)

    print("== 3-source exposure ratios on adaptive+voronoi ==")
    for qs in (0, 1, 2):
        s = Scenario(n=1024, seed=3, zone_kind="points", danger_count=3,
                     danger_seed=7, skeleton="adaptive", voronoi=True,
                     metrics=("exposure",), queries=10, query_seed=qs)
        agg = run_scenario(s)[-1]
        print(f"query_seed={qs} mean={agg.exposure_ratio_mean:.4f} "
              f"max={agg.exposure_ratio_max:.4f} excluded={agg.excluded}")


def section_quadtree():
    print("== crossed cells per level, side 32 ==")
    for name in ("simple", "complex"):
        zone = fixture_zone(name).zone
        p = perimeter_length(zone)
        tester = _CrossTester([zone], 32)
        print(name, "perimeter:", p)
        for k in range(6):
            s = 1 << k
            cnt = sum(tester.crossed(ix * s, iy * s, s)
                      for ix in range(32 // s) for iy in range(32 // s))
            print(f"  level {k}: crossed {cnt}  cap 4p/2^k = {4 * p / s:.1f}")
        for side in (32, 64, 128):
            tree = build_quadtree(zone, float(side))
            print(f"  side {side}: leaves {len(tree.leaves)} "
                  f"street len {tree.street_length():.0f} "
                  f"cap 8p*log2(side) {8 * p * math.log2(side):.0f}")

    print("== quadtree 4x4 unit zone ==")
    unit = DangerZone.region([(1, 1), (2, 1), (2, 2), (1, 2)])
    t44 = build_quadtree(unit, 4.0)
    segs = set()
    for leaf in t44.leaves:
        s = leaf.size
        for k in range(s):
            segs.add(("v", leaf.x0, leaf.y0 + k))
            segs.add(("v", leaf.x0 + s, leaf.y0 + k))
            segs.add(("h", leaf.x0 + k, leaf.y0))
            segs.add(("h", leaf.x0 + k, leaf.y0 + s))
    print("leaves:", len(t44.leaves), "street len:", t44.street_length(),
          "unit segment count:", len(segs))


def section_retire():
    g256 = graph(256, 4)
    g1 = graph(1024, 3)

    print("== retirement equals direct construction ==")
    sq = DangerZone.region([(4, 4), (10, 4), (10, 10), (4, 10)])
    ret = simulate_cluster_retirement(g256, sq)
    direct = build_adaptive_skeleton(g256, sq)
    print("n=256 square: equal:", ret.awake == direct.awake,
          "size:", len(ret.awake), "messages:", ret.messages)
    zs = fixture_zone("simple").zone
    ret1 = simulate_cluster_retirement(g1, zs)
    dir1 = build_adaptive_skeleton(g1, zs)
    print("n=1024 simple: equal:", ret1.awake == dir1.awake,
          "size:", len(ret1.awake))

    print("== retirement message recount, no zone n=256 ==")
    ret0 = simulate_cluster_retirement(g256, None)
    expect = 0
    for level in range(5):
        cl = clusters_at_level(g256, None, level, 16, 2.0 / 3.0)
        expect += sum(len(c.members) for c in cl.values())
        if level < 4:
            expect += len(cl)
    print("messages:", ret0.messages, "recount:", expect,
          "equal:", ret0.messages == expect)
    border = {i for i in range(256)
              if min(g256.field.positions[i].min(),
                     16 - g256.field.positions[i].max()) <= 1.0 / 3.0}
    print("no-zone awake == border strip:", ret0.awake == border)

    print("== adaptive no-zone awake recount n=1024 ==")
    sk0 = build_adaptive_skeleton(g1, None)
    pos = g1.field.positions
    margin = np.minimum(np.minimum(pos[:, 0], 32 - pos[:, 0]),
                        np.minimum(pos[:, 1], 32 - pos[:, 1]))
    recount = set(np.flatnonzero(margin <= 1.0 / 3.0).tolist())
    print("equal:", set(sk0.awake) == recount, "size:", sk0.size)


def section_attach():
    print("== attach reachability, 50 active pairs, n=1024 seed 5 ==")
    s5 = Scenario(n=1024, seed=5, zone_kind="simple", skeleton="uniform",
                  epsilon=1 / 6, width=5.0)
    w5 = build_world(s5)
    rng = np.random.default_rng(123)
    act = sorted(w5.active)
    bad = 0
    for _ in range(50):
        a, b = (int(v) for v in rng.choice(act, size=2, replace=False))
        att = attach_offstreet_endpoints(w5.graph, w5.skeleton, a, b)
        run = run_bfs_flood(w5.graph, att.skeleton.awake, a)
        full = centralized_bfs(w5.graph, w5.active, a)
        bad += (run.value[b] != INF) != (full[b] != INF)
    print("mismatches:", bad)


def section_traces():
    print("== tiny trace fixtures ==")
    posz = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0]])
    tiny = SensorField(n=4, side=2.0, radio_range=1.0, seed=0, positions=posz)
    gt = build_comm_graph(tiny)
    print("adj:", gt.adj)
    lines: list[str] = []
    r = run_bfs_flood(gt, None, 0, trace=lines.append)
    print("bfs trace:", lines, "tx:", r.transmissions, "rounds:", r.rounds)
    lines2: list[str] = []
    r2 = run_min_exposure(gt, None, 0, [0.0, 1.0, 0.5, 0.25],
                          trace=lines2.append)
    print("exposure trace:", lines2, "value:", r2.value, "rounds:", r2.rounds)

    print("== kdtree inclusive edge ==")
    ph = np.array([[0.0, 0.0], [3.0, 0.0], [7.0, 0.0], [7.0, 3.0]])
    fh = SensorField(n=4, side=10.0, radio_range=3.0, seed=0, positions=ph)
    print("adj:", build_comm_graph(fh).adj)

    print("== prune sanity, n=256 seed 4 ==")
    g256 = graph(256, 4)
    d0, _ = hop_bfs(g256, 7)
    pr, ok = prune_street(g256, frozenset(range(g256.n)), (7, 101))
    print("ok:", ok, "len:", len(pr), "bfs dist:", d0[101])

    print("== scenario digest ==")
    print("default:", Scenario().digest)


def section_sizes():
    print("== skeleton size bands, seeds 0..19 ==")
    zone = fixture_zone("simple").zone
    seeds = range(20)
    small = [build_adaptive_skeleton(graph(1024, s), zone).size
             for s in seeds]
    large = [build_adaptive_skeleton(graph(16384, s), zone).size
             for s in seeds]
    cfg = UniformStreetConfig(epsilon=1 / 6)
    grid = [build_uniform_skeleton(graph(4096, s), zone, cfg).size
            for s in seeds]
    for tag, sizes in (("adaptive n=1024", small), ("adaptive n=16384", large),
                       ("uniform n=4096", grid)):
        print(f"{tag}: mean {np.mean(sizes):.1f} "
              f"min {min(sizes)} max {max(sizes)}")


def section_slope():
    print("== uniform size scaling, eps=0.05, seeds 0..19 ==")
    cfg = UniformStreetConfig(epsilon=0.05)
    ns = (1024, 4096, 16384)
    means = []
    for n in ns:
        sizes = [build_uniform_skeleton(graph(n, s), None, cfg).size
                 for s in range(20)]
        means.append(float(np.mean(sizes)))
        print(f"n={n}: mean size {means[-1]:.1f}")
    slope = float(np.polyfit(np.log(ns), np.log(means), 1)[0])
    print("log-log slope:", slope)


def section_stretch():
    print("== path stretch, n=4096 seed 5, 200 pairs ==")
    for zone_kind in ("simple", "complex"):
        c = well_behaved_check(fixture_zone(zone_kind).zone,
                               [2.0, 4.0, 8.0, 16.0, 32.0])
        print(f"{zone_kind}: detour cost {c:.3f}")
        for kind in ("uniform", "adaptive"):
            s = Scenario(n=4096, seed=5, zone_kind=zone_kind, skeleton=kind,
                         epsilon=1 / 6, width=5.0, queries=200,
                         query_seed=11, metrics=("path",))
            world = build_world(s)
            rows = [run_query(world, i, a, b)
                    for i, (a, b) in enumerate(sample_queries(world))]
            ratios = [r.path_ratio for r in rows if not r.flagged]
            print(f"  {kind}: served {len(ratios)}/200 "
                  f"mean {np.mean(ratios):.4f} worst {max(ratios):.4f}")


def section_exposure():
    print("== exposure stretch, 20 point-danger scenarios x 2 skeletons ==")
    pooled = {"uniform": [], "adaptive": []}
    excluded = 0
    for i in range(20):
        for kind in ("uniform", "adaptive"):
            s = Scenario(n=4096, seed=100 + i, zone_kind="points",
                         danger_count=3, danger_seed=200 + i, skeleton=kind,
                         epsilon=0.2, width=2.5, voronoi=(kind == "adaptive"),
                         queries=10, query_seed=300 + i,
                         metrics=("exposure",))
            rows = run_scenario(s)
            excluded += rows[-1].excluded
            pooled[kind].extend(r.exposure_ratio for r in rows[:-1]
                                if r.exposure_ratio is not None)
    for kind, vals in pooled.items():
        print(f"{kind}: served {len(vals)}/200 mean {np.mean(vals):.4f} "
              f"max {max(vals):.4f}")
    print("excluded:", excluded)


def section_decay():
    print("== straight-path exposure decay ==")
    step = 0.25
    xs = np.arange(-600.0, 600.0 + step / 2, step)
    standoffs = (4.0, 8.0, 16.0, 32.0)
    for beta in (1.5, 2.0, 3.0):
        model = PotentialModel(sources=np.array([[0.0, 0.0]]), beta=beta,
                               clamp_radius=1.0)
        sums = [path_exposure(model, [(x, d) for x in xs])
                for d in standoffs]
        slope = float(np.polyfit(np.log(standoffs), np.log(sums), 1)[0])
        print(f"beta {beta:g}: slope {slope:.4f} ideal {1.0 - beta:g} "
              f"|err| {abs(slope - (1.0 - beta)):.4f}")


def section_parity():
    print("== zone safety and reachability parity, n=1024 seed 5 ==")
    g = graph(1024, 5)
    cfg = UniformStreetConfig(epsilon=1 / 6, width=5.0)
    inside = 0
    skeletons = {}
    for name in ("simple", "complex"):
        zone = fixture_zone(name).zone
        for kind, sk in (("uniform", build_uniform_skeleton(g, zone, cfg)),
                         ("adaptive",
                          build_adaptive_skeleton(g, zone, width=5.0))):
            awake = sorted(sk.awake)
            inside += int(points_in_region(zone,
                                           g.field.positions[awake]).sum())
            skeletons[(name, kind)] = sk
    print("awake nodes inside zones:", inside)

    rng = np.random.default_rng(404)
    zone = fixture_zone("simple").zone
    active = frozenset(np.flatnonzero(
        ~zone_node_mask(zone, g.field.positions)).tolist())
    mismatches = 0
    for kind in ("uniform", "adaptive"):
        sk = skeletons[("simple", kind)]
        awake = sorted(sk.awake)
        for _ in range(200):
            a, b = (int(v) for v in rng.choice(awake, size=2, replace=False))
            on_sk = run_bfs_flood(g, sk.awake, a).value[b] != INF
            on_full = centralized_bfs(g, active, a)[b] != INF
            mismatches += on_sk != on_full
    print("reachability mismatches:", mismatches, "of 400")


def section_flood():
    print("== flood packet budget, 200 instances ==")
    rng = np.random.default_rng(0)
    start = time.perf_counter()
    worst_n = 0
    for k in range(200):
        n = 16384 if k == 0 else int(round(2.0 ** rng.uniform(6.0, 14.0)))
        worst_n = max(worst_n, n)
        g = build_comm_graph(generate_field(n, 3.0, k))
        if k % 3 == 0:
            active = frozenset(range(n))
        else:
            active = frozenset(np.flatnonzero(rng.random(n) < 0.6).tolist())
            if not active:
                active = frozenset({0})
        src = int(rng.choice(sorted(active)))
        run = run_bfs_flood(g, active, src)
        reached = sum(1 for v in range(n) if run.value[v] != INF)
        assert run.total_packets == reached
    print(f"largest n {worst_n}, elapsed {time.perf_counter() - start:.1f}s")


def section_oracles():
    print("== distributed vs centralized, 50 random subgraphs ==")
    rng = np.random.default_rng(1)
    bad = 0
    for k in range(50):
        n = int(rng.integers(64, 1025))
        g = graph(n, 5000 + k)
        keep = rng.random(n) < 0.75
        keep[0] = True
        active = frozenset(np.flatnonzero(keep).tolist())
        src = int(rng.choice(sorted(active)))
        bad += run_bfs_flood(g, active, src).value != \
            centralized_bfs(g, active, src)
        pot = rng.random(n).tolist()
        bad += run_min_exposure(g, active, src, pot).value != \
            centralized_min_exposure(g, active, src, pot)
    print("mismatching runs:", bad, "of 100")


SECTIONS = {
    "census": section_census,
    "grid": section_grid,
    "voronoi": section_voronoi,
    "quadtree": section_quadtree,
    "retire": section_retire,
    "attach": section_attach,
    "traces": section_traces,
    "sizes": section_sizes,
    "slope": section_slope,
    "stretch": section_stretch,
    "exposure": section_exposure,
    "decay": section_decay,
    "parity": section_parity,
    "flood": section_flood,
    "oracles": section_oracles,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--section", action="append", choices=sorted(SECTIONS),
                    help="run only the named section (repeatable)")
    args = ap.parse_args()
    for name in args.section or list(SECTIONS):
        SECTIONS[name]()
        print()


if __name__ == "__main__":
    main()
