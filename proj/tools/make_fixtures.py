#!/usr/bin/env python3
"""Writes the bundled cluster and hardware-profile fixtures into data/.

The default cluster has 1213 nodes (310 without GPUs), 107018 vCPUs and
6212 GPUs split per model as in the published GPU model table. The
mirrored cluster divides every node group by ten (rounded half up, at
least one node per GPU model) and drops the single irregular CPU node.
"""

import argparse
import csv
import pathlib
import random

CPU_MODEL = "Xeon ES-2682 V4"

PROFILES = [
    (CPU_MODEL, "cpu", 15, 120, 16),
    ("V100M16", "gpu", 30, 300, None),
    ("V100M32", "gpu", 30, 300, None),
    ("P100", "gpu", 25, 250, None),
    ("T4", "gpu", 10, 70, None),
    ("A10", "gpu", 30, 150, None),
    ("G2", "gpu", 30, 150, None),
    ("G3", "gpu", 50, 400, None),
]

GIB = 1024

# (group, gpu model, nodes, gpus per node, vcpus, memory GiB)
DEFAULT_GROUPS = [
    ("g2", "G2", 549, 8, 96, 384),
    ("g3", "G3", 39, 8, 128, 768),
    ("v16", "V100M16", 24, 8, 96, 384),
    ("v16s", "V100M16", 1, 3, 96, 384),
    ("v32", "V100M32", 25, 8, 96, 384),
    ("v32s", "V100M32", 1, 4, 96, 384),
    ("p100", "P100", 66, 4, 64, 256),
    ("p100s", "P100", 1, 1, 64, 256),
    ("t4w", "T4", 16, 8, 64, 256),
    ("t4", "T4", 178, 4, 64, 256),
    ("t4s", "T4", 1, 2, 64, 256),
    ("a10", "A10", 2, 1, 32, 128),
    ("cpu", "", 242, 0, 96, 384),
    ("cpus", "", 67, 0, 64, 256),
    ("cpux", "", 1, 0, 74, 256),
]

TOY = [
    ("toy-a", "G2", 8, 96, 384),
    ("toy-b", "G2", 8, 96, 384),
    ("toy-c", "T4", 4, 64, 256),
    ("toy-d", "P100", 4, 64, 256),
    ("toy-e", "G3", 8, 128, 768),
    ("toy-f", "", 0, 64, 256),
]


def expand(groups, seed):
    """Node ids are opaque ("node-0000", ...) and assigned in a seeded
    shuffled order, so id order carries no information about the model."""
    shapes = []
    for _prefix, model, count, gpus, vcpus, mem_gib in groups:
        shapes.extend([(CPU_MODEL, vcpus * 1000, mem_gib * GIB, model, gpus)] * count)
    random.Random(seed).shuffle(shapes)
    return [(f"node-{i:04d}",) + shape for i, shape in enumerate(shapes)]


def mirror(groups):
    out = []
    for prefix, model, count, gpus, vcpus, mem_gib in groups:
        if prefix == "cpux":
            continue
        scaled = int(count / 10 + 0.5)
        out.append([prefix, model, scaled, gpus, vcpus, mem_gib])
    for model in {g[1] for g in groups if g[1]}:
        if sum(g[2] for g in out if g[1] == model) == 0:
            widest = max((g for g in out if g[1] == model), key=lambda g: g[3])
            widest[2] = 1
    return [tuple(g) for g in out]


def write_cluster(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["node_id", "cpu_model", "cpu_milli", "memory_mib", "gpu_model", "gpu_count"])
        w.writerows(rows)


def summary(name, rows):
    gpus = {}
    for r in rows:
        if r[4]:
            gpus[r[4]] = gpus.get(r[4], 0) + r[5]
    print(f"{name}: {len(rows)} nodes, {sum(1 for r in rows if not r[4])} without GPUs, "
          f"{sum(r[2] for r in rows) // 1000} vCPUs, {sum(gpus.values())} GPUs {dict(sorted(gpus.items()))}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=pathlib.Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "profiles_default.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["model", "kind", "idle_w", "max_w", "ncores"])
        for model, kind, idle, peak, cores in PROFILES:
            w.writerow([model, kind, idle, peak, "" if cores is None else cores])

    default = expand(DEFAULT_GROUPS, seed=1213)
    assert len(default) == 1213
    assert sum(1 for r in default if not r[4]) == 310
    assert sum(r[2] for r in default) == 107018 * 1000
    assert sum(r[5] for r in default) == 6212
    write_cluster(out / "cluster_default.csv", default)
    summary("cluster_default", default)

    mirrored = expand(mirror(DEFAULT_GROUPS), seed=123)
    write_cluster(out / "cluster_mirror10.csv", mirrored)
    summary("cluster_mirror10", mirrored)

    toy = [(n, CPU_MODEL, v * 1000, m * GIB, g, c) for n, g, c, v, m in TOY]
    write_cluster(out / "cluster_toy.csv", toy)
    summary("cluster_toy", toy)


if __name__ == "__main__":
    main()
