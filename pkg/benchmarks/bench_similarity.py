"""Compare the compiled similarity kernel against the pure-Python fallback.

Run from the repository root:

    python3 benchmarks/bench_similarity.py
    python3 benchmarks/bench_similarity.py --pairs 20000 --max-words 10
"""

import argparse
import random
import statistics
import time

from labelforge._backend import available_backends, get_kernel
from labelforge.clustering import cluster_section
from labelforge.similarity import SimilarityParams
from labelforge.synthetic import random_sentences, random_word_lists, shared_prefix_pool


def make_pairs(seed, n_pairs, max_words):
    rng = random.Random(seed)
    pool = shared_prefix_pool(rng, n_stems=18)
    return [
        (
            random_word_lists(rng, pool, 1, max_words),
            random_word_lists(rng, pool, 1, max_words),
        )
        for _ in range(n_pairs)
    ]


def bench_kernel(kernel, pairs, tau, delta, repeats):
    """Median wall time per repeat for each kernel entry point."""
    timings = {}
    for name, fn in (
        ("dice", lambda a, b: kernel.dice(a[0], a[1], b[0], b[1])),
        ("lcf_score", lambda a, b: kernel.lcf_score(a[0], a[1], b[0], b[1], tau, delta)),
        ("lcf_align", lambda a, b: kernel.lcf_align(a[0], a[1], b[0], b[1], tau, delta)),
        ("pair_combined", lambda a, b: kernel.pair_combined(a[0], a[1], b[0], b[1], tau, delta)),
    ):
        runs = []
        for _ in range(repeats):
            start = time.perf_counter()
            for a, b in pairs:
                fn(a, b)
            runs.append(time.perf_counter() - start)
        timings[name] = statistics.median(runs)
    return timings


def bench_clustering(kernel_name, seed, max_sentences, repeats):
    """Cluster one random corpus end to end with the given backend.

    cluster_section reads the module-level kernel, so swap it in place for
    the duration of the run.
    """
    import labelforge.clustering as clustering

    sentences = random_sentences(seed=seed, max_sentences=max_sentences)
    params = SimilarityParams(tau=0.75, delta=0.1, gamma=0.7)
    saved = clustering.kernel
    clustering.kernel = get_kernel(kernel_name)
    try:
        runs = []
        for _ in range(repeats):
            start = time.perf_counter()
            clusters = cluster_section(sentences, params)
            runs.append(time.perf_counter() - start)
    finally:
        clustering.kernel = saved
    return len(sentences), len(clusters), statistics.median(runs)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=10_000)
    parser.add_argument("--max-words", type=int, default=8)
    parser.add_argument("--sentences", type=int, default=150)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--tau", type=float, default=0.75)
    parser.add_argument("--delta", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    if "c" not in backends:
        print("compiled kernel missing; timing only the python fallback")

    pairs = make_pairs(args.seed, args.pairs, args.max_words)
    results = {
        name: bench_kernel(get_kernel(name), pairs, args.tau, args.delta, args.repeats)
        for name in backends
    }

    ops = sorted(next(iter(results.values())))
    print(f"\npair kernel, {args.pairs} pairs per repeat, median of {args.repeats}:")
    header = f"{'operation':<16}" + "".join(f"{name:>12}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for op in ops:
        row = f"{op:<16}"
        for name in backends:
            row += f"{results[name][op] * 1e3:>10.1f}ms"
        if len(backends) == 2:
            row += f"{results['python'][op] / results['c'][op]:>9.1f}x"
        print(row)

    print(f"\ncomplete-linkage clustering, median of {args.repeats}:")
    for name in backends:
        n_sent, n_clusters, elapsed = bench_clustering(
            name, args.seed, args.sentences, args.repeats
        )
        print(
            f"{name:>8}: {n_sent} sentences -> {n_clusters} clusters "
            f"in {elapsed * 1e3:.1f}ms"
        )


if __name__ == "__main__":
    main()
