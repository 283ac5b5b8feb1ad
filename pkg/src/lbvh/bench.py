"""Benchmark and verification harness over the synthetic clouds.

Reproduces the experiment design: m source points indexed, n target points
queried (n = m by default), k fixed to 10 for nearest search, and the
spatial radius calibrated so a filled cube yields k neighbors on average.
Timings are wall-clock medians over repetitions, with one warm-up repetition
discarded. Comparative numbers against other libraries are out of scope;
only absolute figures are reported.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .datasets import CloudSpec, default_radius, generate
from .oracle import brute_knn_batch, brute_radius_sets
from .traversal import query_knn, query_spatial_1p, query_spatial_2p
from .tree import Bvh, build

__all__ = [
    "BenchConfig",
    "BenchReport",
    "VerifyResult",
    "CSV_HEADER",
    "SCALE_CSV_HEADER",
    "run_bench",
    "run_scale",
    "run_verify",
]

CSV_HEADER = ("m,n,kind,alloc,sort,threads,seed,build_ms,query_ms,rate_qps,"
              "min_cnt,mean_cnt,max_cnt,fallback")
SCALE_CSV_HEADER = CSV_HEADER + ",build_speedup,query_speedup"

VERIFY_LIMIT = 100_000  # brute-force oracle cost guard


@dataclass
class BenchConfig:
    """One benchmark run: cloud pair, query batch shape, execution knobs."""

    source: str = "cube:filled"
    target: str = "sphere:filled"
    m: int = 10_000
    n: int | None = None
    k: int = 10
    radius: float | None = None
    kind: str = "spatial"
    alloc: str | None = None
    buffer_size: int | None = None
    sort_queries: bool = True
    threads: int = 1
    seed: int = 0
    reps: int = 5

    def validate(self) -> "BenchConfig":
        if self.m < 1 or self.query_count < 1:
            raise ValueError("m and n must be >= 1")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.kind not in ("spatial", "knn"):
            raise ValueError(f"kind must be 'spatial' or 'knn', got {self.kind!r}")
        CloudSpec.parse(self.source, self.m, self.seed)
        CloudSpec.parse(self.target, self.query_count, self.seed + 1)
        if self.kind == "spatial":
            alloc = self.alloc or "2p"
            if alloc not in ("1p", "2p"):
                raise ValueError(f"alloc must be '1p' or '2p', got {self.alloc!r}")
            if alloc == "1p" and self.buffer_size is None:
                raise ValueError("--buffer-size is required with --alloc 1p")
            if alloc == "2p" and self.buffer_size is not None:
                raise ValueError("--buffer-size is only valid with --alloc 1p")
            if self.buffer_size is not None and self.buffer_size < 1:
                raise ValueError("buffer_size must be >= 1")
        else:
            if self.alloc is not None:
                raise ValueError("--alloc does not apply to --kind knn")
            if self.buffer_size is not None:
                raise ValueError("--buffer-size does not apply to --kind knn")
        return self

    @property
    def query_count(self) -> int:
        return self.n if self.n is not None else self.m

    @property
    def effective_radius(self) -> float:
        return self.radius if self.radius is not None else default_radius(self.k)

    @property
    def effective_alloc(self) -> str:
        if self.kind == "knn":
            return "-"
        return self.alloc or "2p"

    def source_spec(self) -> CloudSpec:
        return CloudSpec.parse(self.source, self.m, self.seed)

    def target_spec(self) -> CloudSpec:
        # target cloud uses an offset seed so source and target differ
        return CloudSpec.parse(self.target, self.query_count, self.seed + 1)


@dataclass
class BenchReport:
    """Timings (seconds), throughput, and result-count statistics."""

    config: BenchConfig
    gen_times: list[float]
    build_times: list[float]
    query_times: list[float]
    min_cnt: int
    mean_cnt: float
    max_cnt: int
    fallback: bool

    @property
    def gen_median(self) -> float:
        return statistics.median(self.gen_times)

    @property
    def build_median(self) -> float:
        return statistics.median(self.build_times)

    @property
    def query_median(self) -> float:
        return statistics.median(self.query_times)

    @property
    def rate_qps(self) -> float:
        return self.config.query_count / self.query_median

    def csv_row(self) -> str:
        c = self.config
        return (f"{c.m},{c.query_count},{c.kind},{c.effective_alloc},"
                f"{'on' if c.sort_queries else 'off'},{c.threads},{c.seed},"
                f"{self.build_median * 1e3:.3f},{self.query_median * 1e3:.3f},"
                f"{self.rate_qps:.1f},{self.min_cnt},{self.mean_cnt:.3f},"
                f"{self.max_cnt},{int(self.fallback)}")

    def pretty(self) -> str:
        c = self.config
        lines = [
            f"source {c.source} m={c.m}   target {c.target} n={c.query_count}",
            f"kind={c.kind} alloc={c.effective_alloc} sort={'on' if c.sort_queries else 'off'} "
            f"threads={c.threads} seed={c.seed} reps={c.reps}",
            f"generate: {self.gen_median * 1e3:9.3f} ms",
            f"build:    {self.build_median * 1e3:9.3f} ms",
            f"query:    {self.query_median * 1e3:9.3f} ms  ({self.rate_qps:.0f} queries/s)",
            f"counts:   min={self.min_cnt} mean={self.mean_cnt:.3f} max={self.max_cnt}",
            f"fallback: {'yes' if self.fallback else 'no'}",
        ]
        return "\n".join(lines)


def _run_queries(cfg: BenchConfig, tree: Bvh, targets: np.ndarray):
    if cfg.kind == "knn":
        return query_knn(tree, (targets, cfg.k), cfg.sort_queries, cfg.threads), False
    batch = (targets, cfg.effective_radius)
    if cfg.effective_alloc == "1p":
        return query_spatial_1p(tree, batch, cfg.buffer_size,
                                cfg.sort_queries, cfg.threads)
    return query_spatial_2p(tree, batch, cfg.sort_queries, cfg.threads), False


def run_bench(cfg: BenchConfig, warmup: bool = True) -> BenchReport:
    """Generate clouds, build, query; report median wall times over reps."""
    cfg.validate()
    t0 = time.perf_counter()
    source = generate(cfg.source_spec())
    targets = generate(cfg.target_spec())
    gen_times = [time.perf_counter() - t0]

    if warmup:  # discard one repetition: JIT warm-up, cache priming
        tree = build(source, threads=cfg.threads)
        _run_queries(cfg, tree, targets)

    build_times = []
    query_times = []
    result = None
    fallback = False
    for _ in range(cfg.reps):
        t0 = time.perf_counter()
        tree = build(source, threads=cfg.threads)
        build_times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        result, fallback = _run_queries(cfg, tree, targets)
        query_times.append(time.perf_counter() - t0)

    counts = result.counts()
    return BenchReport(
        config=cfg,
        gen_times=gen_times,
        build_times=build_times,
        query_times=query_times,
        min_cnt=int(counts.min()) if counts.size else 0,
        mean_cnt=float(counts.mean()) if counts.size else 0.0,
        max_cnt=int(counts.max()) if counts.size else 0,
        fallback=bool(fallback),
    )


def run_scale(cfg: BenchConfig, thread_list: list[int]) -> list[tuple[BenchReport, float, float]]:
    """Run the same config once per thread count (identical seeds).

    Returns (report, build_speedup, query_speedup) per entry, speedups
    normalized to the first row.
    """
    if not thread_list or any(t < 1 for t in thread_list):
        raise ValueError("thread list must contain positive integers")
    rows = []
    base_build = base_query = None
    for t in thread_list:
        report = run_bench(BenchConfig(**{**cfg.__dict__, "threads": t}))
        if base_build is None:
            base_build = report.build_median
            base_query = report.query_median
        rows.append((report, base_build / report.build_median,
                     base_query / report.query_median))
    return rows


@dataclass
class VerifyResult:
    """Outcome of an oracle comparison: queries checked and mismatch details."""

    total: int
    mismatches: int
    diffs: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


def _corrupt(tree: Bvh) -> Bvh:
    # test hook: shrink internal boxes toward their centroids so traversal
    # provably misses hits that brute force finds
    node_mins = tree.node_mins.copy()
    node_maxs = tree.node_maxs.copy()
    internal = tree.internal_count
    mid = (node_mins[:internal] + node_maxs[:internal]) * np.float32(0.5)
    node_mins[:internal] = mid
    node_maxs[:internal] = mid
    return Bvh(node_mins, node_maxs, tree.left, tree.right, tree.leaf_obj,
               tree.scene_min, tree.scene_max)


def run_verify(cfg: BenchConfig, corrupt_tree: bool = False,
               max_diffs: int = 5) -> VerifyResult:
    """Compare library results against the brute-force oracle.

    Spatial: per-query hit sets must be exactly equal. Nearest: distance
    lists must agree within 1e-6 relative, and indices must agree wherever
    the oracle distance is untied.
    """
    cfg.validate()
    if cfg.m > VERIFY_LIMIT or cfg.query_count > VERIFY_LIMIT:
        raise ValueError(f"verify is limited to m, n <= {VERIFY_LIMIT} (oracle cost)")
    source = generate(cfg.source_spec())
    targets = generate(cfg.target_spec())
    tree = build(source, threads=cfg.threads)
    if corrupt_tree:
        tree = _corrupt(tree)
    result, _ = _run_queries(cfg, tree, targets)

    mismatches = 0
    diffs: list[str] = []

    def record(q: int, message: str) -> None:
        nonlocal mismatches
        mismatches += 1
        if len(diffs) < max_diffs:
            diffs.append(f"query {q}: {message}")

    if cfg.kind == "spatial":
        expected = brute_radius_sets(source, targets, cfg.effective_radius)
        for q in range(result.query_count):
            got = np.sort(result.hits(q))
            want = expected[q]
            if got.shape != want.shape or not np.array_equal(got, want):
                record(q, f"expected {want.tolist()[:8]}..., got {got.tolist()[:8]}...")
    else:
        want_idx, want_dist = brute_knn_batch(source, targets, cfg.k)
        for q in range(result.query_count):
            got_idx = result.hits(q)
            got_dist = result.hit_distances(q)
            wi = want_idx[q]
            wd = want_dist[q]
            if got_idx.shape[0] != wi.shape[0]:
                record(q, f"expected {wi.shape[0]} results, got {got_idx.shape[0]}")
                continue
            if not np.allclose(got_dist, wd, rtol=1e-6, atol=0.0):
                record(q, f"distance lists differ: {wd[:4]} vs {got_dist[:4]}")
                continue
            tied = np.zeros(wd.shape[0], dtype=bool)
            tied[1:] |= wd[1:] == wd[:-1]
            tied[:-1] |= wd[:-1] == wd[1:]
            if not np.array_equal(got_idx[~tied], wi[~tied]):
                record(q, f"untied indices differ: {wi.tolist()} vs {got_idx.tolist()}")
    return VerifyResult(result.query_count, mismatches, diffs)
