"""Gaussian block random-matrix model whose expected block traces converge
to the center-valued trace of loops.

Each positively oriented edge e carries an (N M_{s(e)}) x (N M_{t(e)}) block
of iid complex Gaussians with E|entry|^2 = (mu(s) mu(t))^{-1/2} / (N M); the
opposite edge is the adjoint block.  The normalized trace divides by N M, so
tr(d_v) = M_v / M -> mu(v).  For a loop w based at v,

    E tr(d_v X_w)  ->  mu(v) phi_v(w)   (M, N -> infinity).

Sampling cost is dominated by drawing the Gaussian blocks, so the estimators
evaluate a whole batch of loops against each sampled model, and samples are
reproducible per (seed, sample index) regardless of thread count.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ._normals import normals
from .elements import Loop, LoopAlgebra
from .traces import _phi_word

MEMORY_CAP_ENTRIES = 3 * 10 ** 8


@dataclass(frozen=True)
class BlockModelSpec:
    alg: LoopAlgebra
    N: int
    M: int
    seed: int = 0
    M_v: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.M_v:
            mv = tuple(max(1, round(self.M * m)) for m in self.alg.pf.mu)
            object.__setattr__(self, "M_v", mv)
        total = sum((self.N * self.M_v[self.alg.g.src(e)]) *
                    (self.N * self.M_v[self.alg.g.tgt(e)])
                    for e in self.alg.g.positive_edges())
        if total > MEMORY_CAP_ENTRIES:
            raise MemoryError("block model exceeds the memory cap")

    def block_dim(self, v: int) -> int:
        return self.N * self.M_v[v]

    def entry_variance(self, e: int) -> float:
        g, pf = self.alg.g, self.alg.pf
        return ((pf.mu[g.src(e)] * pf.mu[g.tgt(e)]) ** -0.5) / (self.N * self.M)

    def tr_d(self, v: int) -> float:
        """Normalized trace of the vertex projection, M_v / M."""
        return self.M_v[v] / self.M


class SampledModel:
    """One draw of the edge blocks; negative edges are adjoints on demand.

    Blocks are complex64 (generation cost dominates the whole Monte Carlo
    and probe accuracy is far below the statistical error).  Entry streams
    are counter-based: block entries of sample i live at counter offset
    i * (total entries), so any sample is reproducible in isolation and
    resampling is independent of thread scheduling.  A reusable workspace
    dict avoids repeated large allocations across samples; blocks alias its
    buffers, so at most one model per workspace may be alive at a time.
    """

    def __init__(self, spec: BlockModelSpec, sample_index: int = 0,
                 workspace: dict | None = None):
        self.spec = spec
        g = spec.alg.g
        self.blocks: dict[int, np.ndarray] = {}
        stride = 2 * sum(spec.block_dim(g.src(e)) * spec.block_dim(g.tgt(e))
                         for e in g.positive_edges())
        counter = np.uint64(sample_index) * np.uint64(stride)
        for e in g.positive_edges():
            rows = spec.block_dim(g.src(e))
            cols = spec.block_dim(g.tgt(e))
            sd = math.sqrt(spec.entry_variance(e) / 2.0)
            n = 2 * rows * cols
            buf = None if workspace is None else workspace.get(("blk", e, n))
            if buf is None:
                buf = np.empty(n, dtype=np.float32)
                if workspace is not None:
                    workspace[("blk", e, n)] = buf
            normals(spec.seed, int(counter), n, out=buf)
            counter += np.uint64(n)
            block = buf.view(np.complex64).reshape(rows, cols)
            block *= np.float32(sd)
            self.blocks[e] = block
        # probe stream lives far above any block stream
        self._probe_seed = spec.seed ^ 0x5DEECE66D
        self._probe_counter = np.uint64(sample_index) * np.uint64(1 << 20)

    def apply_block(self, e: int, w: np.ndarray) -> np.ndarray:
        """X_e @ w without materializing adjoint copies."""
        if e in self.blocks:
            return self.blocks[e] @ w
        a = self.blocks[e ^ 1]
        return (w.conj().T @ a).conj().T

    def probe_matrix(self, dim: int, probes: int) -> np.ndarray:
        """Complex Rademacher probes drawn from the sample's own stream."""
        rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(
            entropy=self._probe_seed, spawn_key=(int(self._probe_counter),))))
        self._probe_counter += np.uint64(1)
        z = rng.integers(0, 4, size=(dim, probes))
        return np.exp(0.5j * np.pi * z).astype(np.complex64)

    def loop_trace(self, lp: Loop, probes: int = 8) -> float:
        """tr(d_v X_w) for this sample, normalized by 1/(N M).

        Length-2 loops of an edge and its opposite are summed exactly
        elementwise; longer words use an unbiased Hutchinson estimate driven
        by matrix-vector chains (an exact dense product at the acceptance
        sizes would need tens of teraflops).  Probe noise is part of the
        reported sampling error.
        """
        spec = self.spec
        norm = 1.0 / (spec.N * spec.M)
        if len(lp.edges) == 0:
            return spec.tr_d(lp.base)
        if len(lp.edges) == 2 and lp.edges[1] == (lp.edges[0] ^ 1):
            a = self.blocks.get(lp.edges[0], self.blocks.get(lp.edges[1]))
            flat = a.view(np.float32)
            return norm * float(np.einsum("ij,ij->", flat, flat,
                                          dtype=np.float64))
        dim = spec.block_dim(lp.base)
        z = self.probe_matrix(dim, probes)
        w = z
        for e in reversed(lp.edges):
            w = self.apply_block(e, w)
        vals = np.einsum("ij,ij->j", z.conj(), w)
        return norm * float(vals.mean().real)


def sample_model(spec: BlockModelSpec, sample_index: int = 0) -> SampledModel:
    return SampledModel(spec, sample_index)


@dataclass
class TraceEstimate:
    mean: float
    stderr: float
    samples: int
    target: float

    @property
    def abs_err(self) -> float:
        return abs(self.mean - self.target)


def loop_target(alg: LoopAlgebra, lp: Loop) -> float:
    """Limit value mu(v) phi_v(w) of the normalized block trace."""
    return alg.pf.mu[lp.base] * _phi_word(alg, lp.edges)


def estimate_traces(spec: BlockModelSpec, loops, samples: int,
                    probes: int = 8, threads: int = 1) -> list[TraceEstimate]:
    """Monte Carlo estimates for a batch of loops over shared samples.

    Sample i always uses the RNG stream spawned from (seed, i) and the
    reduction runs in index order, so results do not depend on the thread
    count.
    """
    loops = list(loops)
    local = threading.local()

    def one(i: int) -> list[float]:
        ws = getattr(local, "ws", None)
        if ws is None:
            ws = local.ws = {}
        model = SampledModel(spec, i, workspace=ws)
        return [model.loop_trace(lp, probes) for lp in loops]

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(samples)))
    else:
        rows = [one(i) for i in range(samples)]
    arr = np.asarray(rows)                     # samples x loops
    out = []
    for j, lp in enumerate(loops):
        col = arr[:, j]
        mean = float(col.mean())
        stderr = float(col.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        out.append(TraceEstimate(mean, stderr, samples, loop_target(spec.alg, lp)))
    return out


def estimate_trace(spec: BlockModelSpec, lp: Loop, samples: int,
                   probes: int = 8, threads: int = 1) -> TraceEstimate:
    return estimate_traces(spec, [lp], samples, probes, threads)[0]


class _SubModel:
    """Leading sub-blocks of a sampled model, rescaled to a smaller (N, M).

    The leading sub-block of an iid Gaussian block is again iid Gaussian, so
    after rescaling to the smaller size's variance this is a faithful draw.
    Sharing the underlying randomness across grid sizes costs nothing
    statistically (the rows are separate estimates) and avoids regenerating
    the dominant Gaussian entropy per size.
    """

    def __init__(self, parent: SampledModel, spec: BlockModelSpec):
        self.spec = spec
        g = spec.alg.g
        self.blocks = {}
        for e, big in parent.blocks.items():
            rows = spec.block_dim(g.src(e))
            cols = spec.block_dim(g.tgt(e))
            scale = math.sqrt(spec.entry_variance(e)
                              / parent.spec.entry_variance(e))
            self.blocks[e] = np.float32(scale) * big[:rows, :cols]
        self._probe_seed = parent._probe_seed
        self._probe_counter = parent._probe_counter + np.uint64((1 << 10) + spec.N)

    apply_block = SampledModel.apply_block
    probe_matrix = SampledModel.probe_matrix
    loop_trace = SampledModel.loop_trace


def convergence_sweep(alg: LoopAlgebra, loops, size_grid, samples: int,
                      seed: int = 0, probes: int = 4,
                      threads: int = 1) -> dict[Loop, list[dict]]:
    """Estimates across a grid of (N, M) sizes; one row list per loop.

    One Gaussian draw per sample index at the largest size; smaller sizes
    are evaluated on its rescaled leading sub-blocks.
    """
    loops = list(loops)
    grid = list(size_grid)
    big = max(grid, key=lambda nm: nm[0] * nm[1])
    specs = [BlockModelSpec(alg, n, m, seed) for (n, m) in grid]
    big_spec = BlockModelSpec(alg, *big, seed)
    local = threading.local()

    def one(i: int) -> list[list[float]]:
        ws = getattr(local, "ws", None)
        if ws is None:
            ws = local.ws = {}
        parent = SampledModel(big_spec, i, workspace=ws)
        out = []
        for spec, (n, m) in zip(specs, grid):
            model = parent if (n, m) == big else _SubModel(parent, spec)
            out.append([model.loop_trace(lp, probes) for lp in loops])
        return out

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            data = list(pool.map(one, range(samples)))
    else:
        data = [one(i) for i in range(samples)]
    arr = np.asarray(data)                     # samples x sizes x loops
    rows: dict[Loop, list[dict]] = {lp: [] for lp in loops}
    for si, (n, m) in enumerate(grid):
        for j, lp in enumerate(loops):
            col = arr[:, si, j]
            mean = float(col.mean())
            stderr = float(col.std(ddof=1) / math.sqrt(samples)) \
                if samples > 1 else 0.0
            rows[lp].append({
                "N": n, "M": m, "samples": samples, "seed": seed,
                "estimate": mean, "stderr": stderr,
                "target": loop_target(alg, lp),
                "abs_err": abs(mean - loop_target(alg, lp)),
            })
    return rows


def trend_non_increasing(rows: list[dict], slack_sigmas: float = 3.0) -> bool:
    """Bias-shrinking diagnostic: the last grid point must not be worse than
    the first beyond combined sampling noise."""
    if len(rows) < 2:
        return True
    first, last = rows[0], rows[-1]
    slack = slack_sigmas * (first["stderr"] + last["stderr"])
    return last["abs_err"] <= first["abs_err"] + slack
