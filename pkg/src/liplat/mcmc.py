"""Markov chain samplers for the height measure.

The workhorse is single-site heat bath: the conditional at a vertex is a
distribution on at most three odd values around the neighbour envelope, with
probabilities proportional to c^{#matching neighbours}, computed exactly. On
bipartite patches with a scalar weight and interval conditions the sweep
vectorizes over the two colour classes (sites within a class have independent
conditionals, so a class-wide block update is still exact heat bath). A
cluster move redraws the per-component signs of h, which cuts through the
sign barrier when c is large.

Each chain owns a counter-based generator: stream k of master seed s is
Philox keyed by (s, k), so parallel fan-out is reproducible by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coupling import omega_from, resample_signs, sample_bernoulli
from .heights import BoundaryCondition, Model, extremal_extensions
from .lattice import LatticePatch, Torus, bipartition, build_patch

_FREE_LO = -(2 ** 60)
_FREE_HI = 2 ** 60
_PAD_VALUE = 2 ** 62


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for (seed, stream), counter-based."""
    return np.random.Generator(np.random.Philox(key=np.array(
        [seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)))


@dataclass
class SamplerConfig:
    sweeps: int = 1000
    burnin: int | None = None           # None = 100 * n
    thin: int = 1
    cluster_period: int | None = None   # None = pick from c; 0 = never
    seed: int = 0
    site_order: str = "auto"            # auto | checkerboard | fixed | shuffled
    keep_series: bool = False
    debug_validate: bool = False

    def __post_init__(self):
        if self.thin < 1:
            raise ValueError("thinning must be >= 1")
        if self.sweeps < 0 or (self.burnin is not None and self.burnin < 0):
            raise ValueError("counts must be nonnegative")


@dataclass
class ChainState:
    h: np.ndarray
    B: np.ndarray
    omega: np.ndarray
    t: int
    rng: np.random.Generator


def site_conditional(model: Model, bc: BoundaryCondition, h, x: int):
    """Exact heat-bath conditional at x given its neighbours.

    Returns [(value, probability)] with exact fractions when the model is
    rational. This is the reference the samplers must agree with.
    """
    g = model.graph
    h = np.asarray(h)
    nbrs = g.adj[x]
    if not nbrs:
        raise ValueError("isolated vertex has no conditional")
    mmax = max(int(h[y]) for y, _ in nbrs)
    mmin = min(int(h[y]) for y, _ in nbrs)
    lo, hi = mmax - 2, mmin + 2
    cand = [k for k in range(lo, hi + 1, 2)]
    if x in bc.values:
        cand = [k for k in cand if k in bc.values[x]]
    if not cand:
        raise ValueError(f"empty conditional at vertex {x}: corrupted state")
    exact = model.c_exact is not None
    weights = []
    for k in cand:
        w = Fraction(1) if exact else 1.0
        for y, eid in nbrs:
            if h[y] == k:
                w *= model.c_exact[eid] if exact else model.c[eid]
        weights.append(w)
    tot = sum(weights)
    return [(k, w / tot) for k, w in zip(cand, weights)]


class Sampler:
    """Prebuilt update machinery for one (model, condition) pair."""

    def __init__(self, model: Model, bc: BoundaryCondition, config: SamplerConfig):
        self.model = model
        self.bc = bc
        self.config = config
        g = model.graph
        self.edges = g.edge_array()
        self.p_open = 1.0 - 1.0 / model.c
        if config.cluster_period is None:
            self.cluster_period = 1 if float(model.c.min()) > 2 else 4
        else:
            self.cluster_period = config.cluster_period

        mode = config.site_order
        self._blocks = None
        if mode in ("auto", "checkerboard"):
            blocks = self._build_blocks()
            if blocks is not None:
                self._blocks = blocks
            elif mode == "checkerboard":
                raise ValueError(
                    "checkerboard needs a bipartite graph, scalar weight, "
                    "and interval conditions")
        self.mode = "checkerboard" if self._blocks is not None else (
            "fixed" if mode in ("auto", "fixed", "checkerboard") else "shuffled")

    # -- vectorized class blocks ------------------------------------------

    def _build_blocks(self):
        g = self.model.graph
        if not self.model.is_uniform or not self.bc.is_interval:
            return None
        if isinstance(self.model.domain, LatticePatch) and self.model.domain.parts is not None:
            parts = self.model.domain.parts
        else:
            parts = bipartition(g)
        if parts is None:
            return None
        lo = np.full(g.n, _FREE_LO, dtype=np.int64)
        hi = np.full(g.n, _FREE_HI, dtype=np.int64)
        for v in self.bc.support:
            lo[v] = self.bc.lo(v)
            hi[v] = self.bc.hi(v)
        dmax = max(g.degree(v) for v in range(g.n))
        blocks = []
        for p in (0, 1):
            idx = np.flatnonzero(parts == p)
            nbr = np.full((len(idx), dmax), g.n, dtype=np.int64)
            for r, v in enumerate(idx):
                for s, (w, _) in enumerate(g.adj[v]):
                    nbr[r, s] = w
            blocks.append((idx, nbr, lo[idx], hi[idx]))
        return blocks

    def _class_pass(self, state: ChainState, block):
        idx, nbr, lo, hi = block
        hx = np.append(state.h, _PAD_VALUE)
        hn = hx[nbr]
        real = nbr < len(state.h)
        mmax = np.where(real, hn, _FREE_LO).max(axis=1)
        mmin = np.where(real, hn, _FREE_HI).min(axis=1)
        k0 = np.maximum(mmax - 2, lo)
        k2 = np.minimum(mmin + 2, hi)
        if not (k0 <= k2).all():
            raise ValueError("empty conditional in class pass: corrupted state")
        c = float(self.model.c[0])
        w = np.empty((len(idx), 3))
        for j in range(3):
            kc = k0 + 2 * j
            counts = ((hn == kc[:, None]) & real).sum(axis=1)
            w[:, j] = np.where(kc <= k2, c ** counts, 0.0)
        tot = w.sum(axis=1)
        r = state.rng.random(len(idx)) * tot
        pick = (r > w[:, 0]).astype(np.int64) + (r > w[:, 0] + w[:, 1])
        state.h[idx] = k0 + 2 * pick

    # -- scalar path -------------------------------------------------------

    def _site_pass_scalar(self, state: ChainState, order):
        for x in order:
            heat_bath_site(self, state, x)

    # -- public moves ------------------------------------------------------

    def init_state(self, stream: int = 0) -> ChainState:
        h_min, _ = extremal_extensions(self.model.graph, self.bc)
        rng = rng_stream(self.config.seed, stream)
        h = h_min.copy()
        B = sample_bernoulli(self.model, rng)
        om = omega_from(h, B, self.edges)
        return ChainState(h=h, B=B, omega=om, t=0, rng=rng)

    def sweep(self, state: ChainState) -> ChainState:
        """Site pass, then a fresh coin layer, then the derived edges."""
        if self.cluster_period and (state.t + 1) % self.cluster_period == 0:
            self.cluster_move(state)
        if self.mode == "checkerboard":
            for block in self._blocks:
                self._class_pass(state, block)
        elif self.mode == "shuffled":
            self._site_pass_scalar(state, state.rng.permutation(self.model.graph.n))
        else:
            self._site_pass_scalar(state, range(self.model.graph.n))
        state.B = sample_bernoulli(self.model, state.rng)
        state.omega = omega_from(state.h, state.B, self.edges)
        state.t += 1
        if self.config.debug_validate:
            self._validate(state)
        return state

    def cluster_move(self, state: ChainState) -> ChainState:
        """Redraw per-cluster signs; |h| is untouched.

        Uses a throwaway coin layer for the clusters, so the state's own
        (B, omega) pair stays product-distributed after the following
        refresh in sweep().
        """
        B_tmp = sample_bernoulli(self.model, state.rng)
        om_tmp = omega_from(state.h, B_tmp, self.edges)
        state.h = resample_signs(self.model.graph, state.h, om_tmp, self.bc, state.rng)
        return state

    def _validate(self, state: ChainState):
        from .heights import satisfies_bc, validate_height

        assert validate_height(self.model.graph, state.h)
        assert satisfies_bc(state.h, self.bc)
        assert np.array_equal(state.omega, omega_from(state.h, state.B, self.edges))


def heat_bath_site(sampler: Sampler, state: ChainState, x: int):
    """Resample one site from its exact conditional; updates incident edges."""
    dist = site_conditional(sampler.model, sampler.bc, state.h, x)
    if len(dist) == 1:
        k = dist[0][0]
    else:
        r = state.rng.random()
        acc = 0.0
        k = dist[-1][0]
        for val, p in dist:
            acc += float(p)
            if r < acc:
                k = val
                break
    state.h[x] = k
    eids = [eid for _, eid in sampler.model.graph.adj[x]]
    state.omega[eids] = omega_from(state.h, state.B[eids], sampler.edges[eids])
    return state


# ---------------------------------------------------------------------------
# sample collection


@dataclass
class ObservableStat:
    mean: float
    var: float
    se: float
    n: int


@dataclass
class RunResult:
    stats: dict
    nsweeps: int
    config: SamplerConfig
    series: dict = field(default_factory=dict)

    def dump(self) -> str:
        lines = []
        for name in sorted(self.stats):
            s = self.stats[name]
            lines.append(f"{name} mean={s.mean:.10g} var={s.var:.10g} "
                         f"se={s.se:.10g} n={s.n}")
        return "\n".join(lines) + "\n"


def batch_se(series) -> float:
    """Standard error by nonoverlapping batch means."""
    xs = np.asarray(series, dtype=float)
    M = len(xs)
    if M < 2:
        return math.inf
    if M < 16:
        return float(xs.std(ddof=1) / math.sqrt(M))
    K = min(32, M // 4)
    b = M // K
    means = xs[: K * b].reshape(K, b).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(K))


def run(model: Model, bc: BoundaryCondition, config: SamplerConfig,
        observables: dict, stream: int = 0) -> RunResult:
    """Drive one chain and collect thinned observable series.

    Observables are pure functions (h, B, omega) -> float. The chain starts
    from the minimal extension, discards the burn-in, then records every
    thin-th sweep.
    """
    if config.sweeps <= 0:
        raise ValueError("no sweeps after burn-in: nothing to sample")
    sampler = Sampler(model, bc, config)
    state = sampler.init_state(stream)
    burnin = 100 * model.graph.n if config.burnin is None else config.burnin
    for _ in range(burnin):
        sampler.sweep(state)
    series = {name: [] for name in observables}
    for t in range(config.sweeps):
        sampler.sweep(state)
        if t % config.thin == 0:
            for name, fn in observables.items():
                series[name].append(fn(state.h, state.B, state.omega))
    stats = {}
    for name, xs in series.items():
        arr = np.asarray(xs, dtype=float)
        stats[name] = ObservableStat(
            mean=float(arr.mean()),
            var=float(arr.var(ddof=1)) if len(arr) > 1 else 0.0,
            se=batch_se(arr),
            n=len(arr),
        )
    out = RunResult(stats=stats, nsweeps=config.sweeps, config=config)
    if config.keep_series:
        out.series = {k: np.asarray(v) for k, v in series.items()}
    return out


def torus_run(kind: str, N: int, c, config: SamplerConfig,
              observables: dict, root: int | None = None) -> RunResult:
    """Sampler on the N-torus with only a root vertex pinned to {-1, 1}."""
    patch = build_patch(kind, Torus(N))
    if root is None:
        root = patch.vertex_at((0, 0))
    bc = BoundaryCondition({root: (-1, 1)})
    return run(Model(patch, c), bc, config, observables)
