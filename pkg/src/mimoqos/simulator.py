"""Monte Carlo MU-MIMO link simulation and slot-based deadline queue.

Each trial draws fresh channels and fresh random codebooks per user, quantizes
the channel directions, builds zero-forcing beams from the quantized rows, and
evaluates the SINR of user 1.  Two exchangeable samplers exist:

``direct``   the literal procedure above, cost O(2^b) per trial;
``angular``  an exact reformulation drawing the quantization angle directly
             (its squared sine is the maximum of 2^b i.i.d. Beta(1, n_t-1)
             variables) and the residual direction isotropically, cost O(1)
             in b.  The two produce identical distributions; ``auto`` picks
             ``direct`` up to 2^10 codewords and ``angular`` beyond.

Randomness comes from numpy ``SeedSequence`` substreams per batch, so results
are reproducible bit-for-bit for a given seed, config and kernel backend, and
independent of batch execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .amc import ModulationTable
from .traffic import TrafficSpec

_SAMPLERS = ("auto", "direct", "angular")
_RHO_VARIANTS = ("nonempty_slots", "serving_slots")
_DIRECT_MAX_CODEWORDS = 1024
_MAX_REDRAW_ROUNDS = 1000


class DegenerateChannelError(ValueError):
    """Input vectors too degenerate to define beams (zero or rank-collapsed)."""


@dataclass(frozen=True)
class LinkConfig:
    """One Monte Carlo link operating point.

    gamma (linear transmit SNR) may be math.inf for interference-limited
    sampling, or omitted when total power p and noise sigma2 are given.
    """

    n_t: int
    b: int
    trials: int
    seed: int
    gamma: float | None = None
    p: float | None = None
    sigma2: float = 1.0
    sampler: str = "auto"
    codebook_file: str | None = None

    def __post_init__(self):
        if self.n_t < 2:
            raise ValueError("n_t must be >= 2")
        if not (isinstance(self.b, int) and self.b >= 0):
            raise ValueError("b must be a nonnegative integer")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.gamma is None:
            if self.p is None:
                raise ValueError("provide gamma or p")
            object.__setattr__(self, "gamma", self.p / (self.n_t * self.sigma2))
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0 (math.inf is allowed)")
        if self.sampler not in _SAMPLERS:
            raise ValueError(f"sampler must be one of {_SAMPLERS}")

    @property
    def inv_gamma(self) -> float:
        return 0.0 if math.isinf(self.gamma) else 1.0 / self.gamma

    def resolved_sampler(self) -> str:
        if self.codebook_file is not None:
            return "fixed"
        if self.sampler != "auto":
            return self.sampler
        return "direct" if 2 ** self.b <= _DIRECT_MAX_CODEWORDS else "angular"


@dataclass(frozen=True)
class QueueSimConfig:
    """Slot-based FIFO queue fed by Poisson arrivals and served by the
    per-slot adaptive-modulation rate of the simulated link."""

    slot: float
    horizon: int
    spec: TrafficSpec
    link: LinkConfig
    table: ModulationTable
    rho_hat_variant: str = "nonempty_slots"

    def __post_init__(self):
        if not self.slot > 0:
            raise ValueError("slot must be > 0")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.rho_hat_variant not in _RHO_VARIANTS:
            raise ValueError(f"rho_hat_variant must be one of {_RHO_VARIANTS}")


@dataclass(frozen=True)
class QueueStats:
    dropped_fraction: float
    rho_hat_est: float
    mode_histogram: tuple[float, ...]
    arrived: int
    served: int
    dropped: int
    queued_end: int


def draw_channels(cfg: LinkConfig, rng: np.random.Generator) -> np.ndarray:
    """n_t channel rows of length n_t, i.i.d. CN(0,1) entries."""
    return _complex_normal(rng, (cfg.n_t, cfg.n_t))


def random_codebook(n_t: int, b: int, rng: np.random.Generator) -> np.ndarray:
    """2^b isotropic unit codewords of dimension n_t (one row each)."""
    cb = _complex_normal(rng, (2 ** b, n_t))
    return cb / np.linalg.norm(cb, axis=1, keepdims=True)


def quantize(h: np.ndarray, codebook: np.ndarray) -> int:
    """Index of the codeword with the largest squared inner product with the
    channel direction; ties resolve to the smallest index."""
    h = np.asarray(h, dtype=complex)
    norm = np.linalg.norm(h)
    if norm < 1e-12:
        raise DegenerateChannelError("zero channel vector")
    gains = np.abs(np.asarray(codebook, dtype=complex) @ h.conj()) ** 2 / norm**2
    return int(np.argmax(gains))


def zfbf_beams(quantized: np.ndarray) -> np.ndarray:
    """Unit beams, each orthogonal to all other users' quantized rows.

    With a one-dimensional null space the beam is unique up to phase.  When
    degenerate codewords leave extra dimensions, the direction maximizing the
    own quantized gain |q_k^H w_k| is chosen (the normalized projection of q_k
    onto the null space), falling back to the first basis vector when that
    projection vanishes.
    """
    Q = np.asarray(quantized, dtype=complex)
    n_t = Q.shape[0]
    if Q.shape != (n_t, n_t):
        raise ValueError("expected a square matrix of quantized rows")
    if (np.linalg.norm(Q, axis=1) < 1e-12).any():
        raise DegenerateChannelError("zero quantized vector")
    W = np.empty_like(Q)
    for k in range(n_t):
        comp = [u for u in range(n_t) if u != k]
        A = Q[comp, :].conj()
        _, s, vh = np.linalg.svd(A)
        if s[0] < 1e-12:
            raise DegenerateChannelError("complementary matrix has rank zero")
        rank = int(np.sum(s > 1e-10 * s[0]))
        basis = vh[rank:].conj()
        if len(basis) == 1:
            w = basis[0]
        else:
            coeff = basis.conj() @ Q[k]
            proj = coeff @ basis
            norm = np.linalg.norm(proj)
            w = proj / norm if norm > 1e-12 else basis[0]
        W[k] = w / np.linalg.norm(w)
    return W


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _direct_batch(rng, n, n_t, m_size, inv_gamma):
    chan = _complex_normal(rng, (n, n_t, n_t))
    cb = _complex_normal(rng, (n, n_t, m_size, n_t))
    return kernels.sinr_direct(chan, cb, inv_gamma)


def _angular_batch(rng, n, n_t, m_size, inv_gamma):
    h1 = _complex_normal(rng, (n, n_t))
    u01 = rng.random(n)
    gperp = _complex_normal(rng, (n, n_t))
    others = _complex_normal(rng, (n, n_t - 1, n_t))
    return kernels.sinr_angular(h1, u01, gperp, others, float(m_size), inv_gamma)


def _fixed_batch(rng, n, n_t, codebook, inv_gamma):
    chan = _complex_normal(rng, (n, n_t, n_t))
    norms = np.linalg.norm(chan, axis=2)
    bad = (norms < 1e-12).any(axis=1)
    hdir = chan / np.where(norms[:, :, None] == 0, 1.0, norms[:, :, None])
    inner = np.abs(np.einsum("mi,tki->tkm", codebook.conj(), hdir)) ** 2
    idx = np.argmax(inner, axis=2)
    Q = codebook[idx, :]
    W, rank_bad = kernels._null_vectors_numpy(Q)
    return kernels._sinr_from_beams_numpy(W, chan[:, 0, :], inv_gamma, bad | rank_bad)


def _batch_size(sampler, n_t, m_size):
    if sampler == "angular":
        return 65536
    per_trial = 16 * n_t * m_size * n_t  # codebook bytes dominate
    return int(max(64, min(65536, (48 << 20) // per_trial)))


def _sample_sinr(link: LinkConfig, trials: int, seq: np.random.SeedSequence):
    """trials SINR values plus the redraw count, reproducible per (seed, config,
    kernel backend); degenerate trials are redrawn from the same batch stream."""
    sampler = link.resolved_sampler()
    n_t, m_size, inv_gamma = link.n_t, 2 ** link.b, link.inv_gamma
    codebook = None
    if sampler == "fixed":
        codebook = load_codebook(link.codebook_file, n_t)

    def run(rng, n):
        if sampler == "direct":
            return _direct_batch(rng, n, n_t, m_size, inv_gamma)
        if sampler == "angular":
            return _angular_batch(rng, n, n_t, m_size, inv_gamma)
        return _fixed_batch(rng, n, n_t, codebook, inv_gamma)

    size = _batch_size(sampler, n_t, m_size)
    n_batches = (trials + size - 1) // size
    children = np.random.SeedSequence(seq.entropy, spawn_key=seq.spawn_key).spawn(
        n_batches
    )
    out = np.empty(trials)
    redraws = 0
    for i in range(n_batches):
        lo = i * size
        n = min(size, trials - lo)
        rng = np.random.Generator(np.random.PCG64(children[i]))
        vals, degen = run(rng, n)
        rounds = 0
        while degen.any():
            idx = np.nonzero(degen)[0]
            redraws += len(idx)
            sub, sub_degen = run(rng, len(idx))
            vals[idx] = sub
            nxt = np.zeros(n, dtype=bool)
            nxt[idx[sub_degen]] = True
            degen = nxt
            rounds += 1
            if rounds > _MAX_REDRAW_ROUNDS:
                raise RuntimeError("persistent degenerate trials; check the config")
        out[lo:lo + n] = vals
    return out, redraws


def empirical_sinr(cfg: LinkConfig) -> np.ndarray:
    """SINR sample of user 1 over cfg.trials independent slots."""
    samples, _ = _sample_sinr(cfg, cfg.trials, np.random.SeedSequence(cfg.seed))
    return samples


def empirical_sinr_detailed(cfg: LinkConfig) -> tuple[np.ndarray, int]:
    """Like empirical_sinr but also reports how many degenerate trials were redrawn."""
    return _sample_sinr(cfg, cfg.trials, np.random.SeedSequence(cfg.seed))


def simulate_queue(cfg: QueueSimConfig) -> QueueStats:
    """Run the slotted deadline queue.

    Per slot: Poisson(lambda * slot) packets arrive timestamped at the slot
    start; one SINR draw selects the modulation level; head-of-line packets
    whose waiting time exceeds d_max are dropped before up to
    floor(rate * slot / packet_bits) packets are served FIFO.
    """
    root = np.random.SeedSequence(cfg.link.seed)
    arr_seq, sinr_seq = root.spawn(2)
    sinr, _ = _sample_sinr(cfg.link, cfg.horizon, sinr_seq)

    inner = np.asarray(cfg.table.thresholds[1:-1])
    modes = np.searchsorted(inner, sinr, side="right").astype(np.int64)
    bits = np.array([0] + [m.bits_per_symbol for m in cfg.table.modes], dtype=float)
    # +1e-9 guards the floor against roundoff when rate*slot/packet_bits is integral
    cap = np.floor(
        bits[modes] * cfg.table.symbol_rate * cfg.slot / cfg.spec.packet_bits + 1e-9
    ).astype(np.int64)

    arr_rng = np.random.Generator(np.random.PCG64(arr_seq))
    arrivals = arr_rng.poisson(cfg.spec.arrival_rate * cfg.slot, cfg.horizon).astype(
        np.int64
    )
    dropped, served, nonempty, busy, total = kernels.queue_run(
        arrivals, cap, cfg.slot, cfg.spec.d_max
    )
    hist = np.bincount(modes, minlength=cfg.table.num_levels) / cfg.horizon
    rho = (nonempty if cfg.rho_hat_variant == "nonempty_slots" else busy) / cfg.horizon
    return QueueStats(
        dropped_fraction=dropped / total if total else 0.0,
        rho_hat_est=rho,
        mode_histogram=tuple(hist),
        arrived=int(total),
        served=int(served),
        dropped=int(dropped),
        queued_end=int(total - served - dropped),
    )


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance between a sample and a cdf."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = len(s)
    if n == 0:
        raise ValueError("empty sample")
    F = np.asarray([cdf(x) for x in s])
    d_plus = np.max(np.arange(1, n + 1) / n - F)
    d_minus = np.max(F - np.arange(0, n) / n)
    return float(max(d_plus, d_minus))


def dump_samples(path, samples) -> None:
    """One SINR value per line, decimal text."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in samples:
            fh.write(f"{float(v)!r}\n")


def load_codebook(path, n_t: int | None = None) -> np.ndarray:
    """Fixed codebook from a .npy file of shape (2^b, n_t); rows are normalized."""
    cb = np.asarray(np.load(path), dtype=complex)
    if cb.ndim != 2:
        raise ValueError("codebook must be a 2-D array of row vectors")
    if n_t is not None and cb.shape[1] != n_t:
        raise ValueError(f"codebook dimension {cb.shape[1]} != n_t {n_t}")
    norms = np.linalg.norm(cb, axis=1, keepdims=True)
    if (norms < 1e-12).any():
        raise ValueError("codebook contains a zero vector")
    return cb / norms
