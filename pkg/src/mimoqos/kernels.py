"""Monte Carlo hot kernels: numba-compiled loops with a pure-numpy fallback.

Every kernel is a pure function of pre-drawn random arrays, so results are
reproducible per backend and the two backends agree to floating-point
round-off (exactly, for the integer-valued queue kernel).  The backend is
picked at import time: set ``MIMOQOS_NUMBA=0`` to force the numpy path; it is
also used automatically when numba is not installed.  ``benchmarks/
bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import math
import os

import numpy as np

_RANK_TOL = 1e-10
_NORM_TOL = 1e-12

_flag = os.environ.get("MIMOQOS_NUMBA", "1").strip().lower()
_requested = _flag not in ("0", "false", "no", "off")
try:
    if not _requested:
        raise ImportError
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):  # decorator stub so the loop source stays importable
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def backend() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


# ---------------------------------------------------------------------------
# numba path: per-trial loops (compiled lazily on first call)
# ---------------------------------------------------------------------------

@njit(cache=False)
def _zf_beams_and_sinr(Q, h1, inv_gamma):
    """Beams orthogonal to the other users' quantized rows of Q; SINR of user 0.

    Returns (sinr, ok); ok is False when a null space degenerates (rank below
    n_t - 1) and the trial must be redrawn.
    """
    n_t = Q.shape[0]
    A = np.empty((n_t - 1, n_t), dtype=np.complex128)
    sig = 0.0
    interf = 0.0
    for k in range(n_t):
        r = 0
        for u in range(n_t):
            if u == k:
                continue
            for i in range(n_t):
                A[r, i] = np.conj(Q[u, i])
            r += 1
        _, s, vh = np.linalg.svd(A)
        if s[n_t - 2] < _RANK_TOL * s[0]:
            return 0.0, False
        acc = 0.0 + 0.0j
        for i in range(n_t):
            acc += np.conj(h1[i]) * np.conj(vh[n_t - 1, i])
        power = acc.real * acc.real + acc.imag * acc.imag
        if k == 0:
            sig = power
        else:
            interf += power
    denom = inv_gamma + interf
    if denom <= 0.0 or not math.isfinite(sig / denom):
        return 0.0, False
    return sig / denom, True


@njit(cache=False)
def _sinr_direct_loop(chan, cb, inv_gamma):
    """Explicit-codebook trials: quantize each user's channel direction against
    its own codebook, zero-force on the quantized rows, evaluate user 0."""
    T, n_t, _ = chan.shape
    M = cb.shape[2]
    out = np.empty(T)
    degen = np.zeros(T, dtype=np.bool_)
    Q = np.empty((n_t, n_t), dtype=np.complex128)
    hdir = np.empty(n_t, dtype=np.complex128)
    for t in range(T):
        ok = True
        for k in range(n_t):
            hn = 0.0
            for i in range(n_t):
                v = chan[t, k, i]
                hn += v.real * v.real + v.imag * v.imag
            hn = math.sqrt(hn)
            if hn < _NORM_TOL:
                ok = False
                break
            for i in range(n_t):
                hdir[i] = chan[t, k, i] / hn
            best = -1.0
            bi = 0
            for j in range(M):
                num = 0.0 + 0.0j
                cn = 0.0
                for i in range(n_t):
                    c = cb[t, k, j, i]
                    num += np.conj(c) * hdir[i]
                    cn += c.real * c.real + c.imag * c.imag
                if cn < _NORM_TOL * _NORM_TOL:
                    continue
                v = (num.real * num.real + num.imag * num.imag) / cn
                if v > best:
                    best = v
                    bi = j
            if best < 0.0:
                ok = False
                break
            cn = 0.0
            for i in range(n_t):
                c = cb[t, k, bi, i]
                cn += c.real * c.real + c.imag * c.imag
            cn = math.sqrt(cn)
            for i in range(n_t):
                Q[k, i] = cb[t, k, bi, i] / cn
        if not ok:
            out[t] = 0.0
            degen[t] = True
            continue
        rho, ok = _zf_beams_and_sinr(Q, chan[t, 0], inv_gamma)
        out[t] = rho
        degen[t] = not ok
    return out, degen


@njit(cache=False)
def _sinr_angular_loop(h1, u01, gperp, others, m_size, inv_gamma):
    """Quantization-angle trials: the selected codeword equals
    cos(theta) * hdir + sin(theta) * e with sin^2(theta) the maximum of
    2^b i.i.d. Beta(1, n_t - 1) variables (inverse transform on u01) and e
    isotropic orthogonal to hdir; other users' quantized rows are isotropic."""
    T, n_t = h1.shape
    out = np.empty(T)
    degen = np.zeros(T, dtype=np.bool_)
    Q = np.empty((n_t, n_t), dtype=np.complex128)
    hdir = np.empty(n_t, dtype=np.complex128)
    e = np.empty(n_t, dtype=np.complex128)
    for t in range(T):
        hn = 0.0
        for i in range(n_t):
            v = h1[t, i]
            hn += v.real * v.real + v.imag * v.imag
        hn = math.sqrt(hn)
        if hn < _NORM_TOL or u01[t] <= 0.0:
            out[t] = 0.0
            degen[t] = True
            continue
        for i in range(n_t):
            hdir[i] = h1[t, i] / hn
        sin2 = (-math.expm1(math.log(u01[t]) / m_size)) ** (1.0 / (n_t - 1))
        if sin2 > 1.0:
            sin2 = 1.0
        proj = 0.0 + 0.0j
        for i in range(n_t):
            proj += np.conj(hdir[i]) * gperp[t, i]
        en = 0.0
        for i in range(n_t):
            e[i] = gperp[t, i] - proj * hdir[i]
            en += e[i].real * e[i].real + e[i].imag * e[i].imag
        en = math.sqrt(en)
        ok = en >= _NORM_TOL
        if ok:
            c = math.sqrt(1.0 - sin2)
            s = math.sqrt(sin2)
            for i in range(n_t):
                Q[0, i] = c * hdir[i] + s * e[i] / en
            for k in range(1, n_t):
                on = 0.0
                for i in range(n_t):
                    v = others[t, k - 1, i]
                    on += v.real * v.real + v.imag * v.imag
                on = math.sqrt(on)
                if on < _NORM_TOL:
                    ok = False
                    break
                for i in range(n_t):
                    Q[k, i] = others[t, k - 1, i] / on
        if not ok:
            out[t] = 0.0
            degen[t] = True
            continue
        rho, ok = _zf_beams_and_sinr(Q, h1[t], inv_gamma)
        out[t] = rho
        degen[t] = not ok
    return out, degen


# ---------------------------------------------------------------------------
# numpy path: vectorized over trials
# ---------------------------------------------------------------------------

def _null_vectors_numpy(Q):
    """Last right-singular vectors (conjugated) of each user's complementary
    matrix, plus a mask of rank-deficient trials."""
    T, n_t, _ = Q.shape
    W = np.empty_like(Q)
    bad = np.zeros(T, dtype=bool)
    for k in range(n_t):
        comp = [u for u in range(n_t) if u != k]
        A = Q[:, comp, :].conj()
        _, s, vh = np.linalg.svd(A)
        bad |= s[:, -1] < _RANK_TOL * s[:, 0]
        W[:, k, :] = vh[:, -1, :].conj()
    return W, bad


def _sinr_from_beams_numpy(W, h1, inv_gamma, bad):
    sig = np.abs(np.einsum("ti,ti->t", h1.conj(), W[:, 0, :])) ** 2
    interf = np.zeros(len(h1))
    for u in range(1, W.shape[1]):
        interf += np.abs(np.einsum("ti,ti->t", h1.conj(), W[:, u, :])) ** 2
    denom = inv_gamma + interf
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = sig / denom
    degen = bad | ~np.isfinite(rho)
    rho = np.where(degen, 0.0, rho)
    return rho, degen


def sinr_direct_numpy(chan, cb, inv_gamma):
    T, n_t, _ = chan.shape
    norms = np.linalg.norm(chan, axis=2)
    bad = (norms < _NORM_TOL).any(axis=1)
    hdir = chan / np.where(norms[:, :, None] == 0, 1.0, norms[:, :, None])
    cnorm = np.linalg.norm(cb, axis=3, keepdims=True)
    chat = cb / np.where(cnorm == 0, 1.0, cnorm)
    inner = np.abs(np.einsum("tkmi,tki->tkm", chat, hdir.conj())) ** 2
    idx = np.argmax(inner, axis=2)
    tt = np.arange(T)[:, None]
    kk = np.arange(n_t)[None, :]
    Q = chat[tt, kk, idx, :]
    W, rank_bad = _null_vectors_numpy(Q)
    return _sinr_from_beams_numpy(W, chan[:, 0, :], inv_gamma, bad | rank_bad)


def sinr_angular_numpy(h1, u01, gperp, others, m_size, inv_gamma):
    T, n_t = h1.shape
    hn = np.linalg.norm(h1, axis=1)
    bad = (hn < _NORM_TOL) | (u01 <= 0.0)
    hdir = h1 / np.where(hn[:, None] == 0, 1.0, hn[:, None])
    with np.errstate(divide="ignore"):
        sin2 = np.minimum((-np.expm1(np.log(u01) / m_size)) ** (1.0 / (n_t - 1)), 1.0)
    proj = np.einsum("ti,ti->t", hdir.conj(), gperp)
    e = gperp - proj[:, None] * hdir
    en = np.linalg.norm(e, axis=1)
    bad |= en < _NORM_TOL
    e = e / np.where(en[:, None] == 0, 1.0, en[:, None])
    Q = np.empty((T, n_t, n_t), dtype=complex)
    Q[:, 0, :] = np.sqrt(1.0 - sin2)[:, None] * hdir + np.sqrt(sin2)[:, None] * e
    on = np.linalg.norm(others, axis=2)
    bad |= (on < _NORM_TOL).any(axis=1)
    Q[:, 1:, :] = others / np.where(on[:, :, None] == 0, 1.0, on[:, :, None])
    W, rank_bad = _null_vectors_numpy(Q)
    return _sinr_from_beams_numpy(W, h1, inv_gamma, bad | rank_bad)


# ---------------------------------------------------------------------------
# slot-based queue: identical source for both backends
# ---------------------------------------------------------------------------

def _queue_run_py(arrivals, cap, slot, d_max):
    """FIFO deadline queue over `horizon` slots.

    Packets are timestamped at the start of their arrival slot; before service
    the head of line is dropped while its waiting time strictly exceeds d_max;
    then up to cap[m] packets leave.  Returns (dropped, served, nonempty_slots,
    serving_slots, total_arrivals).
    """
    horizon = arrivals.shape[0]
    total = 0
    for m in range(horizon):
        total += arrivals[m]
    arr_slot = np.empty(total, dtype=np.int64)
    pos = 0
    for m in range(horizon):
        for _ in range(arrivals[m]):
            arr_slot[pos] = m
            pos += 1
    head = 0
    arrived = 0
    dropped = 0
    served = 0
    nonempty = 0
    busy = 0
    for m in range(horizon):
        arrived += arrivals[m]
        if arrived > head:
            nonempty += 1
        while head < arrived and (m - arr_slot[head]) * slot > d_max:
            head += 1
            dropped += 1
        s = cap[m]
        avail = arrived - head
        if s > avail:
            s = avail
        if s > 0:
            busy += 1
        head += s
        served += s
    return dropped, served, nonempty, busy, total


queue_run_python = _queue_run_py
queue_run_numba = njit(cache=False)(_queue_run_py) if NUMBA_ENABLED else None
sinr_direct_numba = _sinr_direct_loop if NUMBA_ENABLED else None
sinr_angular_numba = _sinr_angular_loop if NUMBA_ENABLED else None


def sinr_direct(chan, cb, inv_gamma):
    if NUMBA_ENABLED:
        return _sinr_direct_loop(chan, cb, inv_gamma)
    return sinr_direct_numpy(chan, cb, inv_gamma)


def sinr_angular(h1, u01, gperp, others, m_size, inv_gamma):
    if NUMBA_ENABLED:
        return _sinr_angular_loop(h1, u01, gperp, others, m_size, inv_gamma)
    return sinr_angular_numpy(h1, u01, gperp, others, m_size, inv_gamma)


def queue_run(arrivals, cap, slot, d_max):
    if NUMBA_ENABLED:
        return queue_run_numba(arrivals, cap, slot, d_max)
    return _queue_run_py(arrivals, cap, slot, d_max)
