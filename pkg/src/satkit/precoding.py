"""Multicast precoding: regularised-inverse design, SINR and sum-rate.

The precoder acts on the per-frame averaged channel and is uniformly
scaled so the binding per-feed power constraint is met with equality.
Noise is unit variance (folded into the channel by the scenario module).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .scenario import ChannelSet, ConfigurationError, UserSet

COND_LIMIT = 1e12


@dataclass(frozen=True)
class PrecodeMatrix:
    """N x K precoder with its power-cap metadata."""

    W: np.ndarray
    power_cap: float
    beta: float
    ill_conditioned: bool = False

    def feed_powers(self) -> np.ndarray:
        return np.einsum("nk,nk->n", self.W, self.W.conj()).real


@dataclass(frozen=True)
class FramePlan:
    """Per-beam grouping of user slots into multicast frames.

    ``frames[f][k]`` lists the user-slot indices of beam k served in
    frame f. Every slot appears in exactly one frame of its own beam.
    """

    frames: Tuple[Tuple[Tuple[int, ...], ...], ...]

    def __post_init__(self):
        if not self.frames:
            raise ConfigurationError("frame plan has no frames")
        n_beams = len(self.frames[0])
        for fr in self.frames:
            if len(fr) != n_beams:
                raise ConfigurationError("inconsistent beam count across frames")
            if any(len(g) == 0 for g in fr):
                raise ConfigurationError("empty frame group")
        for k in range(n_beams):
            seen = [i for fr in self.frames for i in fr[k]]
            if len(seen) != len(set(seen)):
                raise ConfigurationError("user slot repeated across frames")


@dataclass(frozen=True)
class GwPartition:
    """Feed/beam index blocks, one per gateway."""

    feed_blocks: Tuple[Tuple[int, ...], ...]
    beam_blocks: Tuple[Tuple[int, ...], ...]

    def validate(self, n_feeds: int, n_beams: int):
        feeds = sorted(i for b in self.feed_blocks for i in b)
        beams = sorted(i for b in self.beam_blocks for i in b)
        if feeds != list(range(n_feeds)) or beams != list(range(n_beams)):
            raise ConfigurationError("blocks must partition feeds and beams")
        if len(self.feed_blocks) != len(self.beam_blocks):
            raise ConfigurationError("feed and beam block counts differ")


def average_channel(channel_set: ChannelSet,
                    frame: Optional[Sequence[Sequence[int]]] = None) -> np.ndarray:
    """Per-frame averaged channel, the arithmetic mean over frame users.

    ``frame``, if given, lists per beam the user-slot indices in the
    frame; by default every slot participates.
    """
    h = channel_set.H
    if frame is None:
        return h.mean(axis=0)
    K = h.shape[1]
    if len(frame) != K:
        raise ConfigurationError("frame must list user groups for every beam")
    out = np.zeros(h.shape[1:], complex)
    for k, grp in enumerate(frame):
        if len(grp) == 0:
            raise ConfigurationError("empty frame group")
        out[k] = h[list(grp), k, :].mean(axis=0)
    return out


def enforce_per_feed(w_raw: np.ndarray, power_cap: float,
                     ill_conditioned: bool = False) -> PrecodeMatrix:
    """Uniformly scale a precoder so its largest feed power equals the cap."""
    if power_cap <= 0:
        raise ConfigurationError("power cap must be positive")
    feed_pow = np.einsum("nk,nk->n", w_raw, w_raw.conj()).real
    peak = feed_pow.max()
    if peak <= 0:
        raise ConfigurationError("zero precoder cannot be power-scaled")
    beta = float(np.sqrt(power_cap / peak))
    return PrecodeMatrix(W=beta * w_raw, power_cap=power_cap, beta=beta,
                         ill_conditioned=ill_conditioned)


def mmse_multicast(h_avg: np.ndarray, power_cap: float) -> PrecodeMatrix:
    """Regularised-inverse multicast precoder on the averaged channel.

    W_raw = (H^H H + I/P)^{-1} H^H, then uniform scaling to the per-feed
    cap. A conditioning guard adds light diagonal loading and flags the
    result when the regularised Gram matrix is numerically singular.
    """
    h_avg = np.asarray(h_avg, complex)
    if not np.isfinite(h_avg).all():
        raise ConfigurationError("non-finite channel entries")
    if power_cap <= 0:
        raise ConfigurationError("power cap must be positive")
    n = h_avg.shape[1]
    gram = h_avg.conj().T @ h_avg + np.eye(n) / power_cap
    ill = bool(np.linalg.cond(gram) > COND_LIMIT)
    if ill:
        gram = gram + 1e-12 * np.eye(n)
    w_raw = np.linalg.solve(gram, h_avg.conj().T)
    return enforce_per_feed(w_raw, power_cap, ill_conditioned=ill)


def identity_precoder(n_feeds: int, n_beams: int, power_cap: float) -> PrecodeMatrix:
    """Naive one-feed-per-beam baseline at the per-feed cap."""
    if n_feeds < n_beams:
        raise ConfigurationError("identity feeding needs N >= K")
    w = np.zeros((n_feeds, n_beams), complex)
    w[np.arange(n_beams), np.arange(n_beams)] = 1.0
    return enforce_per_feed(w, power_cap)


def sinr_all(channel_set: ChannelSet, precoder: PrecodeMatrix) -> np.ndarray:
    """Per-user, per-beam SINR table of shape (N_u, K), unit noise.

    Channel rows are the receive vectors h_k^[i],H, so the useful gain
    of precoder column j at beam-row k is simply [H^[i] W]_{kj}.
    """
    w = precoder.W
    gains = np.einsum("ikn,nj->ikj", channel_set.H, w)
    p = np.abs(gains) ** 2
    sig = np.einsum("ikk->ik", p).copy()
    interf = p.sum(axis=2) - sig
    return sig / (interf + 1.0)


def sum_rate(sinr_table: np.ndarray) -> Tuple[float, np.ndarray]:
    """Multicast sum rate and per-beam rates, min over frame users."""
    sinr_table = np.asarray(sinr_table, float)
    if (sinr_table < 0).any():
        raise ConfigurationError("negative SINR entries")
    per_beam = np.log2(1.0 + sinr_table.min(axis=0))
    return float(per_beam.sum()), per_beam


def check_p2_feasibility(channel_set: ChannelSet, precoder: PrecodeMatrix,
                         gamma_targets: np.ndarray):
    """Report SINR-target and per-feed power violations (checker only)."""
    gamma = np.asarray(gamma_targets, float)
    table = sinr_all(channel_set, precoder)
    bad_sinr = [(k, i, float(table[i, k]))
                for i in range(table.shape[0])
                for k in range(table.shape[1])
                if table[i, k] < gamma[k]]
    fp = precoder.feed_powers()
    bad_feeds = [(n, float(fp[n])) for n in range(len(fp))
                 if fp[n] > precoder.power_cap * (1 + 1e-9)]
    return {"feasible": not bad_sinr and not bad_feeds,
            "sinr_violations": bad_sinr, "feed_violations": bad_feeds}


def block_diag_assemble(partition: GwPartition,
                        blocks: Sequence[np.ndarray],
                        power_cap: float) -> PrecodeMatrix:
    """Assemble per-gateway precoder blocks into one N x K matrix.

    Entries outside the diagonal blocks are zero; the per-feed constraint
    is re-enforced globally.
    """
    n = sum(len(b) for b in partition.feed_blocks)
    k = sum(len(b) for b in partition.beam_blocks)
    partition.validate(n, k)
    w = np.zeros((n, k), complex)
    for fb, bb, blk in zip(partition.feed_blocks, partition.beam_blocks, blocks):
        blk = np.asarray(blk, complex)
        if blk.shape != (len(fb), len(bb)):
            raise ConfigurationError("block shape mismatch")
        w[np.ix_(fb, bb)] = blk
    return enforce_per_feed(w, power_cap)


def multi_gateway_mmse(channel_set: ChannelSet, partition: GwPartition,
                       power_cap: float) -> PrecodeMatrix:
    """Block-diagonal precoder: per-gateway regularised inverse on its block."""
    h_avg = average_channel(channel_set)
    partition.validate(h_avg.shape[1], h_avg.shape[0])
    blocks = []
    for fb, bb in zip(partition.feed_blocks, partition.beam_blocks):
        sub = h_avg[np.ix_(list(bb), list(fb))]
        blocks.append(mmse_multicast(sub, power_cap).W)
    return block_diag_assemble(partition, blocks, power_cap)


def geographic_scheduler(user_set: UserSet, frame_size: int) -> FramePlan:
    """Group each beam's users into frames of ``frame_size`` by proximity.

    Greedy nearest-neighbour clustering seeded at the unserved user
    closest to the beam centroid; ties broken by lowest user index.
    """
    K, nu = user_set.n_beams, user_set.users_per_beam
    if nu % frame_size != 0:
        raise ConfigurationError("users per beam must be a multiple of frame size")
    n_frames = nu // frame_size
    groups = [[] for _ in range(K)]
    for k in range(K):
        pos = user_set.positions[k]
        centroid = pos.mean(axis=0)
        left = list(range(nu))
        for _ in range(n_frames):
            d0 = np.linalg.norm(pos[left] - centroid, axis=1)
            seed_user = left[int(np.argmin(np.round(d0, 12)))]
            grp = [seed_user]
            left.remove(seed_user)
            while len(grp) < frame_size:
                d = np.linalg.norm(pos[left] - pos[seed_user], axis=1)
                nxt = left[int(np.argmin(np.round(d, 12)))]
                grp.append(nxt)
                left.remove(nxt)
            groups[k].append(tuple(sorted(grp)))
    frames = tuple(tuple(groups[k][f] for k in range(K)) for f in range(n_frames))
    return FramePlan(frames=frames)


def benchmark_mmse(channel_set: ChannelSet, power_cap: float,
                   n_rep: int = 3) -> dict:
    """Sum rate plus wall-clock cost of the precoder computation."""
    h_avg = average_channel(channel_set)
    t0 = time.perf_counter()
    for _ in range(n_rep):
        pre = mmse_multicast(h_avg, power_cap)
    dt = (time.perf_counter() - t0) / n_rep
    sr, _ = sum_rate(sinr_all(channel_set, pre))
    return {"sum_rate": sr, "cpu_ms": dt * 1e3,
            "sr_per_beam": sr / h_avg.shape[0]}
