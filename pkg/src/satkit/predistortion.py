"""Onboard signal predistortion chain: jitter, SPD, cubic HPA, LS fits.

The amplifier is a memoryless third-order Volterra model y = a*r +
b*|r|^2*r whose drive is clipped at the AM/AM peak r_sat; output
back-off (OBO) is defined against that peak. The SPD is a third-order
polynomial fitted by direct-learning gradient descent; a LUT path
offers a quantised implementation.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.signal import butter, lfilter

from .scenario import ConfigurationError


class FitError(RuntimeError):
    """Raised when a model fit is ill-posed or diverges."""


@dataclass(frozen=True)
class HpaParams:
    """Cubic amplifier coefficients y = alpha*r + beta*|r|^2*r."""

    alpha: complex = 1.0
    beta: complex = -0.15 + 0.05j

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ConfigurationError("amplifier coefficients must be finite")

    @property
    def r_sat(self) -> float:
        """Input amplitude of the AM/AM maximum (inf for a linear device).

        |y(r)|^2 = r^2*(|a|^2 + 2*Re(conj(a)*b)*r^2 + |b|^2*r^4); its first
        interior stationary point solves a quadratic in r^2.
        """
        a2 = abs(self.alpha) ** 2
        b2 = abs(self.beta) ** 2
        cross = (np.conj(self.alpha) * self.beta).real
        if b2 == 0:
            return np.inf
        disc = 4 * cross ** 2 - 3 * a2 * b2
        if cross >= 0 or disc < 0:
            return np.inf
        u = (-2 * cross - np.sqrt(disc)) / (3 * b2)
        return float(np.sqrt(u))

    @property
    def p_sat(self) -> float:
        """Saturated output power |y(r_sat)|^2."""
        rs = self.r_sat
        if not np.isfinite(rs):
            raise ConfigurationError("linear amplifier has no saturation point")
        return float(abs(self.alpha * rs + self.beta * rs ** 3) ** 2)


def hpa_apply(params: HpaParams, r: np.ndarray) -> np.ndarray:
    """Amplifier response; drive magnitude is clipped at r_sat."""
    r = np.asarray(r, complex)
    rs = params.r_sat
    if np.isfinite(rs):
        m = np.abs(r)
        r = np.where(m > rs, r * (rs / np.maximum(m, 1e-300)), r)
    return params.alpha * r + params.beta * np.abs(r) ** 2 * r


def fit_hpa(x_in: np.ndarray, y_out: np.ndarray) -> HpaParams:
    """Linear least squares on the regressors [r, |r|^2 r].

    Requires amplitude diversity in the input: a constant-modulus drive
    makes the regressors collinear and the fit is rejected.
    """
    x_in = np.asarray(x_in, complex).ravel()
    y_out = np.asarray(y_out, complex).ravel()
    if x_in.shape != y_out.shape or x_in.size < 2:
        raise ConfigurationError("need matching input/output sample vectors")
    reg = np.stack([x_in, np.abs(x_in) ** 2 * x_in], axis=1)
    sv = np.linalg.svd(reg, compute_uv=False)
    if sv[0] == 0 or sv[1] / sv[0] < 1e-10:
        raise FitError("constant-envelope input: regressors are collinear")
    coef, *_ = np.linalg.lstsq(reg, y_out, rcond=None)
    return HpaParams(alpha=complex(coef[0]), beta=complex(coef[1]))


def spectral_derivative(x: np.ndarray) -> np.ndarray:
    """Derivative of a band-limited waveform via its FFT (unit sample period)."""
    x = np.asarray(x, complex)
    w = 2j * np.pi * np.fft.fftfreq(x.size)
    return np.fft.ifft(w * np.fft.fft(x))


def jitter_sample(x: np.ndarray, sigma_j: float, rng: np.random.Generator,
                  noise_std: float = 0.0) -> np.ndarray:
    """First-order sampling-jitter model x + e*x_dot (+ additive noise).

    ``sigma_j`` is the jitter standard deviation as a fraction of the
    sample period of the oversampled waveform.
    """
    if sigma_j < 0 or noise_std < 0:
        raise ConfigurationError("jitter and noise levels must be >= 0")
    x = np.asarray(x, complex)
    out = x
    if sigma_j > 0:
        out = out + rng.normal(0.0, sigma_j, x.size) * spectral_derivative(x)
    if noise_std > 0:
        out = out + noise_std / np.sqrt(2) * (rng.standard_normal(x.size)
                                              + 1j * rng.standard_normal(x.size))
    return out


@dataclass(frozen=True)
class SpdParams:
    """Predistorter r = gamma*x + delta*|x|^2*x, with an optional LUT."""

    gamma: complex
    delta: complex
    lut: Optional[np.ndarray] = None      # rows: (bin_lo, bin_hi, gain complex)

    def gain(self, magnitude) -> np.ndarray:
        return self.gamma + self.delta * np.asarray(magnitude) ** 2


def spd_apply(params: SpdParams, x: np.ndarray,
              clip_at: Optional[float] = None) -> np.ndarray:
    """Polynomial predistortion, optionally clamped at an output magnitude."""
    x = np.asarray(x, complex)
    r = params.gamma * x + params.delta * np.abs(x) ** 2 * x
    if clip_at is not None:
        m = np.abs(r)
        r = np.where(m > clip_at, r * (clip_at / np.maximum(m, 1e-300)), r)
    return r


def build_lut(params: SpdParams, dynamic_range: float, n_bins: int) -> SpdParams:
    """Quantise the SPD gain over [0, dynamic_range] input magnitudes."""
    if dynamic_range <= 0 or n_bins < 1:
        raise ConfigurationError("dynamic range and bin count must be positive")
    edges = np.linspace(0.0, dynamic_range, n_bins + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    lut = np.stack([edges[:-1], edges[1:], params.gain(mid)], axis=1)
    return replace(params, lut=lut)


def spd_apply_lut(params: SpdParams, x: np.ndarray) -> np.ndarray:
    """LUT predistortion path: per-magnitude-bin complex gain."""
    if params.lut is None:
        raise ConfigurationError("SpdParams carries no LUT")
    x = np.asarray(x, complex)
    edges = params.lut[:, 0].real
    idx = np.clip(np.searchsorted(edges, np.abs(x), side="right") - 1,
                  0, len(edges) - 1)
    return params.lut[idx, 2] * x


def fit_spd(hpa: HpaParams, training_waveform: np.ndarray,
            sigma_j: float = 0.0, noise_std: float = 0.0,
            n_iter: int = 300, step: float = 0.3,
            rng: Optional[np.random.Generator] = None,
            target_gain: Optional[complex] = None):
    """Direct-learning gradient descent for the SPD coefficients.

    Minimises the mean squared error between the amplifier output and a
    linear response ``target_gain * input`` over the training waveform,
    observed through the jitter/noise sampling model when ``sigma_j`` or
    ``noise_std`` is nonzero (jitter-cognizant training). Returns the
    fitted parameters and the per-iteration MSE trace.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    x = np.asarray(training_waveform, complex)
    if sigma_j > 0 or noise_std > 0:
        x = jitter_sample(x, sigma_j, rng, noise_std)
    a, b, rs = hpa.alpha, hpa.beta, hpa.r_sat
    tgt = a if target_gain is None else target_gain
    g, d = 1.0 / a, 0.0 + 0.0j
    p2 = np.mean(np.abs(x) ** 2)
    p6 = np.mean(np.abs(x) ** 6)
    if p2 == 0:
        raise ConfigurationError("training waveform is all zero")
    trace = []
    x2x = np.abs(x) ** 2 * x
    for _ in range(n_iter):
        u = g * x + d * x2x
        y = hpa_apply(hpa, u)
        e = y - tgt * x
        mse = float(np.mean(np.abs(e) ** 2))
        trace.append(mse)
        if mse > 10.0 * trace[0] or not np.isfinite(mse):
            raise FitError("gradient descent diverged; reduce the step size")
        dy_du = a + 2 * b * np.abs(u) ** 2
        dy_duc = b * u ** 2
        mask = np.abs(u) <= rs if np.isfinite(rs) else 1.0
        gg = np.mean((e * np.conj(dy_du * x)
                      + np.conj(e) * dy_duc * np.conj(x)) * mask) / p2
        gd = np.mean((e * np.conj(dy_du * x2x)
                      + np.conj(e) * dy_duc * np.conj(x2x)) * mask) / (p6 + 1e-300)
        g -= step * gg
        d -= step * gd
    return SpdParams(gamma=complex(g), delta=complex(d)), np.array(trace)


@dataclass(frozen=True)
class FilterSpec:
    """IIR low-pass (Butterworth) channel filter specification."""

    order: int = 4
    cutoff: float = 0.14          # fraction of Nyquist

    def coefficients(self):
        return butter(self.order, self.cutoff)

    def apply(self, x: np.ndarray) -> np.ndarray:
        b, a = self.coefficients()
        return lfilter(b, a, np.asarray(x, complex))


@dataclass(frozen=True)
class ChainConfig:
    """End-to-end transponder chain settings."""

    spd_location: str = "none"            # onboard | onground | none
    sigma_j: float = 0.005
    imux: Optional[FilterSpec] = FilterSpec(order=4, cutoff=0.13)
    omux: Optional[FilterSpec] = FilterSpec(order=4, cutoff=0.30)
    modulation: str = "qpsk"              # qpsk | 16apsk
    rolloff: float = 0.25
    oversampling: int = 8
    span: int = 8
    snr_db: float = 40.0
    drive: float = 1.0
    n_train_symbols: int = 1500
    train_seed: int = 10_007
    jitter_aware: bool = True
    eq_taps: int = 11
    fit_iters: int = 300
    fit_step: float = 0.3

    def __post_init__(self):
        if self.spd_location not in ("onboard", "onground", "none"):
            raise ConfigurationError("unknown spd_location")
        if self.modulation not in ("qpsk", "16apsk"):
            raise ConfigurationError("unknown modulation")
        if self.drive <= 0 or self.oversampling < 2:
            raise ConfigurationError("bad drive or oversampling")


@dataclass(frozen=True)
class ChainResult:
    sinr_db: float
    obo_db: float


def rrc_taps(rolloff: float, span: int, oversampling: int) -> np.ndarray:
    """Unit-energy root-raised-cosine pulse."""
    t = np.arange(-span * oversampling, span * oversampling + 1) / oversampling
    h = np.empty_like(t)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            h[i] = 1 - rolloff + 4 * rolloff / np.pi
        elif abs(abs(ti) - 1 / (4 * rolloff)) < 1e-9:
            h[i] = (rolloff / np.sqrt(2)) * (
                (1 + 2 / np.pi) * np.sin(np.pi / (4 * rolloff))
                + (1 - 2 / np.pi) * np.cos(np.pi / (4 * rolloff)))
        else:
            h[i] = ((np.sin(np.pi * ti * (1 - rolloff))
                     + 4 * rolloff * ti * np.cos(np.pi * ti * (1 + rolloff)))
                    / (np.pi * ti * (1 - (4 * rolloff * ti) ** 2)))
    return h / np.sqrt(np.sum(h ** 2))


def _constellation(kind: str) -> np.ndarray:
    if kind == "qpsk":
        pts = (np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])) / np.sqrt(2)
        return pts
    # 16APSK 4+12, DVB-S2 radius ratio 3.15 for rate 3/4-ish operation
    r2 = 3.15
    inner = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))
    outer = r2 * np.exp(1j * (np.pi / 12 + np.pi / 6 * np.arange(12)))
    pts = np.concatenate([inner, outer])
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


def _draw_symbols(kind: str, rng: np.random.Generator, n: int) -> np.ndarray:
    pts = _constellation(kind)
    return pts[rng.integers(len(pts), size=n)]


def _shape(symbols: np.ndarray, taps: np.ndarray, oversampling: int) -> np.ndarray:
    x = np.zeros(symbols.size * oversampling, complex)
    x[::oversampling] = symbols
    return np.convolve(x, taps)


def _train_spd(config: ChainConfig, hpa: HpaParams) -> SpdParams:
    """Fit SPD coefficients on a training burst seen at the SPD's location."""
    rng = np.random.default_rng(config.train_seed)
    taps = rrc_taps(config.rolloff, config.span, config.oversampling)
    s = _draw_symbols(config.modulation, rng, config.n_train_symbols)
    x = _shape(s, taps, config.oversampling) * config.drive
    sigma_j = 0.0
    if config.spd_location == "onboard":
        if config.imux is not None:
            x = config.imux.apply(x)
        if config.jitter_aware:
            sigma_j = config.sigma_j
    params, _ = fit_spd(hpa, x, sigma_j=sigma_j, rng=rng,
                        n_iter=config.fit_iters, step=config.fit_step)
    return params


def _equalized_sinr(rx_symbols: np.ndarray, symbols: np.ndarray,
                    n_taps: int) -> float:
    """Data-aided symbol-spaced LS equalizer, then error-vector SINR."""
    n = symbols.size
    half = n_taps // 2
    cols = [np.roll(rx_symbols, half - t) for t in range(n_taps)]
    mat = np.stack(cols, axis=1)[half:n - half]
    ref = symbols[half:n - half]
    w, *_ = np.linalg.lstsq(mat, ref, rcond=None)
    err = mat @ w - ref
    mse = float(np.mean(np.abs(err) ** 2))
    sig = float(np.mean(np.abs(ref) ** 2))
    return 10 * np.log10(sig / max(mse, 1e-300))


def evaluate_chain(config: ChainConfig, spd: Optional[SpdParams],
                   hpa: HpaParams, n_symbols: int = 4000,
                   rng: Optional[np.random.Generator] = None) -> ChainResult:
    """Run the transmit chain once and measure OBO and data-aided SINR.

    Pipeline: pulse shaping, optional on-ground SPD, IMUX, sampling
    jitter, optional onboard SPD, cubic HPA (clipped at r_sat), OMUX,
    AWGN, receive matched filter, timing search and a data-aided
    symbol-spaced equalizer. ``spd`` may be None when spd_location is
    "none"; it is fitted internally when omitted otherwise.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if config.spd_location != "none" and spd is None:
        spd = _train_spd(config, hpa)
    os_, taps = config.oversampling, rrc_taps(config.rolloff, config.span,
                                              config.oversampling)
    s = _draw_symbols(config.modulation, rng, n_symbols)
    z = _shape(s, taps, os_) * config.drive
    rs = hpa.r_sat
    clip = rs if np.isfinite(rs) else None
    if config.spd_location == "onground":
        z = spd_apply(spd, z, clip_at=clip)
    if config.imux is not None:
        z = config.imux.apply(z)
    if config.sigma_j > 0:
        z = jitter_sample(z, config.sigma_j, rng)
    if config.spd_location == "onboard":
        z = spd_apply(spd, z, clip_at=clip)
    y = hpa_apply(hpa, z)
    if np.isfinite(hpa.r_sat):
        obo = 10 * np.log10(hpa.p_sat / np.mean(np.abs(y) ** 2))
    else:
        obo = np.inf            # linear device has no back-off reference
    if config.omux is not None:
        y = config.omux.apply(y)
    nv = 10 ** (-config.snr_db / 10)
    y = y + np.sqrt(nv / 2) * (rng.standard_normal(y.size)
                               + 1j * rng.standard_normal(y.size))
    r = np.convolve(y, taps)
    # integer timing search over a window covering filter group delays
    base = len(taps) - 1
    window = range(base, base + 6 * os_)
    probe = s[: min(400, n_symbols)]
    best_t, best_c = base, -1.0
    for t in window:
        seg = r[t : t + probe.size * os_ : os_]
        if seg.size < probe.size:
            break
        c = abs(np.vdot(probe, seg))
        if c > best_c:
            best_c, best_t = c, t
    rx = r[best_t : best_t + n_symbols * os_ : os_]
    n_eff = min(rx.size, n_symbols)
    sinr = _equalized_sinr(rx[:n_eff], s[:n_eff], config.eq_taps)
    return ChainResult(sinr_db=float(sinr), obo_db=float(obo))


def obo_vs_drive(config: ChainConfig, hpa: HpaParams,
                 drives: Sequence[float], n_symbols: int = 800,
                 seed: int = 3) -> np.ndarray:
    """OBO (dB) achieved at each drive level, SPD refitted per drive."""
    out = []
    for dr in drives:
        cfg = replace(config, drive=float(dr))
        res = evaluate_chain(cfg, None, hpa, n_symbols=n_symbols,
                             rng=np.random.default_rng(seed))
        out.append(res.obo_db)
    return np.array(out)


def drive_for_obo(config: ChainConfig, hpa: HpaParams, obo_target_db: float,
                  drive_grid: Optional[Sequence[float]] = None,
                  n_symbols: int = 800, seed: int = 3) -> float:
    """Drive level reaching a target OBO, via a monotone interpolated curve."""
    if drive_grid is None:
        drive_grid = np.geomspace(0.15, 6.0, 12)
    drive_grid = np.asarray(drive_grid, float)
    obo = obo_vs_drive(config, hpa, drive_grid, n_symbols, seed)
    order = np.argsort(obo)
    if not obo[order[0]] <= obo_target_db <= obo[order[-1]]:
        raise ConfigurationError("OBO target outside the drive grid's range")
    log_drive = np.interp(obo_target_db, obo[order], np.log(drive_grid)[order])
    return float(np.exp(log_drive))


def spd_benchmark(hpa: HpaParams, obo_grid_db: Sequence[float],
                  modes: Sequence[str] = ("none", "onboard", "onground"),
                  base_config: Optional[ChainConfig] = None,
                  n_symbols: int = 4000, seed: int = 0) -> list:
    """SINR at matched OBO per SPD placement, paired noise seeds."""
    if base_config is None:
        base_config = ChainConfig()
    rows = []
    drive_grid = np.geomspace(0.15, 6.0, 12)
    for mode in modes:
        cfg0 = replace(base_config, spd_location=mode)
        obo = obo_vs_drive(cfg0, hpa, drive_grid)
        order = np.argsort(obo)
        for target in obo_grid_db:
            if not obo[order[0]] <= target <= obo[order[-1]]:
                raise ConfigurationError("OBO target outside the drive range")
            dr = float(np.exp(np.interp(float(target), obo[order],
                                        np.log(drive_grid)[order])))
            cfg = replace(cfg0, drive=dr)
            res = evaluate_chain(cfg, None, hpa, n_symbols=n_symbols,
                                 rng=np.random.default_rng(seed))
            rows.append({"spd_location": mode,
                         "jitter_aware": cfg.jitter_aware and mode == "onboard",
                         "obo_db": res.obo_db, "obo_target_db": float(target),
                         "sinr_db": res.sinr_db, "seed": seed})
    return rows
