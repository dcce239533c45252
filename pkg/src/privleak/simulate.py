"""Monte-Carlo calibration of the entropy-spread metric.

Four studies back the metric's design:

* bias: how fast the entropy standard deviation of random uniform payloads
  falls with payload length, summarized by a log-log slope per metric;
* separation: whether the 95% bands of plaintext and random experiments
  stay disjoint per payload length;
* threshold: whether a single fixed cutoff splits plaintext from random
  experiments once payloads reach 100 octets;
* base64: the separation study against Base64-encoded random data, which
  imitates plaintext at short lengths.

Experiments inside an ensemble are independent; results are reduced in
experiment order so a fixed seed gives bit-identical output.
"""
from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .entropy import Algorithm, EntropyConfig, Symbol, batch_entropy

__all__ = [
    "SimConfig",
    "BiasCurve",
    "SeparationRow",
    "SeparationCurve",
    "ThresholdRow",
    "ThresholdTable",
    "PAPER_THRESHOLDS",
    "PROFILES",
    "load_corpus",
    "gen_payload",
    "PayloadSampler",
    "bias_curve",
    "separation_curve",
    "threshold_check",
    "base64_separation",
    "run_scenario",
    "SCENARIOS",
]

SOURCES = ("random_uniform", "plaintext_corpus", "base64_random")

# Fixed plaintext/random cutoffs for the two length-corrected Shannon
# metrics.  Calibrated against payloads of at least 100 octets with 50
# samples per experiment; the octet threshold reads the entropy in bits per
# octet and both corrections use the payload length in octets.
PAPER_THRESHOLDS = {
    Symbol.OCTET: 0.14,
    Symbol.BIT: 0.028,
}

THRESHOLD_OCTET_CONFIG = EntropyConfig(
    Algorithm.SHANNON, Symbol.OCTET, normalized=False, length_corrected=True
)
THRESHOLD_BIT_CONFIG = EntropyConfig(
    Algorithm.SHANNON, Symbol.BIT, normalized=True, length_corrected=True
)

_B64_ALPHABET = np.frombuffer(
    b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/", dtype=np.uint8
)
_B64_WEIGHTS = np.array([32, 16, 8, 4, 2, 1], dtype=np.uint8)

_corpus_cache: bytes | None = None


def load_corpus() -> bytes:
    """The bundled English text standing in for the original prose corpus."""
    global _corpus_cache
    if _corpus_cache is None:
        _corpus_cache = (
            importlib.resources.files("privleak.data")
            .joinpath("corpus_en.txt")
            .read_bytes()
        )
    return _corpus_cache


@dataclass(frozen=True)
class SimConfig:
    """One Monte-Carlo run: payload lengths in octets, ensemble size,
    samples per experiment, the metric and the payload source."""

    lengths: tuple[int, ...]
    ensemble: int = 2000
    samples_per_experiment: int = 50
    config: EntropyConfig = EntropyConfig()
    source: str = "random_uniform"
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.ensemble < 1:
            raise ValueError("ensemble must be >= 1")
        if self.samples_per_experiment < 2:
            raise ValueError("need >= 2 samples per experiment for a sigma")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if any(n < 1 for n in self.lengths):
            raise ValueError("payload lengths must be >= 1 octet")


class PayloadSampler:
    """Draws payload batches for one source from a seeded generator."""

    def __init__(self, source: str, rng: np.random.Generator, corpus: bytes | None = None):
        if source not in SOURCES:
            raise ValueError(f"unknown source {source!r}")
        self.source = source
        self.rng = rng
        if source == "plaintext_corpus":
            corpus = corpus if corpus is not None else load_corpus()
            self._corpus = np.frombuffer(corpus, dtype=np.uint8)
        else:
            self._corpus = None

    def draw(self, length: int, count: int) -> np.ndarray:
        """A (count, length) uint8 batch of payloads."""
        if length < 1:
            raise ValueError("length must be >= 1 octet")
        if self.source == "random_uniform":
            return self.rng.integers(0, 256, size=(count, length), dtype=np.uint8)
        if self.source == "plaintext_corpus":
            if self._corpus.size < length:
                raise ValueError(
                    f"corpus ({self._corpus.size} octets) shorter than payload ({length})"
                )
            offsets = self.rng.integers(0, self._corpus.size - length + 1, size=count)
            return self._corpus[offsets[:, None] + np.arange(length)]
        # base64_random: encode random octets, truncate to the target length
        source_octets = (length * 3) // 4 + 3
        raw = self.rng.integers(0, 256, size=(count, source_octets), dtype=np.uint8)
        bits = np.unpackbits(raw, axis=1)
        usable = (bits.shape[1] // 6) * 6
        groups = bits[:, :usable].reshape(count, -1, 6)
        codes = (groups * _B64_WEIGHTS).sum(axis=2)
        return _B64_ALPHABET[codes[:, :length]]


def gen_payload(source: str, length: int, rng: np.random.Generator) -> bytes:
    """One payload from the named source."""
    return PayloadSampler(source, rng).draw(length, 1)[0].tobytes()


def _experiment_sigmas(
    sampler: PayloadSampler,
    length: int,
    ensemble: int,
    samples: int,
    config: EntropyConfig,
) -> np.ndarray:
    """Sample standard deviation of the metric, one value per experiment."""
    sigmas = np.empty(ensemble)
    # keep the per-chunk payload block near 64 MiB, and the bincount
    # scratch bounded for the octet path
    rows_budget = max(samples, min(32768, (64 << 20) // max(length, 1)))
    chunk = max(1, rows_budget // samples)
    done = 0
    while done < ensemble:
        take = min(chunk, ensemble - done)
        batch = sampler.draw(length, take * samples)
        values = batch_entropy(batch, config).reshape(take, samples)
        sigmas[done : done + take] = values.std(axis=1, ddof=1)
        done += take
    return sigmas


@dataclass
class BiasCurve:
    """Mean sigma per payload length with its 95% band, plus the fitted
    log-log line sigma = 2^gamma * n_bits^psi over the post-transient range."""

    config: EntropyConfig
    source: str
    lengths_octets: tuple[int, ...]
    mean_sigma: tuple[float, ...]
    band_low: tuple[float, ...]
    band_high: tuple[float, ...]
    gamma: float
    psi: float
    fit_min_bits: int

    @property
    def lengths_bits(self) -> tuple[int, ...]:
        return tuple(8 * n for n in self.lengths_octets)


def _default_fit_floor(symbol: Symbol) -> int:
    # octet metrics have a long transient; skip it before fitting the slope
    return 64 if symbol is Symbol.BIT else 1600


def bias_curve(sim: SimConfig, fit_min_bits: int | None = None) -> BiasCurve:
    """Entropy-sigma bias versus payload length for one metric and source."""
    if fit_min_bits is None:
        fit_min_bits = _default_fit_floor(sim.config.symbol)
    rng = np.random.default_rng(sim.rng_seed)
    sampler = PayloadSampler(sim.source, rng)
    means, lows, highs = [], [], []
    for length in sim.lengths:
        sigmas = _experiment_sigmas(
            sampler, length, sim.ensemble, sim.samples_per_experiment, sim.config
        )
        means.append(float(sigmas.mean()))
        lows.append(float(np.percentile(sigmas, 2.5)))
        highs.append(float(np.percentile(sigmas, 97.5)))
    bits = np.array([8 * n for n in sim.lengths], dtype=float)
    mask = (bits >= fit_min_bits) & (np.array(means) > 0)
    if mask.sum() >= 2:
        psi, gamma = np.polyfit(np.log2(bits[mask]), np.log2(np.array(means)[mask]), 1)
    else:
        psi = gamma = math.nan
    return BiasCurve(
        config=sim.config,
        source=sim.source,
        lengths_octets=tuple(sim.lengths),
        mean_sigma=tuple(means),
        band_low=tuple(lows),
        band_high=tuple(highs),
        gamma=float(gamma),
        psi=float(psi),
        fit_min_bits=fit_min_bits,
    )


@dataclass(frozen=True)
class SeparationRow:
    length_octets: int
    a_low: float
    a_mean: float
    a_high: float
    b_low: float
    b_mean: float
    b_high: float
    distinguishable: bool


@dataclass
class SeparationCurve:
    config: EntropyConfig
    source_a: str
    source_b: str
    rows: list[SeparationRow]

    def distinguishable_from(self) -> int | None:
        """Smallest length from which every tested length separates."""
        start: int | None = None
        for row in self.rows:
            if row.distinguishable:
                if start is None:
                    start = row.length_octets
            else:
                start = None
        return start


def separation_curve(
    sim: SimConfig,
    source_a: str = "plaintext_corpus",
    source_b: str = "random_uniform",
) -> SeparationCurve:
    """95% bands of the metric for two sources; a length is distinguishable
    when the bands do not overlap."""
    rng_a = np.random.default_rng(sim.rng_seed)
    rng_b = np.random.default_rng(sim.rng_seed + 1)
    sampler_a = PayloadSampler(source_a, rng_a)
    sampler_b = PayloadSampler(source_b, rng_b)
    rows = []
    for length in sim.lengths:
        sa = _experiment_sigmas(sampler_a, length, sim.ensemble, sim.samples_per_experiment, sim.config)
        sb = _experiment_sigmas(sampler_b, length, sim.ensemble, sim.samples_per_experiment, sim.config)
        a_low, a_high = np.percentile(sa, [2.5, 97.5])
        b_low, b_high = np.percentile(sb, [2.5, 97.5])
        rows.append(
            SeparationRow(
                length_octets=length,
                a_low=float(a_low),
                a_mean=float(sa.mean()),
                a_high=float(a_high),
                b_low=float(b_low),
                b_mean=float(sb.mean()),
                b_high=float(b_high),
                distinguishable=bool(a_low > b_high or b_low > a_high),
            )
        )
    return SeparationCurve(config=sim.config, source_a=source_a, source_b=source_b, rows=rows)


@dataclass(frozen=True)
class ThresholdRow:
    length_octets: int
    frac_plaintext_above: float
    frac_random_below: float
    passed: bool


@dataclass
class ThresholdTable:
    config: EntropyConfig
    threshold: float
    rows: list[ThresholdRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def threshold_check(
    sim: SimConfig,
    threshold: float,
    required: float = 0.95,
) -> ThresholdTable:
    """Fraction of plaintext experiments above and random experiments below
    a fixed cutoff, per payload length; a length passes when both reach the
    required fraction (95% by default)."""
    if not sim.config.length_corrected:
        raise ValueError("the fixed threshold is only meaningful length-corrected")
    rng_p = np.random.default_rng(sim.rng_seed)
    rng_r = np.random.default_rng(sim.rng_seed + 1)
    plain = PayloadSampler("plaintext_corpus", rng_p)
    rand = PayloadSampler("random_uniform", rng_r)
    rows = []
    for length in sim.lengths:
        sp = _experiment_sigmas(plain, length, sim.ensemble, sim.samples_per_experiment, sim.config)
        sr = _experiment_sigmas(rand, length, sim.ensemble, sim.samples_per_experiment, sim.config)
        above = float((sp > threshold).mean())
        below = float((sr < threshold).mean())
        rows.append(
            ThresholdRow(
                length_octets=length,
                frac_plaintext_above=above,
                frac_random_below=below,
                passed=bool(above >= required and below >= required),
            )
        )
    return ThresholdTable(config=sim.config, threshold=threshold, rows=rows)


def base64_separation(sim: SimConfig) -> SeparationCurve:
    """Separation study against Base64-encoded random data, whose added
    redundancy makes it look like plaintext at short lengths."""
    return separation_curve(sim, source_a="plaintext_corpus", source_b="base64_random")


# ---------------------------------------------------------------------------
# profiles and scenario runners


@dataclass(frozen=True)
class Profile:
    name: str
    ensemble: int
    bias_lengths: tuple[int, ...]          # octets
    separation_lengths: tuple[int, ...]
    threshold_lengths: tuple[int, ...]
    base64_lengths: tuple[int, ...]


def _pow2_octets(lo_bits: int, hi_bits: int) -> tuple[int, ...]:
    return tuple(2**k // 8 for k in range(lo_bits, hi_bits + 1) if 2**k >= 8)


PROFILES = {
    # reference configuration: ensemble of 10000, grid from 8 bits up
    "paper": Profile(
        name="paper",
        ensemble=10000,
        bias_lengths=_pow2_octets(3, 16),
        separation_lengths=(2, 3, 4, 5, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256),
        threshold_lengths=(100, 128, 200, 256, 512, 1024),
        base64_lengths=(16, 24, 32, 48, 64, 96, 128, 192, 256, 512),
    ),
    # desk scale: same grids, ensemble 2000 (the bias grid keeps the
    # 16-bit point, where the two bit metrics' initial sigmas are compared)
    "desk": Profile(
        name="desk",
        ensemble=2000,
        bias_lengths=_pow2_octets(4, 16),
        separation_lengths=(2, 3, 4, 5, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256),
        threshold_lengths=(100, 128, 200, 256, 512, 1024),
        base64_lengths=(16, 24, 32, 48, 64, 96, 128, 192, 256, 512),
    ),
    "ci": Profile(
        name="ci",
        ensemble=200,
        bias_lengths=_pow2_octets(4, 13),
        separation_lengths=(2, 4, 5, 8, 16, 32, 64, 128),
        threshold_lengths=(100, 200, 512),
        base64_lengths=(16, 32, 64, 128, 256),
    ),
}


def _curve_csv(lengths_octets, mean, low, high) -> str:
    lines = ["length_bits,mean_sigma,p2_5,p97_5"]
    for n, m, lo, hi in zip(lengths_octets, mean, low, high):
        lines.append(f"{8*n},{m:.10g},{lo:.10g},{hi:.10g}")
    return "\n".join(lines) + "\n"


def _write(out_dir: Path, name: str, text: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text, encoding="ascii")


def _sep_files(curve: SeparationCurve, out_dir: Path, stem: str) -> dict:
    rows = curve.rows
    _write(out_dir, f"{stem}_{curve.source_a}.csv",
           _curve_csv([r.length_octets for r in rows],
                      [r.a_mean for r in rows], [r.a_low for r in rows], [r.a_high for r in rows]))
    _write(out_dir, f"{stem}_{curve.source_b}.csv",
           _curve_csv([r.length_octets for r in rows],
                      [r.b_mean for r in rows], [r.b_low for r in rows], [r.b_high for r in rows]))
    return {
        "metric": curve.config.label(),
        "source_a": curve.source_a,
        "source_b": curve.source_b,
        "rows": [
            {
                "length_octets": r.length_octets,
                "length_bits": 8 * r.length_octets,
                "a_band": [r.a_low, r.a_high],
                "b_band": [r.b_low, r.b_high],
                "distinguishable": r.distinguishable,
            }
            for r in rows
        ],
        "distinguishable_from_octets": curve.distinguishable_from(),
    }


def run_bias(profile: Profile, out_dir: Path, seed: int) -> dict:
    """Bias curves for Shannon and Min bit entropy (uncorrected, random
    uniform source) and the fitted slopes."""
    summary: dict = {"scenario": "bias", "profile": profile.name, "seed": seed, "metrics": {}}
    curves = {}
    for name, algorithm in (("shannon_bit", Algorithm.SHANNON), ("min_bit", Algorithm.MIN)):
        cfg = EntropyConfig(algorithm, Symbol.BIT, normalized=True, length_corrected=False)
        sim = SimConfig(
            lengths=profile.bias_lengths,
            ensemble=profile.ensemble,
            config=cfg,
            source="random_uniform",
            rng_seed=seed,
        )
        curve = bias_curve(sim)
        curves[name] = curve
        _write(out_dir, f"bias_{name}.csv",
               _curve_csv(curve.lengths_octets, curve.mean_sigma, curve.band_low, curve.band_high))
        summary["metrics"][name] = {
            "gamma": curve.gamma,
            "psi": curve.psi,
            "fit_min_bits": curve.fit_min_bits,
            "lengths_bits": list(curve.lengths_bits),
            "mean_sigma": list(curve.mean_sigma),
        }
    first = curves["shannon_bit"].lengths_octets[0]
    summary["initial_bias_ratio"] = (
        curves["min_bit"].mean_sigma[0] / curves["shannon_bit"].mean_sigma[0]
    )
    summary["initial_length_bits"] = 8 * first
    _write(out_dir, "bias_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def run_separation(profile: Profile, out_dir: Path, seed: int) -> dict:
    """Plaintext vs random bands for Shannon octet (the working metric) and
    both Min variants (negative controls)."""
    summary = {"scenario": "separation", "profile": profile.name, "seed": seed, "curves": {}}
    for stem, algorithm, symbol in (
        ("shannon_octet", Algorithm.SHANNON, Symbol.OCTET),
        ("min_octet", Algorithm.MIN, Symbol.OCTET),
        ("min_bit", Algorithm.MIN, Symbol.BIT),
    ):
        cfg = EntropyConfig(algorithm, symbol, normalized=True, length_corrected=False)
        sim = SimConfig(
            lengths=profile.separation_lengths,
            ensemble=profile.ensemble,
            config=cfg,
            source="plaintext_corpus",
            rng_seed=seed,
        )
        curve = separation_curve(sim)
        summary["curves"][stem] = _sep_files(curve, out_dir, f"separation_{stem}")
    _write(out_dir, "separation_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def run_threshold(profile: Profile, out_dir: Path, seed: int) -> dict:
    """Fixed-threshold check for the two calibrated corrected metrics."""
    summary = {"scenario": "threshold", "profile": profile.name, "seed": seed, "tables": {}}
    for stem, cfg, threshold in (
        ("shannon_octet", THRESHOLD_OCTET_CONFIG, PAPER_THRESHOLDS[Symbol.OCTET]),
        ("shannon_bit", THRESHOLD_BIT_CONFIG, PAPER_THRESHOLDS[Symbol.BIT]),
    ):
        sim = SimConfig(
            lengths=profile.threshold_lengths,
            ensemble=profile.ensemble,
            config=cfg,
            source="plaintext_corpus",
            rng_seed=seed,
        )
        table = threshold_check(sim, threshold)
        summary["tables"][stem] = {
            "threshold": threshold,
            "metric": cfg.label(),
            "passed": table.passed,
            "rows": [
                {
                    "length_octets": r.length_octets,
                    "frac_plaintext_above": r.frac_plaintext_above,
                    "frac_random_below": r.frac_random_below,
                    "passed": r.passed,
                }
                for r in table.rows
            ],
        }
    _write(out_dir, "threshold_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def run_base64(profile: Profile, out_dir: Path, seed: int) -> dict:
    """Plaintext vs Base64-encoded random data, corrected Shannon octet."""
    sim = SimConfig(
        lengths=profile.base64_lengths,
        ensemble=profile.ensemble,
        config=THRESHOLD_OCTET_CONFIG,
        source="plaintext_corpus",
        rng_seed=seed,
    )
    curve = base64_separation(sim)
    summary = {
        "scenario": "base64",
        "profile": profile.name,
        "seed": seed,
        "curve": _sep_files(curve, out_dir, "base64_shannon_octet"),
    }
    _write(out_dir, "base64_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


SCENARIOS: dict[str, Callable[[Profile, Path, int], dict]] = {
    "bias": run_bias,
    "separation": run_separation,
    "threshold": run_threshold,
    "base64": run_base64,
}


def run_scenario(name: str, profile_name: str, out_dir: str | Path, seed: int = 0) -> dict:
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}")
    if profile_name not in PROFILES:
        raise ValueError(f"unknown profile {profile_name!r}")
    return SCENARIOS[name](PROFILES[profile_name], Path(out_dir), seed)
