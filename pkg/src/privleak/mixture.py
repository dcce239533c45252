"""Laplacian mixture fitting of per-rule entropy distributions.

Each mixture component is read as one attack vector: a Laplace density
located at the component median.  Fitting is expectation-maximisation with
a weighted-median M-step (robust against outliers and skew), a minimum
message length stop test, and k-means seeding.  The analyst can steer the
fit between convergence episodes: assert a mode, delete components, or pick
a mode off the histogram.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "LAMBDA_MIN",
    "MML_EPSILON",
    "LaplaceComponent",
    "MixtureModel",
    "SetCluster",
    "DeleteClusters",
    "PickCluster",
    "EditError",
    "ComponentLeakage",
    "ClusterLeakage",
    "laplace_pdf",
    "weighted_median",
    "e_step",
    "m_step",
    "log_likelihood",
    "mml",
    "kmeans_init",
    "cluster_leakage",
    "FitSession",
    "FitResult",
    "fit",
]

LAMBDA_MIN = 1e-6          # scale floor for components pinned on identical samples
MML_EPSILON = 1e-4         # |delta MML| under this counts as converged
MIN_ITER_INITIAL = 40      # convergence is only trusted after this many sweeps
MIN_ITER_AFTER_EDIT = 20
MAX_ITERATIONS = 2000
_W_FLOOR = 1e-300          # responsibility floor inside the MML log term
_LOG_UNDERFLOW = -700.0    # below this joint log-density, fall back to hard assignment
SQRT2 = math.sqrt(2.0)


class EditError(ValueError):
    """A cluster edit referenced an invalid component or position."""


@dataclass
class LaplaceComponent:
    """One mixture component: location (median), scale and mixing weight.

    A deleted component is the all-zero triple and takes no further part in
    fitting until resurrected.
    """

    median: float
    scale: float
    weight: float
    deleted: bool = False

    def as_dict(self) -> dict:
        return {
            "median": self.median,
            "lambda": self.scale,
            "beta": self.weight,
            "deleted": self.deleted,
        }


@dataclass
class MixtureModel:
    components: list[LaplaceComponent]
    mml: float = math.nan
    iterations: int = 0
    converged: bool = False

    @property
    def live(self) -> list[int]:
        return [i for i, c in enumerate(self.components) if not c.deleted]

    @property
    def k_live(self) -> int:
        return len(self.live)

    def copy(self) -> "MixtureModel":
        return MixtureModel(
            components=[replace(c) for c in self.components],
            mml=self.mml,
            iterations=self.iterations,
            converged=self.converged,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "components": [c.as_dict() for c in self.components],
                "mml": self.mml,
                "iterations": self.iterations,
                "converged": self.converged,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "MixtureModel":
        doc = json.loads(text)
        return cls(
            components=[
                LaplaceComponent(
                    median=c["median"],
                    scale=c["lambda"],
                    weight=c["beta"],
                    deleted=c["deleted"],
                )
                for c in doc["components"]
            ],
            mml=doc["mml"],
            iterations=doc["iterations"],
            converged=doc["converged"],
        )


def laplace_pdf(x, median: float, scale: float):
    """Laplace density (1/2L) exp(-|x - median|/L)."""
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    x = np.asarray(x, dtype=float)
    out = np.exp(-np.abs(x - median) / scale) / (2.0 * scale)
    return float(out) if out.ndim == 0 else out


def weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Cumulative-weight median over ascending values.

    Walk the cumulative weights q to the element where they first reach
    half the total.  An exact hit (q_i == half) returns that value, as does
    an exactly balanced crossing (equal mass strictly below and above the
    element, the plain-median case for odd uniform weights); any other
    strict crossing averages the value with its predecessor.  A crossing at
    the very first element has no predecessor and returns that element.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape or values.ndim != 1:
        raise ValueError("values and weights must be equal-length 1-D arrays")
    if np.any(np.diff(values) < 0):
        raise ValueError("weighted_median requires values sorted ascending")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    q = np.cumsum(weights)
    total = q[-1]
    if total <= 0:
        raise ValueError("weighted_median needs a positive total weight")
    half = 0.5 * total
    idx = int(np.searchsorted(q, half, side="left"))
    if q[idx] == half:
        return float(values[idx])
    below = q[idx - 1] if idx > 0 else 0.0
    if below == total - q[idx]:
        return float(values[idx])
    if idx == 0:
        return float(values[0])
    return float((values[idx] + values[idx - 1]) / 2.0)


def _log_densities(samples: np.ndarray, model: MixtureModel) -> tuple[np.ndarray, list[int]]:
    live = model.live
    if not live:
        raise ValueError("model has no live components")
    logd = np.empty((samples.size, len(live)))
    for j, k in enumerate(live):
        comp = model.components[k]
        scale = max(comp.scale, LAMBDA_MIN)
        logd[:, j] = (
            math.log(comp.weight) if comp.weight > 0 else -math.inf
        ) - math.log(2.0 * scale) - np.abs(samples - comp.median) / scale
    return logd, live


def e_step(samples: np.ndarray, model: MixtureModel) -> np.ndarray:
    """Responsibilities w[i, k], rows normalized over live components.

    Computed in log space.  When every component is so far from a sample
    that the joint density underflows, the sample is hard-assigned to the
    nearest live median instead of producing a NaN row.
    """
    samples = np.asarray(samples, dtype=float)
    logd, live = _log_densities(samples, model)
    resp = np.zeros((samples.size, len(model.components)))
    rowmax = logd.max(axis=1)
    degenerate = rowmax < _LOG_UNDERFLOW
    ok = ~degenerate
    if np.any(ok):
        shifted = np.exp(logd[ok] - rowmax[ok, None])
        resp_live = shifted / shifted.sum(axis=1, keepdims=True)
        for j, k in enumerate(live):
            resp[ok, k] = resp_live[:, j]
    if np.any(degenerate):
        medians = np.array([model.components[k].median for k in live])
        nearest = np.abs(samples[degenerate, None] - medians[None, :]).argmin(axis=1)
        for row, j in zip(np.nonzero(degenerate)[0], nearest):
            resp[row, live[j]] = 1.0
    return resp


def m_step(samples: np.ndarray, resp: np.ndarray) -> MixtureModel:
    """Re-estimate medians (weighted median), scales (weighted mean absolute
    deviation) and mixing weights from the responsibilities.

    ``samples`` must be sorted ascending, matching the responsibility rows.
    A component attracting zero total weight is degenerate and gets deleted.
    """
    samples = np.asarray(samples, dtype=float)
    n, k_total = resp.shape
    components: list[LaplaceComponent] = []
    grand_total = resp.sum()
    for k in range(k_total):
        w = resp[:, k]
        total = w.sum()
        if total <= 0.0:
            components.append(LaplaceComponent(0.0, 0.0, 0.0, deleted=True))
            continue
        median = weighted_median(samples, w)
        scale = max(float((w * np.abs(samples - median)).sum() / total), LAMBDA_MIN)
        weight = float(total / grand_total)
        components.append(LaplaceComponent(median, scale, weight))
    return MixtureModel(components=components)


def log_likelihood(samples: np.ndarray, model: MixtureModel) -> float:
    """Total log2-likelihood of the samples under the mixture."""
    samples = np.asarray(samples, dtype=float)
    logd, _ = _log_densities(samples, model)
    peak = logd.max(axis=1)
    ll_nat = peak + np.log(np.exp(logd - peak[:, None]).sum(axis=1))
    return float(ll_nat.sum() / math.log(2.0))


def mml(model: MixtureModel, resp: np.ndarray, n: int) -> float:
    """Minimum-message-length score used as the stop test.

    Parameter cost grows with the live component count and the sample size;
    the fit term is the largest per-component sum of log responsibilities.
    All logs are base 2; responsibilities are floored to keep the log sum
    finite.
    """
    if n < 1:
        raise ValueError("mml needs n >= 1")
    live = model.live
    if not live:
        raise ValueError("mml of a model with no live components")
    k = len(live)
    cost = 0.0
    for i in live:
        cost += math.log2(n * model.components[i].weight / 12.0)
    cost += (k / 2.0) * math.log2(n / 12.0) + 1.5 * k
    w = np.maximum(resp[:, live], _W_FLOOR)
    fit_term = float(np.log2(w).sum(axis=0).max())
    return cost - fit_term


def kmeans_init(samples: np.ndarray, k: int, seed: int = 0) -> MixtureModel:
    """Seed the mixture from 1-D k-means centers.

    Spread-probability seeding followed by Lloyd iterations; cluster scale
    starts as the mean absolute deviation around the center (floored), and
    weights start as cluster fractions.  Asking for more clusters than
    distinct values reduces k with a warning.
    """
    samples = np.sort(np.asarray(samples, dtype=float))
    if k < 1:
        raise ValueError("k must be >= 1")
    distinct = np.unique(samples)
    if k > distinct.size:
        warnings.warn(
            f"k={k} exceeds {distinct.size} distinct values; reducing", stacklevel=2
        )
        k = distinct.size
    rng = np.random.default_rng(seed)
    centers = [float(rng.choice(distinct))]
    while len(centers) < k:
        d2 = np.min((samples[:, None] - np.array(centers)[None, :]) ** 2, axis=1)
        if d2.sum() <= 0:
            break
        centers.append(float(rng.choice(samples, p=d2 / d2.sum())))
    centers = np.array(sorted(centers))
    for _ in range(200):
        assign = np.abs(samples[:, None] - centers[None, :]).argmin(axis=1)
        new_centers = centers.copy()
        for j in range(centers.size):
            members = samples[assign == j]
            if members.size:
                new_centers[j] = members.mean()
        new_centers.sort()
        if np.array_equal(new_centers, centers):
            break
        centers = new_centers
    assign = np.abs(samples[:, None] - centers[None, :]).argmin(axis=1)
    components = []
    for j in range(centers.size):
        members = samples[assign == j]
        if members.size == 0:
            components.append(LaplaceComponent(float(centers[j]), LAMBDA_MIN, 0.0, deleted=True))
            continue
        scale = max(float(np.abs(members - centers[j]).mean()), LAMBDA_MIN)
        components.append(
            LaplaceComponent(float(centers[j]), scale, members.size / samples.size)
        )
    return MixtureModel(components=components)


@dataclass(frozen=True)
class SetCluster:
    """Assert that cluster number k (1-based) has a mode at ``median``.

    k may be one past the current component count, which asserts a cluster
    the model does not have yet and appends a fresh component for it.
    """

    k: int
    median: float


@dataclass(frozen=True)
class DeleteClusters:
    """Delete the listed components (1-based indices)."""

    clusters: tuple[int, ...]

    def __init__(self, clusters: Sequence[int]):
        object.__setattr__(self, "clusters", tuple(clusters))


@dataclass(frozen=True)
class PickCluster:
    """Assert a mode at position x, reusing a deleted slot when one exists,
    otherwise commandeering the least significant live component."""

    x: float


Edit = SetCluster | DeleteClusters | PickCluster


@dataclass(frozen=True)
class ComponentLeakage:
    index: int
    beta: float
    median: float
    scale: float
    mean: float
    sigma_model: float
    sigma_normal: float
    sigma_laplace: float


@dataclass(frozen=True)
class ClusterLeakage:
    """Three sigma families per component plus their beta-weighted rule
    aggregates.

    ``sigma_model`` comes straight from the fitted scale (sqrt(2) lambda)
    and is only meaningful when the model fits well; the weighted Normal
    and Laplacian sigmas are measured on the samples as divided up by the
    responsibilities, so they stay honest on noisy rules.
    """

    components: tuple[ComponentLeakage, ...]
    sigma_model: float
    sigma_normal: float
    sigma_laplace: float

    def as_dict(self) -> dict:
        return {
            "components": [
                {
                    "index": c.index,
                    "beta": c.beta,
                    "median": c.median,
                    "lambda": c.scale,
                    "mean": c.mean,
                    "sigma_model": c.sigma_model,
                    "sigma_normal": c.sigma_normal,
                    "sigma_laplace": c.sigma_laplace,
                }
                for c in self.components
            ],
            "rule": {
                "sigma_model": self.sigma_model,
                "sigma_normal": self.sigma_normal,
                "sigma_laplace": self.sigma_laplace,
            },
        }


def cluster_leakage(samples: np.ndarray, resp: np.ndarray, model: MixtureModel) -> ClusterLeakage:
    """Per-cluster and per-rule leakage once the fit is final."""
    samples = np.asarray(samples, dtype=float)
    entries = []
    agg_model = agg_normal = agg_laplace = 0.0
    for k in model.live:
        comp = model.components[k]
        w = resp[:, k]
        total = w.sum()
        sigma_model = SQRT2 * comp.scale
        if total > 0:
            mean = float((w * samples).sum() / total)
            sig_n = float(math.sqrt((w * (samples - mean) ** 2).sum() / total))
            sig_l = float(SQRT2 * (w * np.abs(samples - comp.median)).sum() / total)
        else:
            mean, sig_n, sig_l = comp.median, 0.0, 0.0
        entries.append(
            ComponentLeakage(
                index=k + 1,
                beta=comp.weight,
                median=comp.median,
                scale=comp.scale,
                mean=mean,
                sigma_model=sigma_model,
                sigma_normal=sig_n,
                sigma_laplace=sig_l,
            )
        )
        agg_model += comp.weight * sigma_model
        agg_normal += comp.weight * sig_n
        agg_laplace += comp.weight * sig_l
    return ClusterLeakage(
        components=tuple(entries),
        sigma_model=agg_model,
        sigma_normal=agg_normal,
        sigma_laplace=agg_laplace,
    )


class FitSession:
    """Stepwise EM driver: iterate to convergence, accept edits, resume.

    Samples are sorted once up front (the weighted median needs order and
    the fit must not depend on input permutation).  Convergence means the
    MML moved less than MML_EPSILON between sweeps, but only after the
    minimum sweep count: 40 initially, 20 after any edit.
    """

    def __init__(
        self,
        samples: Sequence[float],
        k_init: int,
        *,
        seed: int = 0,
        max_iterations: int = MAX_ITERATIONS,
    ):
        self.samples = np.sort(np.asarray(samples, dtype=float))
        if self.samples.size < 2:
            raise ValueError("need at least two samples to fit a mixture")
        if self.samples.size < 50:
            warnings.warn(
                f"only {self.samples.size} samples; below 50 the confidence "
                "band of the entropy spread is unreliable",
                stacklevel=2,
            )
        self.max_iterations = max_iterations
        self.model = kmeans_init(self.samples, k_init, seed=seed)
        self.resp = e_step(self.samples, self.model)
        self.iterations = 0
        self.converged = False
        self.nll_trace: list[float] = []
        self._min_iterations = MIN_ITER_INITIAL
        self._since_reset = 0
        self.edits_since_convergence = 0

    def _sweep(self) -> None:
        resp = e_step(self.samples, self.model)
        new_model = m_step(self.samples, resp)
        new_model.mml = mml(new_model, resp, self.samples.size)
        self.resp = resp
        new_model.iterations = self.iterations + 1
        live = [new_model.components[k] for k in new_model.live]
        if not live:
            raise RuntimeError("all components died; assert a cluster and resume")
        previous = self.model.mml
        self.model = new_model
        self.iterations += 1
        self._since_reset += 1
        self.nll_trace.append(-log_likelihood(self.samples, new_model))
        self._last_delta = (
            math.inf if math.isnan(previous) else abs(new_model.mml - previous)
        )

    def run_to_convergence(self) -> MixtureModel:
        """Sweep E/M until the MML settles (or the iteration cap is hit,
        in which case the best model is returned flagged unconverged)."""
        self._last_delta = math.inf
        while self.iterations < self.max_iterations:
            self._sweep()
            if self._since_reset >= self._min_iterations and self._last_delta < MML_EPSILON:
                self.model.converged = True
                self.converged = True
                self.edits_since_convergence = 0
                return self.model
        self.model.converged = False
        self.converged = False
        self.edits_since_convergence = 0
        warnings.warn("EM hit the iteration cap before the MML settled", stacklevel=2)
        return self.model

    def _seed_scale(self) -> float:
        # wide enough to capture the asserted mode's neighbourhood, narrow
        # enough not to swallow other modes
        spread = float(np.abs(self.samples - np.median(self.samples)).mean())
        return max(0.25 * spread, LAMBDA_MIN)

    def apply_edit(self, edit: Edit) -> None:
        """Apply one analyst edit and schedule a 20-sweep re-convergence."""
        comps = self.model.components
        if isinstance(edit, SetCluster):
            if edit.k == len(comps) + 1:
                comps.append(LaplaceComponent(0.0, 0.0, 0.0, deleted=True))
            elif not 1 <= edit.k <= len(comps) or comps[edit.k - 1].deleted:
                raise EditError(f"no live component {edit.k}")
            comps[edit.k - 1] = LaplaceComponent(
                float(edit.median), self._seed_scale(), comps[edit.k - 1].weight
            )
        elif isinstance(edit, DeleteClusters):
            for k in edit.clusters:
                if not 1 <= k <= len(comps):
                    raise EditError(f"no component {k}")
            if all(
                c.deleted or (i + 1) in edit.clusters for i, c in enumerate(comps)
            ):
                raise EditError("cannot delete every live component")
            for k in edit.clusters:
                comps[k - 1] = LaplaceComponent(0.0, 0.0, 0.0, deleted=True)
        elif isinstance(edit, PickCluster):
            lo, hi = float(self.samples[0]), float(self.samples[-1])
            if not lo <= edit.x <= hi:
                raise EditError(f"x={edit.x} outside the data range [{lo}, {hi}]")
            deleted = [i for i, c in enumerate(comps) if c.deleted]
            if deleted:
                target = deleted[0]
            else:
                target = min(self.model.live, key=lambda i: comps[i].weight)
            comps[target] = LaplaceComponent(
                float(edit.x), self._seed_scale(), 0.0
            )
        else:
            raise EditError(f"unknown edit {edit!r}")
        live = self.model.live
        share = {i: max(comps[i].weight, 0.0) for i in live}
        for i in live:
            if share[i] == 0.0:
                # a freshly asserted component starts at an even share
                share[i] = 1.0 / len(live)
        total = sum(share.values())
        for i in live:
            comps[i].weight = share[i] / total
        self.model.converged = False
        self._min_iterations = MIN_ITER_AFTER_EDIT
        self._since_reset = 0
        self.edits_since_convergence += 1

    def finalize(self) -> ClusterLeakage:
        # final assignment pass: probability mass distributed by the final
        # model, so the sigma tables and any later classification agree
        self.resp = e_step(self.samples, self.model)
        return cluster_leakage(self.samples, self.resp, self.model)


@dataclass
class FitResult:
    model: MixtureModel
    leakage: ClusterLeakage
    responsibilities: np.ndarray
    samples: np.ndarray
    converged: bool


EditCallback = Callable[[MixtureModel, np.ndarray], Sequence[Edit] | None]


def fit(
    samples: Sequence[float],
    k_init: int,
    edit_callback: EditCallback | None = None,
    *,
    seed: int = 0,
    max_iterations: int = MAX_ITERATIONS,
) -> FitResult:
    """Fit a Laplacian mixture, consulting ``edit_callback`` between
    convergence episodes.

    The callback sees the converged model and the sorted samples; returning
    no edits finalizes the fit (the headless default), returning edits
    applies them and resumes iteration.
    """
    session = FitSession(samples, k_init, seed=seed, max_iterations=max_iterations)
    session.run_to_convergence()
    while edit_callback is not None:
        edits = edit_callback(session.model.copy(), session.samples)
        if not edits:
            break
        for edit in edits:
            session.apply_edit(edit)
        session.run_to_convergence()
    return FitResult(
        model=session.model,
        leakage=session.finalize(),
        responsibilities=session.resp,
        samples=session.samples,
        converged=session.converged,
    )
