"""Clustering sessions: one live EM fit per rule, steered over HTTP.

A session is a small state machine.  Creation runs EM to its first
convergence and parks in ``awaiting_edits``.  Edit commands apply a cluster
modification and resume iteration on a worker thread (state ``iterating``,
during which further commands are refused); ``cont`` with no edit since the
last convergence finalizes the session, freezing the model and its sigma
tables.  Replaying the same command sequence against the same data and seed
reproduces the identical final model.
"""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass

import numpy as np

from ..entropy import EntropyConfig
from ..leakage import series_from_alarms
from ..mixture import (
    ClusterLeakage,
    DeleteClusters,
    EditError,
    FitSession,
    PickCluster,
    SetCluster,
)


class SessionError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


@dataclass
class SessionSnapshot:
    session_id: str
    rule_id: str
    state: str
    n_samples: int
    config: EntropyConfig
    histogram_edges: list[float]
    histogram_counts: list[int]
    model_doc: dict
    leakage: ClusterLeakage | None
    edits_since_convergence: int


class ClusterSession:
    def __init__(
        self,
        session_id: str,
        rule_id: str,
        samples: np.ndarray,
        config: EntropyConfig,
        k_init: int,
        seed: int,
        bins: int = 64,
    ):
        self.session_id = session_id
        self.rule_id = rule_id
        self.config = config
        self.bins = bins
        self._lock = threading.RLock()
        self._fit = FitSession(samples, k_init, seed=seed)
        self.state = "iterating"
        self._leakage: ClusterLeakage | None = None
        self._worker: threading.Thread | None = None
        # first convergence happens inside the create request
        self._fit.run_to_convergence()
        self.state = "awaiting_edits"

    def _resume(self) -> None:
        try:
            self._fit.run_to_convergence()
        finally:
            with self._lock:
                self.state = "awaiting_edits"

    def snapshot(self, bins: int | None = None) -> SessionSnapshot:
        with self._lock:
            samples = self._fit.samples
            counts, edges = np.histogram(samples, bins=bins or self.bins)
            return SessionSnapshot(
                session_id=self.session_id,
                rule_id=self.rule_id,
                state=self.state,
                n_samples=int(samples.size),
                config=self.config,
                histogram_edges=[float(e) for e in edges],
                histogram_counts=[int(c) for c in counts],
                model_doc=json.loads(self._fit.model.to_json()),
                leakage=self._leakage,
                edits_since_convergence=self._fit.edits_since_convergence,
            )

    def command(self, op: str, **kw) -> None:
        with self._lock:
            if self.state == "finalized":
                raise SessionError(409, "session is finalized and immutable")
            if self.state != "awaiting_edits":
                raise SessionError(409, "EM is iterating; wait for awaiting_edits")
            if op == "cont":
                # no pending edit: the analyst is satisfied, freeze the fit
                self._leakage = self._fit.finalize()
                self.state = "finalized"
                return
            try:
                if op == "setcl":
                    if kw.get("k") is None or kw.get("median") is None:
                        raise SessionError(422, "setcl needs k and median")
                    self._fit.apply_edit(SetCluster(k=int(kw["k"]), median=float(kw["median"])))
                elif op == "delcl":
                    clusters = kw.get("clusters")
                    if not clusters:
                        raise SessionError(422, "delcl needs a cluster list")
                    self._fit.apply_edit(DeleteClusters(tuple(int(c) for c in clusters)))
                elif op == "pickcl":
                    if kw.get("x") is None:
                        raise SessionError(422, "pickcl needs x")
                    self._fit.apply_edit(PickCluster(x=float(kw["x"])))
                else:
                    raise SessionError(422, f"unknown command {op!r}")
            except EditError as exc:
                raise SessionError(422, str(exc)) from exc
            self.state = "iterating"
            self._worker = threading.Thread(target=self._resume, daemon=True)
            self._worker.start()

    def wait(self, timeout: float | None = None) -> None:
        worker = self._worker
        if worker is not None:
            worker.join(timeout)


class SessionManager:
    """Owns the sessions; one live (non-finalized) session per rule."""

    def __init__(self, store, default_config: EntropyConfig, bins: int = 64):
        self.store = store
        self.default_config = default_config
        self.bins = bins
        self._lock = threading.Lock()
        self._sessions: dict[str, ClusterSession] = {}
        self._by_rule: dict[str, str] = {}

    def rule_samples(self, rule_id: str, config: EntropyConfig) -> np.ndarray:
        rule_set = self.store.get(rule_id)
        if rule_set is None:
            raise SessionError(404, f"unknown rule {rule_id!r}")
        series = series_from_alarms(rule_set, config)
        if series.count < 2:
            raise SessionError(
                422, f"rule {rule_id} has {series.count} usable alarms; need >= 2"
            )
        return series.entropies()

    def create(
        self, rule_id: str, k_init: int, config: EntropyConfig, seed: int
    ) -> tuple[ClusterSession, bool]:
        with self._lock:
            existing_id = self._by_rule.get(rule_id)
            if existing_id is not None:
                existing = self._sessions[existing_id]
                if existing.state != "finalized":
                    return existing, False
            samples = self.rule_samples(rule_id, config)
            session_id = uuid.uuid4().hex
            session = ClusterSession(
                session_id, rule_id, samples, config, k_init, seed, bins=self.bins
            )
            self._sessions[session_id] = session
            self._by_rule[rule_id] = session_id
            return session, True

    def get(self, session_id: str) -> ClusterSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise SessionError(404, f"unknown session {session_id!r}")
        return session
