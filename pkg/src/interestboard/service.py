"""Live-loop session state: serve pairs, persist judgments, recompute scores.

Judgments land in an append-only JSON-lines log that is flushed and fsynced
before the caller is acknowledged, so a crash can lose at most an
unacknowledged trailing fragment (which recovery ignores). Recomputation runs
the full pipeline — ranker over the whole log, then the feature-space
smoother — and atomically swaps in a complete score snapshot; readers never
observe a partial mix. Skips are audit-logged to a sibling file but carry no
model evidence: the outcome model has no tie.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import gp
from .features import FeatureStore, KernelConfig
from .ranking import Comparison, InterestPosterior, PriorConfig, infer_ep

__all__ = ["ComparisonLog", "RecomputeStatus", "Session"]

logger = logging.getLogger(__name__)


class ComparisonLog:
    """Append-only, durable-before-ack judgment log.

    One JSON object per line: {winner, loser, timestamp, session, ref?}.
    ``ref`` is an optional client-generated judgment id; appending an already
    seen ref is a no-op returning the current length, which makes retries
    after lost acknowledgments idempotent. A trailing partial line (torn
    write from a crash) is ignored on load: it was never acknowledged.
    """

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: list[Comparison] = []
        self._refs: set[str] = set()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            self._replay()
        self._fh = open(self.path, "a", encoding="utf-8")

    def _replay(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            raw = fh.read()
        for line in raw.split("\n")[:-1]:  # a complete record ends with \n
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                comp = Comparison(
                    winner_id=str(obj["winner"]),
                    loser_id=str(obj["loser"]),
                    timestamp=datetime.fromisoformat(obj["timestamp"]),
                    session_id=str(obj.get("session", "")),
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                logger.warning("skipping malformed log line: %s", exc)
                continue
            self._entries.append(comp)
            ref = obj.get("ref")
            if ref:
                self._refs.add(str(ref))

    def append(self, comp: Comparison, ref: str | None = None) -> int:
        """Durably append one judgment; returns the new log length.

        The record is written, flushed and fsynced before this returns, so an
        acknowledgment implies the judgment survives a crash.
        """
        with self._lock:
            if ref and ref in self._refs:
                return len(self._entries)
            record = {
                "winner": comp.winner_id,
                "loser": comp.loser_id,
                "timestamp": comp.timestamp.isoformat(),
                "session": comp.session_id,
            }
            if ref:
                record["ref"] = ref
            self._fh.write(json.dumps(record) + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._entries.append(comp)
            if ref:
                self._refs.add(ref)
            return len(self._entries)

    def entries(self) -> list[Comparison]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def close(self) -> None:
        self._fh.close()


@dataclass(frozen=True)
class RecomputeStatus:
    state: str  # "idle" | "running" | "failed"
    reason: str = ""

    def as_dict(self) -> dict:
        out = {"state": self.state}
        if self.reason:
            out["reason"] = self.reason
        return out


class Session:
    """Owns the feature store, the logs, and the current score snapshot.

    Pair sampling is a deterministic function of the seed. Recompute is
    serialized: a trigger while one is running coalesces with it instead of
    queueing a second run. The score snapshot (scores + fitted model +
    covered log prefix) is swapped atomically under a lock.
    """

    def __init__(
        self,
        store: FeatureStore,
        log: ComparisonLog,
        skip_log_path: str | os.PathLike | None = None,
        prior: PriorConfig = PriorConfig(),
        kernel: KernelConfig = KernelConfig(),
        rng_seed: int = 0,
        auto_recompute_every: int = 25,
    ):
        if auto_recompute_every < 0:
            raise ValueError("auto_recompute_every must be >= 0 (0 disables)")
        self.store = store
        self.log = log
        self.prior = prior
        self.kernel = kernel
        self.rng_seed = rng_seed
        self.auto_recompute_every = auto_recompute_every
        self._rng = np.random.default_rng(rng_seed)
        self._skip_path = Path(skip_log_path) if skip_log_path else None

        self._state_lock = threading.Lock()
        self._recompute_gate = threading.Lock()
        self._status = RecomputeStatus("idle")
        self._scores: InterestPosterior | None = None
        self._model: gp.GPModel | None = None
        self._covered_prefix = 0

    # -- pair sampling ----------------------------------------------------

    def sample_pair(self) -> tuple[str, str]:
        """Uniform random unordered pair of distinct image ids."""
        n = len(self.store)
        if n < 2:
            raise ValueError("need at least 2 images to sample a pair")
        ids = self.store.ids
        i = int(self._rng.integers(0, n))
        j = int(self._rng.integers(0, n - 1))
        if j >= i:
            j += 1
        return ids[i], ids[j]

    # -- judgment recording ------------------------------------------------

    def record_comparison(
        self, winner: str, loser: str, session_id: str = "", ref: str | None = None
    ) -> int:
        """Validate and durably append one judgment; returns log length.

        May fire an automatic background recompute every
        ``auto_recompute_every`` judgments.
        """
        if winner not in self.store:
            raise ValueError(f"unknown image id: {winner!r}")
        if loser not in self.store:
            raise ValueError(f"unknown image id: {loser!r}")
        comp = Comparison(winner, loser, datetime.now(timezone.utc), session_id)
        length = self.log.append(comp, ref=ref)
        if self.auto_recompute_every and length % self.auto_recompute_every == 0:
            threading.Thread(target=self._recompute_quiet, daemon=True).start()
        return length

    def _recompute_quiet(self) -> None:
        try:
            self.recompute()
        except Exception:
            pass  # status and log already carry the failure

    def record_skip(self, a: str, b: str, session_id: str = "") -> None:
        """Audit-log a skipped pair; contributes no ranking evidence."""
        if self._skip_path is None:
            return
        with open(self._skip_path, "a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {
                        "a": a,
                        "b": b,
                        "session": session_id,
                        "timestamp": datetime.now(timezone.utc).isoformat(),
                    }
                )
                + "\n"
            )
            fh.flush()

    # -- recompute ---------------------------------------------------------

    def recompute(self) -> InterestPosterior | None:
        """Run ranker + smoother over the full log and swap in the result.

        Returns the new smoothed scores, or None if a run was already in
        flight (the triggers coalesce). Ranker non-convergence is kept with a
        warning; smoother failures leave the previous snapshot in place and
        set a failed status.
        """
        entries = self.log.entries()
        if not entries:
            raise ValueError("comparison log is empty; nothing to recompute")
        if not self._recompute_gate.acquire(blocking=False):
            return None
        try:
            with self._state_lock:
                self._status = RecomputeStatus("running")
            posterior = infer_ep(entries, self.store.ids, self.prior)
            if not posterior.converged:
                logger.warning(
                    "ranker did not converge in %d sweeps; using best effort",
                    posterior.iterations,
                )
            model = gp.fit(self.store, posterior, self.kernel)
            smoothed = gp.smooth_all(model)
            with self._state_lock:
                self._scores = smoothed
                self._model = model
                self._covered_prefix = len(entries)
                self._status = RecomputeStatus("idle")
            return smoothed
        except Exception as exc:
            with self._state_lock:
                self._status = RecomputeStatus("failed", reason=str(exc))
            logger.exception("recompute failed; previous scores retained")
            raise
        finally:
            self._recompute_gate.release()

    # -- read side ----------------------------------------------------------

    @property
    def scores(self) -> InterestPosterior | None:
        with self._state_lock:
            return self._scores

    @property
    def model(self) -> gp.GPModel | None:
        with self._state_lock:
            return self._model

    def status(self) -> dict:
        with self._state_lock:
            return {
                "recompute": self._status.as_dict(),
                "log_length": len(self.log),
                "covered_prefix": self._covered_prefix,
                "n_images": len(self.store),
                "scores_available": self._scores is not None,
            }
