"""Confusion metrics, error density and relative error reduction."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Mapping

from .exceptions import InvalidInputError


@dataclass
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int | None = None
    avg_tp_rank: float | None = None

    @property
    def errors(self) -> int:
        return self.fp + self.fn

    @property
    def tpr(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def ppv(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 1.0

    def to_dict(self, area_km2: float | None = None, baseline: "Metrics | None" = None) -> dict:
        d = asdict(self)
        d.update(tpr=self.tpr, ppv=self.ppv, f1=self.f1, errors=self.errors)
        if area_km2 is not None:
            d["error_density"] = error_density(self, area_km2)
        if baseline is not None and baseline.errors > 0:
            d["relative_error_reduction"] = relative_error_reduction(self, baseline)
        return d


def confusion(decisions: Mapping[int, bool], truth: Mapping[int, bool]) -> Metrics:
    """Counts from id-aligned decision and truth maps.

    Ids present in ``truth`` but missing from ``decisions`` count as
    rejected (e.g. a true site that never became a candidate).
    """
    extra = set(decisions) - set(truth)
    if extra:
        raise InvalidInputError(f"decisions for unknown ids: {sorted(extra)[:10]}")
    tp = fp = fn = tn = 0
    for i, t in truth.items():
        d = bool(decisions.get(i, False))
        if t and d:
            tp += 1
        elif t:
            fn += 1
        elif d:
            fp += 1
        else:
            tn += 1
    return Metrics(tp, fp, fn, tn)


def error_density(m: Metrics, area_km2: float) -> float:
    """Errors (FP + FN) per square kilometer."""
    if not area_km2 > 0:
        raise InvalidInputError("area must be positive")
    return m.errors / area_km2


def relative_error_reduction(m: Metrics, baseline: Metrics) -> float:
    """``1 - errors / baseline_errors``; the area cancels."""
    if baseline.errors <= 0:
        raise InvalidInputError("baseline has no errors to reduce")
    return 1.0 - m.errors / baseline.errors
