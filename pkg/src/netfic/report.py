"""Verification reports shared by the network and index-coding checkers."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .algebra import EnumMode, Exhaustive, Sampled

PASS = "pass"
PASS_SAMPLED = "pass-sampled"
FAIL = "fail"

MAX_WITNESSES = 10


@dataclass(frozen=True)
class Witness:
    subject: str
    input: tuple[int, ...]
    expected: tuple[int, ...]
    got: tuple[int, ...]
    partner: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        out = {"subject": self.subject, "input": list(self.input), "expected": list(self.expected), "got": list(self.got)}
        if self.partner is not None:
            out["partner"] = list(self.partner)
        return out


@dataclass
class VerifyReport:
    verdict: str
    mode: str
    seed: int | None
    checked: int
    witnesses: list[Witness] = field(default_factory=list)
    elapsed_ms: float | None = None
    check: str = "decoding"
    note: str | None = None

    @property
    def passed(self) -> bool:
        return self.verdict in (PASS, PASS_SAMPLED)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "check": self.check,
            "verdict": self.verdict,
            "mode": self.mode,
            "seed": self.seed,
            "checked": self.checked,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }
        if self.note:
            out["note"] = self.note
        if timing:
            out["elapsed_ms"] = self.elapsed_ms
        return out

    def summary(self) -> str:
        head = f"{self.check}: {self.verdict.upper()} ({self.mode}, {self.checked} realizations)"
        lines = [head]
        if self.note:
            lines.append(f"  note: {self.note}")
        for w in self.witnesses:
            extra = f" partner={_fmt(w.partner)}" if w.partner is not None else ""
            lines.append(f"  {w.subject}: x={_fmt(w.input)}{extra} expected={_fmt(w.expected)} got={_fmt(w.got)}")
        return "\n".join(lines)


def _fmt(v) -> str:
    return "".join(map(str, v)) if all(0 <= s < 10 for s in v) else ",".join(map(str, v))


class WitnessCollector:
    """Keeps the lexicographically smallest failures per subject."""

    def __init__(self, limit: int = MAX_WITNESSES):
        self.limit = limit
        self.by_subject: dict[str, list[Witness]] = {}
        self.order: list[str] = []
        self.failed = False

    def add(self, subject: str, x: np.ndarray, expected: np.ndarray, got: np.ndarray, bad: np.ndarray, partner=None):
        if not bad.any():
            return
        self.failed = True
        if subject not in self.by_subject:
            self.by_subject[subject] = []
            self.order.append(subject)
        rows = np.flatnonzero(bad)
        # sort candidate rows lexicographically by realization, keep the head
        keys = x[rows]
        order = np.lexsort(keys.T[::-1]) if keys.shape[1] else np.arange(len(rows))
        current = self.by_subject[subject]
        for r in rows[order[: self.limit]]:
            current.append(
                Witness(
                    subject,
                    tuple(int(v) for v in x[r]),
                    tuple(int(v) for v in expected[r]),
                    tuple(int(v) for v in got[r]),
                    None if partner is None else tuple(int(v) for v in partner[r]),
                )
            )
        current.sort(key=lambda w: (w.input, w.partner or ()))
        del current[self.limit :]

    def witnesses(self, subject_order: Iterable[str] | None = None) -> list[Witness]:
        order = list(subject_order) if subject_order is not None else self.order
        out = []
        for s in order:
            out.extend(self.by_subject.get(s, []))
        return out


def finish(
    mode: EnumMode,
    checked: int,
    collector: WitnessCollector,
    started: float,
    subject_order=None,
    check: str = "decoding",
    note: str | None = None,
) -> VerifyReport:
    if collector.failed:
        verdict = FAIL
    else:
        verdict = PASS if isinstance(mode, Exhaustive) else PASS_SAMPLED
    return VerifyReport(
        verdict=verdict,
        mode=mode.describe(),
        seed=mode.seed if isinstance(mode, Sampled) else None,
        checked=checked,
        witnesses=collector.witnesses(subject_order),
        elapsed_ms=round((time.perf_counter() - started) * 1000, 3),
        check=check,
        note=note,
    )
