"""Check reports: per-check records with a closed verdict set, rendered as
text or as canonical JSON (keys sorted, records sorted by check id)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

VERDICTS = ("pass", "fail", "unknown")

EXIT_PASS, EXIT_FAIL, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 64


def _plain(x: Any) -> Any:
    """JSON-friendly copy: tuples become lists, non-string keys become strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


@dataclass
class CheckRecord:
    check: str
    verdict: str
    witness: Any = None
    budget: dict | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")
        if self.verdict == "fail" and self.witness is None:
            raise ValueError(f"failing check {self.check} needs a witness")

    def as_dict(self) -> dict:
        return {"check": self.check, "verdict": self.verdict, "witness": _plain(self.witness),
                "budget": _plain(self.budget), "detail": _plain(self.detail)}


@dataclass
class Report:
    title: str
    records: list[CheckRecord] = field(default_factory=list)
    appendix: list[str] = field(default_factory=list)

    def add(self, check: str, ok: bool | None, witness: Any = None, budget: dict | None = None, **detail) -> CheckRecord:
        verdict = "unknown" if ok is None else ("pass" if ok else "fail")
        if verdict == "fail" and witness is None:
            witness = "unspecified"
        rec = CheckRecord(check, verdict, witness, budget, detail)
        self.records.append(rec)
        return rec

    def extend(self, other: "Report", prefix: str = "") -> None:
        for r in other.records:
            self.records.append(CheckRecord(prefix + r.check, r.verdict, r.witness, r.budget, r.detail))

    def __getitem__(self, check: str) -> CheckRecord:
        for r in self.records:
            if r.check == check:
                return r
        raise KeyError(check)

    @property
    def verdict(self) -> str:
        vs = {r.verdict for r in self.records}
        if "fail" in vs:
            return "fail"
        if "unknown" in vs:
            return "unknown"
        return "pass"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def exit_code(self) -> int:
        return {"pass": EXIT_PASS, "fail": EXIT_FAIL, "unknown": EXIT_UNKNOWN}[self.verdict]

    def sorted_records(self) -> list[CheckRecord]:
        return sorted(self.records, key=lambda r: r.check)

    def structured(self) -> str:
        doc = {"title": self.title, "verdict": self.verdict,
               "records": [r.as_dict() for r in self.sorted_records()]}
        if self.appendix:
            doc["appendix"] = list(self.appendix)
        return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2)

    def text(self) -> str:
        lines = [f"== {self.title}: {self.verdict.upper()}"]
        for r in self.sorted_records():
            line = f"[{r.verdict:^7}] {r.check}"
            if r.detail:
                line += "  " + ", ".join(f"{k}={_short(v)}" for k, v in sorted(r.detail.items()))
            lines.append(line)
            if r.verdict != "pass" and r.witness is not None:
                lines.append(f"          witness: {_short(r.witness, 200)}")
        if self.appendix:
            lines += ["", *self.appendix]
        return "\n".join(lines)


def _short(v: Any, n: int = 80) -> str:
    s = json.dumps(_plain(v), ensure_ascii=False, sort_keys=True) if not isinstance(v, str) else v
    return s if len(s) <= n else s[: n - 3] + "..."
