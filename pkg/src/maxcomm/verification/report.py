from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# stored failure records per suite; the count is always exact
MAX_STORED = 200


@dataclass
class VerificationReport:
    """Outcome of one identity/inequality suite.

    ``record`` takes the two sides of an inequality ``lhs <= rhs`` (allowing
    ``tol``); the worst slack is the smallest ``rhs + tol - lhs`` seen.
    """

    suite: str
    cases: int = 0
    n_failures: int = 0
    failures: list = field(default_factory=list)
    worst_slack: float = math.inf
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.n_failures == 0

    def record(self, lhs, rhs, tol, where: dict | None = None, check: str = "") -> None:
        lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), lhs.shape)
        tol = np.broadcast_to(np.asarray(tol, dtype=float), lhs.shape)
        slack = rhs + tol - lhs
        self.cases += lhs.size
        if lhs.size:
            self.worst_slack = min(self.worst_slack, float(slack.min()))
        bad = np.flatnonzero(~(slack >= 0))
        if not bad.size:
            return
        self.n_failures += int(bad.size)
        for i in bad[: max(0, MAX_STORED - len(self.failures))]:
            entry = {"check": check, "lhs": float(lhs.flat[i]), "rhs": float(rhs.flat[i]),
                     "index": int(i)}
            if where:
                entry.update(where)
            self.failures.append(entry)

    def log(self, key: str, value) -> None:
        self.info.setdefault(key, []).append(value)

    def count(self, key: str, n: int = 1) -> None:
        self.info[key] = self.info.get(key, 0) + n

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "cases": self.cases,
            "n_failures": self.n_failures,
            "failures": self.failures,
            "worst_slack": self.worst_slack,
            "info": self.info,
        }

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.suite}: {status} cases={self.cases} failures={self.n_failures} "
                f"worst_slack={self.worst_slack:.3g}")


def merge(suite: str, reports) -> VerificationReport:
    out = VerificationReport(suite)
    for r in reports:
        out.cases += r.cases
        out.n_failures += r.n_failures
        out.failures.extend(r.failures[: max(0, MAX_STORED - len(out.failures))])
        out.worst_slack = min(out.worst_slack, r.worst_slack)
        out.info[r.suite] = r.info
    return out
