"""The acceptance suite: eleven criteria, each a deterministic function of the thread count.

Criterion 11 (determinism) re-runs criteria 1-10 and compares the serialized results
byte for byte.  Wall-clock measurements are returned separately and never enter the
serialized results.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

from . import experiments as ex
from .reports import dumps

__all__ = ["Criterion", "CRITERIA", "run_criterion", "run_acceptance", "criterion_line"]


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    tolerance: str
    run: Callable


def _c1(threads):
    return {"bochner": ex.bochner_suite(points=5, tol=1e-6)}


def _c2(threads):
    return {"comparison": ex.comparison_suite(radii=(0.5, 1.0, 2.0), directions=16, tol=1e-6)}


def _c3(threads):
    return {"appendix": ex.appendix_suite(count=41, tol=1e-10)}


def _c4(threads):
    return {"hypotheses": ex.hypothesis_suite(count=41, radii=(1.0, 2.0, 3.0), tol=1e-9)}


def _c5(threads):
    return {"cubic": ex.cubic_suite(draws=1000, seed=0)}


def _c6(threads):
    return {"order": ex.solver_order_suite(threads=threads),
            "maximum_principle": ex.maximum_principle_suite(threads=threads)}


def _c7(threads):
    return {"counterexample": ex.counterexample_suite(delta=0.5, x_list=(5.0, 10.0, 20.0), samples=200)}


def _c8(threads):
    return {"gradient_sweep": ex.gradient_sweep(cells=128, threads=threads), "sharpness": ex.sharpness_suite()}


def _c9(threads):
    return {"harnack": ex.harnack_suite(min_slack=1.2)}


def _c10(threads):
    return {"liouville": ex.liouville_suite(R_list=(1.0, 2.0, 4.0), cells=128, threads=threads)}


CRITERIA = [
    Criterion(1, "Bochner identity suite", "max relative residual <= 1e-6", _c1),
    Criterion(2, "comparison equality and slack", "|deviation| <= 1e-6; slack >= -1e-6", _c2),
    Criterion(3, "paraboloid closed forms", "consistent forms to 1e-10; spot values exact", _c3),
    Criterion(4, "potential-variant hypotheses", "min Ric_X eigenvalue >= -1e-9; shell max |X| decreasing", _c4),
    Criterion(5, "cubic machinery", "discriminant bound with 1e-9 scale; root cap + 1e-12; exact beta = 0", _c5),
    Criterion(6, "solver order and maximum principle", "order in [1.8, 2.2]; maximum principle exact", _c6),
    Criterion(7, "one-dimensional unbounded drift", "residual <= 1e-8; |b| bound; u'/u increasing and > b(5); control |u'/u - 1| <= 1e-4", _c7),
    Criterion(8, "gradient-estimate discipline", "measured <= 8n bracket; sup 1 +- 2e-3; Omega 1 +- 5e-2", _c8),
    Criterion(9, "Harnack factor", "factor / (sup u / inf u) >= 1.2", _c9),
    Criterion(10, "Liouville decay", "Q_sup strictly decreasing; control exponent <= -1.5", _c10),
]


def _verdicts(measured: dict) -> list:
    out = []
    for key, suite in measured.items():
        for v in suite["verdicts"]:
            out.append({**v, "suite": key})
    return out


def run_criterion(c: Criterion, threads: int = 1) -> tuple:
    """``(result, seconds)``; ``result`` holds the sub-verdicts and the measured suites."""
    t0 = time.perf_counter()
    measured = c.run(threads)
    seconds = time.perf_counter() - t0
    verdicts = _verdicts(measured)
    failed = [v["name"] for v in verdicts if not v["passed"] and not v["informational"]]
    result = {"criterion": c.number, "title": c.title, "tolerance": c.tolerance, "passed": not failed,
              "failed_checks": failed, "checks": verdicts, "measured": measured}
    return result, seconds


def run_acceptance(threads: int = 1, self_check: bool = True, only=None, progress=None) -> tuple:
    """Run the criteria (all, or the numbers in ``only``) and the determinism re-run.

    Returns ``(results, timings)``; ``results`` is ordered by criterion number.
    ``progress`` (optional) is called with each finished result.
    """
    chosen = [c for c in CRITERIA if only is None or c.number in only]
    results, timings = [], {}
    for c in chosen:
        res, sec = run_criterion(c, threads)
        results.append(res)
        timings[f"criterion_{c.number}"] = sec
        if progress:
            progress(res)
    if self_check and (only is None or 11 in only):
        t0 = time.perf_counter()
        first = dumps(results)
        again = []
        for c in chosen:
            again.append(run_criterion(c, threads)[0])
        second = dumps(again)
        same = first == second
        res = {"criterion": 11, "title": "determinism", "tolerance": "byte-identical serialization",
               "passed": same, "failed_checks": [] if same else ["rerun differs"],
               "checks": [ex.verdict("re-run of criteria is byte-identical", same, "bytes", same, suite="determinism")],
               "measured": {"bytes": len(first), "criteria_compared": [c.number for c in chosen]}}
        results.append(res)
        timings["criterion_11"] = time.perf_counter() - t0
        if progress:
            progress(res)
    return results, timings


def criterion_line(res: dict) -> str:
    status = "PASS" if res["passed"] else "FAIL"
    line = f"criterion {res['criterion']:>2} {status}  {res['title']} [{res['tolerance']}]"
    if res["failed_checks"]:
        line += "  failed: " + "; ".join(res["failed_checks"])
    return line
