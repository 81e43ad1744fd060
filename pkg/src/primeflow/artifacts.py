"""Deterministic on-disk formats: cf.json, report.json, and CSV reports.

Big integers are serialized as decimal strings; floats rely on Python's
shortest round-trip repr; keys are sorted.  Identical inputs must produce
byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .cf import ContinuedFraction, DiophantineParams, convergents
from .equi import LevelReport


def dump_json(data, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def _fraction_pair(fr: Fraction) -> list[str]:
    return [str(fr.numerator), str(fr.denominator)]


def cf_to_dict(
    cf: ContinuedFraction, params: DiophantineParams | None = None, bits: str | None = None
) -> dict:
    lo, hi = cf.value_interval
    data = {
        "partial_quotients": list(cf.partial_quotients),
        "p": [str(v) for v in cf.numerators],
        "q": [str(v) for v in cf.denominators],
        "value_interval": {"lo": _fraction_pair(lo), "hi": _fraction_pair(hi)},
    }
    if params is not None:
        data["params"] = {"c0": params.c0, "delta": params.delta, "d": params.d}
    if bits is not None:
        data["bits"] = bits
    return data


def cf_from_dict(data: dict) -> tuple[ContinuedFraction, DiophantineParams | None]:
    cf = convergents(data["partial_quotients"])
    # stored p/q must match the recurrence; quotients are the source of truth
    if [str(v) for v in cf.numerators] != data["p"] or [str(v) for v in cf.denominators] != data["q"]:
        raise ValueError("cf file is internally inconsistent with its quotients")
    params = None
    if "params" in data:
        pd = data["params"]
        params = DiophantineParams(c0=pd["c0"], delta=pd["delta"], d=pd.get("d", 0.3))
    return cf, params


def save_cf(
    cf: ContinuedFraction,
    path: str | Path,
    params: DiophantineParams | None = None,
    bits: str | None = None,
) -> Path:
    return dump_json(cf_to_dict(cf, params, bits), path)


def load_cf(path: str | Path) -> tuple[ContinuedFraction, DiophantineParams | None]:
    return cf_from_dict(json.loads(Path(path).read_text()))


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(_csv_cell(v) for v in row))
    path.write_text("\n".join(out) + "\n")
    return path


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _complex_fields(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def experiment_report_to_dict(reports: list[LevelReport], environment: dict) -> dict:
    levels = []
    for r in reports:
        entry = {
            "level": r.level,
            "q": r.q,
            "K": r.K,
            "horizon": r.horizon,
            "n_primes": r.n_primes,
            "error": r.error,
            "error_benign": r.error_benign,
            "summary": {k: float(v) for k, v in sorted(r.summary.items())},
            "starts": [
                {
                    "x": _fraction_pair(srow.x),
                    "s": srow.s,
                    "discrepancy": srow.discrepancy,
                    "averages": {
                        name: {
                            "prime": _complex_fields(cell["prime"]),
                            "residue": _complex_fields(cell["residue"]),
                            "integer": _complex_fields(cell["integer"]),
                            "target": _complex_fields(cell["target"]),
                            "gap_prime_residue": cell["gap_prime_residue"],
                            "gap_residue_target": cell["gap_residue_target"],
                            "gap_prime_target": cell["gap_prime_target"],
                        }
                        for name, cell in sorted(srow.averages.items())
                    },
                }
                for srow in r.starts
            ],
        }
        levels.append(entry)
    return {"environment": environment, "levels": levels}


def experiment_report_csv_rows(reports: list[LevelReport]) -> tuple[list[str], list[list]]:
    header = [
        "level", "q", "K", "horizon", "n_primes", "start_x", "start_s", "g",
        "prime_re", "prime_im", "residue_re", "residue_im", "integer_re", "integer_im",
        "target_re", "target_im", "gap_prime_residue", "gap_residue_target",
        "gap_prime_target", "discrepancy",
    ]
    rows = []
    for r in reports:
        if r.error is not None:
            continue
        for srow in r.starts:
            for name, cell in sorted(srow.averages.items()):
                rows.append(
                    [
                        r.level, r.q, r.K, r.horizon, r.n_primes,
                        f"{srow.x.numerator}/{srow.x.denominator}", srow.s, name,
                        *_complex_fields(cell["prime"]),
                        *_complex_fields(cell["residue"]),
                        *_complex_fields(cell["integer"]),
                        *_complex_fields(cell["target"]),
                        cell["gap_prime_residue"],
                        cell["gap_residue_target"],
                        cell["gap_prime_target"],
                        srow.discrepancy,
                    ]
                )
    return header, rows
