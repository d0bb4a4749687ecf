"""Side-by-side results table for the LP and SoS lanes.

Consumes run records produced by either lane (the JSON files written next
to certificates) and merges them into one fixed 10-column CSV row per
line of the benchmark table: degree, tightening knob, time, certified
level and problem size for both methods.
"""

from __future__ import annotations

import csv
import io
import json

COLUMNS = ("bern_m", "bern_kappa", "bern_t_s", "bern_delta_s", "bern_m_c",
           "sos_m", "sos_m_lambda", "sos_t_s", "sos_delta_s", "sos_m_c")


def _problem_of(record: dict) -> str:
    return str(record.get("problem", ""))


def _bern_cells(r: dict) -> list:
    return [r["m"], r.get("kappa", r.get("knob", "")),
            f"{float(r['wall_time_s']):.3f}", f"{float(r['delta_s']):.4f}",
            f"{r['variables']}/{r['constraints']}"]


def _sos_cells(r: dict) -> list:
    meta = r.get("meta", r)
    return [meta["m"], meta["m_lambda"],
            f"{float(meta['wall_time_s']):.3f}",
            f"{float(r.get('delta_s', meta.get('delta_s'))):.4f}",
            f"{meta['variables']}/{meta['constraints']}"]


def compare(bernstein_records: list, sos_records: list) -> list:
    """Merged rows (header first); records must target the same problem."""
    problems = {_problem_of(r) for r in bernstein_records}
    problems |= {_problem_of(r.get("meta", r)) for r in sos_records}
    problems.discard("")
    if len(problems) > 1:
        raise ValueError(f"records mix problems: {sorted(problems)}")
    rows = [list(COLUMNS)]
    for i in range(max(len(bernstein_records), len(sos_records))):
        bern = (_bern_cells(bernstein_records[i])
                if i < len(bernstein_records) else [""] * 5)
        sos = _sos_cells(sos_records[i]) if i < len(sos_records) else [""] * 5
        rows.append(bern + sos)
    return rows


def compare_csv(bernstein_records: list, sos_records: list) -> str:
    buf = io.StringIO()
    csv.writer(buf).writerows(compare(bernstein_records, sos_records))
    return buf.getvalue()


def load_records(paths: list) -> list:
    out = []
    for p in paths:
        with open(p) as fh:
            out.append(json.load(fh))
    return out
