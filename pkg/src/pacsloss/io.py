"""CSV and JSON writers for sweep results.

Column orders are part of the public format:

* P_NW sweeps: ``gamma_t, p_nw, min_w, converged``
* EP sweeps: ``gamma_t, log_negativity, trace_norm, truncation_error``

Multi-series files (figure panels) prepend the series key (``alpha`` or
``m``).  JSON files hold ``{"columns": [...], "rows": [[...], ...],
"metadata": {...}}`` with rows in the same column order as the CSV.
"""

from __future__ import annotations

import csv
import json
from typing import Iterable, Sequence

from .entanglement import EntanglementReport
from .negativity import NegativityResult

PNW_COLUMNS = ("gamma_t", "p_nw", "min_w", "converged")
EP_COLUMNS = ("gamma_t", "log_negativity", "trace_norm", "truncation_error")


def pnw_row(gamma_t: float, res: NegativityResult) -> list:
    return [float(gamma_t), res.p_nw, res.min_value, bool(res.converged)]


def ep_row(gamma_t: float, rep: EntanglementReport) -> list:
    return [float(gamma_t), rep.log_negativity, rep.trace_norm, rep.truncation_error]


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(fh, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])


def write_json(fh, columns: Sequence[str], rows: Iterable[Sequence], metadata: dict | None = None) -> None:
    doc = {"columns": list(columns), "rows": [list(r) for r in rows], "metadata": metadata or {}}
    json.dump(doc, fh, indent=2, sort_keys=False)
    fh.write("\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]
