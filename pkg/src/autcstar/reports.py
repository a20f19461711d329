"""JSON envelopes and CSV tables for command output."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Iterable, Sequence

from .coeffs import Gaussian, format_scalar


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Gaussian):
        return format_scalar(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return obj.item()
    return obj


def envelope(inputs: dict, parameters: dict, results, warnings: Sequence[str] = ()) -> dict:
    return {
        "input": jsonable(inputs),
        "parameters": jsonable(parameters),
        "results": jsonable(results),
        "warnings": list(warnings),
    }


def dump_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def dump_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(c) for c in row])
    return buf.getvalue()


def _cell(c):
    if isinstance(c, float):
        return repr(c)
    if isinstance(c, (Fraction, Gaussian)):
        return str(jsonable(c))
    return c


def norm_rows(values: Sequence[tuple[int, float]]):
    return dump_csv(["n", "value"], values)


def spectrum_rows(reports) -> str:
    rows = []
    for rep in reports:
        for z, mult in rep.multiset():
            rows.append((rep.n, float(z.real), float(z.imag), mult))
    return dump_csv(["n", "re", "im", "multiplicity"], rows)


def block_rows(reports) -> str:
    rows = [(r.n, d, m) for r in reports for d, m in r.blocks]
    return dump_csv(["n", "d_i", "m_i"], rows)
