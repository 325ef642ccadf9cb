"""Categorical response matrices: ingestion, listwise deletion, tabulation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .schema import SurveySchema

MISSING = 0


@dataclass(frozen=True, eq=False)
class ResponseMatrix:
    """n x J matrix of 1-based category codes; ``MISSING`` (0) marks a missing cell.

    The code array is made read-only on construction.
    """

    codes: np.ndarray
    schema: SurveySchema

    def __post_init__(self):
        codes = np.array(self.codes, dtype=np.int64, copy=True)
        if codes.ndim != 2 or codes.shape[1] != self.schema.n_indicators:
            raise DataError(
                f"codes must be n x {self.schema.n_indicators}, got shape {codes.shape}"
            )
        upper = np.asarray(self.schema.n_categories)
        bad = (codes != MISSING) & ((codes < 1) | (codes > upper))
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise DataError(
                f"row {i + 1}, column {self.schema.names[j]!r}: code {codes[i, j]} "
                f"outside 1..{upper[j]}"
            )
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def n_indicators(self) -> int:
        return self.codes.shape[1]

    @property
    def complete(self) -> bool:
        return not (self.codes == MISSING).any()

    def zero_based(self) -> np.ndarray:
        """Codes shifted to 0-based for the numerical kernels (requires a complete matrix)."""
        if not self.complete:
            raise DataError("matrix has missing cells; call drop_incomplete first")
        return self.codes - 1

    def __eq__(self, other):
        if not isinstance(other, ResponseMatrix):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.codes, other.codes)

    def __len__(self):
        return self.n


def _resolve_cell(text: str, indicator, lookup: dict, row: int) -> int:
    text = text.strip()
    if not text:
        return MISSING
    try:
        code = int(text)
    except ValueError:
        code = lookup.get(text.casefold())
        if code is None:
            raise DataError(
                f"row {row}, column {indicator.name!r}: unknown category label {text!r}"
            ) from None
        return code
    if not 1 <= code <= indicator.n_categories:
        raise DataError(
            f"row {row}, column {indicator.name!r}: code {code} outside "
            f"1..{indicator.n_categories}"
        )
    return code


def load_responses(source, schema: SurveySchema, delimiter: str = ",") -> ResponseMatrix:
    """Read a delimited file with a header row naming (a superset of) the schema indicators.

    ``source`` is a path or an open text stream. Cells may hold integer codes,
    outcome labels (matched case-insensitively), or nothing (missing).
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_responses(fh, schema, delimiter)

    reader = csv.reader(source, delimiter=delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError("empty dataset") from None
    positions = {name: i for i, name in enumerate(header)}
    absent = [name for name in schema.names if name not in positions]
    if absent:
        raise DataError(f"header missing schema indicators: {absent}")
    cols = [positions[name] for name in schema.names]
    lookups = [
        {label.strip().casefold(): k for k, label in enumerate(ind.labels, start=1)}
        for ind in schema.indicators
    ]

    rows = []
    for lineno, record in enumerate(reader, start=1):
        if not record:
            continue
        if len(record) < len(header):
            record = record + [""] * (len(header) - len(record))
        rows.append([
            _resolve_cell(record[c], ind, lut, lineno)
            for c, ind, lut in zip(cols, schema.indicators, lookups)
        ])
    if not rows:
        raise DataError("empty dataset")
    return ResponseMatrix(np.array(rows, dtype=np.int64), schema)


def write_responses(matrix: ResponseMatrix, sink, delimiter: str = ",") -> None:
    """Write integer codes with a header row; missing cells are left empty."""
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "w", newline="", encoding="utf-8") as fh:
            write_responses(matrix, fh, delimiter)
        return
    writer = csv.writer(sink, delimiter=delimiter, lineterminator="\n")
    writer.writerow(matrix.schema.names)
    for row in matrix.codes:
        writer.writerow(["" if c == MISSING else int(c) for c in row])


def responses_to_text(matrix: ResponseMatrix, delimiter: str = ",") -> str:
    buf = io.StringIO()
    write_responses(matrix, buf, delimiter)
    return buf.getvalue()


def drop_incomplete(matrix: ResponseMatrix) -> ResponseMatrix:
    """Listwise deletion: keep rows without missing cells, in their original order."""
    keep = ~(matrix.codes == MISSING).any(axis=1)
    if not keep.any():
        raise DataError("no complete cases")
    if keep.all():
        return matrix
    return ResponseMatrix(matrix.codes[keep], matrix.schema)


def tabulate(matrix: ResponseMatrix) -> list[np.ndarray]:
    """Relative outcome frequencies per indicator (one length-K_j vector each)."""
    if not matrix.complete:
        raise DataError("tabulate requires a complete matrix")
    out = []
    for j, k in enumerate(matrix.schema.n_categories):
        counts = np.bincount(matrix.codes[:, j] - 1, minlength=k).astype(float)
        out.append(counts / matrix.n)
    return out
