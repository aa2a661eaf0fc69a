"""Machine-readable reports"""
import csv
import io
import json
import logging
import math
from typing import Any, Dict, Iterable, Optional, Sequence

import click
import numpy as np
from pydantic import BaseModel, Field

from . import __version__

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
CSV_COLUMNS = ("theta", "prep_index", "outcome_index", "probability")


class Report(BaseModel):
    """Command echo, inputs, results and verdicts; field order is the key order on disk"""

    schema_version: str = Field(default=SCHEMA_VERSION, description="Report schema version")
    tool: str = Field(default="trispin", description="Tool name")
    version: str = Field(default=__version__, description="Tool version")
    command: str = Field(..., description="Command that produced the report")
    parameters: Dict[str, Any] = Field(default_factory=dict, description="Validated input parameters")
    result: Dict[str, Any] = Field(default_factory=dict, description="Tables, matchings, spectra and bounds")
    verdicts: Dict[str, bool] = Field(default_factory=dict, description="Named pass/fail verdicts")

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def dumps(self) -> str:
        """Indented JSON; floats use the shortest repr that round-trips, at most 17 significant digits"""
        payload = {**self.model_dump(), "passed": self.passed}
        return json.dumps(to_jsonable(payload), indent=2, allow_nan=False) + "\n"


def to_jsonable(value: Any) -> Any:
    """Plain Python containers and scalars; complex numbers become [re, im]"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} cannot be reported")
        return value
    return value


def scan_csv(thetas: Sequence[float], tables: Iterable[np.ndarray]) -> str:
    """One row per (theta, preparation, outcome), 1-based indices"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for theta, table in zip(thetas, tables):
        for (i, k), p in np.ndenumerate(table):
            writer.writerow((repr(float(theta)), i + 1, k + 1, repr(float(p))))
    return buffer.getvalue()


def write_output(text: str, out: Optional[str]) -> None:
    """Write to `out`, or stdout when no file is given"""
    if out:
        with click.open_file(out, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info(f"Report written to {out}")
    else:
        click.echo(text, nl=False)
