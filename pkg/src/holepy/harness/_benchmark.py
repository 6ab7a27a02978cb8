"""Punch, fill and measure: comparison tables of the fill methods."""

import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union
import numpy as np
import pandas as pd

from holepy.harness._punch import PunchSpec, punch
from holepy.harness._shapes import SyntheticShape, generate
from holepy.holes._fill import FillMethod, fill_all_holes
from holepy.mesh._mesh import boundary_loops
from holepy.metrics._distance import hausdorff_report
from holepy.utilities._config import RunConfig
from holepy.utilities._util import generate_filename_and_mkdir, stopwatch

logger = logging.getLogger(__name__)

COLUMNS = [
    "shape",
    "faces",
    "holes",
    "method",
    "delta_max",
    "delta_max_normalized",
    "delta_avg",
    "delta_avg_normalized",
    "new_vertices",
    "new_faces",
    "runtime_ms",
    "seed",
    "status",
]

ALL_METHODS = [method.value for method in FillMethod]


def parse_methods(names: Union[str, Iterable[str]]) -> List[FillMethod]:
    """Fill methods from a comma separated list, or "all".

    :raises ValueError: on an unknown name
    """
    if isinstance(names, str):
        names = [name.strip() for name in names.split(",") if name.strip()]
    names = list(names)
    if not names:
        raise ValueError("No fill method given")
    if names == ["all"]:
        names = list(ALL_METHODS)
    methods = []
    for name in names:
        try:
            methods.append(FillMethod.parse(name))
        except ValueError as err:
            raise ValueError(
                f"Unknown fill method '{name}', expected one of {ALL_METHODS}"
            ) from err
    return methods


def run_benchmark(
    shape: SyntheticShape,
    spec: Optional[PunchSpec],
    methods: Sequence[Union[str, FillMethod]],
    config: Optional[RunConfig] = None,
) -> pd.DataFrame:
    """Compares fill methods on a punched synthetic shape.

    The shape is generated and punched once. Each method fills its own
    copy of the punched mesh, which is then measured against the
    unpunched original. A method whose fill fails for some holes still
    gets measured and is marked "partial"; one that raises is marked
    "failed" with empty distances.

    :param shape: Shape to generate.
    :type shape: SyntheticShape
    :param spec: Holes to punch, or None for none.
    :type spec: PunchSpec or None
    :param methods: Fill methods, by value or name.
    :type methods: list of FillMethod or str
    :param config: Optional - Thresholds, sampling and seed.
    :type config: RunConfig or None
    :return: One row per method, columns as in COLUMNS.
    :rtype: pandas.DataFrame
    """
    config = RunConfig() if config is None else config
    if not shape.kind.is_closed and not config.open_surface:
        config = config.replace(open_surface=True)
    methods = [m if isinstance(m, FillMethod) else FillMethod.parse(m) for m in methods]
    sampling = config.sampling_spec()

    original = generate(shape)
    if spec is None:
        punched = original.copy()
    else:
        punched, record = punch(original, spec)
        logger.info("Punched %s: %s", shape.kind.value, record.to_dict())
    holes = len(boundary_loops(punched)) - (0 if shape.kind.is_closed else 1)

    rows = []
    for method in methods:
        mesh = punched.copy()
        row = {
            "shape": shape.kind.value,
            "faces": original.face_count,
            "holes": holes,
            "method": method.value,
            "seed": config.seed,
        }
        try:
            with stopwatch() as elapsed:
                report = fill_all_holes(mesh, config, method)
            distance = hausdorff_report(mesh, original, sampling)
        except (ValueError, RuntimeError) as err:
            logger.warning("Method %s failed on %s: %s", method.value, shape.kind.value, err)
            row.update(status="failed", runtime_ms=np.nan)
            rows.append(row)
            continue
        row.update(
            delta_max=distance.delta_max,
            delta_max_normalized=distance.delta_max_normalized,
            delta_avg=distance.delta_avg,
            delta_avg_normalized=distance.delta_avg_normalized,
            new_vertices=report.new_vertices,
            new_faces=report.new_faces,
            runtime_ms=elapsed[0] if config.record_timing else np.nan,
            status="ok" if report.all_filled else "partial",
        )
        logger.info(
            "%s on %s: delta_max %.6g, delta_avg %.6g (%s)",
            method.value,
            shape.kind.value,
            distance.delta_max_normalized,
            distance.delta_avg_normalized,
            row["status"],
        )
        rows.append(row)
    table = pd.DataFrame(rows, columns=COLUMNS)
    return table.astype({"new_vertices": "Int64", "new_faces": "Int64"})


def format_table(table: pd.DataFrame) -> str:
    """The table as aligned text."""
    return table.to_string(index=False, na_rep="")


def write_table(table: pd.DataFrame, filename: Union[str, Path]) -> Path:
    """Writes a benchmark table to a .csv or .xlsx file.

    :raises ValueError: on any other file extension
    """
    filename, filetype = generate_filename_and_mkdir(filename)
    if filetype == "csv":
        table.to_csv(filename, index=False)
    elif filetype == "xlsx":
        table.to_excel(filename, index=False, engine="openpyxl")
    else:
        raise ValueError(f"Unsupported table format '.{filetype}', use .csv or .xlsx")
    logger.info("Wrote %d rows to %s", len(table), filename)
    return filename
