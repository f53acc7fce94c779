"""The worked drug-trial tables, shipped as count CSVs.

``table3`` / ``table4`` are the first trial (pooled, and split by sex);
``table5`` / ``table6`` are the balanced second trial (split by sex, and
by sex and age).  Labels: Drug and Recovered use ``No``/``Yes``, Sex uses
``Female``/``Male`` and Age uses ``40+``/``<40``.
"""

from __future__ import annotations

from importlib import resources

from .io import read_table_csv
from .tables import ContingencyTable, Outcome, Treatment

DRUG = Treatment("Drug", treated="Yes", control="No")
RECOVERED = Outcome("Recovered", success="Yes")

# Fred and Jane: (yearly average, modules taken) per year.
COURSE_RESULTS = {
    "Fred": [(50, 7), (70, 3)],
    "Jane": [(40, 2), (62, 8)],
}


def data_path(name: str):
    return resources.files("simpsons") / "data" / f"{name}.csv"


def load(name: str) -> ContingencyTable:
    with resources.as_file(data_path(name)) as path:
        return read_table_csv(path, counts=True)


def table3() -> ContingencyTable:
    return load("table3")


def table4() -> ContingencyTable:
    return load("table4")


def table5() -> ContingencyTable:
    return load("table5")


def table6() -> ContingencyTable:
    return load("table6")
