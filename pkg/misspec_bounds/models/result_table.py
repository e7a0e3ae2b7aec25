from dataclasses import dataclass, field
from typing import Dict, List

import pandas as pd


@dataclass(frozen=True)
class CheckOutcome:
    """
    One named scientific assertion evaluated by a scenario.

    Attributes:
        name (str): Identifier reported on failure.
        passed (bool): Whether the assertion held.
        detail (str): Values behind the verdict.
    """
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ResultTable:
    """
    One CSV worth of scenario output, one row per sweep point.

    Attributes:
        name (str): File stem, e.g. "box1" or "box1_bias".
        frame (pd.DataFrame): Rows in sweep order with a fixed column set.
    """
    name: str
    frame: pd.DataFrame

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)


@dataclass(frozen=True)
class ScenarioResult:
    """
    Tables and assertion outcomes of one scenario run.

    Attributes:
        scenario (str): Scenario name.
        tables (Dict[str, ResultTable]): Emitted tables by name, in emission order.
        checks (List[CheckOutcome]): Assertions in evaluation order.
    """
    scenario: str
    tables: Dict[str, ResultTable] = field(default_factory=dict)
    checks: List[CheckOutcome] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failures(self) -> List[CheckOutcome]:
        return [c for c in self.checks if not c.passed]
