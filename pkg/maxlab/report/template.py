from datetime import datetime
from pathlib import Path
from typing import Dict


class SummaryTemplate:
    """
    Plain-text summary of one run, written next to the artifacts when
    [outputs] summary is enabled.
    """

    TEMPLATE = """maxlab run summary

──────────────────────────────────────
Run
──────────────────────────────────────

• Command: {command}

• Seed: {seed}

• Date: {date}

• Duration: {duration}

──────────────────────────────────────
Checks
──────────────────────────────────────

• Total: {total}

• Passed: {passed}

• Failed: {failed}

• Failure Rate: {fail_rate}%

{threshold_lines}
──────────────────────────────────────
Artifacts
──────────────────────────────────────

{artifact_lines}
"""

    def __init__(self, data: Dict):
        """
        Args:
            data: dictionary with keys
                - command (str): the subcommand line that ran
                - seed (int): base seed
                - duration (str): wall time of the run
                - total (int): number of checks (reports or table rows)
                - passed (int): checks that passed
                - failed (int): checks that failed
                - date (str, optional): run date (default: now)
                - thresholds (list of (name, value, limit, ok), optional)
                - artifacts (list of str, optional): written files
        """
        self.data = dict(data)
        self._validate_data()
        self._calculate_failure_rate()

    def _validate_data(self):
        required_fields = ["command", "seed", "duration", "total", "passed", "failed"]
        missing_fields = [field for field in required_fields if field not in self.data]
        if missing_fields:
            raise ValueError(f"Missing required fields: {', '.join(missing_fields)}")

    def _calculate_failure_rate(self):
        total = self.data.get("total", 0)
        failed = self.data.get("failed", 0)
        self.data["fail_rate"] = round(failed / total * 100, 2) if total > 0 else 0.0

    def _threshold_lines(self) -> str:
        lines = []
        for name, value, limit, ok in self.data.get("thresholds", []):
            shown = "n/a" if value is None else f"{value:.4g}"
            lines.append(f"• {name}: {shown} against {limit:g} [{'ok' if ok else 'FAIL'}]\n")
        return "\n".join(lines)

    def prepare_body(self) -> str:
        if not self.data.get("date"):
            self.data["date"] = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        artifacts = self.data.get("artifacts") or []
        fields = {
            **self.data,
            "threshold_lines": self._threshold_lines(),
            "artifact_lines": "\n".join(f"• {a}" for a in artifacts) if artifacts else "• none",
        }
        try:
            return self.TEMPLATE.format(**fields)
        except KeyError as e:
            raise ValueError(f"Missing template variable: {e}")

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.prepare_body(), encoding="utf-8")
        return path
