"""
Run reports: exact tables, check ledger and provenance, written as
JSON and as aligned text.
"""

import json
import logging
import platform
from dataclasses import dataclass, field
from importlib import metadata

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def package_versions():
    versions = {"python": platform.python_version()}
    for name in ("hdsector", "numpy", "scipy", "sympy", "pyyaml"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


@dataclass
class RunReport:
    """
    Stages appear in execution order. A stage that raised is kept in
    errors together with its inputs, and later stages are skipped.
    """

    command: str
    config_hash: str
    stages: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def add_check(self, stage, name, passed, **detail):
        self.checks.append(
            {
                "stage": stage,
                "name": name,
                "passed": bool(passed),
                **detail,
            }
        )
        if not passed:
            logger.warning("Check failed: %s / %s", stage, name)

    def add_identity(self, stage, check):
        detail = check.summary()
        del detail["name"], detail["passed"]
        self.add_check(stage, check.name, check.passed, **detail)

    def add_error(self, stage, error, inputs):
        self.errors.append(
            {
                "stage": stage,
                "type": type(error).__name__,
                "message": str(error),
                "inputs": inputs,
            }
        )
        logger.error("Stage %s failed: %s", stage, error)

    @property
    def passed(self):
        if self.errors:
            return False
        return all(c["passed"] for c in self.checks)

    def exit_code(self):
        if self.errors:
            return 2
        return 0 if self.passed else 1

    def as_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "provenance": {
                "configHash": self.config_hash,
                "versions": package_versions(),
            },
            "stages": self.stages,
            "checks": self.checks,
            "errors": self.errors,
            "passed": self.passed,
        }

    def to_json(self):
        text = json.dumps(self.as_dict(), indent=2, sort_keys=True)
        return text + "\n"

    def to_text(self):
        lines = [f"hdsector {self.command}", ""]
        for name, stage in self.stages.items():
            lines.append(f"[{name}]")
            for row in stage.get("table", []):
                lines.append(_align(row))
            lines.append("")
        lines.append("checks")
        width = max((len(c["name"]) for c in self.checks), default=0)
        for c in self.checks:
            mark = "PASS" if c["passed"] else "FAIL"
            lines.append(f"  {c['name']:<{width}}  {mark}")
        for e in self.errors:
            lines.append(f"  ERROR {e['stage']}: {e['message']}")
        lines.append("")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines) + "\n"

    def write(self, directory, formats):
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for fmt in formats:
            path = directory / f"{self.command}.{_SUFFIX[fmt]}"
            text = self.to_json() if fmt == "json" else self.to_text()
            path.write_text(text)
            paths.append(path)
        logger.info(
            "Report written to %s", ", ".join(map(str, paths))
        )
        return paths


_SUFFIX = {"json": "json", "text": "txt"}


def _align(row):
    cells = "  ".join(f"{str(cell):<14}" for cell in row)
    return "  " + cells.rstrip()
