"""Tests for the chemokin command line."""

import json
import tempfile
from collections.abc import Generator
from pathlib import Path
from typing import Any

import pytest

from chemokin.cli.run import EXIT_CHECKS_FAILED, EXIT_FAILURE, EXIT_INVALID_CONFIG, main


@pytest.fixture
def workdir() -> Generator[Path]:
    """Temporary directory for configs and outputs."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def write_config(directory: Path, payload: dict[str, Any]) -> str:
    """Write an experiment JSON and return its path."""
    path = directory / "experiment.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


class TestMain:
    """Test cases for main()."""

    def test_closure_command(self, workdir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test a closure run with its JSON report on stdout."""
        config = write_config(workdir, {"env": {"G": 1e-3}, "numerics": {"closure": {"nodes": 128}}})

        status = main(["closure", "--config", config, "--out", str(workdir / "out")])
        report = json.loads(capsys.readouterr().out)

        assert status == 0
        assert report["tier"] == "closure"
        assert report["passed"]
        assert (workdir / "out" / "closure" / "closure_summary.csv").exists()

    def test_run_dispatches_on_tier(self, workdir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that ``run`` picks the command from the config tier."""
        config = write_config(
            workdir,
            {
                "tier": "macro",
                "env": {"G": 1e-3},
                "numerics": {"closure": {"nodes": 128}, "macro": {"t_final": 10.0}},
            },
        )

        assert main(["run", "--config", config, "--out", str(workdir)]) == 0
        assert json.loads(capsys.readouterr().out)["tier"] == "macro"

    def test_unknown_key(self, workdir: Path) -> None:
        """Test exit status 2 for a config that fails validation."""
        config = write_config(workdir, {"env": {"G": 1e-3, "slope": 2}})
        assert main(["closure", "--config", config]) == EXIT_INVALID_CONFIG

    def test_missing_config(self, workdir: Path) -> None:
        """Test exit status 2 for an unreadable config file."""
        assert main(["closure", "--config", str(workdir / "absent.json")]) == EXIT_INVALID_CONFIG

    def test_no_command(self) -> None:
        """Test that a bare invocation prints help and fails."""
        assert main([]) == EXIT_FAILURE

    def test_domain_failure(self, workdir: Path) -> None:
        """Test exit status 1 when a command raises a domain error."""
        config = write_config(workdir, {"env": {"G": 0.0}, "numerics": {"macro": {"t_final": 1.0}}})
        assert main(["macro", "--config", config, "--out", str(workdir)]) == EXIT_FAILURE

    def test_negative_seed(self) -> None:
        """Test that argparse rejects a negative seed."""
        with pytest.raises(SystemExit):
            main(["closure", "--seed", "-1"])

    def test_strict_failure(self, workdir: Path) -> None:
        """Test exit status 3 when a check fails under --strict."""
        config = write_config(
            workdir,
            {
                "env": {"G": 1e-3},
                "numerics": {
                    "closure": {"nodes": 128},
                    "agents": {"agent_count": 100, "window": 100, "max_time": 0.5, "burn_in": 0.0},
                },
            },
        )
        args = ["agents", "--config", config, "--out", str(workdir)]

        assert main([*args, "--strict"]) == EXIT_CHECKS_FAILED
        assert main(args) == 0

    def test_list_commands(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that list prints every registered command and tags the slow ones."""
        assert main(["list"]) == 0
        lines = capsys.readouterr().out.splitlines()

        assert len(lines) == 7
        assert lines[0].startswith("closure")
        assert any(line.startswith("agents") and line.endswith("[slow]") for line in lines)

    def test_list_fast_commands(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that --fast drops commands flagged slow."""
        assert main(["list", "--fast"]) == 0
        names = [line.split()[0] for line in capsys.readouterr().out.splitlines()]

        assert names == ["closure", "macro", "velocity-sweep"]
