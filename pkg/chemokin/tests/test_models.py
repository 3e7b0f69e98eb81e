"""Tests for parameter, experiment and result models."""

import math
import tempfile
from pathlib import Path

import pytest
from pydantic import ValidationError

from chemokin.models import (
    Environment,
    ExperimentConfig,
    PhysParams,
    ResultTable,
    RunReport,
    Tier,
    read_table,
)


class TestPhysParams:
    """Test cases for PhysParams."""

    def test_defaults(self) -> None:
        """Test the reference parameter set."""
        p = PhysParams()

        assert p.v0 == pytest.approx(16.5 / math.sqrt(2.0))
        assert p.drift_scale == pytest.approx(1.0 / (4 * 6 * 1.7 * 0.005))

    def test_frozen(self) -> None:
        """Test that parameters are immutable."""
        with pytest.raises(ValidationError):
            PhysParams().kR = 0.01  # type: ignore[misc]

    def test_receptor_window(self) -> None:
        """Test that KI must be below KA."""
        with pytest.raises(ValidationError):
            PhysParams(KI=5000.0)

    def test_extra_rejected(self) -> None:
        """Test that unknown parameters are refused."""
        with pytest.raises(ValidationError):
            PhysParams(kr=0.01)  # type: ignore[call-arg]

    def test_environment_bounds(self) -> None:
        """Test that an empty domain is refused."""
        with pytest.raises(ValidationError):
            Environment(G=1e-3, x_min=10.0, x_max=10.0)
        assert Environment(G=0.0, x_min=0.0, x_max=5.0).length == 5.0


class TestExperimentConfig:
    """Test cases for ExperimentConfig."""

    def test_defaults(self) -> None:
        """Test an empty config."""
        config = ExperimentConfig()

        assert config.tier == Tier.CLOSURE
        assert config.env.gradients() == [1e-3]
        assert config.numerics.seed is None

    def test_sweep_preferred(self) -> None:
        """Test that a sweep wins over a single gradient."""
        config = ExperimentConfig.model_validate({"env": {"G": 1e-3, "G_sweep": [2e-3, 3e-3]}})
        assert config.env.gradients() == [2e-3, 3e-3]

    def test_activity_init_needs_value(self) -> None:
        """Test that init='activity' requires a_init."""
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"numerics": {"agents": {"init": "activity"}}})

    def test_eps_range(self) -> None:
        """Test that eps outside (0, 1) is refused."""
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"numerics": {"kinetic": {"eps_list": [0.1, 1.5]}}})


class TestResultTable:
    """Test cases for ResultTable output."""

    def test_write_and_read(self) -> None:
        """Test CSV with hash comment and unit headers plus JSON sidecar."""
        table = ResultTable(
            name="demo",
            columns={"G": [1e-3, 2e-3], "kappa": [1.5, math.nan]},
            units={"G": "1/um"},
            summary={"peak": math.inf},
        )
        with tempfile.TemporaryDirectory() as tmpdir:
            paths = table.write(Path(tmpdir), "abc123")
            csv_text = paths[0].read_text()
            frame = read_table(paths[0])
            json_text = paths[1].read_text()

        assert csv_text.startswith("# config_hash=abc123\n")
        assert list(frame.columns) == ["G [1/um]", "kappa"]
        assert math.isnan(frame["kappa"][1])
        assert '"peak": null' in json_text

    def test_summary_only(self) -> None:
        """Test that a table without columns writes only JSON."""
        with tempfile.TemporaryDirectory() as tmpdir:
            paths = ResultTable(name="only", summary={"x": 1}).write(Path(tmpdir), "h")
        assert [p.suffix for p in paths] == [".json"]

    def test_report_checks(self) -> None:
        """Test passed and failed_checks."""
        report = RunReport(tier="macro", config_hash="h", checks={"a": True, "b": False})

        assert not report.passed
        assert report.failed_checks == ["b"]


EXPERIMENTS = sorted((Path(__file__).resolve().parents[2] / "experiments").glob("*.json"))


class TestBundledExperiments:
    """Test cases for the example experiment files."""

    @pytest.mark.parametrize("path", EXPERIMENTS, ids=lambda p: p.stem)
    def test_validates(self, path: Path) -> None:
        """Test that every bundled experiment matches the schema."""
        ExperimentConfig.model_validate_json(path.read_text(encoding="utf-8"))
