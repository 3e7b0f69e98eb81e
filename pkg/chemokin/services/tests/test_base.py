"""Tests for the tier command registry."""

import pytest

from chemokin.models import ExperimentConfig, RunReport
from chemokin.services.base import TierCommand, TierRegistry, get_tier_registry


def _noop(config: ExperimentConfig) -> RunReport:
    raise NotImplementedError


class TestTierRegistry:
    """Test cases for TierRegistry."""

    @pytest.fixture
    def registry(self) -> TierRegistry:
        """Registry with three commands."""
        registry = TierRegistry()
        registry.register(TierCommand(name="macro", run_fn=_noop, priority=70))
        registry.register(TierCommand(name="closure", run_fn=_noop, priority=10))
        registry.register(TierCommand(name="agents", run_fn=_noop, priority=20, slow=True))
        return registry

    def test_priority_order(self, registry: TierRegistry) -> None:
        """Test that commands are listed by priority."""
        assert [c.name for c in registry.get_all()] == ["closure", "agents", "macro"]

    def test_duplicate_rejected(self, registry: TierRegistry) -> None:
        """Test that registering a name twice raises."""
        with pytest.raises(ValueError):
            registry.register(TierCommand(name="closure", run_fn=_noop))

    def test_fast_commands(self, registry: TierRegistry) -> None:
        """Test filtering out slow commands."""
        assert [c.name for c in registry.get_fast()] == ["closure", "macro"]

    def test_get_missing(self, registry: TierRegistry) -> None:
        """Test lookup of an unknown name."""
        assert registry.get("kinetic") is None
        assert registry.get("closure") is not None

    def test_global_registry_is_singleton(self) -> None:
        """Test that the global getter returns one instance."""
        assert get_tier_registry() is get_tier_registry()
