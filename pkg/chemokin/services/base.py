"""
Base infrastructure for the tier registry.

Provides a registry of harness commands (closure, agents, kinetic, ...)
so the CLI can dispatch by name and list what is available.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from chemokin.models import ExperimentConfig, RunReport

logger = logging.getLogger(__name__)


@dataclass
class TierCommand:
    """
    Represents a runnable harness command.

    Each command has a CLI name, a run function taking a resolved
    ExperimentConfig, and an optional flag for long-running commands.
    """

    name: str
    """Unique CLI name (e.g., 'closure', 'velocity-sweep')"""

    run_fn: Callable[["ExperimentConfig"], "RunReport"]
    """Function that runs the command and returns its report."""

    priority: int = 100
    """Lower priority commands are listed first. Default is 100."""

    description: str = ""
    """Human-readable description shown in the CLI help."""

    slow: bool = False
    """True for commands that run simulations at desk scale."""

    def run(self, config: "ExperimentConfig") -> "RunReport":
        """Run this command on a resolved config."""
        logger.info("Running tier command: %s", self.name)
        return self.run_fn(config)


@dataclass
class TierRegistry:
    """
    Registry for harness commands.

    Usage:
        registry = TierRegistry()
        registry.register(TierCommand(
            name="closure",
            run_fn=cmd_closure,
            description="Analytic closure profiles",
        ))

        report = registry.get("closure").run(config)
    """

    _commands: dict[str, TierCommand] = field(default_factory=dict)

    def register(self, command: TierCommand) -> None:
        """
        Register a command.

        Args:
            command: TierCommand to register

        Raises:
            ValueError: If a command with the same name is already registered
        """
        if command.name in self._commands:
            raise ValueError(f"Tier command '{command.name}' is already registered")

        self._commands[command.name] = command
        logger.debug("Registered tier command: %s", command.name)

    def get(self, name: str) -> TierCommand | None:
        """Get a specific command by name."""
        return self._commands.get(name)

    def get_all(self) -> list[TierCommand]:
        """Get all registered commands, sorted by priority."""
        return sorted(self._commands.values(), key=lambda c: c.priority)

    def get_fast(self) -> list[TierCommand]:
        """Get commands that are not marked slow."""
        return [c for c in self.get_all() if not c.slow]

    def __contains__(self, name: str) -> bool:
        """Check if a command is registered."""
        return name in self._commands


# Global registry instance
_registry: TierRegistry | None = None


def get_tier_registry() -> TierRegistry:
    """
    Get the global tier registry.

    Returns:
        The singleton TierRegistry instance
    """
    global _registry
    if _registry is None:
        _registry = TierRegistry()
    return _registry
