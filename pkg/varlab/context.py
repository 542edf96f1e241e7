# varlab/context.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, TYPE_CHECKING

if TYPE_CHECKING:
    from varlab.database import RunLedger

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    """
    Per-invocation state handed to subcommand callbacks: the parsed settings,
    the values read from a --config file, the flags given on the command line,
    and shared objects such as the run ledger.
    """

    settings: Dict[str, Any] = field(default_factory=dict)
    file_values: Dict[str, str] = field(default_factory=dict)
    overrides: Dict[str, Any] = field(default_factory=dict)
    shared: Dict[str, Any] = field(default_factory=dict)

    @property
    def ledger(self) -> RunLedger:
        """The RunLedger stored in shared state."""
        ledger = self.shared.get('ledger')
        if ledger is None:
            logger.critical("RunLedger not found in shared state.")
            raise RuntimeError("RunLedger not initialized correctly.")

        if not TYPE_CHECKING:
            from varlab.database import RunLedger as ActualRunLedger
            if not isinstance(ledger, ActualRunLedger):
                logger.critical(f"Item 'ledger' in shared state is not a RunLedger instance, but {type(ledger)}.")
                raise RuntimeError("RunLedger in shared state is of incorrect type.")
        return ledger  # type: ignore[return-value]
