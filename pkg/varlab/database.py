import aiosqlite
import sqlite3
import logging
from datetime import datetime, timezone
from typing import Optional, Dict, Any, List

from varlab.config import DATABASE_FILE

logger = logging.getLogger(__name__)

RUN_STATUSES = ('requested', 'running', 'completed', 'failed')


class RunLedger:
    """Records experiment runs in SQLite."""

    def __init__(self, db_path: str = DATABASE_FILE):
        self._db_path = db_path
        self._connection: Optional[aiosqlite.Connection] = None

    async def connect(self) -> None:
        """Establishes the database connection."""
        if self._connection is None:
            logger.info(f"Connecting to run ledger at {self._db_path}...")
            self._connection = await aiosqlite.connect(self._db_path)
            self._connection.row_factory = aiosqlite.Row
            try:
                await self._connection.execute("PRAGMA journal_mode=WAL;")
            except aiosqlite.Error as e:
                logger.warning(f"Could not enable WAL mode: {e}")
        else:
            logger.debug("Run ledger connection already established.")

    async def close(self) -> None:
        if self._connection:
            await self._connection.close()
            self._connection = None
            logger.info("Run ledger connection closed.")

    async def _get_connection(self) -> aiosqlite.Connection:
        """Ensures the connection is active and returns it."""
        if self._connection is None:
            await self.connect()
        if self._connection is None:
            raise ConnectionError("Run ledger connection is not available.")
        return self._connection

    @staticmethod
    def sync_init_db(db_path: str = DATABASE_FILE) -> None:
        """
        Synchronously creates the runs table if it doesn't exist.
        Uses standard sqlite3, intended for startup only.
        """
        logger.info(f"Initializing run ledger schema at {db_path}...")
        try:
            with sqlite3.connect(db_path) as db:
                try:
                    db.execute("PRAGMA journal_mode=WAL;")
                except sqlite3.Error as e:
                    logger.warning(f"Could not enable WAL mode during sync init: {e}")
                db.execute(f"""
                    CREATE TABLE IF NOT EXISTS runs (
                        run_id INTEGER PRIMARY KEY AUTOINCREMENT,
                        experiment TEXT NOT NULL,
                        seed INTEGER NOT NULL,
                        config_echo TEXT NOT NULL,
                        status TEXT NOT NULL CHECK(status IN {RUN_STATUSES}),
                        status_timestamp TEXT NOT NULL,
                        output_dir TEXT,
                        row_count INTEGER,
                        error_message TEXT
                    );
                """)
                db.execute("CREATE INDEX IF NOT EXISTS idx_runs_experiment ON runs (experiment);")
                db.execute("CREATE INDEX IF NOT EXISTS idx_runs_status ON runs (status);")
            logger.info("Run ledger schema ready.")
        except sqlite3.Error as e:
            logger.critical(f"Failed to initialize run ledger schema: {e}", exc_info=True)
            raise

    @staticmethod
    def _now_iso() -> str:
        """Returns the current time in UTC ISO 8601 format."""
        return datetime.now(timezone.utc).isoformat()

    async def create_run_record(self, experiment: str, seed: int, config_echo: str) -> Optional[int]:
        now = self._now_iso()
        db = await self._get_connection()
        cursor = await db.execute("""
            INSERT INTO runs (experiment, seed, config_echo, status, status_timestamp)
            VALUES (?, ?, ?, 'requested', ?)
        """, (experiment, seed, config_echo, now))
        await db.commit()
        run_id = cursor.lastrowid
        logger.info(f"Created run record (ID: {run_id}): experiment={experiment}, seed={seed}")
        return run_id

    async def update_run_status(
        self,
        run_id: int,
        status: str,
        error_message: Optional[str] = None,
        output_dir: Optional[str] = None,
        row_count: Optional[int] = None,
    ) -> None:
        if status not in RUN_STATUSES:
            raise ValueError(f"Unknown run status {status!r}")
        now = self._now_iso()
        db = await self._get_connection()
        await db.execute("""
            UPDATE runs
            SET status = ?, status_timestamp = ?, error_message = ?,
                output_dir = COALESCE(?, output_dir), row_count = COALESCE(?, row_count)
            WHERE run_id = ?
        """, (status, now, error_message, output_dir, row_count, run_id))
        await db.commit()
        logger.info(f"Updated run (ID: {run_id}) status to '{status}'" + (f" Error: {error_message}" if error_message else ""))

    async def get_run_status_counts(self) -> Dict[str, int]:
        query = "SELECT status, COUNT(*) as count FROM runs GROUP BY status"
        counts = {}
        db = await self._get_connection()
        async with db.execute(query) as cursor:  # type: ignore[union-attr]
            async for row in cursor:
                counts[row['status']] = row['count']
        return counts

    async def get_recent_runs(self, limit: int = 10) -> List[Dict[str, Any]]:
        query = """
            SELECT run_id, experiment, seed, status, status_timestamp, output_dir, row_count, error_message
            FROM runs
            ORDER BY run_id DESC
            LIMIT ?
        """
        runs = []
        db = await self._get_connection()
        async with db.execute(query, (limit,)) as cursor:  # type: ignore[union-attr]
            async for row in cursor:
                runs.append(dict(row))
        return runs
