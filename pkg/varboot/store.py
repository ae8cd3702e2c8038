"""Module contains the SQLite ledger of experiment and rolling records."""
from __future__ import annotations

import json
import logging
import sqlite3
from functools import cached_property
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Iterable
from typing import Mapping
from typing import MutableMapping
from typing import Sequence

from .enumcls import ResultFetch
from .exceptions import ConfigError


__all__ = (
    "ResultStore",
    "RecordTable",
    "CreateTable",
    "Insert",
    "Select",
    "column_type",
)


TRecord = Mapping[str, Any]


def column_type(value: Any) -> str:
    """SQLite affinity for a python value."""
    if isinstance(value, (bool, int)):
        return "INTEGER"
    if isinstance(value, float):
        return "REAL"
    return "TEXT"


def _check_name(name: str) -> str:
    if not name.replace("_", "").isalnum():
        msg = f"Invalid table or column name '{name}'."
        raise ConfigError(msg)
    return name


class Insert:
    """Insert records into a table."""

    __slots__ = ("table",)

    def __init__(self, table: RecordTable) -> None:
        """Initialize."""
        self.table = table

    def query(self, record: TRecord) -> str:
        """Fetch insert query for the keys of ``record``."""
        names = ", ".join(f"`{_check_name(key)}`" for key in record)
        values = ", ".join(f":{key}" for key in record)
        return f"INSERT INTO `{self.table.name}` ({names}) VALUES({values})"  # noqa: S608

    def __call__(self, records: TRecord | Sequence[TRecord]) -> None:
        """Insert one record or many records sharing the first one's keys."""
        if not records:
            msg = "Records must not be empty."
            raise ValueError(msg)
        if isinstance(records, Mapping):
            records = (records,)
        self.table.execute(self.query(records[0]), records, many=True)


class Select:
    """Select records, optionally filtered by column equality."""

    __slots__ = ("table",)

    def __init__(self, table: RecordTable) -> None:
        """Initialize."""
        self.table = table

    def query(self, filter_by: TRecord) -> str:
        """Fetch select query with equality conditions."""
        query = f"SELECT * FROM `{self.table.name}`"  # noqa: S608
        for key in filter_by:
            _check_name(key)
        if filter_by:
            condition = " AND ".join(
                f"`{key}` is NULL" if value is None else f"`{key}` = :{key}"
                for key, value in filter_by.items()
            )
            query = f"{query} WHERE {condition}"
        return query

    def __call__(self, *, size: int = 0, **filter_by: Any) -> list[dict[str, Any]]:
        """Fetch matching rows as dicts, at most ``size`` when given."""
        result = self.table.execute(
            self.query(filter_by),
            filter_by,
            size=size or None,
            result=ResultFetch.fetchmany if size else ResultFetch.fetchall,
        )
        names = self.table.column_names
        return [dict(zip(names, row)) for row in result or ()]


class RecordTable:
    """Table view with insert and select operations."""

    def __init__(self, name: str, store: ResultStore) -> None:
        """Initialize."""
        self.name = _check_name(name)
        self.store = store
        self.insert = Insert(self)
        self.select = Select(self)

    @property
    def execute(self) -> Callable[..., list[Any] | None]:
        """Execute of the owning store."""
        return self.store.execute

    @cached_property
    def column_names(self) -> tuple[str, ...]:
        """Lower-case column names."""
        stmt = f"SELECT name FROM PRAGMA_TABLE_INFO('{self.name}');"
        result = self.store.execute(stmt, result=ResultFetch.fetchall) or []
        return tuple(name[0].lower() for name in result)

    def __len__(self) -> int:
        """Row count."""
        result = self.store.execute(
            f"SELECT COUNT(*) FROM `{self.name}`",  # noqa: S608
            result=ResultFetch.fetchone,
        )
        return int(result[0]) if result else 0

    def __repr__(self) -> str:
        """Repr view."""
        return f"<{self.__class__.__name__}: {self.name}>"


class CreateTable:
    """Create table from column names or a name to type mapping."""

    __slots__ = ("store",)

    def __init__(self, store: ResultStore) -> None:
        """Initialize."""
        self.store = store

    def query(
        self,
        table_name: str,
        columns: Sequence[str] | Mapping[str, str],
        *,
        if_not_exists: bool = True,
    ) -> str:
        """Fetch create table query."""
        if isinstance(columns, Mapping):
            body = ", ".join(
                f"`{_check_name(key)}` {value}"
                for key, value in columns.items()
            )
        else:
            body = ", ".join(f"`{_check_name(name)}`" for name in columns)
        guard = "IF NOT EXISTS " if if_not_exists else ""
        return f"CREATE TABLE {guard}`{_check_name(table_name)}` ({body})"

    def __call__(
        self,
        table_name: str,
        columns: Sequence[str] | Mapping[str, str],
        *,
        if_not_exists: bool = True,
    ) -> RecordTable:
        """Create table and return its view."""
        self.store.execute(self.query(table_name, columns, if_not_exists=if_not_exists))
        return self.store.table(table_name)


class ResultStore:
    """SQLite file holding run configs and per-item records."""

    RUNS_TABLE = "runs"

    def __init__(
        self,
        path: str | Path,
        *,
        debug: bool = False,
        **connect_params: Any,
    ) -> None:
        """Initialize."""
        if debug:
            logging.basicConfig(level=logging.DEBUG)
        self.path = str(path)
        self.connect = sqlite3.connect(self.path, **connect_params)
        self.table_names: set[str] = set()
        self.create_table = CreateTable(self)
        self.initialize_tables()

    def initialize_tables(self) -> None:
        """Refresh the set of existing table names."""
        stmt = (
            "SELECT name FROM sqlite_master "
            "WHERE type='table' AND substr(`name`, 1, 6) != 'sqlite';"
        )
        result = self.execute(stmt, result=ResultFetch.fetchall) or []
        self.table_names = {name[0].lower() for name in result}

    def execute(
        self,
        query: str,
        parameters: MutableMapping[str, Any] | Sequence[Any] | Iterable[Any] = (),
        *,
        many: bool = False,
        size: int | None = None,
        result: ResultFetch | None = None,
    ) -> list[Any] | None:
        """Single execute with optional fetch.

        Args:
            query (str): sql query
            parameters (MutableMapping | Sequence): data for executing.
            many (bool): flag for executemany operation. Defaults to False.
            size (int | None): size for fetchmany operation. Defaults to None.
            result (ResultFetch | None): enum for fetch func. Defaults to None.

        Returns:
            list[Any] or None

        """
        command = query.partition(" ")[0].lower()
        cursor = self.connect.cursor()
        logging.debug(query)
        if many:
            cursor.executemany(query, parameters)
        else:
            cursor.execute(query, parameters)
        if command in {"insert", "delete", "update", "create", "drop"}:
            self.connect.commit()
        if command in {"create", "drop"}:
            self.initialize_tables()
        if result is None:
            return None
        fetch: Callable[..., list[Any]] = getattr(cursor, ResultFetch(result).value)
        if result is ResultFetch.fetchmany:
            return fetch(size=size)
        return fetch()

    def table(self, name: str) -> RecordTable:
        """View of an existing table."""
        if name.lower() not in self.table_names:
            msg = f"Table '{name}' does not exist."
            raise ConfigError(msg)
        return RecordTable(name, self)

    def save_records(self, name: str, records: Sequence[TRecord]) -> RecordTable:
        """Create ``name`` with the union of record columns and insert all records."""
        if not records:
            msg = "Records must not be empty."
            raise ValueError(msg)
        keys = list(dict.fromkeys(key for record in records for key in record))
        columns = {
            key: column_type(next(
                (record[key] for record in records if record.get(key) is not None),
                None,
            ))
            for key in keys
        }
        table = self.create_table(name, columns)
        table.insert([{key: record.get(key) for key in keys} for record in records])
        return table

    def save_run(
        self,
        command: str,
        config: Mapping[str, Any],
        records: Sequence[TRecord],
    ) -> int:
        """Log a run in ``runs`` and its records in ``<command>_<run id>``."""
        runs = self.create_table(
            self.RUNS_TABLE,
            {
                "id": "INTEGER PRIMARY KEY",
                "command": "TEXT",
                "config": "TEXT",
                "records": "TEXT",
            },
        )
        latest = self.execute(
            f"SELECT COALESCE(MAX(id), 0) FROM `{self.RUNS_TABLE}`",  # noqa: S608
            result=ResultFetch.fetchone,
        )
        run_id = int(latest[0]) + 1 if latest else 1
        name = f"{_check_name(command)}_{run_id}"
        if records:
            self.save_records(name, records)
        runs.insert({
            "id": run_id,
            "command": command,
            "config": json.dumps(config, sort_keys=True),
            "records": name if records else None,
        })
        logging.info("Stored run %s in %s.", run_id, self.path)
        return run_id

    def close(self) -> None:
        """Close connection."""
        self.connect.close()

    def __enter__(self) -> ResultStore:
        """Create context manager."""
        return self

    def __exit__(self, *args: Any) -> None:
        """Close connection."""
        self.close()
