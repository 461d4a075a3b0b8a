import logging

from sqlalchemy import MetaData, Table, insert, select, text, update
from sqlalchemy.exc import SQLAlchemyError

logger = logging.getLogger(__name__)


def insert_data(engine, table_name: str, data: dict):
    """
    Insert a row into a table.

    Args:
        engine: SQLAlchemy engine
        table_name: Name of the table
        data: Dictionary of column-value pairs

    Returns:
        Inserted row's primary key ID, or None on failure
    """
    try:
        table = Table(table_name, MetaData(), autoload_with=engine)

        with engine.connect() as connection:
            result = connection.execute(insert(table).values(data))
            connection.commit()
            inserted_id = result.inserted_primary_key[0]
            logger.debug("inserted row %s into '%s'", inserted_id, table_name)
            return inserted_id
    except SQLAlchemyError as e:
        logger.error("Error inserting into '%s': %s", table_name, e)
        return None


def get_all(engine, table_name: str):
    """
    Get all rows from a table.

    Returns:
        List of rows as dictionaries, or None on failure
    """
    try:
        table = Table(table_name, MetaData(), autoload_with=engine)

        with engine.connect() as connection:
            rows = [row._asdict() for row in connection.execute(select(table))]
            logger.debug("fetched %d rows from '%s'", len(rows), table_name)
            return rows
    except SQLAlchemyError as e:
        logger.error("Error fetching from '%s': %s", table_name, e)
        return None


def get_by_query(engine, query: str, params: dict = None):
    """
    Run a SQL query with bound parameters and return the rows.

    Values must go through params, never into the query string.

    Returns:
        List of rows as dictionaries, or None on failure
    """
    try:
        with engine.connect() as connection:
            rows = [row._asdict() for row in connection.execute(text(query), params or {})]
            logger.debug("query returned %d rows", len(rows))
            return rows
    except SQLAlchemyError as e:
        logger.error("Error executing query: %s", e)
        return None


def update_data(engine, table_name: str, row_id: int, data: dict) -> bool:
    """
    Update one row by primary key.

    Returns:
        True when a row was changed, False otherwise
    """
    try:
        table = Table(table_name, MetaData(), autoload_with=engine)

        with engine.connect() as connection:
            result = connection.execute(update(table).where(table.c.id == row_id).values(data))
            connection.commit()
            return result.rowcount == 1
    except SQLAlchemyError as e:
        logger.error("Error updating '%s': %s", table_name, e)
        return False
