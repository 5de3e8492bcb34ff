"""
Database connection module for the simulation results store.

This module provides functions to connect to the database and create sessions.
"""

from functools import lru_cache
from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import sessionmaker

from config.config import get_config
from src.database_management.models import Base

def get_connection_string() -> str:
    """
    Get the database connection string from the configuration.

    Returns:
        str: Database connection string
    """
    return get_config().database.url

def create_database_engine(url: Optional[str] = None) -> Engine:
    """
    Create a SQLAlchemy engine for the database.

    Args:
        url (Optional[str]): Connection string; the configured one when omitted

    Returns:
        Engine: SQLAlchemy engine
    """
    config = get_config()
    return create_engine(
        url or get_connection_string(),
        echo=config.database.echo,
        pool_pre_ping=True,
    )

@lru_cache(maxsize=None)
def get_engine(url: Optional[str] = None) -> Engine:
    """Engine per connection string, created on first use."""
    return create_database_engine(url)

def get_session_factory(url: Optional[str] = None) -> sessionmaker:
    return sessionmaker(autocommit=False, autoflush=False, bind=get_engine(url))

def init_db(url: Optional[str] = None, drop_all: bool = False) -> Engine:
    """
    Initialize the database by creating all tables.

    Args:
        url (Optional[str]): Connection string; the configured one when omitted
        drop_all (bool): If True, drop all tables before creating them

    Returns:
        Engine: The engine the tables were created on
    """
    engine = get_engine(url)
    if drop_all:
        Base.metadata.drop_all(bind=engine)
    Base.metadata.create_all(bind=engine)
    return engine
