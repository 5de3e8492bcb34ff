"""
Database models for simulation bookkeeping.

This module defines the SQLAlchemy ORM models for the results database.
"""

from datetime import datetime, timezone
from sqlalchemy import Column, Integer, String, Text, DateTime, Float, ForeignKey, JSON, Enum
from sqlalchemy.orm import DeclarativeBase, relationship
from src.utility_modules.enums import ErrorType, ErrorSeverity

def _utcnow() -> datetime:
    return datetime.now(timezone.utc)

class Base(DeclarativeBase):
    pass

class SimulationRun(Base):
    """Model for one call of the replicate runner."""
    __tablename__ = "simulation_runs"

    id = Column(Integer, primary_key=True)
    scenario = Column(String(50), nullable=False)
    status = Column(String(50), nullable=False, default="pending")
    base_seed = Column(Integer, nullable=True)
    replicates = Column(Integer, nullable=False, default=0)
    variants = Column(JSON, nullable=True)
    config = Column(JSON, nullable=True)
    replicates_completed = Column(Integer, default=0)
    replicates_failed = Column(Integer, default=0)
    error_message = Column(Text, nullable=True)
    start_time = Column(DateTime, default=_utcnow)
    end_time = Column(DateTime)
    created_at = Column(DateTime, default=_utcnow)
    updated_at = Column(DateTime, default=_utcnow, onupdate=_utcnow)

    # Relationships
    results = relationship("ReplicateResult", back_populates="run", cascade="all, delete-orphan")
    errors = relationship("ErrorLog", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<SimulationRun(id={self.id}, scenario='{self.scenario}', status='{self.status}')>"

class ReplicateResult(Base):
    """
    Model for one scored quantity of one replicate and variant.

    Estimand rows carry truth and interval bounds; prediction metric rows
    carry only ``value``.
    """
    __tablename__ = "replicate_results"

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("simulation_runs.id", ondelete="CASCADE"), nullable=False)
    replicate = Column(Integer, nullable=False)
    variant = Column(String(50), nullable=False)
    kind = Column(String(20), nullable=False)
    name = Column(String(100), nullable=False)
    outcome = Column(String(100), nullable=True)
    value = Column(Float, nullable=True)
    truth = Column(Float, nullable=True)
    lower = Column(Float, nullable=True)
    upper = Column(Float, nullable=True)
    created_at = Column(DateTime, default=_utcnow)

    # Relationships
    run = relationship("SimulationRun", back_populates="results")

    def __repr__(self):
        return f"<ReplicateResult(run_id={self.run_id}, replicate={self.replicate}, variant='{self.variant}', name='{self.name}')>"

class ErrorLog(Base):
    """Model for tracking failed replicates."""
    __tablename__ = "error_logs"

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("simulation_runs.id", ondelete="CASCADE"), nullable=False)
    replicate = Column(Integer, nullable=True)
    variant = Column(String(50), nullable=True)
    error_type = Column(Enum(ErrorType), nullable=False)
    severity = Column(Enum(ErrorSeverity), nullable=False)
    error_message = Column(Text, nullable=False)
    exception_class = Column(String(100))
    stack_trace = Column(Text)
    created_at = Column(DateTime, default=_utcnow)

    # Relationships
    run = relationship("SimulationRun", back_populates="errors")
