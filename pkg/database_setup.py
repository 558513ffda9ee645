import os
import json
import functools
from sqlalchemy import create_engine, Column, Integer, String, Text, UniqueConstraint
from sqlalchemy.orm import sessionmaker
from sqlalchemy.ext.declarative import declarative_base

from scdb_ingest import VoteRecord, VoteTable
from utils import ConfigurationError, log

# --- Database Configuration ---
STORE_SUFFIX = ".db"
default_db_path = os.path.join(os.path.dirname(__file__), "votes.db")

Base = declarative_base()


class VoteRecordRow(Base):
    __tablename__ = 'vote_record'
    __table_args__ = (UniqueConstraint('case_id', 'justice_id'),)
    id = Column(Integer, primary_key=True)
    case_id = Column(String, nullable=False)
    term = Column(Integer, nullable=False)
    natural_court_id = Column(String, nullable=False)
    justice_id = Column(Integer, nullable=False)
    justice_name = Column(String, nullable=False)
    majority_code = Column(Integer, nullable=True) # 1 = dissent, 2 = majority, NULL = not recorded


class CourtReportRow(Base):
    __tablename__ = 'court_report'
    id = Column(Integer, primary_key=True)
    court_id = Column(String, nullable=False, unique=True)
    first_term = Column(Integer, nullable=False)
    last_term = Column(Integer, nullable=False)
    payload = Column(Text, nullable=False) # JSON of the report


def is_store(path: str) -> bool:
    return path.endswith(STORE_SUFFIX)


@functools.lru_cache(maxsize=None)
def get_engine(db_path: str):
    return create_engine(f"sqlite:///{db_path}", connect_args={"check_same_thread": False})


def create_db_session(db_path: str = default_db_path):
    """Creates a new database session."""
    SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=get_engine(db_path))
    return SessionLocal()


def init_db(db_path: str = default_db_path):
    """Initializes the database, creating tables if they don't exist."""
    directory = os.path.dirname(db_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    Base.metadata.create_all(bind=get_engine(db_path))


def save_votes(db_path: str, table: VoteTable) -> int:
    """Replaces the stored vote records with the table's records."""
    init_db(db_path)
    db_session = create_db_session(db_path)
    try:
        db_session.query(VoteRecordRow).delete()
        db_session.add_all([
            VoteRecordRow(
                case_id=record.case_id,
                term=record.term,
                natural_court_id=record.natural_court_id,
                justice_id=record.justice_id,
                justice_name=record.justice_name,
                majority_code=record.majority_code,
            )
            for record in table.records
        ])
        db_session.commit()
        log(f"Stored {len(table.records)} vote records in {db_path}")
        return len(table.records)
    except Exception:
        db_session.rollback()
        raise
    finally:
        db_session.close()


def load_store(db_path: str) -> VoteTable:
    """Reads the stored vote records back, in insertion order."""
    if not os.path.isfile(db_path):
        raise ConfigurationError(f"Vote store '{db_path}' does not exist.")
    log(f"Loading vote data from store: {db_path}")
    db_session = create_db_session(db_path)
    try:
        rows = db_session.query(VoteRecordRow).order_by(VoteRecordRow.id).all()
        return VoteTable(records=[
            VoteRecord(
                case_id=row.case_id,
                term=row.term,
                natural_court_id=row.natural_court_id,
                justice_id=row.justice_id,
                justice_name=row.justice_name,
                majority_code=row.majority_code,
            )
            for row in rows
        ])
    finally:
        db_session.close()


def save_report(db_path: str, report: dict):
    """Inserts or replaces the stored report of one court."""
    init_db(db_path)
    db_session = create_db_session(db_path)
    try:
        row = db_session.query(CourtReportRow).filter_by(court_id=report["court_id"]).first()
        if row is None:
            row = CourtReportRow(court_id=report["court_id"])
            db_session.add(row)
        row.first_term = report["first_term"]
        row.last_term = report["last_term"]
        row.payload = json.dumps(report, sort_keys=True)
        db_session.commit()
    except Exception:
        db_session.rollback()
        raise
    finally:
        db_session.close()


def load_reports(db_path: str) -> list[dict]:
    db_session = create_db_session(db_path)
    try:
        rows = db_session.query(CourtReportRow).order_by(CourtReportRow.first_term, CourtReportRow.court_id).all()
        return [json.loads(row.payload) for row in rows]
    finally:
        db_session.close()


if __name__ == '__main__':
    # This will create the database and tables when the script is run directly
    print("Creating database and tables...")
    init_db()
    print("Database and tables created successfully.")
