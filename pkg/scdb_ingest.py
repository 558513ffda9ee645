"""
Vote record ingestion and natural-court slicing.

Reads justice-centered vote data (one row per justice per case), validates each row,
and cuts the table into court slices: the cases of one natural court (or term range)
in which all nine justices have a recorded majority code.
"""
import io
import os
import re
import warnings
from collections import OrderedDict
from typing import BinaryIO, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from utils import ConfigurationError, DataError, log, warn, rows_to_csv

COURT_SIZE = 9

# majority codes of the source database's "majority" variable
DISSENT = 1
MAJORITY = 2

CANONICAL_FIELDS = (
    "case_id",
    "term",
    "natural_court_id",
    "justice_id",
    "justice_name",
    "majority_code",
)

DEFAULT_COLUMN_MAP = {field: field for field in CANONICAL_FIELDS}

# pandas reports rows with too many fields as "Skipping line N: ..."
BAD_LINE_PATTERN = re.compile(r"Skipping line (\d+)")

# Header names used by the upstream justice-centered releases.
UPSTREAM_COLUMN_MAP = {
    "case_id": "caseId",
    "term": "term",
    "natural_court_id": "naturalCourt",
    "justice_id": "justice",
    "justice_name": "justiceName",
    "majority_code": "majority",
}


class VoteRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    case_id: str
    term: int
    natural_court_id: str
    justice_id: int
    justice_name: str
    majority_code: Optional[int] = None

    @model_validator(mode='after')
    def _check_code(self):
        if self.majority_code is not None and self.majority_code not in (DISSENT, MAJORITY):
            raise ValueError(f"majority_code must be 1 or 2, got {self.majority_code}")
        return self


class CaseVotes(BaseModel):
    case_id: str
    term: int
    natural_court_id: str
    votes: dict[int, Optional[int]]

    def is_fully_recorded(self) -> bool:
        return len(self.votes) == COURT_SIZE and all(code is not None for code in self.votes.values())


class VoteTable(BaseModel):
    records: list[VoteRecord]
    malformed_rows: int = 0
    duplicate_rows: int = 0
    warnings: list[str] = []

    def cases(self) -> list[CaseVotes]:
        """Groups records by case id, in order of first appearance."""
        grouped: "OrderedDict[str, CaseVotes]" = OrderedDict()
        for record in self.records:
            case = grouped.get(record.case_id)
            if case is None:
                case = CaseVotes(
                    case_id=record.case_id,
                    term=record.term,
                    natural_court_id=record.natural_court_id,
                    votes={},
                )
                grouped[record.case_id] = case
            case.votes[record.justice_id] = record.majority_code
        return list(grouped.values())

    def justice_names(self) -> dict[int, str]:
        names = {}
        for record in self.records:
            names.setdefault(record.justice_id, record.justice_name)
        return names


class CourtSelector(BaseModel):
    """A natural court, a term range, or a term range inside a natural court."""
    natural_court_id: Optional[str] = None
    first_term: Optional[int] = None
    last_term: Optional[int] = None

    @model_validator(mode='after')
    def _check(self):
        if self.natural_court_id is None and self.first_term is None:
            raise ValueError("A selector needs a natural court id or a term range.")
        if (self.first_term is None) != (self.last_term is None):
            raise ValueError("A term range needs both a first and a last term.")
        if self.first_term is not None and self.first_term > self.last_term:
            raise ValueError(f"Empty term range {self.first_term}..{self.last_term}.")
        return self

    def matches(self, natural_court_id: str, term: int) -> bool:
        if self.natural_court_id is not None and natural_court_id != self.natural_court_id:
            return False
        if self.first_term is not None and not (self.first_term <= term <= self.last_term):
            return False
        return True

    def label(self) -> str:
        if self.first_term is None:
            return self.natural_court_id
        terms = f"{self.first_term}..{self.last_term}"
        if self.natural_court_id is None:
            return terms
        return f"{self.natural_court_id}@{terms}"


class CourtSlice(BaseModel):
    label: str
    selector: CourtSelector
    roster: list[str]
    justice_ids: list[int]
    cases: list[CaseVotes]
    excluded_cases: int = 0

    @model_validator(mode='after')
    def _check(self):
        if len(self.roster) != COURT_SIZE or len(self.justice_ids) != COURT_SIZE:
            raise ValueError(f"A court slice needs exactly {COURT_SIZE} justices, got {len(self.roster)}.")
        expected = set(self.justice_ids)
        for case in self.cases:
            if set(case.votes) != expected or any(code is None for code in case.votes.values()):
                raise ValueError(f"Case '{case.case_id}' does not have one recorded vote per roster justice.")
        return self

    def vote_matrix(self) -> np.ndarray:
        """Majority codes as a (cases x 9) integer array, columns in roster order."""
        if not self.cases:
            return np.zeros((0, COURT_SIZE), dtype=np.int64)
        return np.array(
            [[case.votes[justice_id] for justice_id in self.justice_ids] for case in self.cases],
            dtype=np.int64,
        )

    def terms(self) -> list[int]:
        return sorted({case.term for case in self.cases})

    def to_table(self) -> VoteTable:
        names = dict(zip(self.justice_ids, self.roster))
        records = [
            VoteRecord(
                case_id=case.case_id,
                term=case.term,
                natural_court_id=case.natural_court_id,
                justice_id=justice_id,
                justice_name=names[justice_id],
                majority_code=case.votes[justice_id],
            )
            for case in self.cases
            for justice_id in self.justice_ids
        ]
        return VoteTable(records=records)


def _resolve_columns(frame: pd.DataFrame, column_map: dict[str, str]) -> dict[str, str]:
    unknown = sorted(set(column_map) - set(CANONICAL_FIELDS))
    if unknown:
        raise ConfigurationError(f"Unknown canonical field(s) in column map: {', '.join(unknown)}")
    resolved = {field: column_map.get(field, field) for field in CANONICAL_FIELDS}
    missing = [f"{field} -> '{header}'" for field, header in resolved.items() if header not in frame.columns]
    if missing:
        raise ConfigurationError(
            "Mapped column(s) not found in input header: " + "; ".join(missing)
        )
    return resolved


def _parse_int(text: str, field: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{field} '{text}' is not an integer")


def _parse_row(values: dict[str, str]) -> VoteRecord:
    for field in ("case_id", "natural_court_id", "justice_name"):
        if not values[field]:
            raise ValueError(f"{field} is empty")
    code_text = values["majority_code"]
    return VoteRecord(
        case_id=values["case_id"],
        term=_parse_int(values["term"], "term"),
        natural_court_id=values["natural_court_id"],
        justice_id=_parse_int(values["justice_id"], "justice_id"),
        justice_name=values["justice_name"],
        majority_code=_parse_int(code_text, "majority_code") if code_text else None,
    )


def _read_frame(stream, delimiter: str, encoding: str) -> tuple[pd.DataFrame, list[int]]:
    """The raw frame plus the file line numbers of rows with too many fields."""
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", pd.errors.ParserWarning)
            frame = pd.read_csv(
                stream,
                sep=delimiter,
                dtype=str,
                keep_default_na=False,
                skip_blank_lines=False,
                encoding=encoding,
                engine='python',
                on_bad_lines='warn',
            )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"Could not read vote data: {e}")

    bad_lines = []
    for w in caught:
        if not issubclass(w.category, pd.errors.ParserWarning):
            continue
        for match in BAD_LINE_PATTERN.finditer(str(w.message)):
            bad_lines.append(int(match.group(1)))
    return frame, sorted(set(bad_lines))


def _line_numbers(row_count: int, bad_lines: list[int]) -> list[int]:
    # header is line 1; rows dropped by the reader keep their line numbers
    skipped = set(bad_lines)
    numbers = []
    line = 2
    while len(numbers) < row_count:
        if line not in skipped:
            numbers.append(line)
        line += 1
    return numbers


def parse_votes(
    stream: Union[BinaryIO, io.BytesIO],
    column_map: Optional[dict[str, str]] = None,
    delimiter: str = ',',
    encoding: str = 'utf-8',
) -> VoteTable:
    """
    Parses a header-bearing delimited vote file.

    Rows with an unparseable required field, or with more or fewer fields than the
    header, are skipped with a warning naming the line number. Rows with an empty
    majority field are kept with the code absent; they are excluded later, when a
    court is sliced. For duplicate (case_id, justice_id) pairs the first occurrence
    wins.
    """
    frame, bad_lines = _read_frame(stream, delimiter, encoding)
    columns = _resolve_columns(frame, column_map or DEFAULT_COLUMN_MAP)
    subset = frame[[columns[field] for field in CANONICAL_FIELDS]]
    line_numbers = _line_numbers(len(subset), bad_lines)

    records = []
    messages = []
    malformed = 0
    duplicates = 0
    seen = set()
    names_by_court = {}
    pending = list(bad_lines)

    def _skip(message: str):
        messages.append(message)
        warn(message)

    for line_number, row in zip(line_numbers, subset.itertuples(index=False, name=None)):
        while pending and pending[0] < line_number:
            malformed += 1
            _skip(f"line {pending.pop(0)}: malformed row skipped (more fields than the header)")

        if any(not isinstance(value, str) for value in row):
            malformed += 1
            _skip(f"line {line_number}: malformed row skipped (fewer fields than the header)")
            continue
        values = {field: value.strip() for field, value in zip(CANONICAL_FIELDS, row)}
        try:
            record = _parse_row(values)
        except ValueError as e:
            malformed += 1
            _skip(f"line {line_number}: malformed row skipped ({e})")
            continue

        key = (record.case_id, record.justice_id)
        if key in seen:
            duplicates += 1
            _skip(f"line {line_number}: duplicate vote for case '{record.case_id}', justice {record.justice_id}; keeping first")
            continue

        known_name = names_by_court.setdefault((record.natural_court_id, record.justice_id), record.justice_name)
        if known_name != record.justice_name:
            malformed += 1
            _skip(
                f"line {line_number}: justice {record.justice_id} is named '{record.justice_name}' "
                f"but '{known_name}' earlier in natural court '{record.natural_court_id}'; row skipped"
            )
            continue

        seen.add(key)
        records.append(record)

    for line_number in pending:
        malformed += 1
        _skip(f"line {line_number}: malformed row skipped (more fields than the header)")

    log(f"Parsed {len(records)} vote records ({malformed} malformed, {duplicates} duplicate rows skipped)")
    return VoteTable(records=records, malformed_rows=malformed, duplicate_rows=duplicates, warnings=messages)


def load_votes(
    path: str,
    column_map: Optional[dict[str, str]] = None,
    delimiter: str = ',',
    encoding: str = 'utf-8',
) -> VoteTable:
    if not os.path.isfile(path):
        raise ConfigurationError(f"Input file '{path}' does not exist.")
    log(f"Loading vote data from: {path}")
    with open(path, 'rb') as f:
        return parse_votes(f, column_map=column_map, delimiter=delimiter, encoding=encoding)


def serialize_votes(table: VoteTable, column_map: Optional[dict[str, str]] = None, delimiter: str = ',') -> str:
    """Writes retained records back out; the inverse of parse_votes."""
    mapping = column_map or DEFAULT_COLUMN_MAP
    headers = [mapping.get(field, field) for field in CANONICAL_FIELDS]
    rows = [
        [
            record.case_id,
            record.term,
            record.natural_court_id,
            record.justice_id,
            record.justice_name,
            "" if record.majority_code is None else record.majority_code,
        ]
        for record in table.records
    ]
    return rows_to_csv(headers, rows, delimiter=delimiter)


def list_courts(table: VoteTable) -> list[str]:
    """Natural court ids in order of first appearance."""
    return list(OrderedDict.fromkeys(record.natural_court_id for record in table.records))


def select_court(table: VoteTable, selector: CourtSelector) -> CourtSlice:
    """
    Restricts the table to one natural court and/or term range, keeping only the
    cases where all nine justices have a recorded majority code.
    """
    matched = [
        case for case in table.cases()
        if selector.matches(case.natural_court_id, case.term)
    ]
    if not matched:
        raise DataError(f"No cases match selector '{selector.label()}'.")

    complete = [case for case in matched if case.is_fully_recorded()]
    if not complete:
        raise DataError(f"Selector '{selector.label()}' has no case with all {COURT_SIZE} votes recorded.")

    names = table.justice_names()
    roster_ids = sorted({justice_id for case in complete for justice_id in case.votes})
    if len(roster_ids) != COURT_SIZE:
        listed = ", ".join(f"{names.get(j, j)} ({j})" for j in roster_ids)
        raise DataError(
            f"Selector '{selector.label()}' spans {len(roster_ids)} justices, expected {COURT_SIZE}: {listed}"
        )

    roster = [names[justice_id] for justice_id in roster_ids]
    if len(set(roster)) != COURT_SIZE:
        raise DataError(f"Selector '{selector.label()}' has two justices sharing a name: {', '.join(roster)}")

    excluded = len(matched) - len(complete)
    log(f"Court '{selector.label()}': {len(complete)} cases kept, {excluded} excluded for missing votes")
    return CourtSlice(
        label=selector.label(),
        selector=selector,
        roster=roster,
        justice_ids=roster_ids,
        cases=complete,
        excluded_cases=excluded,
    )


def court_terms(court: CourtSlice) -> list[int]:
    return court.terms()


def restrict_terms(court: CourtSlice, first_term: int, last_term: int) -> CourtSlice:
    """A sub-slice of an existing slice (same roster) limited to a term range."""
    selector = CourtSelector(
        natural_court_id=court.selector.natural_court_id,
        first_term=first_term,
        last_term=last_term,
    )
    cases = [case for case in court.cases if first_term <= case.term <= last_term]
    if not cases:
        raise DataError(f"Court '{court.label}' has no cases in terms {first_term}..{last_term}.")
    return CourtSlice(
        label=selector.label(),
        selector=selector,
        roster=court.roster,
        justice_ids=court.justice_ids,
        cases=cases,
        excluded_cases=0,
    )
