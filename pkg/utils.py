import sys
import os
import io
import csv
import json
import configparser
from decimal import Decimal, ROUND_HALF_EVEN
from fractions import Fraction
from typing import Any, Optional

# Environment variable consulted for the default vote data path.
INPUT_ENV_VAR = "SCOTUS_SPATIAL_INPUT"

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(__file__), 'config.ini')


class AnalysisError(ValueError):
    """Base class for every failure the pipeline reports on purpose."""


class ConfigurationError(AnalysisError):
    """Bad flags, bad config values, missing columns or input files."""


class DataError(AnalysisError):
    """The data cannot support the requested analysis."""


class EigenConvergenceError(DataError):
    pass


class GeometryError(DataError):
    pass


def log(message: str):
    print(f"--- {message} ---", file=sys.stderr)


def warn(message: str):
    print(f"WARN: {message}", file=sys.stderr)


def read_config(config_path: Optional[str] = None) -> configparser.ConfigParser:
    """
    Reads the INI configuration. A missing default config.ini is not an error;
    an explicitly requested file that does not exist is.
    """
    config = configparser.ConfigParser()
    # Keep justice names and CSV headers exactly as written.
    config.optionxform = str

    if config_path is None:
        config_path = DEFAULT_CONFIG_PATH
        if not os.path.exists(config_path):
            log("config.ini not found, using built-in defaults")
            return config
    elif not os.path.exists(config_path):
        raise ConfigurationError(f"Config file '{config_path}' does not exist.")

    try:
        config.read(config_path, encoding='utf-8')
    except configparser.Error as e:
        raise ConfigurationError(f"Could not parse config file '{config_path}': {e}")
    log(f"Using configuration from: {config_path}")
    return config


def parse_bool(value: Any, name: str) -> bool:
    if isinstance(value, bool):
        return value
    lowered = str(value).strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ConfigurationError(f"'{name}' must be a boolean, got '{value}'.")


def parse_term_range(text: str) -> tuple[int, int]:
    """Parses 'A..B', 'A-B' or a single term 'A'."""
    cleaned = text.strip()
    for separator in ('..', '-'):
        if separator in cleaned:
            first, _, last = cleaned.partition(separator)
            break
    else:
        first = last = cleaned
    try:
        first_term, last_term = int(first), int(last)
    except ValueError:
        raise ConfigurationError(f"Term range '{text}' is not of the form A..B.")
    if first_term > last_term:
        raise ConfigurationError(f"Term range '{text}' is empty (start after end).")
    return first_term, last_term


def court_key(label: str) -> str:
    """Filesystem-safe directory name for a court or term-range label."""
    safe = [ch if ch.isalnum() or ch in '-_.' else '_' for ch in label.strip()]
    return ''.join(safe) or 'court'


def percent(value: Optional[Fraction]) -> Optional[float]:
    if value is None:
        return None
    return float(value * 100)


def display_percent(value: Optional[Fraction]) -> str:
    """One-decimal percentage, rounded half-to-even on the exact fraction."""
    if value is None:
        return "n/a"
    exact = Decimal(value.numerator * 100) / Decimal(value.denominator)
    rounded = exact.quantize(Decimal('0.1'), rounding=ROUND_HALF_EVEN)
    text = format(rounded, 'f')
    if text.endswith('.0'):
        text = text[:-2]
    return f"{text}%"


def fraction_text(value: Optional[Fraction]) -> Optional[str]:
    if value is None:
        return None
    return f"{value.numerator}/{value.denominator}"


def to_json(data: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def rows_to_csv(headers: list[str], rows: list[list[Any]], delimiter: str = ',') -> str:
    output = io.StringIO()
    writer = csv.writer(output, delimiter=delimiter, lineterminator='\n')
    writer.writerow(headers)
    if rows:
        writer.writerows(rows)
    return output.getvalue()


def write_output(path: str, content: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(content)
    log(f"Wrote {path}")
