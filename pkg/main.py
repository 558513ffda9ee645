"""
Command-line front end: spatial analysis of 5-to-4 decisions, one natural court at a time.

Exit codes: 0 success, 1 the data cannot support the analysis, 2 bad configuration
or usage. Results go to standard output and files; progress and warnings
(prefixed WARN:) go to standard error.
"""
import os
import sys
import argparse
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

from pydantic import BaseModel, ValidationError, field_validator

from agreement import agreement_anchor, dissimilarity_matrix, matrix_to_csv, matrix_to_json
from coalition_core import (
    COALITION_SIZE,
    annotate,
    canonical,
    coalitions_to_csv,
    coalitions_to_json,
    disorder_table,
    extract_voting_coalitions,
    rank_justices,
)
from database_setup import is_store, load_reports, load_store, save_report, save_votes
from mds_embed import classical_mds, embedding_to_csv, embedding_to_json, leading_dimensions, ordering
from report_render import (
    AnalysisSettings,
    CourtAnalysis,
    CourtReport,
    accuracy_table_csv,
    analysis_to_json,
    analyze_court,
    min_accuracy_series,
    render_1d_svg,
    render_circles_svg,
    render_halfplane_svg,
    render_min_accuracy_svg,
    render_voronoi_svg,
    reports_to_json,
    term_mean_justices,
    term_table,
    term_table_csv,
)
from scdb_ingest import (
    CANONICAL_FIELDS,
    DEFAULT_COLUMN_MAP,
    CourtSelector,
    CourtSlice,
    VoteTable,
    list_courts,
    load_votes,
    select_court,
    serialize_votes,
)
from spatial_geometry import (
    DEFAULT_EPSILON,
    cells_to_csv,
    cells_to_json,
    from_embedding,
    half_plane_coalitions,
    lines_to_csv,
    lines_to_json,
    oracle_voronoi_grid,
    voronoi_coalitions,
)
from swing_analysis import agreement_rate, case_fifth_votes, fifth_vote, fifth_votes_to_json, mean_justice
from utils import (
    INPUT_ENV_VAR,
    ConfigurationError,
    DataError,
    court_key,
    log,
    parse_bool,
    parse_term_range,
    read_config,
    rows_to_csv,
    to_json,
    warn,
    write_output,
)

FORMATS = ("json", "csv", "svg")
DEFAULT_GRID_RESOLUTION = 256


class RunConfig(BaseModel):
    command: str
    input_path: str
    column_map: dict[str, str] = dict(DEFAULT_COLUMN_MAP)
    delimiter: str = ","
    encoding: str = "utf-8"
    courts: list[str] = []
    terms: Optional[tuple[int, int]] = None
    out_dir: str = "output"
    format: str = "json"
    anchor: Optional[str] = None
    anchors: dict[str, str] = {}
    default_anchors: list[str] = []
    epsilon: float = DEFAULT_EPSILON
    grid_resolution: int = DEFAULT_GRID_RESOLUTION
    dimension: int = 2
    per_term: bool = True
    reports: bool = True
    figures: bool = True
    workers: int = 1
    highlights: list[tuple[str, ...]] = []
    case_id: Optional[str] = None

    @field_validator('epsilon')
    @classmethod
    def _positive(cls, value):
        if value <= 0:
            raise ValueError("epsilon must be positive")
        return value

    @field_validator('grid_resolution')
    @classmethod
    def _fine_enough(cls, value):
        if value < 64:
            raise ValueError("grid resolution must be at least 64")
        return value

    @field_validator('workers')
    @classmethod
    def _at_least_one(cls, value):
        if value < 1:
            raise ValueError("workers must be at least 1")
        return value

    @field_validator('format')
    @classmethod
    def _known_format(cls, value):
        if value not in FORMATS:
            raise ValueError(f"format must be one of {', '.join(FORMATS)}")
        return value

    @field_validator('dimension')
    @classmethod
    def _one_or_two(cls, value):
        if value not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        return value

    @property
    def data_extension(self) -> str:
        return "csv" if self.format == "csv" else "json"

    @property
    def wants_svg(self) -> bool:
        return self.format == "svg"


def _split_list(text: Optional[str]) -> list[str]:
    if not text:
        return []
    return [item.strip() for item in text.split(",") if item.strip()]


def _delimiter(text: str) -> str:
    if text in ("\\t", "tab"):
        return "\t"
    if len(text) != 1:
        raise ConfigurationError(f"Delimiter must be a single character, got '{text}'.")
    return text


def _column_overrides(pairs: list[str]) -> dict[str, str]:
    overrides = {}
    for pair in pairs:
        field, separator, header = pair.partition("=")
        if not separator or not header.strip():
            raise ConfigurationError(f"--column expects FIELD=HEADER, got '{pair}'.")
        if field.strip() not in CANONICAL_FIELDS:
            raise ConfigurationError(f"Unknown field '{field}'; expected one of {', '.join(CANONICAL_FIELDS)}.")
        overrides[field.strip()] = header.strip()
    return overrides


def _highlight(text: str) -> tuple[str, ...]:
    names = _split_list(text)
    if len(set(names)) != COALITION_SIZE:
        raise ConfigurationError(f"--highlight needs {COALITION_SIZE} distinct comma-separated names, got '{text}'.")
    return tuple(sorted(names))


def _number(value: Optional[str], cast: Callable, name: str):
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"'{name}' must be a number, got '{value}'.")


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Built-in defaults, then config file, then environment, then flags."""
    config = read_config(args.config)

    input_path = args.input or os.environ.get(INPUT_ENV_VAR) or config.get('input', 'path', fallback=None)
    if not input_path:
        raise ConfigurationError(
            f"No input data: pass --input, set {INPUT_ENV_VAR}, or set [input] path in the config file."
        )

    column_map = dict(DEFAULT_COLUMN_MAP)
    if config.has_section('columns'):
        for field, header in config.items('columns'):
            if field not in CANONICAL_FIELDS:
                raise ConfigurationError(f"Unknown field '{field}' in [columns].")
            column_map[field] = header
    column_map.update(_column_overrides(args.column or []))

    anchors = {}
    default_anchors = []
    if config.has_section('anchors'):
        for court_id, names in config.items('anchors'):
            if court_id == 'default':
                default_anchors = _split_list(names)
            else:
                anchors[court_id] = names.strip()

    per_term = args.per_term
    if per_term is None:
        per_term = parse_bool(config.get('run', 'per_term', fallback='true'), 'per_term')

    values = {
        "command": args.command,
        "input_path": input_path,
        "column_map": column_map,
        "delimiter": _delimiter(args.delimiter or config.get('input', 'delimiter', fallback=',')),
        "encoding": config.get('input', 'encoding', fallback='utf-8'),
        "courts": args.court or _split_list(config.get('run', 'courts', fallback='')),
        "terms": parse_term_range(args.terms) if args.terms else None,
        "out_dir": args.out or config.get('output', 'directory', fallback='output'),
        "format": args.format or config.get('output', 'format', fallback='json'),
        "anchor": args.anchor,
        "anchors": anchors,
        "default_anchors": default_anchors,
        "epsilon": args.epsilon if args.epsilon is not None else _number(
            config.get('geometry', 'epsilon', fallback=str(DEFAULT_EPSILON)), float, 'epsilon'),
        "grid_resolution": args.grid_resolution if args.grid_resolution is not None else _number(
            config.get('geometry', 'grid_resolution', fallback=str(DEFAULT_GRID_RESOLUTION)), int, 'grid_resolution'),
        "dimension": args.dim,
        "per_term": per_term,
        "reports": parse_bool(config.get('run', 'reports', fallback='true'), 'reports'),
        "figures": parse_bool(config.get('run', 'figures', fallback='true'), 'figures'),
        "workers": args.workers if args.workers is not None else _number(
            config.get('run', 'workers', fallback='1'), int, 'workers'),
        "highlights": [_highlight(text) for text in (args.highlight or [])],
        "case_id": args.case,
    }
    try:
        run_config = RunConfig(**values)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in error['loc'])}: {error['msg']}" for error in e.errors())
        raise ConfigurationError(f"Invalid settings: {problems}")

    validate_paths(run_config)
    return run_config


def validate_paths(cfg: RunConfig):
    """Checked before anything is written."""
    if not os.path.isfile(cfg.input_path):
        raise ConfigurationError(f"Input file '{cfg.input_path}' does not exist.")
    if os.path.exists(cfg.out_dir) and not os.path.isdir(cfg.out_dir):
        raise ConfigurationError(f"Output path '{cfg.out_dir}' exists and is not a directory.")


def prepare_output(cfg: RunConfig):
    """Creates the output directory once the input has loaded."""
    try:
        os.makedirs(cfg.out_dir, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"Cannot create output directory '{cfg.out_dir}': {e}")


def load_input(cfg: RunConfig) -> VoteTable:
    if is_store(cfg.input_path):
        return load_store(cfg.input_path)
    return load_votes(cfg.input_path, column_map=cfg.column_map, delimiter=cfg.delimiter, encoding=cfg.encoding)


def court_selectors(cfg: RunConfig, table: VoteTable, every_court: bool = False) -> list[CourtSelector]:
    first, last = cfg.terms if cfg.terms else (None, None)
    if cfg.courts:
        return [CourtSelector(natural_court_id=court, first_term=first, last_term=last) for court in cfg.courts]
    if cfg.terms:
        return [CourtSelector(first_term=first, last_term=last)]
    if every_court:
        return [CourtSelector(natural_court_id=court) for court in list_courts(table)]
    raise ConfigurationError("Select a court with --court and/or --terms.")


def settings_for(cfg: RunConfig, court: CourtSlice) -> AnalysisSettings:
    if cfg.anchor:
        if cfg.anchor not in court.roster:
            raise ConfigurationError(f"Anchor justice '{cfg.anchor}' is not on the roster of court '{court.label}'.")
        anchor = cfg.anchor
    elif court.selector.natural_court_id in cfg.anchors:
        anchor = cfg.anchors[court.selector.natural_court_id]
    else:
        derived = agreement_anchor(court)
        anchor = cfg.default_anchors + ([derived] if derived else []) or None
    return AnalysisSettings(anchor=anchor, epsilon=cfg.epsilon, per_term=cfg.per_term)


def court_highlights(cfg: RunConfig, roster: list[str], cells, label: str) -> list[tuple[str, ...]]:
    """--highlight coalitions that own a cell on this court; the rest are skipped with a warning."""
    on_roster = set(roster)
    owners = {cell.members for cell in cells}
    kept = []
    for members in cfg.highlights:
        missing = [name for name in members if name not in on_roster]
        if missing:
            warn(f"Court '{label}': highlight {', '.join(members)} skipped; not on the roster: {', '.join(missing)}")
            continue
        if canonical(members) not in owners:
            warn(f"Court '{label}': highlight {', '.join(members)} skipped; not a Voronoi coalition")
            continue
        kept.append(members)
    return kept


def court_dir(cfg: RunConfig, court: CourtSlice) -> str:
    return os.path.join(cfg.out_dir, court_key(court.label))


def _fifth_votes_csv(results) -> str:
    rows = [
        [";".join(r.members), r.case_id or "", r.by_majority, r.by_minority, r.agree,
         repr(r.majority_radius), repr(r.minority_radius), r.majority_tie, r.minority_tie]
        for r in results
    ]
    headers = ["members", "case_id", "by_majority", "by_minority", "agree",
               "majority_radius", "minority_radius", "majority_tie", "minority_tie"]
    return rows_to_csv(headers, rows)


# --- Writers shared by the single-purpose subcommands and `all` ---

def write_embedding(cfg: RunConfig, directory: str, embedding):
    ext = cfg.data_extension
    content = embedding_to_csv(embedding) if ext == "csv" else embedding_to_json(embedding)
    write_output(os.path.join(directory, f"embedding_{embedding.dimension}d.{ext}"), content)


def write_matrix(cfg: RunConfig, directory: str, matrix):
    ext = cfg.data_extension
    content = matrix_to_csv(matrix) if ext == "csv" else matrix_to_json(matrix)
    write_output(os.path.join(directory, f"dissimilarity.{ext}"), content)


def write_coalitions(cfg: RunConfig, directory: str, coalitions, disorder_rows):
    ext = cfg.data_extension
    export = coalitions_to_csv if ext == "csv" else coalitions_to_json
    write_output(os.path.join(directory, f"coalitions.{ext}"), export(coalitions))
    write_output(os.path.join(directory, f"disorder_table.{ext}"), export(disorder_rows))


def write_cells(cfg: RunConfig, directory: str, cells):
    ext = cfg.data_extension
    write_output(os.path.join(directory, f"voronoi.{ext}"), cells_to_csv(cells) if ext == "csv" else cells_to_json(cells))


def write_lines(cfg: RunConfig, directory: str, lines):
    ext = cfg.data_extension
    write_output(os.path.join(directory, f"halfplane.{ext}"), lines_to_csv(lines) if ext == "csv" else lines_to_json(lines))


def write_fifth_votes(cfg: RunConfig, directory: str, results, name: str = "fifth_votes"):
    ext = cfg.data_extension
    content = _fifth_votes_csv(results) if ext == "csv" else fifth_votes_to_json(results)
    write_output(os.path.join(directory, f"{name}.{ext}"), content)


def write_mean_justice(directory: str, mean, term_means: dict):
    write_output(os.path.join(directory, "mean_justice.json"), to_json({
        "court": mean.model_dump(mode='json'),
        "terms": {str(term): result.model_dump(mode='json') for term, result in sorted(term_means.items())},
    }))


def write_report(cfg: RunConfig, directory: str, analysis: CourtAnalysis):
    write_output(os.path.join(directory, "report.json"), to_json(analysis.report.to_json_dict()))
    write_output(os.path.join(directory, "report.csv"), accuracy_table_csv([analysis.report]))
    write_output(os.path.join(directory, "analysis.json"), analysis_to_json(analysis))
    if is_store(cfg.input_path):
        save_report(cfg.input_path, analysis.report.to_json_dict())


def write_figures(cfg: RunConfig, directory: str, analysis: CourtAnalysis):
    points = analysis.points()
    write_output(os.path.join(directory, "mds_1d.svg"), render_1d_svg(analysis.embedding_1d))
    highlights = court_highlights(cfg, analysis.embedding_2d.roster, analysis.cells, analysis.court_id)
    write_output(os.path.join(directory, "voronoi.svg"), render_voronoi_svg(points, analysis.cells, highlights))
    for index, result in enumerate(analysis.fifth_votes, start=1):
        write_output(os.path.join(directory, f"circles_{index:02d}.svg"),
                     render_circles_svg(analysis.embedding_2d, result, title=", ".join(result.members)))
    for index, line in enumerate(analysis.lines, start=1):
        write_output(os.path.join(directory, f"halfplane_{index:02d}.svg"),
                     render_halfplane_svg(points, line, title=", ".join(line.members)))


# --- Subcommands ---

def cmd_ingest(cfg: RunConfig, table: VoteTable) -> int:
    store_path = os.path.join(cfg.out_dir, "votes.db")
    save_votes(store_path, table)
    write_output(os.path.join(cfg.out_dir, "votes.csv"), serialize_votes(table, delimiter=cfg.delimiter))
    print(f"records: {len(table.records)}")
    print(f"malformed rows skipped: {table.malformed_rows}")
    print(f"duplicate rows skipped: {table.duplicate_rows}")
    cases = table.cases()
    for court in list_courts(table):
        count = sum(1 for case in cases if case.natural_court_id == court)
        print(f"court {court}: {count} cases")
    return 0


def cmd_mds(cfg: RunConfig, table: VoteTable) -> int:
    for selector in court_selectors(cfg, table):
        court = select_court(table, selector)
        directory = court_dir(cfg, court)
        matrix = dissimilarity_matrix(court)
        embedding = classical_mds(matrix, dimension=cfg.dimension, anchor=settings_for(cfg, court).anchor)
        write_matrix(cfg, directory, matrix)
        write_embedding(cfg, directory, embedding)
        if cfg.wants_svg:
            write_output(os.path.join(directory, "mds_1d.svg"), render_1d_svg(leading_dimensions(embedding, 1)))
        print(f"{court.label}: {' < '.join(ordering(embedding))}")
    return 0


def cmd_coalitions(cfg: RunConfig, table: VoteTable) -> int:
    for selector in court_selectors(cfg, table):
        court = select_court(table, selector)
        matrix = dissimilarity_matrix(court)
        embedding = classical_mds(matrix, dimension=1, anchor=settings_for(cfg, court).anchor)
        ranks = rank_justices(embedding)
        voting = extract_voting_coalitions(court)
        coalitions = annotate(voting, ranks)
        write_coalitions(cfg, court_dir(cfg, court), coalitions, disorder_table(ranks, voting))
        scores = sorted(c.disorder for c in coalitions)
        print(f"{court.label}: {len(coalitions)} voting coalitions, disorder scores {scores}")
    return 0


def cmd_voronoi(cfg: RunConfig, table: VoteTable) -> int:
    for selector in court_selectors(cfg, table):
        court = select_court(table, selector)
        directory = court_dir(cfg, court)
        _, embedding = classical_mds_for(cfg, court)
        points = from_embedding(embedding)
        cells = voronoi_coalitions(points, epsilon=cfg.epsilon)
        write_cells(cfg, directory, cells)

        exact = {cell.members for cell in cells}
        sampled = oracle_voronoi_grid(points, cfg.grid_resolution)
        for members in sorted(sampled - exact):
            warn(f"grid sampling found {', '.join(members)} but exact enumeration did not")
        log(f"Grid sampling at resolution {cfg.grid_resolution} saw {len(sampled & exact)} of {len(exact)} cells")

        if cfg.wants_svg or cfg.highlights:
            highlights = court_highlights(cfg, court.roster, cells, court.label)
            write_output(os.path.join(directory, "voronoi.svg"), render_voronoi_svg(points, cells, highlights))
        print(f"{court.label}: {len(cells)} Voronoi coalitions")
        for cell in cells:
            print("  " + ", ".join(cell.members))
    return 0


def cmd_ksets(cfg: RunConfig, table: VoteTable) -> int:
    for selector in court_selectors(cfg, table):
        court = select_court(table, selector)
        directory = court_dir(cfg, court)
        _, embedding = classical_mds_for(cfg, court)
        points = from_embedding(embedding)
        lines = half_plane_coalitions(points, epsilon=cfg.epsilon)
        write_lines(cfg, directory, lines)
        if cfg.wants_svg:
            for index, line in enumerate(lines, start=1):
                write_output(os.path.join(directory, f"halfplane_{index:02d}.svg"),
                             render_halfplane_svg(points, line, title=", ".join(line.members)))
        print(f"{court.label}: {len(lines)} half-plane coalitions")
        for line in lines:
            print("  " + ", ".join(line.members))
    return 0


def cmd_fifth_vote(cfg: RunConfig, table: VoteTable) -> int:
    for selector in court_selectors(cfg, table):
        court = select_court(table, selector)
        directory = court_dir(cfg, court)
        _, embedding = classical_mds_for(cfg, court)

        if cfg.case_id:
            matches = [r for r in case_fifth_votes(court, embedding) if r.case_id == cfg.case_id]
            if not matches:
                raise DataError(f"Case '{cfg.case_id}' is not a 5-to-4 decision of court '{court.label}'.")
            result = matches[0]
            key = court_key(cfg.case_id)
            write_fifth_votes(cfg, directory, [result], name=f"case_{key}")
            points = from_embedding(embedding)
            cells = voronoi_coalitions(points, epsilon=cfg.epsilon)
            if result.members in {cell.members for cell in cells}:
                write_output(os.path.join(directory, f"case_{key}_voronoi.svg"),
                             render_voronoi_svg(points, cells, [result.members], upper_case_highlight=True))
            else:
                warn(f"Case '{cfg.case_id}': majority {', '.join(result.members)} owns no Voronoi cell")
            write_output(os.path.join(directory, f"case_{key}_circles.svg"), render_circles_svg(embedding, result))
            print(f"{cfg.case_id}: majority perspective {result.by_majority}, minority perspective {result.by_minority}")
            continue

        results = [fifth_vote(embedding, c.members) for c in extract_voting_coalitions(court)]
        write_fifth_votes(cfg, directory, results)
        for r in results:
            print(f"{', '.join(r.members)}: majority perspective {r.by_majority}, minority perspective {r.by_minority}")
        if results:
            rate = agreement_rate(results)
            print(f"{court.label}: methods agree on {sum(r.agree for r in results)}/{len(results)} ({float(rate):.3f})")
        else:
            warn(f"Court '{court.label}' has no 5-to-4 decisions")
    return 0


def cmd_mean_justice(cfg: RunConfig, table: VoteTable) -> int:
    for selector in court_selectors(cfg, table):
        court = select_court(table, selector)
        settings = settings_for(cfg, court)
        _, embedding = classical_mds_for(cfg, court)
        mean = mean_justice(embedding)
        term_means = term_mean_justices(court, settings) if cfg.per_term else {}
        write_mean_justice(court_dir(cfg, court), mean, term_means)
        print(f"{court.label}: {mean.justice}")
        for term, result in sorted(term_means.items()):
            print(f"  {term}: {result.justice}")
    return 0


def cmd_report(cfg: RunConfig, table: VoteTable) -> int:
    reports = []
    for selector in court_selectors(cfg, table):
        court = select_court(table, selector)
        analysis = analyze_court(court, settings_for(cfg, court))
        write_report(cfg, court_dir(cfg, court), analysis)
        reports.append(analysis.report)
    sys.stdout.write(accuracy_table_csv(reports))
    return 0


def cmd_render(cfg: RunConfig, table: VoteTable) -> int:
    for selector in court_selectors(cfg, table):
        court = select_court(table, selector)
        analysis = analyze_court(court, settings_for(cfg, court))
        write_figures(cfg, court_dir(cfg, court), analysis)
    return 0


def classical_mds_for(cfg: RunConfig, court: CourtSlice):
    matrix = dissimilarity_matrix(court)
    return matrix, classical_mds(matrix, dimension=2, anchor=settings_for(cfg, court).anchor)


def _process_court(cfg: RunConfig, table: VoteTable, selector: CourtSelector) -> Optional[CourtReport]:
    try:
        court = select_court(table, selector)
        analysis = analyze_court(court, settings_for(cfg, court))
        write_court(cfg, court_dir(cfg, court), analysis)
    except DataError as e:
        warn(f"Court '{selector.label()}' skipped: {e}")
        return None
    return analysis.report


def write_court(cfg: RunConfig, directory: str, analysis: CourtAnalysis):
    """The union of the per-court files of the single-purpose subcommands."""
    write_matrix(cfg, directory, analysis.matrix)
    write_embedding(cfg, directory, analysis.embedding_1d)
    write_embedding(cfg, directory, analysis.embedding_2d)
    write_coalitions(cfg, directory, analysis.voting, disorder_table(analysis.ranks, analysis.voting))
    write_cells(cfg, directory, analysis.cells)
    write_lines(cfg, directory, analysis.lines)
    write_fifth_votes(cfg, directory, analysis.fifth_votes)
    write_mean_justice(directory, analysis.mean, analysis.term_means)
    write_report(cfg, directory, analysis)
    if cfg.figures:
        write_figures(cfg, directory, analysis)


def write_summary(cfg: RunConfig, reports: list[CourtReport]):
    """Cross-court tables at the output root."""
    write_output(os.path.join(cfg.out_dir, "court_summary.csv"), accuracy_table_csv(reports))
    write_output(os.path.join(cfg.out_dir, "term_mean_justices.csv"), term_table_csv(term_table(reports)))
    write_output(os.path.join(cfg.out_dir, "summary.json"), reports_to_json(reports))
    if cfg.figures:
        write_output(os.path.join(cfg.out_dir, "min_accuracy.svg"),
                     render_min_accuracy_svg(min_accuracy_series(reports)))


def cmd_all(cfg: RunConfig, table: VoteTable) -> int:
    selectors = court_selectors(cfg, table, every_court=True)
    log(f"Processing {len(selectors)} court(s) with {cfg.workers} worker(s)")
    with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
        results = list(executor.map(lambda selector: _process_court(cfg, table, selector), selectors))

    reports = [report for report in results if report is not None]
    failed = len(results) - len(reports)
    if reports and cfg.reports:
        write_summary(cfg, reports)
    print(f"courts analyzed: {len(reports)}, skipped: {failed}")
    return 1 if failed else 0


def cmd_summary(cfg: RunConfig, table: VoteTable) -> int:
    if not is_store(cfg.input_path):
        raise ConfigurationError("'summary' reads the reports kept in a store; pass --input with a .db written by 'ingest'.")
    reports = [CourtReport.model_validate(payload) for payload in load_reports(cfg.input_path)]
    if cfg.courts:
        reports = [report for report in reports if report.court_id in cfg.courts]
    if not reports:
        raise DataError(f"No stored court reports in '{cfg.input_path}'; run 'report' or 'all' on the store first.")
    write_summary(cfg, reports)
    sys.stdout.write(accuracy_table_csv(reports))
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "mds": cmd_mds,
    "coalitions": cmd_coalitions,
    "voronoi": cmd_voronoi,
    "ksets": cmd_ksets,
    "fifth-vote": cmd_fifth_vote,
    "mean-justice": cmd_mean_justice,
    "report": cmd_report,
    "render": cmd_render,
    "all": cmd_all,
    "summary": cmd_summary,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Spatial analysis of 5-to-4 Supreme Court decisions.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file (default: config.ini beside this script).")
    common.add_argument("--input", help=f"Vote CSV or .db store (default: ${INPUT_ENV_VAR} or [input] path).")
    common.add_argument("--delimiter", help="Input field delimiter (',' by default; 'tab' for tab).")
    common.add_argument("--column", action="append", metavar="FIELD=HEADER", help="Map a canonical field to an input header.")
    common.add_argument("--court", action="append", help="Natural court id (repeatable).")
    common.add_argument("--terms", metavar="A..B", help="Term range, alone or inside --court.")
    common.add_argument("--out", help="Output directory (default: output).")
    common.add_argument("--format", choices=FORMATS, help="Data file format; 'svg' also renders figures.")
    common.add_argument("--anchor", metavar="NAME", help="Justice placed on the positive side of dimension 1.")
    common.add_argument("--epsilon", type=float, help="Geometric strictness margin, relative to the layout diameter.")
    common.add_argument("--grid-resolution", type=int, help="Grid size of the Voronoi sampling cross-check.")
    common.add_argument("--dim", type=int, default=2, choices=(1, 2), help="MDS dimension for 'mds'.")
    common.add_argument("--per-term", action=argparse.BooleanOptionalAction, default=None,
                        help="Recompute the mean justice for every term.")
    common.add_argument("--workers", type=int, help="Courts processed in parallel by 'all'.")
    common.add_argument("--highlight", action="append", metavar="A,B,C,D,E", help="Coalition to fill in voronoi.svg.")
    common.add_argument("--case", help="Case id for a single-case fifth-vote analysis.")

    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("ingest", parents=[common], help="Validate vote data and store it.")
    subparsers.add_parser("mds", parents=[common], help="Dissimilarities and MDS coordinates.")
    subparsers.add_parser("coalitions", parents=[common], help="Voting coalitions and discrete disorder.")
    subparsers.add_parser("voronoi", parents=[common], help="Order-5 Voronoi coalitions.")
    subparsers.add_parser("ksets", parents=[common], help="Half-plane coalitions.")
    subparsers.add_parser("fifth-vote", parents=[common], help="Decisive fifth votes.")
    subparsers.add_parser("mean-justice", parents=[common], help="Mean justice of the court and of each term.")
    subparsers.add_parser("report", parents=[common], help="Accuracy summary of each court.")
    subparsers.add_parser("render", parents=[common], help="SVG figures of each court.")
    subparsers.add_parser("all", parents=[common], help="Everything, for every selected court.")
    subparsers.add_parser("summary", parents=[common], help="Cross-court tables from the reports kept in a store.")
    return parser


def run(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        cfg = load_run_config(args)
        table = load_input(cfg)
        prepare_output(cfg)
        return COMMANDS[cfg.command](cfg, table)
    except ConfigurationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
