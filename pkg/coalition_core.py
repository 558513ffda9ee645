"""Voting coalitions of 5-to-4 decisions and their discrete disorder scores."""
import functools
import itertools
from typing import Iterable, Optional

import networkx as nx
from pydantic import BaseModel, computed_field, field_validator

from mds_embed import Embedding
from scdb_ingest import COURT_SIZE, DISSENT, MAJORITY, CourtSlice
from utils import rows_to_csv, to_json, warn

COALITION_SIZE = 5


def canonical(members: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(members))


class Coalition(BaseModel):
    members: tuple[str, ...]
    case_ids: list[str] = []
    is_voronoi: bool = False
    is_halfplane: bool = False
    disorder: Optional[int] = None

    @field_validator('members')
    @classmethod
    def _five_distinct(cls, members):
        ordered = canonical(members)
        if len(ordered) != COALITION_SIZE or len(set(ordered)) != COALITION_SIZE:
            raise ValueError(f"A coalition has exactly {COALITION_SIZE} distinct members, got {members}")
        return ordered

    @computed_field
    @property
    def is_voting(self) -> bool:
        return bool(self.case_ids)

    @computed_field
    @property
    def case_count(self) -> int:
        return len(self.case_ids)


class RankAssignment(BaseModel):
    ranks: dict[str, int]

    @field_validator('ranks')
    @classmethod
    def _bijection(cls, ranks):
        if sorted(ranks.values()) != list(range(1, len(ranks) + 1)):
            raise ValueError("ranks must be a bijection onto 1..n")
        return ranks

    def of(self, members: Iterable[str]) -> list[int]:
        return sorted(self.ranks[name] for name in members)


def extract_voting_coalitions(court: CourtSlice) -> list[Coalition]:
    """One coalition per distinct five-justice majority of a 5-to-4 case."""
    votes = court.vote_matrix()
    occurrences: dict[tuple[str, ...], list[str]] = {}
    for case, row in zip(court.cases, votes):
        majority = [court.roster[i] for i in range(COURT_SIZE) if row[i] == MAJORITY]
        dissent = sum(1 for code in row if code == DISSENT)
        if len(majority) == COALITION_SIZE and dissent == COURT_SIZE - COALITION_SIZE:
            occurrences.setdefault(canonical(majority), []).append(case.case_id)
    return [Coalition(members=members, case_ids=case_ids) for members, case_ids in sorted(occurrences.items())]


def rank_justices(embedding: Embedding) -> RankAssignment:
    """Rank 1 is the leftmost justice on dimension 1; equal positions are ordered by name."""
    positions = sorted((coords[0], name) for name, coords in zip(embedding.roster, embedding.coords))
    for (left, left_name), (right, right_name) in zip(positions, positions[1:]):
        if left == right:
            warn(f"{left_name} and {right_name} share dimension-1 position {left!r}; ranked by name")
    return RankAssignment(ranks={name: rank for rank, (_, name) in enumerate(positions, start=1)})


def discrete_disorder(members: Iterable[str], ranks: RankAssignment) -> int:
    """
    Minimum number of adjacent transpositions taking the members' ranks to either
    extreme bloc: min(sum(j_k - k), sum(n + 1 - k - j_{m+1-k})).
    """
    j = ranks.of(members)
    return disorder_of_ranks(j, len(ranks.ranks))


def disorder_of_ranks(rank_set: Iterable[int], n: int = COURT_SIZE) -> int:
    j = sorted(rank_set)
    m = len(j)
    to_left = sum(j[k - 1] - k for k in range(1, m + 1))
    to_right = sum(n + 1 - k - j[m - k] for k in range(1, m + 1))
    return min(to_left, to_right)


@functools.lru_cache(maxsize=None)
def _transposition_graph(n: int, k: int) -> nx.Graph:
    graph = nx.Graph()
    for chosen in itertools.combinations(range(n), k):
        state = tuple(1 if i in chosen else 0 for i in range(n))
        graph.add_node(state)
        for i in range(n - 1):
            if state[i] != state[i + 1]:
                swapped = list(state)
                swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
                graph.add_edge(state, tuple(swapped))
    return graph


@functools.lru_cache(maxsize=None)
def _bloc_distances(n: int, k: int) -> dict[tuple[int, ...], int]:
    graph = _transposition_graph(n, k)
    left = tuple([1] * k + [0] * (n - k))
    right = tuple([0] * (n - k) + [1] * k)
    from_left = nx.single_source_shortest_path_length(graph, left)
    from_right = nx.single_source_shortest_path_length(graph, right)
    return {state: min(from_left[state], from_right[state]) for state in graph.nodes}


def transposition_distance(rank_set: Iterable[int], n: int = COURT_SIZE) -> int:
    """Breadth-first distance from the indicator of `rank_set` to the nearer extreme bloc."""
    chosen = set(rank_set)
    state = tuple(1 if rank in chosen else 0 for rank in range(1, n + 1))
    return _bloc_distances(n, len(chosen))[state]


def all_subsets(roster: Iterable[str], size: int = COALITION_SIZE) -> list[tuple[str, ...]]:
    return [canonical(members) for members in itertools.combinations(sorted(roster), size)]


def disorder_table(ranks: RankAssignment, voting: list[Coalition], max_score: int = 3) -> list[Coalition]:
    """All five-justice groups scoring at most `max_score`, lowest score first."""
    cases_by_members = {coalition.members: coalition.case_ids for coalition in voting}
    rows = []
    for members in all_subsets(ranks.ranks):
        score = discrete_disorder(members, ranks)
        if score <= max_score:
            rows.append(Coalition(members=members, case_ids=cases_by_members.get(members, []), disorder=score))
    rows.sort(key=lambda c: (c.disorder, c.members))
    return rows


def annotate(
    voting: list[Coalition],
    ranks: RankAssignment,
    voronoi: Iterable[Iterable[str]] = (),
    halfplane: Iterable[Iterable[str]] = (),
) -> list[Coalition]:
    """
    Merges voting coalitions with model coalitions into one list keyed by member set,
    setting the model flags and disorder scores.
    """
    voronoi_sets = {canonical(m) for m in voronoi}
    halfplane_sets = {canonical(m) for m in halfplane}
    by_members = {c.members: c.case_ids for c in voting}
    merged = []
    for members in sorted(set(by_members) | voronoi_sets | halfplane_sets):
        merged.append(Coalition(
            members=members,
            case_ids=by_members.get(members, []),
            is_voronoi=members in voronoi_sets,
            is_halfplane=members in halfplane_sets,
            disorder=discrete_disorder(members, ranks),
        ))
    return merged


def coalitions_to_json(coalitions: list[Coalition]) -> str:
    return to_json([c.model_dump(mode='json') for c in coalitions])


def coalitions_to_csv(coalitions: list[Coalition]) -> str:
    rows = [
        [";".join(c.members), c.case_count, c.is_voting, c.is_voronoi, c.is_halfplane,
         "" if c.disorder is None else c.disorder]
        for c in coalitions
    ]
    return rows_to_csv(["members", "cases", "voting", "voronoi", "halfplane", "disorder"], rows)
