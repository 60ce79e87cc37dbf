"""Scenario configs, seeded experiment runs, and deterministic reporting.

A scenario bundles a network spec, a population spec, an optional role plan
(whose strategy list spawns one variant per strategy, ``none`` being the
reference run), an optional community plan, and run/output settings. Each
seed derives one independent random stream per concern, so two variants of
the same seed share the network, population, and masks, and differ only in
the intervention under study.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field, replace as dc_replace
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .community import Community, detect_communities, accelerate_loop, transfer_efficiency
from .diffusion import (
    DiffusionConfig,
    Probe,
    SimulationState,
    TimeSeries,
    collector_probes,
    probe_average,
    probe_mask,
    probe_node,
    run,
)
from .netgraph import (
    WeightedGraph,
    WeightSpec,
    add_edge,
    assign_weights,
    average_edge_weight,
    generate_watts_strogatz,
)
from .roles import ROLES, RoleAssignment, Strategy, apply_collector, apply_expert, apply_facilitator, rank_nodes, select_top
from .workforce import Population, init_workers

__all__ = [
    "ConfigError",
    "ExperimentReport",
    "ScenarioConfig",
    "VariantResult",
    "clear_caches",
    "config_hash",
    "emit_report",
    "export_fixtures",
    "fixture_names",
    "load_config",
    "load_fixture",
    "parse_config",
    "propose_ties",
    "run_experiment",
    "stabilization_step",
    "stream_rng",
]

logger = logging.getLogger("knowflow")

_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")

REFERENCE_TOKEN = "none"
_STRATEGY_TOKENS = tuple(s.value for s in Strategy)
_TIE_MODES = ("none", "manual", "algorithm", "random")

# One independent random stream per concern, all derived from the master seed.
_STREAMS = {"topology": 0, "weights": 1, "population": 2, "strategy": 3, "boost": 4, "ties": 5}


def stream_rng(seed: int, concern: str) -> np.random.Generator:
    """Generator for one named concern, derived from the master seed."""
    if concern not in _STREAMS:
        raise ConfigError(f"unknown random stream {concern!r}")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAMS[concern],)))


class ConfigError(ValueError):
    """Malformed scenario configuration; the message names the offending key."""


# -- config model -------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkSpec:
    nodes: int
    ring_degree: int = 4
    rewire_prob: float = 0.1
    weights: WeightSpec = field(default_factory=lambda: WeightSpec.uniform(0.1, 1.0))

    def to_dict(self) -> dict:
        if self.weights.kind == "constant":
            wdict: dict[str, Any] = {"kind": "constant", "value": self.weights.low}
        else:
            wdict = {"kind": "uniform", "low": self.weights.low, "high": self.weights.high}
        return {
            "nodes": self.nodes,
            "ring_degree": self.ring_degree,
            "rewire_prob": self.rewire_prob,
            "weights": wdict,
        }


@dataclass(frozen=True)
class PopulationSpec:
    competences: int
    competence_range: tuple[float, float] = (0.0, 10.0)
    mask_density: float = 0.5
    forgetting: float = 0.006
    cognitive_range: tuple[float, float] = (0.0, 1.0)
    social_range: tuple[float, float] = (0.0, 1.0)

    def to_dict(self) -> dict:
        return {
            "competences": self.competences,
            "competence_range": list(self.competence_range),
            "mask_density": self.mask_density,
            "forgetting": self.forgetting,
            "cognitive_range": list(self.cognitive_range),
            "social_range": list(self.social_range),
        }


@dataclass(frozen=True)
class RolePlan:
    role: str
    strategies: tuple[str, ...]
    fraction: float | None = None
    count: int | None = None
    boost_range: tuple[float, float] | None = None
    boost_all: bool = False
    weight_factor: float | None = None
    step: int = 0

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"role": self.role, "strategies": list(self.strategies), "step": self.step}
        if self.fraction is not None:
            out["fraction"] = self.fraction
        if self.count is not None:
            out["count"] = self.count
        if self.boost_range is not None:
            out["boost_range"] = list(self.boost_range)
            out["boost_all"] = self.boost_all
        if self.weight_factor is not None:
            out["weight_factor"] = self.weight_factor
        return out


@dataclass(frozen=True)
class CommunityFixture:
    members: tuple[int, ...]
    core: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"members": list(self.members), "core": list(self.core)}


@dataclass(frozen=True)
class CommunityPlan:
    method: str = "fixture"
    threshold: float = 0.5
    core_rule: str = "and"
    core_theta: float = 0.5
    communities: tuple[CommunityFixture, ...] = ()
    ties: str = "none"
    manual_ties: tuple[tuple[int, int], ...] = ()
    community_index: int = 0
    budget: int = 1
    min_efficiency: float | None = None
    tie_weight: float | None = None
    division: str = "double"

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "method": self.method,
            "ties": self.ties,
            "division": self.division,
            "budget": self.budget,
            "community_index": self.community_index,
        }
        if self.method == "jaccard":
            out["threshold"] = self.threshold
            out["core_rule"] = self.core_rule
            if self.core_rule == "majority":
                out["core_theta"] = self.core_theta
        else:
            out["communities"] = [c.to_dict() for c in self.communities]
        if self.ties == "manual":
            out["manual_ties"] = [list(t) for t in self.manual_ties]
        if self.min_efficiency is not None:
            out["min_efficiency"] = self.min_efficiency
        if self.tie_weight is not None:
            out["tie_weight"] = self.tie_weight
        return out


@dataclass(frozen=True)
class ProbeSpec:
    kind: str  # "average" | "node" | "mask" | "collector"
    node: int | None = None
    name: str | None = None
    competences: tuple[int, ...] = ()
    members: tuple[int, ...] | None = None

    def to_json(self) -> Any:
        if self.kind == "average":
            return "average_competence"
        if self.kind == "collector":
            return "collector_intake"
        if self.kind == "node":
            return {"node": self.node}
        body: dict[str, Any] = {"name": self.name, "competences": list(self.competences)}
        if self.members is not None:
            body["members"] = list(self.members)
        return {"mask": body}


@dataclass(frozen=True)
class RunSpec:
    steps: int
    seeds: tuple[int, ...]
    probes: tuple[ProbeSpec, ...]

    def to_dict(self) -> dict:
        return {"steps": self.steps, "seeds": list(self.seeds), "probes": [p.to_json() for p in self.probes]}


@dataclass(frozen=True)
class OutputSpec:
    directory: str | None = None
    formats: tuple[str, ...] = ("csv", "json")

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"formats": list(self.formats)}
        if self.directory is not None:
            out["directory"] = self.directory
        return out


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    network: NetworkSpec
    population: PopulationSpec
    run: RunSpec
    role_plan: RolePlan | None = None
    community_plan: CommunityPlan | None = None
    cognitive_gain: bool = True
    output: OutputSpec = field(default_factory=OutputSpec)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "name": self.name,
            "network": self.network.to_dict(),
            "population": self.population.to_dict(),
            "run": self.run.to_dict(),
            "diffusion": {"cognitive_gain": self.cognitive_gain},
            "output": self.output.to_dict(),
        }
        if self.role_plan is not None:
            out["role_plan"] = self.role_plan.to_dict()
        if self.community_plan is not None:
            out["community_plan"] = self.community_plan.to_dict()
        return out


def config_hash(config: ScenarioConfig) -> str:
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# -- config parsing -----------------------------------------------------------------


def _check_keys(data: Mapping, path: str, required: Sequence[str], optional: Sequence[str] = ()) -> None:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{path}: expected an object")
    allowed = set(required) | set(optional)
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{path}: unknown key {key!r}")
    for key in required:
        if key not in data:
            raise ConfigError(f"{path}.{key}: required key missing")


def _as_int(value: Any, path: str, lo: int | None = None, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"{path}: must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{path}: must be <= {hi}, got {value}")
    return value


def _as_float(value: Any, path: str, lo: float | None = None, hi: float | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if lo is not None and value < lo:
        raise ConfigError(f"{path}: must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{path}: must be <= {hi}, got {value}")
    return value


def _as_bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true or false, got {value!r}")
    return value


def _as_str(value: Any, path: str, choices: Sequence[str] | None = None) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    if choices is not None and value not in choices:
        raise ConfigError(f"{path}: expected one of {sorted(choices)}, got {value!r}")
    return value


def _as_pair(value: Any, path: str) -> tuple[float, float]:
    if not isinstance(value, Sequence) or isinstance(value, str) or len(value) != 2:
        raise ConfigError(f"{path}: expected a [low, high] pair")
    lo = _as_float(value[0], f"{path}[0]")
    hi = _as_float(value[1], f"{path}[1]")
    if hi < lo:
        raise ConfigError(f"{path}: interval is reversed: [{lo}, {hi}]")
    return (lo, hi)


def _parse_weights(data: Any, path: str) -> WeightSpec:
    _check_keys(data, path, required=["kind"], optional=["value", "low", "high"])
    kind = _as_str(data["kind"], f"{path}.kind", choices=["constant", "uniform"])
    if kind == "constant":
        if "value" not in data:
            raise ConfigError(f"{path}.value: required key missing")
        if "low" in data or "high" in data:
            raise ConfigError(f"{path}: constant weights take 'value', not 'low'/'high'")
        spec = WeightSpec.constant(_as_float(data["value"], f"{path}.value"))
    else:
        if "value" in data:
            raise ConfigError(f"{path}: uniform weights take 'low'/'high', not 'value'")
        for key in ("low", "high"):
            if key not in data:
                raise ConfigError(f"{path}.{key}: required key missing")
        spec = WeightSpec.uniform(
            _as_float(data["low"], f"{path}.low"), _as_float(data["high"], f"{path}.high")
        )
    if not (spec.low > 0.0):
        raise ConfigError(f"{path}: weights must be strictly positive")
    if spec.high < spec.low:
        raise ConfigError(f"{path}: interval is reversed: [{spec.low}, {spec.high}]")
    return spec


def _parse_network(data: Any) -> NetworkSpec:
    _check_keys(data, "network", required=["nodes"], optional=["ring_degree", "rewire_prob", "weights"])
    nodes = _as_int(data["nodes"], "network.nodes", lo=3)
    ring_degree = _as_int(data.get("ring_degree", 4), "network.ring_degree", lo=2)
    if ring_degree % 2 != 0:
        raise ConfigError(f"network.ring_degree: must be even, got {ring_degree}")
    if ring_degree >= nodes:
        raise ConfigError(f"network.ring_degree: must be smaller than nodes ({nodes}), got {ring_degree}")
    rewire = _as_float(data.get("rewire_prob", 0.1), "network.rewire_prob", lo=0.0, hi=1.0)
    weights = (
        _parse_weights(data["weights"], "network.weights")
        if "weights" in data
        else WeightSpec.uniform(0.1, 1.0)
    )
    return NetworkSpec(nodes=nodes, ring_degree=ring_degree, rewire_prob=rewire, weights=weights)


def _parse_population(data: Any) -> PopulationSpec:
    _check_keys(
        data,
        "population",
        required=["competences"],
        optional=["competence_range", "mask_density", "forgetting", "cognitive_range", "social_range"],
    )
    competences = _as_int(data["competences"], "population.competences", lo=1)
    comp_range = _as_pair(data.get("competence_range", [0.0, 10.0]), "population.competence_range")
    if comp_range[0] < 0.0:
        raise ConfigError("population.competence_range: must be non-negative")
    density = _as_float(data.get("mask_density", 0.5), "population.mask_density", lo=0.0, hi=1.0)
    forgetting = _as_float(data.get("forgetting", 0.006), "population.forgetting", lo=0.0)
    if forgetting >= 1.0:
        raise ConfigError(f"population.forgetting: must be < 1, got {forgetting}")
    cog = _as_pair(data.get("cognitive_range", [0.0, 1.0]), "population.cognitive_range")
    soc = _as_pair(data.get("social_range", [0.0, 1.0]), "population.social_range")
    for name, (lo, hi) in (("cognitive_range", cog), ("social_range", soc)):
        if lo < 0.0 or hi > 1.0:
            raise ConfigError(f"population.{name}: abilities must lie within [0, 1]")
    return PopulationSpec(
        competences=competences,
        competence_range=comp_range,
        mask_density=density,
        forgetting=forgetting,
        cognitive_range=cog,
        social_range=soc,
    )


def _parse_role_plan(data: Any, network: NetworkSpec) -> RolePlan:
    _check_keys(
        data,
        "role_plan",
        required=["role", "strategies"],
        optional=["fraction", "count", "boost_range", "boost_all", "weight_factor", "step"],
    )
    role = _as_str(data["role"], "role_plan.role", choices=ROLES)
    raw_strategies = data["strategies"]
    if not isinstance(raw_strategies, Sequence) or isinstance(raw_strategies, str) or not raw_strategies:
        raise ConfigError("role_plan.strategies: expected a non-empty list of strategy names")
    strategies: list[str] = []
    for i, token in enumerate(raw_strategies):
        token = _as_str(token, f"role_plan.strategies[{i}]", choices=(REFERENCE_TOKEN, *_STRATEGY_TOKENS))
        if token in strategies:
            raise ConfigError(f"role_plan.strategies[{i}]: duplicate strategy {token!r}")
        strategies.append(token)

    has_fraction = "fraction" in data
    has_count = "count" in data
    if has_fraction == has_count:
        raise ConfigError("role_plan: exactly one of 'fraction' or 'count' is required")
    fraction = _as_float(data["fraction"], "role_plan.fraction") if has_fraction else None
    if fraction is not None and not (0.0 < fraction <= 1.0):
        raise ConfigError(f"role_plan.fraction: must lie in (0, 1], got {fraction}")
    count = _as_int(data["count"], "role_plan.count", lo=1) if has_count else None
    if count is not None and count > network.nodes:
        raise ConfigError(f"role_plan.count: exceeds network nodes ({network.nodes}), got {count}")

    boost_range = None
    boost_all = False
    weight_factor = None
    if role == "expert":
        if "boost_range" not in data:
            raise ConfigError("role_plan.boost_range: required for the expert role")
        boost_range = _as_pair(data["boost_range"], "role_plan.boost_range")
        if boost_range[0] < 0.0:
            raise ConfigError("role_plan.boost_range: must be non-negative")
        boost_all = _as_bool(data.get("boost_all", False), "role_plan.boost_all")
        if "weight_factor" in data:
            raise ConfigError("role_plan.weight_factor: only valid for the facilitator role")
    elif role == "facilitator":
        if "weight_factor" not in data:
            raise ConfigError("role_plan.weight_factor: required for the facilitator role")
        weight_factor = _as_float(data["weight_factor"], "role_plan.weight_factor")
        if not (weight_factor > 0.0):
            raise ConfigError(f"role_plan.weight_factor: must be > 0, got {weight_factor}")
        for key in ("boost_range", "boost_all"):
            if key in data:
                raise ConfigError(f"role_plan.{key}: only valid for the expert role")
    else:  # collector
        for key in ("boost_range", "boost_all", "weight_factor"):
            if key in data:
                raise ConfigError(f"role_plan.{key}: not valid for the collector role")

    step = _as_int(data.get("step", 0), "role_plan.step", lo=0)
    return RolePlan(
        role=role,
        strategies=tuple(strategies),
        fraction=fraction,
        count=count,
        boost_range=boost_range,
        boost_all=boost_all,
        weight_factor=weight_factor,
        step=step,
    )


def _parse_community_plan(data: Any, network: NetworkSpec, population: PopulationSpec) -> CommunityPlan:
    _check_keys(
        data,
        "community_plan",
        required=["method"],
        optional=[
            "threshold",
            "core_rule",
            "core_theta",
            "communities",
            "ties",
            "manual_ties",
            "community_index",
            "budget",
            "min_efficiency",
            "tie_weight",
            "division",
        ],
    )
    method = _as_str(data["method"], "community_plan.method", choices=["fixture", "jaccard"])
    threshold = _as_float(data.get("threshold", 0.5), "community_plan.threshold")
    if not (0.0 < threshold <= 1.0):
        raise ConfigError(f"community_plan.threshold: must lie in (0, 1], got {threshold}")
    core_rule = _as_str(data.get("core_rule", "and"), "community_plan.core_rule", choices=["and", "majority"])
    core_theta = _as_float(data.get("core_theta", 0.5), "community_plan.core_theta")

    communities: list[CommunityFixture] = []
    if method == "fixture":
        raw = data.get("communities")
        if not isinstance(raw, Sequence) or isinstance(raw, str) or not raw:
            raise ConfigError("community_plan.communities: fixture method needs a non-empty list")
        for z, entry in enumerate(raw):
            path = f"community_plan.communities[{z}]"
            _check_keys(entry, path, required=["members", "core"])
            members = entry["members"]
            core = entry["core"]
            if not isinstance(members, Sequence) or isinstance(members, str) or not members:
                raise ConfigError(f"{path}.members: expected a non-empty list of node ids")
            member_ids = tuple(_as_int(v, f"{path}.members[{i}]", lo=0, hi=network.nodes - 1) for i, v in enumerate(members))
            if len(set(member_ids)) != len(member_ids):
                raise ConfigError(f"{path}.members: duplicate node id")
            if not isinstance(core, Sequence) or isinstance(core, str):
                raise ConfigError(f"{path}.core: expected a list of competence indices")
            core_ids = tuple(
                _as_int(c, f"{path}.core[{i}]", lo=0, hi=population.competences - 1) for i, c in enumerate(core)
            )
            communities.append(CommunityFixture(members=tuple(sorted(member_ids)), core=tuple(sorted(core_ids))))
    elif "communities" in data:
        raise ConfigError("community_plan.communities: only valid with the fixture method")

    ties = _as_str(data.get("ties", "none"), "community_plan.ties", choices=_TIE_MODES)
    manual_ties: list[tuple[int, int]] = []
    if ties == "manual":
        raw_ties = data.get("manual_ties")
        if not isinstance(raw_ties, Sequence) or isinstance(raw_ties, str) or not raw_ties:
            raise ConfigError("community_plan.manual_ties: manual ties need a non-empty list of [u, v] pairs")
        for i, pair in enumerate(raw_ties):
            path = f"community_plan.manual_ties[{i}]"
            if not isinstance(pair, Sequence) or isinstance(pair, str) or len(pair) != 2:
                raise ConfigError(f"{path}: expected a [u, v] pair")
            u = _as_int(pair[0], f"{path}[0]", lo=0, hi=network.nodes - 1)
            v = _as_int(pair[1], f"{path}[1]", lo=0, hi=network.nodes - 1)
            if u == v:
                raise ConfigError(f"{path}: endpoints must be distinct")
            manual_ties.append((u, v))
    elif "manual_ties" in data:
        raise ConfigError("community_plan.manual_ties: only valid with ties='manual'")

    community_index = _as_int(data.get("community_index", 0), "community_plan.community_index", lo=0)
    if method == "fixture" and communities and community_index >= len(communities):
        raise ConfigError(
            f"community_plan.community_index: only {len(communities)} communities defined, got {community_index}"
        )
    budget = _as_int(data.get("budget", 1), "community_plan.budget", lo=0)
    min_eff = data.get("min_efficiency")
    if min_eff is not None:
        min_eff = _as_float(min_eff, "community_plan.min_efficiency", lo=0.0)
    tie_weight = data.get("tie_weight")
    if tie_weight is not None:
        tie_weight = _as_float(tie_weight, "community_plan.tie_weight")
        if not (tie_weight > 0.0):
            raise ConfigError(f"community_plan.tie_weight: must be > 0, got {tie_weight}")
    division = _as_str(data.get("division", "double"), "community_plan.division", choices=["double", "single"])

    return CommunityPlan(
        method=method,
        threshold=threshold,
        core_rule=core_rule,
        core_theta=core_theta,
        communities=tuple(communities),
        ties=ties,
        manual_ties=tuple(manual_ties),
        community_index=community_index,
        budget=budget,
        min_efficiency=min_eff,
        tie_weight=tie_weight,
        division=division,
    )


def _parse_probes(raw: Any, network: NetworkSpec, population: PopulationSpec) -> tuple[ProbeSpec, ...]:
    if not isinstance(raw, Sequence) or isinstance(raw, str) or not raw:
        raise ConfigError("run.probes: expected a non-empty list")
    probes: list[ProbeSpec] = []
    for i, entry in enumerate(raw):
        path = f"run.probes[{i}]"
        if isinstance(entry, str):
            if entry == "average_competence":
                probes.append(ProbeSpec(kind="average"))
            elif entry == "collector_intake":
                probes.append(ProbeSpec(kind="collector"))
            else:
                raise ConfigError(
                    f"{path}: unknown probe {entry!r}; expected 'average_competence', 'collector_intake', "
                    "a {{'node': id}} object, or a {{'mask': ...}} object"
                )
        elif isinstance(entry, Mapping):
            if set(entry) == {"node"}:
                node = _as_int(entry["node"], f"{path}.node", lo=0, hi=network.nodes - 1)
                probes.append(ProbeSpec(kind="node", node=node))
            elif set(entry) == {"mask"}:
                body = entry["mask"]
                _check_keys(body, f"{path}.mask", required=["name", "competences"], optional=["members"])
                name = _as_str(body["name"], f"{path}.mask.name")
                if not _NAME_RE.match(name):
                    raise ConfigError(f"{path}.mask.name: must match [A-Za-z0-9_.-]+, got {name!r}")
                comps = body["competences"]
                if not isinstance(comps, Sequence) or isinstance(comps, str) or not comps:
                    raise ConfigError(f"{path}.mask.competences: expected a non-empty list of indices")
                comp_ids = tuple(
                    _as_int(c, f"{path}.mask.competences[{j}]", lo=0, hi=population.competences - 1)
                    for j, c in enumerate(comps)
                )
                members = None
                if "members" in body:
                    raw_members = body["members"]
                    if not isinstance(raw_members, Sequence) or isinstance(raw_members, str) or not raw_members:
                        raise ConfigError(f"{path}.mask.members: expected a non-empty list of node ids")
                    members = tuple(
                        _as_int(v, f"{path}.mask.members[{j}]", lo=0, hi=network.nodes - 1)
                        for j, v in enumerate(raw_members)
                    )
                probes.append(
                    ProbeSpec(kind="mask", name=name, competences=tuple(sorted(set(comp_ids))), members=members)
                )
            else:
                raise ConfigError(f"{path}: expected a 'node' or 'mask' object, got keys {sorted(entry)}")
        else:
            raise ConfigError(f"{path}: unsupported probe entry {entry!r}")
    return tuple(probes)


def _parse_run(data: Any, network: NetworkSpec, population: PopulationSpec) -> RunSpec:
    _check_keys(data, "run", required=["steps", "seeds"], optional=["probes"])
    steps = _as_int(data["steps"], "run.steps", lo=0)
    raw_seeds = data["seeds"]
    if not isinstance(raw_seeds, Sequence) or isinstance(raw_seeds, str) or not raw_seeds:
        raise ConfigError("run.seeds: expected a non-empty list of integers")
    seeds = tuple(_as_int(s, f"run.seeds[{i}]", lo=0) for i, s in enumerate(raw_seeds))
    if len(set(seeds)) != len(seeds):
        raise ConfigError("run.seeds: seeds must be unique")
    probes = _parse_probes(data.get("probes", ["average_competence"]), network, population)
    return RunSpec(steps=steps, seeds=seeds, probes=probes)


def _parse_output(data: Any) -> OutputSpec:
    _check_keys(data, "output", required=[], optional=["directory", "formats"])
    directory = None
    if "directory" in data:
        directory = _as_str(data["directory"], "output.directory")
    formats_raw = data.get("formats", ["csv", "json"])
    if not isinstance(formats_raw, Sequence) or isinstance(formats_raw, str) or not formats_raw:
        raise ConfigError("output.formats: expected a non-empty list")
    formats: list[str] = []
    for i, fmt in enumerate(formats_raw):
        fmt = _as_str(fmt, f"output.formats[{i}]", choices=["csv", "json", "both"])
        if fmt == "both":
            formats.extend(["csv", "json"])
        else:
            formats.append(fmt)
    return OutputSpec(directory=directory, formats=tuple(dict.fromkeys(formats)))


def parse_config(data: Any, source: str = "config") -> ScenarioConfig:
    """Validate a raw JSON object into a ScenarioConfig; fail fast on any unknown key."""
    _check_keys(
        data,
        source,
        required=["name", "network", "population", "run"],
        optional=["role_plan", "community_plan", "diffusion", "output"],
    )
    name = _as_str(data["name"], f"{source}.name")
    if not _NAME_RE.match(name):
        raise ConfigError(f"{source}.name: must match [A-Za-z0-9_.-]+, got {name!r}")
    network = _parse_network(data["network"])
    population = _parse_population(data["population"])
    role_plan = _parse_role_plan(data["role_plan"], network) if "role_plan" in data else None
    community_plan = (
        _parse_community_plan(data["community_plan"], network, population)
        if "community_plan" in data
        else None
    )
    cognitive_gain = True
    if "diffusion" in data:
        _check_keys(data["diffusion"], "diffusion", required=[], optional=["cognitive_gain"])
        cognitive_gain = _as_bool(data["diffusion"].get("cognitive_gain", True), "diffusion.cognitive_gain")
    run_spec = _parse_run(data["run"], network, population)
    output = _parse_output(data["output"]) if "output" in data else OutputSpec()

    for i, probe in enumerate(run_spec.probes):
        if probe.kind == "collector" and (role_plan is None or role_plan.role != "collector"):
            raise ConfigError(f"run.probes[{i}]: collector_intake requires a collector role plan")

    return ScenarioConfig(
        name=name,
        network=network,
        population=population,
        run=run_spec,
        role_plan=role_plan,
        community_plan=community_plan,
        cognitive_gain=cognitive_gain,
        output=output,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"{path}: config file not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(data, source=path.name)


# -- shipped fixtures -----------------------------------------------------------------


def fixture_names() -> list[str]:
    root = resources.files("knowflow") / "fixtures"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_fixture(name: str) -> ScenarioConfig:
    root = resources.files("knowflow") / "fixtures"
    candidate = root / f"{name}.json"
    if not candidate.is_file():
        raise ConfigError(f"unknown fixture {name!r}; available: {', '.join(fixture_names())}")
    return parse_config(json.loads(candidate.read_text()), source=f"fixture:{name}")


def export_fixtures(out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    root = resources.files("knowflow") / "fixtures"
    written = []
    for name in fixture_names():
        target = out / f"{name}.json"
        target.write_text((root / f"{name}.json").read_text())
        written.append(target)
    return written


# -- experiment runner ------------------------------------------------------------------


_GRAPH_CACHE: dict[tuple, WeightedGraph] = {}
_RANK_CACHE: dict[tuple, tuple[int, ...]] = {}


def clear_caches() -> None:
    _GRAPH_CACHE.clear()
    _RANK_CACHE.clear()


def _graph_for(network: NetworkSpec, seed: int) -> WeightedGraph:
    """Seeded network build, cached; callers must treat the result as frozen."""
    key = (network, seed)
    if key not in _GRAPH_CACHE:
        g = generate_watts_strogatz(
            network.nodes, network.ring_degree, network.rewire_prob, stream_rng(seed, "topology")
        )
        g = assign_weights(g, network.weights, stream_rng(seed, "weights"))
        _GRAPH_CACHE[key] = g
    return _GRAPH_CACHE[key]


def _population_for(population: PopulationSpec, n_workers: int, seed: int) -> Population:
    return init_workers(
        n_workers=n_workers,
        n_competences=population.competences,
        competence_range=population.competence_range,
        mask_density=population.mask_density,
        cognitive_range=population.cognitive_range,
        social_range=population.social_range,
        forgetting=population.forgetting,
        rng=stream_rng(seed, "population"),
    )


def _ranking_for(network: NetworkSpec, seed: int, strategy: str) -> tuple[int, ...]:
    key = (network, seed, strategy)
    if key not in _RANK_CACHE:
        g = _graph_for(network, seed)
        rng = stream_rng(seed, "strategy") if strategy == Strategy.RANDOM.value else None
        _RANK_CACHE[key] = tuple(rank_nodes(g, strategy, rng=rng))
    return _RANK_CACHE[key]


def _communities_for(plan: CommunityPlan, workers: Population) -> list[Community]:
    if plan.method == "fixture":
        return detect_communities(
            workers,
            method="fixture",
            fixture=[(c.members, c.core) for c in plan.communities],
        )
    return detect_communities(
        workers,
        method="jaccard",
        threshold=plan.threshold,
        core_rule=plan.core_rule,
        core_theta=plan.core_theta,
    )


def _apply_tie_plan(
    plan: CommunityPlan,
    g: WeightedGraph,
    workers: Population,
    communities: list[Community],
    seed: int,
) -> tuple[WeightedGraph, list[dict]]:
    if plan.ties == "none":
        return g, []
    single = plan.division == "single"
    records: list[dict] = []

    if plan.ties == "manual":
        for u, v in plan.manual_ties:
            if g.has_edge(u, v):
                logger.warning("manual tie (%d, %d) already present for seed %d; skipped", u, v, seed)
                continue
            weight = plan.tie_weight if plan.tie_weight is not None else average_edge_weight(g)
            eff = transfer_efficiency(g, workers, u, v, single_division=single)
            g = add_edge(g, u, v, weight)
            records.append(
                {
                    "mode": "manual",
                    "community": None,
                    "from": u,
                    "to": v,
                    "weight": weight,
                    "efficiency_before": eff,
                }
            )
        return g, records

    if plan.community_index >= len(communities):
        raise ConfigError(
            f"community_plan.community_index: only {len(communities)} communities detected, "
            f"got {plan.community_index}"
        )
    target = communities[plan.community_index]

    if plan.ties == "algorithm":
        g, proposals = accelerate_loop(
            target,
            g,
            workers,
            budget=plan.budget,
            tie_weight=plan.tie_weight,
            min_efficiency=plan.min_efficiency,
            single_division=single,
        )
        for p in proposals:
            records.append({"mode": "algorithm", **p.as_record()})
        return g, records

    # uniformly random intra-community tie(s), for baselining the algorithm
    rng = stream_rng(seed, "ties")
    for _ in range(plan.budget):
        eligible = [
            (u, v)
            for i, u in enumerate(target.members)
            for v in target.members[i + 1:]
            if not g.has_edge(u, v)
        ]
        if not eligible:
            break
        u, v = eligible[int(rng.integers(len(eligible)))]
        weight = plan.tie_weight if plan.tie_weight is not None else average_edge_weight(g)
        eff = transfer_efficiency(g, workers, u, v, single_division=single)
        g = add_edge(g, u, v, weight)
        records.append(
            {
                "mode": "random",
                "community": target.id,
                "from": u,
                "to": v,
                "weight": weight,
                "efficiency_before": eff,
            }
        )
    return g, records


@dataclass
class _SingleRun:
    seed: int
    series: TimeSeries
    ties: list[dict]
    assignment: RoleAssignment | None


def _variant_names(config: ScenarioConfig) -> list[str]:
    if config.role_plan is not None:
        return list(config.role_plan.strategies)
    return ["default"]


def _build_probes(config: ScenarioConfig, collector_ids: Sequence[int]) -> list[Probe]:
    probes: list[Probe] = []
    for spec in config.run.probes:
        if spec.kind == "average":
            probes.append(probe_average())
        elif spec.kind == "node":
            probes.append(probe_node(int(spec.node)))  # type: ignore[arg-type]
        elif spec.kind == "mask":
            probes.append(probe_mask(str(spec.name), spec.competences, spec.members))
        else:
            probes.extend(collector_probes(collector_ids))
    return probes


def _single_run(config: ScenarioConfig, variant: str, seed: int) -> _SingleRun:
    g = _graph_for(config.network, seed)
    pop = _population_for(config.population, config.network.nodes, seed)
    dconfig = DiffusionConfig(cognitive_gain=config.cognitive_gain)

    interventions: dict[int, Callable[[SimulationState], SimulationState]] = {}
    assignment: RoleAssignment | None = None
    selected: tuple[int, ...] = ()
    plan = config.role_plan
    if plan is not None and variant != REFERENCE_TOKEN:
        ranking = _ranking_for(config.network, seed, variant)
        portion: int | float = plan.count if plan.count is not None else float(plan.fraction)  # type: ignore[arg-type]
        selected = tuple(select_top(ranking, portion))
        if plan.role == "expert":
            boost_rng = stream_rng(seed, "boost")
            boost_range = plan.boost_range

            def intervene(state: SimulationState) -> SimulationState:
                apply_expert(state.population, selected, boost_range, boost_rng, plan.boost_all)  # type: ignore[arg-type]
                return state

            params: tuple[tuple[str, object], ...] = (
                ("strategy", variant),
                ("boost_range", boost_range),
                ("boost_all", plan.boost_all),
            )
        elif plan.role == "facilitator":
            factor = float(plan.weight_factor)  # type: ignore[arg-type]

            def intervene(state: SimulationState) -> SimulationState:
                return dc_replace(state, graph=apply_facilitator(state.graph, selected, factor))

            params = (("strategy", variant), ("weight_factor", factor))
        else:

            def intervene(state: SimulationState) -> SimulationState:
                return apply_collector(state, selected)

            params = (("strategy", variant),)
        interventions[plan.step] = intervene
        assignment = RoleAssignment(role=plan.role, nodes=selected, params=params)

    ties: list[dict] = []
    if config.community_plan is not None:
        communities = _communities_for(config.community_plan, pop)
        g, ties = _apply_tie_plan(config.community_plan, g, pop, communities, seed)

    collector_ids = selected if (plan is not None and plan.role == "collector") else ()
    probes = _build_probes(config, collector_ids)
    state = SimulationState.initial(g, pop)
    _, series = run(state, config.run.steps, probes, config=dconfig, interventions=interventions)
    return _SingleRun(seed=seed, series=series, ties=ties, assignment=assignment)


@dataclass
class VariantResult:
    """All per-seed series for one variant plus cross-seed aggregates."""

    name: str
    seeds: tuple[int, ...]
    series: dict[int, TimeSeries]
    ties: dict[int, list[dict]]
    assignments: dict[int, RoleAssignment | None]
    steps: list[int] = field(default_factory=list)
    aggregates: dict[tuple[str, str], dict[str, np.ndarray]] = field(default_factory=dict)

    def final_values(self, metric: str = "average_competence", scope: str = "all") -> np.ndarray:
        """Final recorded value per seed, in the experiment's seed order."""
        return np.array([self.series[s].column(metric, scope)[-1] for s in self.seeds])

    def mean_curve(self, metric: str = "average_competence", scope: str = "all") -> np.ndarray:
        return self.aggregates[(metric, scope)]["mean"]


@dataclass
class ExperimentReport:
    config: ScenarioConfig
    config_hash: str
    seeds: tuple[int, ...]
    variants: dict[str, VariantResult]


def _aggregate(result: VariantResult) -> None:
    first = result.series[result.seeds[0]]
    common = [
        col
        for col in first.columns
        if all(col in result.series[s]._data for s in result.seeds)  # noqa: SLF001
    ]
    result.steps = list(first.steps)
    for col in common:
        matrix = np.stack([result.series[s].column(*col) for s in result.seeds])
        mean = matrix.mean(axis=0)
        std = matrix.std(axis=0, ddof=1) if matrix.shape[0] > 1 else np.zeros(matrix.shape[1])
        result.aggregates[col] = {"mean": mean, "std": std}


def run_experiment(config: ScenarioConfig, seeds: Sequence[int] | None = None) -> ExperimentReport:
    """Run every (variant, seed) combination and aggregate across seeds."""
    seed_list = tuple(int(s) for s in (seeds if seeds is not None else config.run.seeds))
    if not seed_list:
        raise ConfigError("run.seeds: need at least one seed")
    variants: dict[str, VariantResult] = {}
    for variant in _variant_names(config):
        runs: dict[int, TimeSeries] = {}
        ties: dict[int, list[dict]] = {}
        assignments: dict[int, RoleAssignment | None] = {}
        for seed in seed_list:
            logger.info("running %s variant=%s seed=%d", config.name, variant, seed)
            single = _single_run(config, variant, seed)
            runs[seed] = single.series
            ties[seed] = single.ties
            assignments[seed] = single.assignment
        result = VariantResult(name=variant, seeds=seed_list, series=runs, ties=ties, assignments=assignments)
        _aggregate(result)
        variants[variant] = result
    return ExperimentReport(
        config=config,
        config_hash=config_hash(config),
        seeds=seed_list,
        variants=variants,
    )


def propose_ties(
    config: ScenarioConfig,
    seed: int | None = None,
    community_index: int | None = None,
    budget: int | None = None,
) -> list[dict]:
    """Energy-guided tie proposals for one seed's network, without running diffusion."""
    if config.community_plan is None:
        raise ConfigError("community_plan: required to propose ties")
    plan = dc_replace(
        config.community_plan,
        ties="algorithm",
        community_index=config.community_plan.community_index if community_index is None else community_index,
        budget=config.community_plan.budget if budget is None else budget,
    )
    if plan.community_index < 0 or plan.budget < 0:
        raise ConfigError("community/budget overrides must be non-negative")
    run_seed = int(config.run.seeds[0] if seed is None else seed)
    g = _graph_for(config.network, run_seed)
    pop = _population_for(config.population, config.network.nodes, run_seed)
    communities = _communities_for(plan, pop)
    _, records = _apply_tie_plan(plan, g, pop, communities, run_seed)
    return records


# -- reporting ---------------------------------------------------------------------------


def stabilization_step(curve: Sequence[float], tolerance: float = 0.05) -> int:
    """First index after which the curve stays within ``tolerance`` of its final value."""
    values = np.asarray(curve, dtype=float)
    final = values[-1]
    bound = tolerance * max(abs(final), np.finfo(float).tiny)
    stable_from = len(values) - 1
    for i in range(len(values) - 1, -1, -1):
        if abs(values[i] - final) <= bound:
            stable_from = i
        else:
            break
    return int(stable_from)


def emit_report(
    report: ExperimentReport,
    out_dir: str | Path,
    formats: Sequence[str] | None = None,
) -> list[Path]:
    """Write per-seed and aggregate CSV series plus a JSON summary.

    Output is byte-deterministic for a given config and seed list: no
    timestamps, sorted JSON keys, shortest round-trip float formatting.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fmts = tuple(formats) if formats is not None else report.config.output.formats
    for fmt in fmts:
        if fmt not in ("csv", "json"):
            raise ConfigError(f"output format must be 'csv' or 'json', got {fmt!r}")
    written: list[Path] = []
    name = report.config.name

    if "csv" in fmts:
        for vname, result in report.variants.items():
            for seed in result.seeds:
                path = out / f"{name}__{vname}__seed{seed}.csv"
                path.write_text("\n".join(result.series[seed].csv_lines()) + "\n")
                written.append(path)
            agg_lines = ["step,metric,scope,value"]
            for i, t in enumerate(result.steps):
                for (metric, scope), stats in result.aggregates.items():
                    agg_lines.append(f"{t},{metric}:mean,{scope},{float(stats['mean'][i])!r}")
                    agg_lines.append(f"{t},{metric}:std,{scope},{float(stats['std'][i])!r}")
            path = out / f"{name}__{vname}__aggregate.csv"
            path.write_text("\n".join(agg_lines) + "\n")
            written.append(path)

    if "json" in fmts:
        summary: dict[str, Any] = {
            "name": name,
            "config_hash": report.config_hash,
            "seeds": list(report.seeds),
            "config": report.config.to_dict(),
            "variants": {},
        }
        for vname, result in report.variants.items():
            final: dict[str, Any] = {}
            stabilization: dict[str, Any] = {}
            for (metric, scope), stats in result.aggregates.items():
                key = f"{metric}|{scope}"
                per_seed = {str(s): float(result.series[s].column(metric, scope)[-1]) for s in result.seeds}
                final[key] = {
                    "mean": float(stats["mean"][-1]),
                    "std": float(stats["std"][-1]),
                    "per_seed": per_seed,
                }
                stabilization[key] = stabilization_step(stats["mean"])
            summary["variants"][vname] = {
                "final": final,
                "stabilization_step": stabilization,
                "ties": {str(s): result.ties[s] for s in result.seeds},
                "role_nodes": {
                    str(s): (list(result.assignments[s].nodes) if result.assignments[s] else None)
                    for s in result.seeds
                },
            }
        path = out / f"{name}__summary.json"
        path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
        written.append(path)

    return written
