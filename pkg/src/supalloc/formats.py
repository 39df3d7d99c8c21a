"""Flat-file formats.

* taxonomy: CSV ``node,parent`` (see :mod:`supalloc.taxonomy`)
* preferences: CSV ``participant_id,topic_1,...,topic_k``
* quotas: CSV ``supervisor_id,c_min,c_max``
* instance: JSON naming the three CSV files (relative to itself), plus
  ``weights`` and ``alpha``
* config: JSON with keys from :data:`CONFIG_KEYS`
* matching: CSV ``student_id,supervisor_id``
* frontier: CSV ``f_students,f_supervisors,matching_file`` plus a JSON
  sidecar holding the S-metric, reference point and ``exact`` flag
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .engine import GAConfig, Individual
from .matching import Matching, ProblemInstance
from .objectives import ObjectivePair
from .operators import MutationParams
from .preferences import RankedPreference, RankWeights
from .taxonomy import TaxonomyError, TopicTree, dump_taxonomy, load_taxonomy

PathLike = Union[str, Path]

CONFIG_KEYS = (
    "pop_max", "it_max", "patience", "p_mt", "p_sw", "alpha", "crossover",
    "k_points", "ref_x", "ref_y", "weights", "seed",
)


class InstanceFormatError(ValueError):
    """Malformed input file; the message carries ``path:line``."""


def _rows(path: Path) -> List[Tuple[int, List[str]]]:
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        out = []
        for lineno, row in enumerate(csv.reader(fh), start=1):
            row = [c.strip() for c in row]
            if not row or not any(row):
                continue
            out.append((lineno, row))
        return out


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# -- preferences -------------------------------------------------------------------


def read_preferences(path: PathLike, tree: Optional[TopicTree] = None) -> Dict[str, RankedPreference]:
    """Ordered ``{participant_id: RankedPreference}``; a header row starting with ``participant_id`` is skipped."""
    path = Path(path)
    prefs: Dict[str, RankedPreference] = {}
    k = None
    for lineno, row in _rows(path):
        if row[0] == "participant_id":
            continue
        where = f"{path}:{lineno}"
        if len(row) < 2:
            raise InstanceFormatError(f"{where}: expected an id followed by topics")
        pid, topics = row[0], [t for t in row[1:] if t]
        if pid in prefs:
            raise InstanceFormatError(f"{where}: duplicate participant {pid!r}")
        if k is None:
            k = len(topics)
        elif len(topics) != k:
            raise InstanceFormatError(f"{where}: {len(topics)} topics, earlier rows have {k}")
        try:
            pref = RankedPreference(tuple(topics))
            if tree is not None:
                pref.validate(tree)
        except ValueError as exc:
            raise InstanceFormatError(f"{where}: {exc}") from None
        prefs[pid] = pref
    if not prefs:
        raise InstanceFormatError(f"{path}: no preference records")
    return prefs


def write_preferences(path: PathLike, prefs: Sequence[Tuple[str, RankedPreference]]) -> None:
    k = max(len(p) for _, p in prefs)
    header = ["participant_id"] + [f"topic_{r}" for r in range(1, k + 1)]
    _write_csv(Path(path), header, ([pid, *p.topics] for pid, p in prefs))


# -- quotas --------------------------------------------------------------------------


def read_quotas(path: PathLike) -> Dict[str, Tuple[int, int]]:
    path = Path(path)
    quotas: Dict[str, Tuple[int, int]] = {}
    for lineno, row in _rows(path):
        if row[0] == "supervisor_id":
            continue
        where = f"{path}:{lineno}"
        if len(row) != 3:
            raise InstanceFormatError(f"{where}: expected 'supervisor_id,c_min,c_max'")
        try:
            lo, hi = int(row[1]), int(row[2])
        except ValueError:
            raise InstanceFormatError(f"{where}: quotas must be integers, got {row[1:]}") from None
        if row[0] in quotas:
            raise InstanceFormatError(f"{where}: duplicate supervisor {row[0]!r}")
        quotas[row[0]] = (lo, hi)
    return quotas


def write_quotas(path: PathLike, ids: Sequence[str], c_min: Sequence[int], c_max: Sequence[int]) -> None:
    _write_csv(Path(path), ["supervisor_id", "c_min", "c_max"], zip(ids, c_min, c_max))


# -- instance ------------------------------------------------------------------------

INSTANCE_FILES = {
    "taxonomy": "taxonomy.csv",
    "students": "students.csv",
    "supervisors": "supervisors.csv",
    "quotas": "quotas.csv",
}


def load_instance(path: PathLike) -> ProblemInstance:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such instance file")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}:{exc.lineno}: {exc.msg}") from None
    missing = [key for key in (*INSTANCE_FILES, "weights", "alpha") if key not in doc]
    if missing:
        raise InstanceFormatError(f"{path}: missing keys {missing}")
    base = path.parent
    tax_path = base / doc["taxonomy"]
    if not tax_path.exists():
        raise FileNotFoundError(f"{tax_path}: taxonomy file not found")
    try:
        tree = load_taxonomy(tax_path)
    except TaxonomyError as exc:
        raise InstanceFormatError(str(exc)) from exc
    students = read_preferences(base / doc["students"], tree)
    supervisors = read_preferences(base / doc["supervisors"], tree)
    quotas = read_quotas(base / doc["quotas"])
    if set(quotas) != set(supervisors):
        raise InstanceFormatError(
            f"{base / doc['quotas']}: supervisor ids differ from {base / doc['supervisors']}: "
            f"{sorted(set(quotas) ^ set(supervisors))}"
        )
    sup_ids = list(supervisors)
    try:
        return ProblemInstance(
            student_prefs=tuple(students.values()),
            supervisor_prefs=tuple(supervisors.values()),
            c_min=tuple(quotas[s][0] for s in sup_ids),
            c_max=tuple(quotas[s][1] for s in sup_ids),
            weights=RankWeights(tuple(doc["weights"])),
            alpha=doc["alpha"],
            tree=tree,
            student_ids=tuple(students),
            supervisor_ids=tuple(sup_ids),
        )
    except ValueError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None


def save_instance(instance: ProblemInstance, path: PathLike) -> Path:
    """Write the instance document and its CSV companions next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    base = path.parent
    dump_taxonomy(instance.tree, base / INSTANCE_FILES["taxonomy"])
    write_preferences(base / INSTANCE_FILES["students"],
                      list(zip(instance.student_ids, instance.student_prefs)))
    write_preferences(base / INSTANCE_FILES["supervisors"],
                      list(zip(instance.supervisor_ids, instance.supervisor_prefs)))
    write_quotas(base / INSTANCE_FILES["quotas"], instance.supervisor_ids, instance.c_min, instance.c_max)
    doc = dict(INSTANCE_FILES)
    doc["weights"] = list(instance.weights.weights)
    doc["alpha"] = instance.alpha
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


# -- GA config ---------------------------------------------------------------------------


def config_to_dict(config: GAConfig) -> dict:
    return {
        "pop_max": config.pop_max,
        "it_max": config.it_max,
        "patience": config.patience,
        "p_mt": config.mutation.p_mt,
        "p_sw": config.mutation.p_sw,
        "alpha": config.alpha,
        "crossover": config.crossover_kind,
        "k_points": config.k_points,
        "ref_x": config.ref[0],
        "ref_y": config.ref[1],
        "weights": None if config.weights is None else list(config.weights),
        "seed": config.seed,
    }


def config_from_dict(doc: dict, origin: str = "<config>") -> GAConfig:
    unknown = sorted(set(doc) - set(CONFIG_KEYS))
    if unknown:
        raise InstanceFormatError(f"{origin}: unknown config keys {unknown}")
    defaults = GAConfig()
    get = lambda key, default: default if doc.get(key) is None else doc[key]  # noqa: E731
    try:
        return GAConfig(
            pop_max=int(get("pop_max", defaults.pop_max)),
            it_max=int(get("it_max", defaults.it_max)),
            patience=int(get("patience", defaults.patience)),
            mutation=MutationParams(float(get("p_mt", defaults.mutation.p_mt)),
                                    float(get("p_sw", defaults.mutation.p_sw))),
            crossover_kind=str(get("crossover", defaults.crossover_kind)),
            k_points=int(get("k_points", defaults.k_points)),
            alpha=None if doc.get("alpha") is None else float(doc["alpha"]),
            ref=(float(get("ref_x", defaults.ref[0])), float(get("ref_y", defaults.ref[1]))),
            seed=int(get("seed", defaults.seed)),
            weights=None if doc.get("weights") is None else tuple(float(w) for w in doc["weights"]),
        )
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{origin}: {exc}") from None


def load_config(path: Optional[PathLike]) -> GAConfig:
    if path is None:
        return GAConfig()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such config file")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}:{exc.lineno}: {exc.msg}") from None
    return config_from_dict(doc, str(path))


def save_config(config: GAConfig, path: PathLike) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n", encoding="utf-8")


# -- matchings and frontiers -----------------------------------------------------------


def write_matching(path: PathLike, matching: Matching, instance: ProblemInstance) -> None:
    rows = ((instance.student_ids[i], instance.supervisor_ids[j]) for i, j in enumerate(matching.assignment))
    _write_csv(Path(path), ["student_id", "supervisor_id"], rows)


def read_matching(path: PathLike, instance: ProblemInstance) -> Matching:
    path = Path(path)
    s_index = {s: i for i, s in enumerate(instance.student_ids)}
    r_index = {r: j for j, r in enumerate(instance.supervisor_ids)}
    assign: List[Optional[int]] = [None] * instance.n
    for lineno, row in _rows(path):
        if row[0] == "student_id":
            continue
        if len(row) != 2 or row[0] not in s_index or row[1] not in r_index:
            raise InstanceFormatError(f"{path}:{lineno}: bad matching record {row!r}")
        assign[s_index[row[0]]] = r_index[row[1]]
    if any(a is None for a in assign):
        raise InstanceFormatError(f"{path}: not every student is assigned")
    return Matching(tuple(assign), instance.m)


@dataclass
class FrontierReport:
    points: List[ObjectivePair]
    matching_files: List[str]
    s_metric: float
    ref: Tuple[float, float]
    exact: bool


def fmt(x: float) -> str:
    return repr(float(x))


def write_frontier(
    out_dir: PathLike,
    entries: Sequence[Tuple[ObjectivePair, Matching]],
    instance: ProblemInstance,
    s_metric_value: float,
    ref: Tuple[float, float],
    exact: bool,
    stem: str = "frontier",
) -> FrontierReport:
    """Write ``<stem>.csv``, ``<stem>.json`` and one matching file per point."""
    out_dir = Path(out_dir)
    mdir = out_dir / f"{stem}_matchings"
    mdir.mkdir(parents=True, exist_ok=True)
    files = []
    for k, (_, matching) in enumerate(entries):
        name = f"{stem}_matchings/matching_{k:03d}.csv"
        write_matching(out_dir / name, matching, instance)
        files.append(name)
    points = [ObjectivePair(*p) for p, _ in entries]
    _write_csv(out_dir / f"{stem}.csv", ["f_students", "f_supervisors", "matching_file"],
               ((fmt(p[0]), fmt(p[1]), f) for p, f in zip(points, files)))
    meta = {"s_metric": float(s_metric_value), "ref": [float(ref[0]), float(ref[1])],
            "exact": bool(exact), "size": len(points)}
    (out_dir / f"{stem}.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return FrontierReport(points, files, float(s_metric_value), (float(ref[0]), float(ref[1])), bool(exact))


def read_frontier(out_dir: PathLike, stem: str = "frontier") -> FrontierReport:
    out_dir = Path(out_dir)
    points, files = [], []
    for lineno, row in _rows(out_dir / f"{stem}.csv"):
        if row[0] == "f_students":
            continue
        points.append(ObjectivePair(float(row[0]), float(row[1])))
        files.append(row[2])
    meta = json.loads((out_dir / f"{stem}.json").read_text(encoding="utf-8"))
    return FrontierReport(points, files, meta["s_metric"], tuple(meta["ref"]), meta["exact"])


def frontier_entries(front: Sequence[Individual]) -> List[Tuple[ObjectivePair, Matching]]:
    """Distinct objective pairs of a frontier, sorted by student objective descending."""
    seen: Dict[ObjectivePair, Matching] = {}
    for ind in sorted(front, key=lambda d: (-d.objectives[0], -d.objectives[1], d.matching.assignment)):
        seen.setdefault(ind.objectives, ind.matching)
    return list(seen.items())


def write_records(path: PathLike, header: Sequence[str], rows) -> None:
    _write_csv(Path(path), header, rows)
