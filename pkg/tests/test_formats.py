import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from supalloc import formats
from supalloc.engine import GAConfig
from supalloc.formats import InstanceFormatError
from supalloc.matching import random_feasible_matching
from supalloc.objectives import ObjectivePair
from supalloc.operators import MutationParams


def test_instance_round_trip(tmp_path, instance_50):
    path = formats.save_instance(instance_50, tmp_path / "inst" / "instance.json")
    again = formats.load_instance(path)
    assert again == instance_50
    assert again.student_ids == instance_50.student_ids


def test_missing_taxonomy_is_named(tmp_path, instance_50):
    path = formats.save_instance(instance_50, tmp_path / "instance.json")
    (tmp_path / "taxonomy.csv").unlink()
    with pytest.raises(FileNotFoundError, match="taxonomy"):
        formats.load_instance(path)


def test_bad_preference_line(tmp_path, instance_50):
    path = formats.save_instance(instance_50, tmp_path / "instance.json")
    lines = (tmp_path / "students.csv").read_text().splitlines()
    lines[3] = lines[3].rsplit(",", 1)[0] + ",NOT_A_TOPIC"
    (tmp_path / "students.csv").write_text("\n".join(lines) + "\n")
    with pytest.raises(InstanceFormatError, match=r"students.csv:4"):
        formats.load_instance(path)


def test_bad_quota_line(tmp_path, instance_50):
    path = formats.save_instance(instance_50, tmp_path / "instance.json")
    with open(tmp_path / "quotas.csv", "a") as fh:
        fh.write("r99,one,2\n")
    with pytest.raises(InstanceFormatError, match=r"quotas.csv:\d+: quotas must be integers"):
        formats.load_instance(path)


def test_infeasible_quotas_rejected(tmp_path, instance_50):
    path = formats.save_instance(instance_50, tmp_path / "instance.json")
    rows = (tmp_path / "quotas.csv").read_text().splitlines()
    rows = [rows[0]] + [f"{r.split(',')[0]},1,1" for r in rows[1:]]
    (tmp_path / "quotas.csv").write_text("\n".join(rows) + "\n")
    with pytest.raises(InstanceFormatError, match="no feasible matching"):
        formats.load_instance(path)


def test_broken_json(tmp_path):
    (tmp_path / "instance.json").write_text("{\n  \"taxonomy\": \n")
    with pytest.raises(InstanceFormatError, match=r"instance.json:\d+"):
        formats.load_instance(tmp_path / "instance.json")


configs = st.builds(
    GAConfig,
    pop_max=st.integers(1, 200).map(lambda v: 2 * v),
    it_max=st.integers(1, 1000),
    patience=st.integers(1, 100),
    mutation=st.builds(MutationParams, st.floats(0, 1), st.floats(0, 1)),
    crossover_kind=st.sampled_from(["gsp", "hopcroft-karp", "uniform", "k-point", "none"]),
    k_points=st.integers(1, 20),
    alpha=st.none() | st.floats(0, 5),
    ref=st.tuples(st.floats(0.5, 3), st.floats(0.5, 3)),
    seed=st.integers(0, 2**62),
    weights=st.none() | st.lists(st.floats(0, 1), min_size=1, max_size=6).map(
        lambda w: tuple(sorted(w, reverse=True))),
)


@settings(max_examples=100)
@given(configs)
def test_config_round_trip(tmp_path_factory, config):
    path = tmp_path_factory.mktemp("cfg") / "config.json"
    formats.save_config(config, path)
    assert formats.load_config(path) == config


def test_config_defaults_and_unknown_keys(tmp_path):
    assert formats.load_config(None) == GAConfig()
    cfg = GAConfig()
    assert (cfg.pop_max, cfg.it_max, cfg.mutation, cfg.crossover_kind) == (128, 250, MutationParams(0.05, 0.2), "gsp")
    (tmp_path / "c.json").write_text(json.dumps({"pop_size": 3}))
    with pytest.raises(InstanceFormatError, match="unknown config keys"):
        formats.load_config(tmp_path / "c.json")
    (tmp_path / "c.json").write_text(json.dumps({"pop_max": 3}))
    with pytest.raises(InstanceFormatError, match="pop_max"):
        formats.load_config(tmp_path / "c.json")


def test_matching_and_frontier_round_trip(tmp_path, instance_50):
    rng = random.Random(0)
    mts = [random_feasible_matching(instance_50, rng) for _ in range(3)]
    entries = [(ObjectivePair(0.5 - 0.1 * k, 0.1 + 0.1 * k), mt) for k, mt in enumerate(mts)]
    report = formats.write_frontier(tmp_path, entries, instance_50, 0.7, (1.0, 1.0), exact=True)
    again = formats.read_frontier(tmp_path)
    assert again == report
    assert again.exact
    for name, mt in zip(again.matching_files, mts):
        assert formats.read_matching(tmp_path / name, instance_50) == mt


def test_float_text_is_exact():
    x = 0.1 + 0.2
    assert float(formats.fmt(x)) == x
