from pathlib import Path

import pytest
from pydantic import ValidationError

from lgpsc.config import (
    DEFAULT_GRIDS,
    ModelConfig,
    ModelSpec,
    expand_grid,
    format_params,
    load_spec,
    parse_params,
    validate_spec,
)
from lgpsc.errors import SpecError
from lgpsc.kmeans import KMeansConfig

EXAMPLE_SPEC = Path(__file__).resolve().parent.parent / "bench.example.toml"


def _raw(**models):
    return {
        "datasets": [{"name": "m", "source": "gen:moons"}],
        "models": [{"id": "sc", **models}],
    }


def test_model_config_defaults():
    cfg = ModelConfig(d=3)
    assert (cfg.k, cfg.coarse_k, cfg.sigma, cfg.beta, cfg.levels) == (10, 10, "auto", 0.5, 1)
    assert cfg.center_data and not cfg.raw_coarse_scale
    assert cfg.symmetrization == "union"
    assert cfg.kmeans_config() == KMeansConfig(d=3)
    assert ModelConfig(d=3, k=7, k_prime=4).coarse_k == 4


def test_model_config_rejects_bad_values():
    for kwargs in (
        {"beta": 1.5},
        {"k": 0},
        {"levels": 0},
        {"sigma": -1.0},
        {"sigma": "wide"},
        {"symmetrization": "max"},
        {"kmeans": KMeansConfig(d=4)},
        {"typo": 1},
    ):
        with pytest.raises(ValidationError):
            ModelConfig(d=2, **kwargs)


def test_model_config_is_frozen():
    cfg = ModelConfig(d=2)
    with pytest.raises(ValidationError):
        cfg.k = 3


def test_default_grid_sizes():
    assert len(ModelSpec(id="sc").cells()) == 12
    assert len(ModelSpec(id="scpca").cells()) == 60
    multilevel = ModelSpec(id="multilevel").cells()
    assert len(multilevel) == 60
    sc_cells = ModelSpec(id="sc").cells()
    same_k = [{"k": c["k"], "sigma": c["sigma"]} for c in multilevel if c["k_prime"] == c["k"]]
    assert same_k == sc_cells
    assert {c["k_prime"] for c in multilevel} == {1, 5, 10, 15, 20}
    assert ModelSpec(id="kmeans").cells() == [{}]
    assert DEFAULT_GRIDS["sc"]["sigma"] == ["auto", "auto/2", "auto*2"]


def test_expand_grid_order():
    cells = expand_grid({"k": [5, 10], "sigma": ["auto", 1.0]})
    assert cells == [
        {"k": 5, "sigma": "auto"},
        {"k": 5, "sigma": 1.0},
        {"k": 10, "sigma": "auto"},
        {"k": 10, "sigma": 1.0},
    ]


def test_params_text():
    params = {"k": 10, "sigma": "auto/2", "beta": 0.1, "center_data": False}
    text = format_params(params)
    assert text == "k=10;sigma=auto/2;beta=0.1;center_data=false"
    assert parse_params(text) == params
    assert format_params({}) == ""
    assert parse_params("") == {}


def test_spec_validation_errors():
    with pytest.raises(SpecError, match="beta"):
        validate_spec({**_raw(grid={"beta": [0.5, 1.5]})})
    with pytest.raises(SpecError):
        validate_spec({**_raw(grid={"depth": [1]})})
    with pytest.raises(SpecError):
        validate_spec({**_raw(grid={"k": []})})
    with pytest.raises(SpecError):
        validate_spec({**_raw(fixed={"d": 3})})
    with pytest.raises(SpecError):
        validate_spec({**_raw(), "repeats": 0})
    with pytest.raises(SpecError):
        validate_spec({**_raw(), "unknown": True})
    with pytest.raises(SpecError):
        validate_spec({"datasets": [], "models": [{"id": "sc"}]})
    with pytest.raises(SpecError):
        validate_spec({**_raw(), "models": [{"id": "dbscan"}]})
    raw = _raw()
    raw["datasets"] = raw["datasets"] * 2
    with pytest.raises(SpecError, match="unique"):
        validate_spec(raw)


def test_load_spec_file(tmp_path):
    p = tmp_path / "spec.toml"
    p.write_text(
        'seed = 3\nrepeats = 2\n\n[[datasets]]\nname = "b"\nsource = "gen:blobs"\n'
        'params = { centers = "0,0;9,9", points_per = 5 }\n\n'
        '[[models]]\nid = "multilevel"\ngrid = { k = [3, 4] }\nfixed = { levels = 2 }\n'
    )
    spec = load_spec(p)
    assert spec.seed == 3 and spec.repeats == 2 and spec.restarts == 10
    assert spec.models[0].cells() == [{"k": 3}, {"k": 4}]
    assert spec.models[0].fixed == {"levels": 2}
    assert load_spec(p, seed=9, output_dir=None).seed == 9


def test_load_spec_errors(tmp_path):
    with pytest.raises(SpecError, match="cannot read"):
        load_spec(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("datasets = [\n")
    with pytest.raises(SpecError, match="invalid TOML"):
        load_spec(bad)


def test_example_spec_is_valid():
    spec = load_spec(EXAMPLE_SPEC)
    assert [m.id for m in spec.models] == ["kmeans", "sc", "scpca", "multilevel", "cosine_sc"]
    assert [d.name for d in spec.datasets] == ["iris", "wine", "moons"]
