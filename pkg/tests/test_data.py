import json

import numpy as np
import pytest

from simplexconf.data import (
    BUDGET_ITALY_SCHEMA,
    DatasetSchema,
    budget_italy_path,
    load_dataset,
    load_model,
    load_schema,
    save_model,
    save_schema,
)
from simplexconf.exceptions import ParseError, SchemaError
from simplexconf.regression import fit_mle, predict_params
from simplexconf.simulation import generate_scenario, scenario

SIMPLE = DatasetSchema(("a", "b", "c"), ("x",), (), True)


def write_csv(path, rows, header="a,b,c,x"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return path


def test_budget_italy_shape():
    data = load_dataset(budget_italy_path())
    assert len(data) == 1729 and data.D == 3
    np.testing.assert_allclose(data.Y.sum(axis=1), 1.0, atol=1e-12)
    assert data.x_names == ("(intercept)", "log(income)", "size", "pfood", "phouse", "pmisc")
    assert data.standardization is not None


def test_shares_renormalized(tmp_path):
    f = write_csv(tmp_path / "d.csv", ["0.2,0.3,0.5,1", "0.2,0.3,0.4,2", "0.1,0.1,0.8,3"])
    d = load_dataset(f, SIMPLE)
    np.testing.assert_allclose(d.Y[0], [0.2, 0.3, 0.5], atol=1e-15)
    np.testing.assert_allclose(d.Y[1], [2 / 9, 3 / 9, 4 / 9], atol=1e-15)
    np.testing.assert_array_equal(d.X[:, 0], 1.0)
    # stored, not applied
    np.testing.assert_array_equal(d.X[:, 1], [1, 2, 3])
    Xs, _ = d.design()
    np.testing.assert_allclose(Xs[:, 1], [-1, 0, 1])


def test_zero_share_clamped(tmp_path):
    f = write_csv(tmp_path / "d.csv", ["0.0,0.5,0.5,1", "0.3,0.3,0.4,2"])
    d = load_dataset(f, SIMPLE)
    assert np.all(d.Y > 0)
    assert d.Y[0, 0] == pytest.approx(1e-6, rel=1e-5)
    np.testing.assert_allclose(d.Y.sum(axis=1), 1.0, atol=1e-15)


@pytest.mark.parametrize("rows, header, message", [
    (["0.2,0.3,0.5,1", "0.2,0.3,zz,2"], "a,b,c,x", "row 3"),
    (["0.2,-0.3,0.5,1"], "a,b,c,x", "negative share"),
    (["0,0,0,1"], "a,b,c,x", "all shares are zero"),
    (["0.2,0.3,0.5"], "a,b,c", "missing column 'x'"),
])
def test_parse_errors(tmp_path, rows, header, message):
    f = write_csv(tmp_path / "d.csv", rows, header)
    with pytest.raises(ParseError, match=message):
        load_dataset(f, SIMPLE)


def test_log_covariate(tmp_path):
    f = write_csv(tmp_path / "d.csv", ["0.2,0.3,0.5,1", "0.2,0.3,0.5,-1"])
    with pytest.raises(ParseError, match="log"):
        load_dataset(f, DatasetSchema(("a", "b", "c"), ("log(x)",)))


def test_schema_validation_and_roundtrip(tmp_path):
    with pytest.raises(SchemaError):
        DatasetSchema(("a",))
    with pytest.raises(SchemaError):
        DatasetSchema(("a", "b"), ("a",))
    save_schema(BUDGET_ITALY_SCHEMA, tmp_path / "s.json")
    assert load_schema(tmp_path / "s.json") == BUDGET_ITALY_SCHEMA
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(SchemaError):
        load_schema(tmp_path / "bad.json")


@pytest.fixture(scope="module")
def fitted_1a():
    data = generate_scenario(scenario("1a"), np.random.default_rng(0))
    return data, fit_mle(data)


def test_model_roundtrip(tmp_path, fitted_1a):
    _, model = fitted_1a
    save_model(model, tmp_path / "m.json")
    back, schema = load_model(tmp_path / "m.json")
    assert schema is None
    assert np.array_equal(back.coefficients.beta, model.coefficients.beta)
    assert np.array_equal(back.coefficients.gamma, model.coefficients.gamma)
    for name in ("iterations", "grad_norm", "nll", "converged"):
        assert getattr(back.convergence, name) == getattr(model.convergence, name)


def test_missing_gamma_block(tmp_path, fitted_1a):
    _, model = fitted_1a
    save_model(model, tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    del doc["gamma"]
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="'gamma'"):
        load_model(tmp_path / "m.json")


def test_model_version_and_malformed(tmp_path, fitted_1a):
    _, model = fitted_1a
    save_model(model, tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    doc["format"] = "simplexconf-model/99"
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="unsupported"):
        load_model(tmp_path / "m.json")
    (tmp_path / "m.json").write_text("[1, 2")
    with pytest.raises(SchemaError):
        load_model(tmp_path / "m.json")


def test_prediction_after_reload_with_standardization(tmp_path):
    data = load_dataset(budget_italy_path())
    model = fit_mle(data)
    save_model(model, tmp_path / "m.json", BUDGET_ITALY_SCHEMA)
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["standardization"] is not None
    back, schema = load_model(tmp_path / "m.json")
    assert schema == BUDGET_ITALY_SCHEMA
    a = predict_params(model, data.X, data.Z)
    b = predict_params(back, data.X, data.Z)
    np.testing.assert_allclose(b.mu, a.mu, rtol=0, atol=1e-15)
    np.testing.assert_allclose(b.phi, a.phi, rtol=1e-15)
