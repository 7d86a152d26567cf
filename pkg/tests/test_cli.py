import json
import subprocess
import sys
from fractions import Fraction

import pytest

from progroup.catalog import Catalog, parse_catalog
from progroup.cli import RunConfig, build_parser, main
from progroup.errors import InputError
from progroup.smallgroup import is_isomorphic

import oracles as O


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def frac(d):
    return Fraction(int(d["num"]), int(d["den"]))


# -- subcommand outputs ----------------------------------------------------------------

def test_table_z2(capsys):
    code, out, _ = run_cli(capsys, "table", "--set", "Z2", "--n", "2", "--u", "0")
    assert code == 0
    doc = json.loads(out)
    census = O.rank_census(2, 2, 2)
    assert len(doc["classes"]) == 3
    assert {int(c["order"]): frac(c["mu_un"]) for c in doc["classes"]} == {2 ** k: v for k, v in census.items()}
    assert frac(doc["sum"]) == 1 and doc["complete"]


def test_special_trivial(capsys):
    code, out, _ = run_cli(capsys, "special", "trivial", "--u", "1")
    assert code == 0
    iv = json.loads(out)["value"]["interval"]
    assert Fraction(iv["lo"]) <= Fraction("0.4357") + Fraction(1, 20000)
    assert Fraction(iv["hi"]) >= Fraction("0.4357") - Fraction(1, 20000)


def test_sample_byte_identical():
    cmd = [sys.executable, "-m", "progroup.cli", "sample", "--set", "S3", "--n", "2", "--u", "1",
           "--count", "1000", "--seed", "7"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["count"] == 1000


def test_sample_compare_and_csv(capsys):
    code, out, _ = run_cli(capsys, "sample", "--set", "Z2", "--n", "2", "--count", "2000", "--seed", "1",
                           "--compare")
    assert code == 0
    cmp = json.loads(out)["comparison"]
    assert set(cmp) >= {"z_scores", "chi_square", "p_value", "total_variation"}
    code, out, _ = run_cli(capsys, "sample", "--set", "Z2", "--n", "2", "--count", "50", "--format", "csv")
    assert out.splitlines()[0] == "class,count"
    assert sum(int(line.split(",")[1]) for line in out.splitlines()[1:]) == 50


def test_cokernel(capsys):
    code, out, _ = run_cli(capsys, "cokernel", "--p", "2", "--n", "1", "--count", "100", "--seed", "3")
    assert code == 0 and json.loads(out)["count"] == 100


def test_measure_json_shape(capsys):
    code, out, _ = run_cli(capsys, "measure", "--set", "Z2", "--H", "Z2", "--n", "2")
    assert code == 0
    doc = json.loads(out)
    assert frac(doc["mu_un"]) == O.rank_census(2, 2, 2)[1]
    assert {"lo", "hi"} <= set(doc["mu_u"])


def test_complete_s3_one_generator(capsys):
    code, out, _ = run_cli(capsys, "complete", "--set", "S3", "--n", "1")
    assert code == 0 and json.loads(out)["order"] == "6"


def test_cf_s3(capsys):
    code, out, _ = run_cli(capsys, "cf", "--set", "S3")
    assert code == 0
    assert len(json.loads(out)["pairs"]) == 3


def test_extensions_z2_over_z2(capsys):
    code, out, _ = run_cli(capsys, "extensions", "--H", "Z2", "--kernel", "2:1", "--set", "Z4,V4")
    assert code == 0
    doc = json.loads(out)
    (res,) = doc["results"]
    assert sorted(int(e["order"]) for e in res["extensions"]) == [4, 4]
    assert all(e["level"] for e in res["extensions"])


def test_achievable(capsys):
    code, out, _ = run_cli(capsys, "achievable", "--set", "D4", "--H", "V4", "--u", "0")
    assert code == 0 and json.loads(out)["achievable"] is False


def test_output_file(tmp_path, capsys):
    target = tmp_path / "t.json"
    code, out, _ = run_cli(capsys, "table", "--set", "Z3", "--n", "1", "--output", str(target))
    assert code == 0 and out == ""
    assert frac(json.loads(target.read_text())["sum"]) == 1


# -- exit codes ---------------------------------------------------------------------------

def test_unknown_flag_exits_1(capsys):
    code, _, err = run_cli(capsys, "table", "--set", "Z2", "--n", "2", "--bogus")
    assert code == 1 and "error" in err


def test_unknown_group_exits_1(capsys):
    assert run_cli(capsys, "table", "--set", "Nope", "--n", "1")[0] == 1


def test_missing_subcommand_exits_1(capsys):
    assert run_cli(capsys)[0] == 1


def test_bad_n_exits_1(capsys):
    assert run_cli(capsys, "complete", "--set", "Z2", "--n", "0")[0] == 1


def test_bound_exceeded_exits_2(capsys):
    code, _, err = run_cli(capsys, "complete", "--set", "A5", "--n", "4")
    assert code == 2 and "bound exceeded" in err


def test_internal_check_exits_3(capsys, monkeypatch):
    from progroup import cli
    from progroup.errors import ConsistencyError

    def boom(cfg):
        raise ConsistencyError("lambda mismatch")
    monkeypatch.setitem(cli.HANDLERS, "table", boom)
    assert run_cli(capsys, "table", "--set", "Z2", "--n", "1")[0] == 3


# -- configuration and catalogs ----------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["sample", "--set", "S3", "--n", "2", "--u", "1", "--count", "10", "--seed", "7", "--model", "words", "--len", "4"],
    ["special", "abelian", "--u", "1", "--type", "2:1", "--primes", "2"],
    ["table", "--set", "Z2,Z3", "--n", "1", "--format", "csv"],
])
def test_run_config_round_trip(argv):
    cfg = RunConfig.from_namespace(build_parser().parse_args(argv))
    again = RunConfig.from_json(cfg.to_json())
    assert again == cfg


def write_catalog(path, records):
    path.write_text(json.dumps(records))
    return str(path)


A5_RECORD = {"name": "MyA5", "degree": 5, "generators": [[1, 2, 3, 4, 0], [1, 2, 0, 3, 4]]}


def test_catalog_a5_from_file(tmp_path):
    path = write_catalog(tmp_path / "c.json", [dict(A5_RECORD, order=60)])
    (entry,) = parse_catalog(path)
    gens = [tuple(g) for g in A5_RECORD["generators"]]
    assert entry.finite_group().order() == len(O.closure(gens)) == 60


def test_catalog_non_bijection(tmp_path):
    path = write_catalog(tmp_path / "c.json", [{"name": "bad", "degree": 3, "generators": [[0, 0, 1]]}])
    with pytest.raises(InputError, match="bijection"):
        parse_catalog(path)


@pytest.mark.parametrize("records,field", [
    ([{"degree": 3, "generators": [[0, 1, 2]]}], "name"),
    ([{"name": "x", "generators": [[0, 1, 2]]}], "degree"),
    ([{"name": "x", "degree": 3, "generators": "no"}], "generators"),
    ([dict(A5_RECORD, order=61)], "order"),
])
def test_catalog_schema_diagnostics(tmp_path, records, field):
    path = write_catalog(tmp_path / "c.json", records)
    with pytest.raises(InputError, match=field):
        parse_catalog(path)


def test_catalog_env_var(tmp_path, monkeypatch, capsys):
    path = write_catalog(tmp_path / "c.json", [A5_RECORD])
    monkeypatch.setenv("PROGROUP_CATALOG", path)
    assert Catalog.default().group("MyA5").order == 60
    code, out, _ = run_cli(capsys, "complete", "--set", "MyA5", "--n", "1")
    T = Catalog.default().group("MyA5").table.tolist()
    assert code == 0 and int(json.loads(out)["order"]) == O.completion_order([T], 1)


def test_catalog_validate_command(tmp_path, capsys):
    path = write_catalog(tmp_path / "c.json", [A5_RECORD])
    code, out, _ = run_cli(capsys, "catalog", "--validate", path)
    assert code == 0 and json.loads(out)["groups"][0]["order"] == "60"


def test_missing_catalog_file_exits_1(capsys):
    assert run_cli(capsys, "catalog", "--validate", "/nonexistent/c.json")[0] == 1


def test_order_bounded_set_is_complete():
    S = Catalog().resolve_set("order<=15")
    by_order = {}
    for G in S:
        by_order.setdefault(G.order, []).append(G)
    # numbers of groups of each order 1..15
    assert [len(by_order.get(k, [])) for k in range(1, 16)] == [1, 1, 1, 2, 1, 2, 1, 5, 2, 2, 1, 5, 1, 2, 1]
    for groups in by_order.values():
        for i, A in enumerate(groups):
            assert all(is_isomorphic(A, B) is None for B in groups[i + 1:])
    with pytest.raises(InputError):
        Catalog().resolve_set("order<=16")
