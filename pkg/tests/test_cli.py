import csv
import json

import pytest

from basketclust.cli import main, read_config
from basketclust.cost import cost
from basketclust.model import BasketError, Clustering, read_baskets_csv


@pytest.fixture
def data(tmp_path):
    prefix = tmp_path / "syn"
    assert main(["generate", "--n-categories", "4", "--products-per-category", "3",
                 "--categories-per-basket", "2", "--n-baskets", "400",
                 "--seed", "3", "--out", str(prefix)]) == 0
    return prefix


def test_generate_files(data):
    rows = list(csv.reader(open(f"{data}_baskets.csv")))
    assert rows[0] == ["basket_id", "product_id"]
    assert len({r[0] for r in rows[1:]}) == 400
    cats = list(csv.reader(open(f"{data}_categories.csv")))
    assert cats[0] == ["product_id", "category_id"] and len(cats) == 13


def test_generate_deterministic(tmp_path):
    for name in ("a", "b"):
        main(["generate", "--n-baskets", "50", "--seed", "7", "--out", str(tmp_path / name)])
    assert (tmp_path / "a_baskets.csv").read_bytes() == (tmp_path / "b_baskets.csv").read_bytes()


def test_generate_defaults(tmp_path):
    main(["generate", "--out", str(tmp_path / "d")])
    m = read_baskets_csv(tmp_path / "d_baskets.csv")
    assert (m.n_baskets, m.n_products) == (10_000, 100)


def test_generate_rejects_zero_baskets(tmp_path, capsys):
    assert main(["generate", "--n-baskets", "0", "--out", str(tmp_path / "z")]) != 0
    assert "n_baskets" in capsys.readouterr().err


def test_cluster_ga_round_trip(data, tmp_path):
    out = tmp_path / "run"
    assert main(["cluster", f"{data}_baskets.csv", "--categories", f"{data}_categories.csv",
                 "--n-clusters", "4", "--population-size", "80", "--max-generations", "100",
                 "--out", str(out)]) == 0
    report = json.loads((tmp_path / "run_report.json").read_text())
    assert list(report) == ["method", "config", "n_baskets", "n_products", "dropped_baskets",
                            "evaluation", "assignment", "wall_time", "trace_path"]
    assert {"cost", "purity", "reverse_purity", "rand_index"} <= set(report["evaluation"])
    m = read_baskets_csv(f"{data}_baskets.csv")
    rows = list(csv.reader(open(f"{out}_assignment.csv")))
    assert rows[0] == ["product_id", "cluster"]
    labels = dict((p, int(c)) for p, c in rows[1:])
    assert sorted(labels) == sorted(m.product_ids)
    x = Clustering([labels[p] for p in m.product_ids], 4)
    assert round(cost(m, x), 6) == report["evaluation"]["cost"]
    trace = list(csv.reader(open(report["trace_path"])))
    assert trace[0] == ["generation", "best_cost"]
    assert float(trace[-1][1]) == report["evaluation"]["cost"]


def test_cluster_single_cluster(data, tmp_path):
    main(["cluster", f"{data}_baskets.csv", "--n-clusters", "1", "--population-size", "10",
          "--max-generations", "5", "--out", str(tmp_path / "one")])
    report = json.loads((tmp_path / "one_report.json").read_text())
    assert set(report["assignment"].values()) == {1}
    assert report["evaluation"] == {"cost": 1.0, "n_clusters_used": 1}


@pytest.mark.parametrize("method", ["kmeans", "ward"])
def test_cluster_baselines(data, tmp_path, method):
    assert main(["cluster", f"{data}_baskets.csv", "--method", method, "--n-clusters", "4",
                 "--restarts", "5", "--out", str(tmp_path / method)]) == 0
    report = json.loads((tmp_path / f"{method}_report.json").read_text())
    assert report["trace_path"] is None


def test_cluster_reproducible(data, tmp_path):
    for name in ("a", "b"):
        main(["cluster", f"{data}_baskets.csv", "--n-clusters", "3", "--population-size", "30",
              "--max-generations", "30", "--seed", "5", "--out", str(tmp_path / name)])
    a = json.loads((tmp_path / "a_report.json").read_text())
    b = json.loads((tmp_path / "b_report.json").read_text())
    a.pop("wall_time"), b.pop("wall_time"), a.pop("trace_path"), b.pop("trace_path")
    assert a == b
    assert (tmp_path / "a_trace.csv").read_bytes() == (tmp_path / "b_trace.csv").read_bytes()


def test_cluster_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert main(["cluster", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "header" in capsys.readouterr().err
    assert main(["cluster", str(tmp_path / "missing.csv")]) == 2


def test_unknown_method_is_usage_error(data):
    with pytest.raises(SystemExit) as exc:
        main(["cluster", f"{data}_baskets.csv", "--method", "som"])
    assert exc.value.code == 2


def test_config_precedence(data, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# study settings\npopulation_size = 20\nmax-generations = 7\nstall_limit = none\n")
    assert read_config(cfg)["stall_limit"] is None
    main(["cluster", f"{data}_baskets.csv", "--config", str(cfg), "--max-generations", "3",
          "--n-clusters", "3", "--out", str(tmp_path / "p")])
    conf = json.loads((tmp_path / "p_report.json").read_text())["config"]
    assert conf["population_size"] == 20
    assert conf["max_generations"] == 3
    assert conf["stall_limit"] is None
    assert conf["elite_ratio"] == 0.1


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(BasketError):
        read_config(cfg)


def test_experiment_command(tmp_path):
    out = tmp_path / "exp"
    assert main(["experiment", "cluster-count", "--grid", "2-4", "--n-categories", "4",
                 "--products-per-category", "3", "--categories-per-basket", "2",
                 "--n-baskets", "300", "--population-size", "40", "--max-generations", "40",
                 "--traces", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(f"{out}_summary.csv")))
    assert [r["grid_key"] for r in rows] == ["k=2,rep=0", "k=3,rep=0", "k=4,rep=0"]
    costs = [float(r["cost"]) for r in rows]
    assert costs == sorted(costs, reverse=True)
    assert (tmp_path / "exp_trace_000.csv").exists()


def test_experiment_param_grid_and_real_data(data, tmp_path):
    out = tmp_path / "pg"
    assert main(["experiment", "param-grid", "--grid", "20:0.01,20:0.1",
                 "--baskets", f"{data}_baskets.csv", "--categories", f"{data}_categories.csv",
                 "--n-clusters", "4", "--max-generations", "20", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(f"{out}_summary.csv")))
    assert [r["grid_key"] for r in rows] == ["population=20,mutation=0.01,rep=0",
                                             "population=20,mutation=0.1,rep=0"]
    assert all(r["rand_index"] for r in rows)


def test_experiment_unknown_name():
    with pytest.raises(SystemExit):
        main(["experiment", "everything"])


def test_cluster_default_synthetic_data(tmp_path):
    prefix = tmp_path / "full"
    main(["generate", "--out", str(prefix)])
    main(["cluster", f"{prefix}_baskets.csv", "--categories", f"{prefix}_categories.csv",
          "--out", str(prefix)])
    evaluation = json.loads((tmp_path / "full_report.json").read_text())["evaluation"]
    assert evaluation["cost"] == pytest.approx(0.036, abs=0.002)
    assert evaluation["rand_index"] == 1.0
