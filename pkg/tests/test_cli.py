import json
from pathlib import Path

import pytest

from billmap.cli import main
from billmap.ingest import save_corpus
from billmap.oracles import SyntheticSpec, generate_corpus, write_fixture_pages

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def corpus_csv(tmp_path_factory):
    corpus = generate_corpus(
        SyntheticSpec(n_pre=80, n_covid=40, separation=6.0, time_signal=6.0, seed=11)
    )
    path = tmp_path_factory.mktemp("corpus") / "corpus.csv"
    save_corpus(corpus, path)
    return path


@pytest.fixture(scope="module")
def fitted_dir(tmp_path_factory, corpus_csv):
    out = tmp_path_factory.mktemp("fit")
    code = main(
        [
            "fit", "--input", str(corpus_csv), "--k", "15", "--epochs", "60",
            "--seed", "7", "--out-dir", str(out),
        ]
    )
    assert code == 0
    return out


class TestFit:
    def test_defaults_echoed_in_manifest(self, corpus_csv, tmp_path):
        out = tmp_path / "run"
        code = main(["fit", "--input", str(corpus_csv), "--epochs", "30",
                     "--out-dir", str(out)])
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        settings = manifest["settings"]
        assert settings["k"] == 45
        assert settings["min_dist"] == 0.1
        assert settings["dims"] == 2
        assert settings["metric"] == "euclidean"
        assert manifest["include_time"] is True

    def test_paper_defaults_without_overrides(self, corpus_csv, tmp_path, monkeypatch):
        # capture the resolved configuration without paying for a 450-epoch fit
        import billmap.cli as cli_module

        captured = {}

        def fake_fit_model(corpus, include_time=True, **params):
            captured.update(params)
            raise SystemExit(99)

        monkeypatch.setattr(cli_module, "fit_model", fake_fit_model)
        with pytest.raises(SystemExit):
            main(["fit", "--input", str(corpus_csv), "--out-dir", str(tmp_path / "x")])
        assert captured["n_neighbors"] == 45
        assert captured["n_epochs"] == 450
        assert captured["min_dist"] == 0.1
        assert captured["n_components"] == 2
        assert captured["metric"] == "euclidean"

    def test_zero_k_is_usage_error(self, corpus_csv, tmp_path, capsys):
        code = main(["fit", "--input", str(corpus_csv), "--k", "0",
                     "--out-dir", str(tmp_path / "x")])
        assert code == 2
        assert "--k" in capsys.readouterr().err

    def test_same_seed_same_model_bytes(self, corpus_csv, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            code = main(["fit", "--input", str(corpus_csv), "--k", "10",
                         "--epochs", "40", "--seed", "3", "--out-dir", str(out)])
            assert code == 0
        assert (out_a / "model.json").read_bytes() == (out_b / "model.json").read_bytes()
        assert (out_a / "embedding.csv").read_bytes() == (out_b / "embedding.csv").read_bytes()

    def test_config_file_precedence(self, corpus_csv, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"k": 12, "epochs": 25}), encoding="utf-8")
        out = tmp_path / "run"
        code = main(["fit", "--input", str(corpus_csv), "--config", str(config),
                     "--k", "9", "--out-dir", str(out)])
        assert code == 0
        settings = json.loads((out / "manifest.json").read_text())["settings"]
        assert settings["k"] == 9       # flag beats config
        assert settings["epochs"] == 25  # config beats default

    def test_toml_config(self, corpus_csv, tmp_path):
        config = tmp_path / "config.toml"
        config.write_text('k = 8\nepochs = 20\n', encoding="utf-8")
        out = tmp_path / "run"
        code = main(["fit", "--input", str(corpus_csv), "--config", str(config),
                     "--out-dir", str(out)])
        assert code == 0
        settings = json.loads((out / "manifest.json").read_text())["settings"]
        assert settings["k"] == 8

    def test_loss_trace_csv(self, corpus_csv, tmp_path):
        out = tmp_path / "run"
        code = main(["fit", "--input", str(corpus_csv), "--k", "10",
                     "--epochs", "40", "--loss-trace", "10",
                     "--out-dir", str(out)])
        assert code == 0
        lines = (out / "loss_trace.csv").read_text().strip().splitlines()
        assert lines[0] == "epoch,loss"
        epochs = [int(line.split(",")[0]) for line in lines[1:]]
        assert epochs == [0, 10, 20, 30, 40]
        losses = [float(line.split(",")[1]) for line in lines[1:]]
        assert losses[-1] < losses[0]


class TestTransform:
    def test_projection_row_count(self, fitted_dir, corpus_csv, tmp_path):
        out = tmp_path / "tr"
        code = main(["transform", "--model", str(fitted_dir / "model.json"),
                     "--input", str(corpus_csv), "--transform-epochs", "5",
                     "--seed", "1", "--out-dir", str(out)])
        assert code == 0
        rows = (out / "projection.csv").read_text().strip().splitlines()
        n_input = len(Path(corpus_csv).read_text().strip().splitlines()) - 1
        assert len(rows) - 1 == n_input
        assert (out / "report.json").exists()

    def test_transform_is_byte_deterministic(self, fitted_dir, corpus_csv, tmp_path):
        outs = []
        for name in ("t1", "t2"):
            out = tmp_path / name
            code = main(["transform", "--model", str(fitted_dir / "model.json"),
                         "--input", str(corpus_csv), "--transform-epochs", "8",
                         "--seed", "2", "--out-dir", str(out)])
            assert code == 0
            outs.append((out / "projection.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_corrupt_model_is_data_error(self, fitted_dir, corpus_csv, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        text = (fitted_dir / "model.json").read_text()
        bad.write_text(text[: len(text) // 2], encoding="utf-8")
        code = main(["transform", "--model", str(bad), "--input", str(corpus_csv),
                     "--out-dir", str(tmp_path / "o")])
        assert code == 1
        assert "byte" in capsys.readouterr().err

    def test_unseen_categories_warn_but_succeed(self, fitted_dir, tmp_path, capsys):
        from conftest import make_record
        from billmap.records import Corpus

        odd = Corpus(
            records=(
                make_record(bill_id="ODD-1", sponsor_state="ZZ",
                            committees=frozenset({"brand new committee"})),
            )
        )
        odd_csv = tmp_path / "odd.csv"
        save_corpus(odd, odd_csv)
        out = tmp_path / "tr"
        code = main(["transform", "--model", str(fitted_dir / "model.json"),
                     "--input", str(odd_csv), "--transform-epochs", "0",
                     "--out-dir", str(out)])
        assert code == 0
        err = capsys.readouterr().err
        assert "unseen" in err
        assert "zeroed" in err


class TestGridEvalPlot:
    def test_grid_two_by_two_panels(self, corpus_csv, tmp_path, capsys):
        out = tmp_path / "grid"
        code = main(["grid", "--input", str(corpus_csv), "--k-values", "5,10",
                     "--epoch-values", "15,30", "--seed", "0",
                     "--out-dir", str(out)])
        assert code == 0
        figure = (out / "figure.svg").read_text(encoding="utf-8")
        assert figure.count('class="panel"') == 4
        table = capsys.readouterr().out
        assert "ok" in table and "purity" in table

    def test_grid_cell_failure_nonzero_exit(self, corpus_csv, tmp_path, capsys):
        out = tmp_path / "grid"
        code = main(["grid", "--input", str(corpus_csv), "--k-values", "10,9000",
                     "--epoch-values", "10", "--seed", "0", "--out-dir", str(out)])
        assert code == 1
        output = capsys.readouterr()
        assert "FAILED" in output.out

    def test_eval_identity_embedding(self, tmp_path, capsys):
        matrix = tmp_path / "matrix.csv"
        emb = tmp_path / "emb.csv"
        rows = ["x,y"] + [f"{i}.0,{i % 3}.5" for i in range(12)]
        matrix.write_text("\n".join(rows) + "\n", encoding="utf-8")
        emb.write_text("\n".join(rows) + "\n", encoding="utf-8")
        code = main(["eval", "--matrix", str(matrix), "--embedding", str(emb),
                     "--k", "3"])
        assert code == 0
        assert "trustworthiness: 1.0000" in capsys.readouterr().out

    def test_eval_on_model(self, fitted_dir, capsys):
        code = main(["eval", "--model", str(fitted_dir / "model.json"), "--k", "5"])
        assert code == 0
        assert "trustworthiness" in capsys.readouterr().out

    def test_plot_deterministic_bytes(self, tmp_path):
        a = tmp_path / "a.svg"
        b = tmp_path / "b.svg"
        for out in (a, b):
            code = main(["plot", "--embedding", str(DATA / "embedding.csv"),
                         "--projection", str(DATA / "projection.csv"),
                         "--color-by", "party", "--out", str(out)])
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_plot_unknown_color_by(self, tmp_path, capsys):
        code = main(["plot", "--embedding", str(DATA / "embedding.csv"),
                     "--color-by", "chamber", "--out", str(tmp_path / "x.svg")])
        assert code == 2
        assert "color-by" in capsys.readouterr().err

    def test_plot_era_coloring(self, tmp_path):
        out = tmp_path / "era.svg"
        code = main(["plot", "--embedding", str(DATA / "embedding.csv"),
                     "--color-by", "era", "--out", str(out)])
        assert code == 0
        assert "#3b7d5e" in out.read_text(encoding="utf-8")


class TestIngest:
    def test_ingest_csv_roundtrip(self, corpus_csv, tmp_path, capsys):
        out = tmp_path / "ing"
        code = main(["ingest", "--input", str(corpus_csv), "--out-dir", str(out)])
        assert code == 0
        assert (out / "corpus.csv").exists()
        assert (out / "corpus.csv.manifest.json").exists()
        assert "ingested 120 records" in capsys.readouterr().out

    def test_ingest_fixtures(self, tmp_path, capsys):
        corpus = generate_corpus(SyntheticSpec(n_pre=8, n_covid=4, seed=3))
        fixture_dir = tmp_path / "pages"
        write_fixture_pages(corpus, fixture_dir, page_size=5)
        out = tmp_path / "ing"
        code = main(["ingest", "--fixtures", str(fixture_dir), "--out-dir", str(out)])
        assert code == 0
        assert "ingested 12 records" in capsys.readouterr().out

    def test_ingest_bad_rows_skip(self, tmp_path, capsys):
        bad_csv = tmp_path / "bad.csv"
        from test_records_ingest import GOOD_ROW, HEADER

        bad_row = GOOD_ROW.replace("HB-1", "HB-2").replace("1987-03-01", "junk")
        bad_csv.write_text("\n".join([HEADER, GOOD_ROW, bad_row]) + "\n",
                           encoding="utf-8")
        out = tmp_path / "ing"
        code = main(["ingest", "--input", str(bad_csv), "--skip-bad-rows",
                     "--out-dir", str(out)])
        assert code == 0
        captured = capsys.readouterr()
        assert "skipped=1" in captured.out
        assert "row 3" in captured.err

    def test_ingest_bad_rows_strict_fails(self, tmp_path, capsys):
        bad_csv = tmp_path / "bad.csv"
        from test_records_ingest import GOOD_ROW, HEADER

        bad_row = GOOD_ROW.replace("HB-1", "HB-2").replace("1987-03-01", "junk")
        bad_csv.write_text("\n".join([HEADER, GOOD_ROW, bad_row]) + "\n",
                           encoding="utf-8")
        code = main(["ingest", "--input", str(bad_csv),
                     "--out-dir", str(tmp_path / "o")])
        assert code == 1

    def test_missing_out_dir_is_usage_error(self, corpus_csv, capsys):
        code = main(["ingest", "--input", str(corpus_csv)])
        assert code == 2
        assert "--out-dir" in capsys.readouterr().err
