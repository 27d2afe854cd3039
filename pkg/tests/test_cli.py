
import httpx
import pytest
from fastapi.testclient import TestClient

from blendsolve.cli import main
from blendsolve.service.app import app

QUICK = """
[problem]
preset = test1

[grid]
n_cells = 200
n_steps = 500

[blend]
lambda = 1.0
mu = 1.0

[sweep]
lambda_values = 0.5,1.0
mu_values = 1.0

[richardson]
s = 0.25
coarse_step = 0.5
refine_rounds = 0
"""


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "quick.ini"
    path.write_text(QUICK)
    return path


class TestRunCommand:
    def test_writes_outputs_and_prints_error(self, cfg_file, tmp_path, capsys):
        out = tmp_path / "results"
        code = main(["run", "--config", str(cfg_file), "--out", str(out)])
        assert code == 0
        captured = capsys.readouterr().out
        assert "E1_W =" in captured
        assert (out / "series.csv").exists()
        assert (out / "fields.csv").exists()
        assert (out / "effective_config.ini").exists()

    def test_missing_config_names_path(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--config", str(tmp_path / "nope.ini")])
        assert exc.value.code == 2
        assert "nope.ini" in capsys.readouterr().err

    def test_range_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[problem]\npreset = test1\n\n[blend]\nlambda = 1.2\n")
        code = main(["run", "--config", str(bad)])
        assert code == 2
        assert "line 5" in capsys.readouterr().err

    def test_env_var_out_dir(self, cfg_file, tmp_path, monkeypatch):
        target = tmp_path / "envout"
        monkeypatch.setenv("BLENDSOLVE_OUT", str(target))
        assert main(["run", "--config", str(cfg_file)]) == 0
        assert (target / "series.csv").exists()

    def test_identical_config_gives_identical_bytes(self, cfg_file, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", str(cfg_file), "--out", str(a)]) == 0
        assert main(["run", "--config", str(cfg_file), "--out", str(b), "--threads", "4"]) == 0
        for name in ("series.csv", "fields.csv", "effective_config.ini"):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestSweepCommand:
    def test_sweep_csv(self, cfg_file, tmp_path, capsys):
        out = tmp_path / "s"
        assert main(["sweep", "--config", str(cfg_file), "--out", str(out)]) == 0
        text = (out / "sweep.csv").read_text()
        assert text.splitlines()[0] == "lambda,mu,E1_W,E1_V,in_Phi_W,in_Phi_V"
        assert "argmin" in capsys.readouterr().out

    def test_threads_do_not_change_csv(self, cfg_file, tmp_path):
        a, b = tmp_path / "t1", tmp_path / "t4"
        assert main(["sweep", "--config", str(cfg_file), "--out", str(a), "--threads", "1"]) == 0
        assert main(["sweep", "--config", str(cfg_file), "--out", str(b), "--threads", "4"]) == 0
        assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()


class TestEstimateCommand:
    def test_prints_estimate_and_writes_surface(self, cfg_file, tmp_path, capsys):
        out = tmp_path / "e"
        assert main(["estimate", "--config", str(cfg_file), "--out", str(out)]) == 0
        assert "(lambda_R, mu_R)" in capsys.readouterr().out
        assert (out / "surface.csv").exists()

    def test_invalid_scale(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[problem]\npreset = test1\n\n[richardson]\ns = 0.6\n")
        assert main(["estimate", "--config", str(bad)]) == 2


class TestBenchCommand:
    def test_unknown_test_id(self, tmp_path, capsys):
        code = main(["bench", "9", "--out", str(tmp_path)])
        assert code == 2
        assert "unknown test id" in capsys.readouterr().err

    def test_informational_report(self, tmp_path, capsys):
        code = main(["bench", "test2-reverse", "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "report_test2-reverse.csv").exists()
        assert "[info]" in capsys.readouterr().out


class TestServerMode:
    @pytest.fixture
    def routed(self, monkeypatch):
        """Route the CLI's HTTP calls into the in-process app."""
        test_client = TestClient(app, base_url="http://service")

        def fake_post(url, json=None, timeout=None):
            path = url.replace("http://service", "")
            return test_client.post(path, json=json)

        monkeypatch.setattr(httpx, "post", fake_post)

    def test_run_through_server(self, routed, cfg_file, tmp_path, capsys):
        out = tmp_path / "srv"
        code = main(["run", "--config", str(cfg_file), "--out", str(out),
                     "--server", "http://service"])
        assert code == 0
        assert (out / "series.csv").exists()

    def test_server_matches_local_bytes(self, routed, cfg_file, tmp_path):
        local, remote = tmp_path / "local", tmp_path / "remote"
        assert main(["run", "--config", str(cfg_file), "--out", str(local)]) == 0
        assert main(["run", "--config", str(cfg_file), "--out", str(remote),
                     "--server", "http://service"]) == 0
        assert (local / "series.csv").read_bytes() == (remote / "series.csv").read_bytes()

    def test_config_error_maps_back(self, routed, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[problem]\npreset = test1\n\n[blend]\nmu = -1\n")
        code = main(["run", "--config", str(bad), "--server", "http://service"])
        assert code == 2
        assert "line 5" in capsys.readouterr().err
