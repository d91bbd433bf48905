import json
import math

import numpy as np
import pytest

from helpers import pgm_bytes
from stegbound import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    return header, rows


@pytest.fixture
def pgm_file(tmp_path):
    rng = np.random.default_rng(77)
    data = pgm_bytes(16, 16, 255, rng.integers(0, 256, size=(16, 16)))
    path = tmp_path / "cover.pgm"
    path.write_bytes(data)
    return path


class TestBoundCommand:
    def test_two_nats_json(self, capsys):
        code, out, _ = run_cli(
            capsys, "bound", "--n", "4", "--epsilon", str(math.sqrt(math.e - 2.0)), "--format", "json"
        )
        assert code == 0
        body = json.loads(out)
        assert body["results"]["rate_nats"] == pytest.approx(2.0, rel=1e-9)
        assert body["results"]["sandwich_low"] < body["results"]["a"] < body["results"]["sandwich_high"]

    def test_zero_budget_human(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--n", "4", "--epsilon", "0")
        assert code == 0
        assert "rate_nats" in out and "= 0" in out

    def test_nonpositive_n_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "bound", "--n", "0", "--epsilon", "0.1")
        assert code == cli.EXIT_USAGE
        assert "invalid arguments" in err

    def test_missing_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["bound", "--n", "4"])
        assert excinfo.value.code == cli.EXIT_USAGE

    def test_csv_json_agree(self, capsys):
        args = ("bound", "--n", "64", "--epsilon", "0.37")
        _, json_out, _ = run_cli(capsys, *args, "--format", "json")
        _, csv_out, _ = run_cli(capsys, *args, "--format", "csv")
        body = json.loads(json_out)
        _, rows = parse_csv(csv_out)
        for key, string_value in rows[0].items():
            assert float(string_value) == pytest.approx(body["results"][key], abs=1e-9)


class TestCurveCommand:
    def test_five_rows_with_zero_endpoint(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "curve", "--n", str(2**18), "--pe-min", "0.1", "--pe-max", "0.5",
            "--steps", "5", "--format", "csv",
        )
        assert code == 0
        header, rows = parse_csv(out)
        assert header == ["p_E", "payload_bpe", "a_low", "srl_bpe"]
        assert len(rows) == 5
        assert float(rows[-1]["payload_bpe"]) == 0.0

    def test_payload_fixture_row(self, capsys):
        _, out, _ = run_cli(
            capsys,
            "curve", "--n", str(2**18), "--pe-min", "0.4", "--pe-max", "0.4",
            "--steps", "1", "--format", "json",
        )
        row = json.loads(out)["results"]["rows"][0]
        assert row["payload_bpe"] == pytest.approx(7.97e-4, rel=2e-3)

    def test_csv_round_trips_against_json(self, capsys):
        args = ("curve", "--n", "1024", "--pe-min", "0.0", "--pe-max", "0.5", "--steps", "6")
        _, json_out, _ = run_cli(capsys, *args, "--format", "json")
        _, csv_out, _ = run_cli(capsys, *args, "--format", "csv")
        json_rows = json.loads(json_out)["results"]["rows"]
        _, csv_rows = parse_csv(csv_out)
        for json_row, csv_row in zip(json_rows, csv_rows):
            for key in json_row:
                assert float(csv_row[key]) == pytest.approx(json_row[key], abs=1e-9)

    def test_bad_grid_is_numerical_error(self, capsys):
        code, _, err = run_cli(
            capsys, "curve", "--n", "4", "--pe-min", "0.4", "--pe-max", "0.2"
        )
        assert code == cli.EXIT_NUMERICAL
        assert "exceeds" in err


class TestDetectCommand:
    def test_scalar_euler_band(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "detect", "--n", "1", "--epsilon", "0.423785", "--trials", "100000",
            "--seed", "7", "--format", "json",
        )
        assert code == 0
        results = json.loads(out)["results"]
        assert 0.75 <= results["p_e"] <= 0.78

    def test_zero_budget_reports_without_sampling(self, capsys):
        code, out, _ = run_cli(
            capsys, "detect", "--n", "4", "--epsilon", "0", "--format", "json"
        )
        assert code == 0
        body = json.loads(out)
        assert body["results"]["p_e"] == 1.0
        assert body["results"]["trials"] == 0

    def test_byte_identical_reruns(self, capsys):
        args = (
            "detect", "--n", "2", "--epsilon", "0.3", "--trials", "2000",
            "--seed", "123", "--format", "json",
        )
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second

    def test_csv_has_both_detectors(self, capsys):
        _, out, _ = run_cli(
            capsys,
            "detect", "--n", "2", "--epsilon", "0.3", "--trials", "500",
            "--seed", "1", "--format", "csv",
        )
        _, rows = parse_csv(out)
        assert [row["detector"] for row in rows] == ["lrt", "energy"]


class TestCodeCommand:
    def test_zero_fraction_row(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "code", "--n", "16", "--epsilon", "2.0", "--fractions", "0,0.2",
            "--trials", "40", "--seed", "3", "--format", "json",
        )
        assert code == 0
        rows = json.loads(out)["results"]["rows"]
        assert rows[0]["p_B"] == 0.0 and rows[0]["K"] == 1

    def test_trend_fixture(self, capsys):
        epsilon = math.sqrt((math.e - 2.0) * 16.0) / 2.0
        code, out, _ = run_cli(
            capsys,
            "code", "--n", "16", "--epsilon", str(epsilon), "--fractions", "0.2,1.5",
            "--trials", "200", "--seed", "20240601", "--format", "csv",
        )
        assert code == 0
        _, rows = parse_csv(out)
        assert float(rows[0]["p_B"]) < float(rows[1]["p_B"])

    def test_missing_epsilon_is_usage(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            cli.main(["code", "--n", "16"])
        assert excinfo.value.code == cli.EXIT_USAGE


class TestImageBoundCommand:
    def test_independent_mode(self, capsys, pgm_file):
        code, out, _ = run_cli(
            capsys, "image-bound", str(pgm_file), "--epsilon", "0.2", "--format", "json"
        )
        assert code == 0
        body = json.loads(out)
        assert body["results"]["clique_count"] == 256
        assert body["config"]["pgm_bytes"] == pgm_file.stat().st_size

    def test_block_mode(self, capsys, pgm_file):
        code, out, _ = run_cli(
            capsys,
            "image-bound", str(pgm_file), "--epsilon", "0.2", "--mode", "square-block",
            "--block-edge", "8", "--format", "json",
        )
        assert code == 0
        assert json.loads(out)["results"]["clique_count"] == 4

    def test_non_pgm_is_format_error(self, capsys, tmp_path):
        path = tmp_path / "fake.pgm"
        path.write_bytes(b"JFIF not a pgm")
        code, _, err = run_cli(capsys, "image-bound", str(path), "--epsilon", "0.2")
        assert code == cli.EXIT_FORMAT
        assert "format" in err.lower()

    def test_missing_file_is_io_error(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "image-bound", str(tmp_path / "absent.pgm"), "--epsilon", "0.2"
        )
        assert code == cli.EXIT_IO


class TestOutputAndServer:
    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "bound.json"
        code, out, _ = run_cli(
            capsys,
            "bound", "--n", "4", "--epsilon", "0.5", "--format", "json",
            "--output", str(target),
        )
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["config"]["command"] == "bound"

    def test_server_mode_matches_local(self, capsys, monkeypatch):
        from fastapi.testclient import TestClient

        from stegbound.service.app import app

        test_client = TestClient(app)

        def fake_post(url, json=None, timeout=None):
            path = url.replace("http://fake", "")
            return test_client.post(path, json=json)

        monkeypatch.setattr(cli.httpx, "post", fake_post)
        args = ("bound", "--n", "32", "--epsilon", "0.4", "--format", "json")
        _, local, _ = run_cli(capsys, *args)
        _, remote, _ = run_cli(capsys, *args, "--server", "http://fake")
        assert json.loads(local) == json.loads(remote)

    def test_server_error_mapping(self, capsys, monkeypatch):
        from fastapi.testclient import TestClient

        from stegbound.service.app import app

        test_client = TestClient(app)

        def fake_post(url, json=None, timeout=None):
            path = url.replace("http://fake", "")
            return test_client.post(path, json=json)

        monkeypatch.setattr(cli.httpx, "post", fake_post)
        code, _, err = run_cli(
            capsys,
            "curve", "--n", "4", "--pe-min", "0.4", "--pe-max", "0.2",
            "--server", "http://fake",
        )
        assert code == cli.EXIT_NUMERICAL
        assert "server answered 400" in err
