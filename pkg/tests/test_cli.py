import pytest

from blindmix.cli import main, parse_config_file
from blindmix.records import read_records


class TestCli:
    def test_selftest(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and out.count("PASS") >= 6

    def test_unsupported_hadamard_size(self, capsys):
        assert main(["phase-transition", "--encoder", "hadamard", "--L", "1250"]) == 2
        assert "Hadamard" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(["convergence", "--bogus"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_missing_command(self):
        assert main([]) == 2

    def test_bad_value(self):
        assert main(["convergence", "--L", "10"]) == 2

    def test_demo_recovers_messages(self, capsys):
        assert main(["demo", "--signal", "qam16", "--s", "2", "--N", "16", "--K", "8", "--L", "512"]) == 0
        out = capsys.readouterr().out
        sent = [line.split("sent")[1].split() for line in out.splitlines() if " sent " in line]
        rec = [line.split("recovered")[1].split()[:16] for line in out.splitlines() if " recovered " in line]
        assert len(sent) == len(rec) == 2
        assert sent == rec
        assert "MISMATCH" not in out

    def test_convergence_writes_records(self, tmp_path, capsys):
        out = tmp_path / "conv.json"
        code = main(["convergence", "--N", "8", "--K", "8", "--L", "300", "--s", "1", "--solver", "all",
                     "--out", str(out), "--format", "json"])
        assert code == 0
        recs = read_records(out, "json")
        assert {r.solver for r in recs} == {"rgd", "rtr", "fiht"}

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# small sweep\nN = 6\nK = 6\nL = 60\ns = 1-2\ntrials = 2\nsolver = rtr\n"
                       f"out = {tmp_path / 'pt.csv'}\n")
        assert parse_config_file(cfg)["s"] == "1-2"
        assert main(["phase-transition", "--config", str(cfg), "--trials", "1"]) == 0
        recs = read_records(tmp_path / "pt.csv")
        assert sorted(r.s for r in recs) == [1, 2]

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("speed = 3\n")
        assert main(["convergence", "--config", str(cfg)]) == 2

    @pytest.mark.parametrize("cmd", ["noise-sweep", "cond-sweep"])
    def test_sweeps_run(self, cmd, capsys):
        assert main([cmd, "--N", "6", "--K", "6", "--L", "120", "--trials", "1"]) == 0
        assert capsys.readouterr().out
