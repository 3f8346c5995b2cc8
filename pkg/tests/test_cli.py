import json

from decint import cli, css


def write_config(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def run(command, config, out):
    return cli.main([command, "--config", config, "--out", str(out)])


class TestValidateCodes:
    def test_toy_family_passes(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"family": "toy"})
        assert run("validate-codes", cfg, tmp_path / "out") == 0
        lines = (tmp_path / "out" / "validation.csv").read_text().splitlines()
        assert lines[0] == "check,passed,detail"
        assert (tmp_path / "out" / "manifest.json").exists()

    def test_corrupted_family_fails_with_named_check(self, tmp_path, capsys):
        css.save_family(css.toy_family(), tmp_path / "fam")
        target = tmp_path / "fam" / "level_2.txt"
        target.write_text(target.read_text().replace("1111", "1011", 1))
        cfg = write_config(tmp_path, "c.json", {"family": str(tmp_path / "fam")})
        assert run("validate-codes", cfg, tmp_path / "out") == 1
        err = capsys.readouterr().err
        assert "FAIL" in err

    def test_unknown_family_usage_error(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"family": "nope"})
        assert run("validate-codes", cfg, tmp_path / "out") == 2

    def test_missing_config(self, tmp_path):
        assert run("validate-codes", str(tmp_path / "absent.json"), tmp_path / "o") == 2

    def test_dump_family_roundtrip(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"family": "toy", "dump": True})
        assert run("validate-codes", cfg, tmp_path / "out") == 0
        back = css.load_family(tmp_path / "out" / "family")
        assert back.depth == 4 and back.validate().passed


class TestInterfaceSweep:
    CFG = {
        "family": "toy",
        "r": 2,
        "r_prime": 1,
        "noise": {"delta": [0.01, 0.005], "seed": 3},
        "trials": 2000,
        "mu": 0.25,
    }

    def test_runs_and_reproduces(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.CFG)
        assert run("interface-sweep", cfg, tmp_path / "a") == 0
        assert run("interface-sweep", cfg, tmp_path / "b") == 0
        a = (tmp_path / "a" / "sweep.csv").read_bytes()
        b = (tmp_path / "b" / "sweep.csv").read_bytes()
        assert a == b
        assert (tmp_path / "a" / "sweep.svg").exists()

    def test_zero_delta_zero_failures(self, tmp_path):
        cfg = dict(self.CFG)
        cfg["noise"] = {"delta": [0.0], "seed": 1}
        cfg["trials"] = 100
        path = write_config(tmp_path, "c.json", cfg)
        assert run("interface-sweep", path, tmp_path / "out") == 0
        rows = (tmp_path / "out" / "sweep.csv").read_text().splitlines()[1:]
        assert rows[0].split(",")[2] == "0"

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.CFG)
        assert cli.main(
            ["interface-sweep", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "99"]
        ) == 0
        assert run("interface-sweep", cfg, tmp_path / "b") == 0
        assert (tmp_path / "a" / "sweep.csv").read_bytes() != (
            tmp_path / "b" / "sweep.csv"
        ).read_bytes()

    def test_empty_grid_usage_error(self, tmp_path):
        cfg = dict(self.CFG)
        cfg["noise"] = {"delta": [], "seed": 1}
        path = write_config(tmp_path, "c.json", cfg)
        assert run("interface-sweep", path, tmp_path / "out") == 2


class TestScheduleAudit:
    def test_bounds_hold(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {"family": "toy", "h_grid": [1, 3, 16], "r_grid": [2, 3], "r_prime": 1},
        )
        assert run("schedule-audit", cfg, tmp_path / "out") == 0
        margins = (tmp_path / "out" / "margins.csv").read_text().splitlines()
        assert margins[0].endswith("bounds_ok")
        assert all(row.split(",")[-1] == "1" for row in margins[1:])

    def test_census_totals_bounded(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json", {"family": "toy", "h_grid": [4], "r_grid": [3], "r_prime": 1}
        )
        assert run("schedule-audit", cfg, tmp_path / "out") == 0
        rows = (tmp_path / "out" / "census.csv").read_text().splitlines()[1:]
        for row in rows:
            vals = row.split(",")
            assert int(vals[4]) + int(vals[5]) == int(vals[6])


class TestTreeBounds:
    def test_bounds_verified_with_mc(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "z_grid": [2, 3],
                "delta_bar_grid": [0.3],
                "max_size": 2,
                "mc_trials": 20000,
                "seed": 7,
            },
        )
        assert run("tree-bounds", cfg, tmp_path / "out") == 0
        rows = (tmp_path / "out" / "tree_bounds.csv").read_text().splitlines()
        assert rows[0].startswith("z,delta_bar,set,exact_prob,bound,margin,ok")
        assert all(r.split(",")[6] == "1" for r in rows[1:])

    def test_depth_cap_usage_error(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"z_grid": [9], "delta_bar_grid": [0.1]})
        assert run("tree-bounds", cfg, tmp_path / "out") == 2


class TestE2E:
    def test_exhaustive_zero_errors(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {"family": "steane", "r": 2, "h": 1, "mode": "exhaustive",
             "noise": {"delta": 0.0, "seed": 2}},
        )
        assert run("e2e", cfg, tmp_path / "out") == 0
        rows = (tmp_path / "out" / "e2e_exhaustive.csv").read_text().splitlines()[1:]
        assert all(r.split(",")[3] == "0" for r in rows)

    def test_frames_mode_summary(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {"family": "steane", "r": 2, "h": 2, "trials": 500,
             "noise": {"delta": [0.01, 0.002], "seed": 4}},
        )
        assert run("e2e", cfg, tmp_path / "out") == 0
        summary = json.loads((tmp_path / "out" / "e2e_summary.json").read_text())
        assert summary["pauli_twirl"] is True
        assert len(summary["mean_singleton_rates"]) == 2
        assert (tmp_path / "out" / "schedule.json").exists()

    def test_toy_family_multilevel_frames(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {"family": "toy", "r": 3, "h": 2, "trials": 300,
             "noise": {"delta": [0.005], "seed": 6}},
        )
        assert run("e2e", cfg, tmp_path / "out") == 0
        rows = (tmp_path / "out" / "e2e_marginals.csv").read_text().splitlines()[1:]
        assert len(rows) == 4 * 2  # m_r=4 outputs per block, h=2 blocks

    def test_frames_reproducible(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {"family": "steane", "r": 2, "h": 1, "trials": 400,
             "noise": {"delta": [0.01], "seed": 4}},
        )
        assert run("e2e", cfg, tmp_path / "a") == 0
        assert run("e2e", cfg, tmp_path / "b") == 0
        assert (tmp_path / "a" / "e2e_marginals.csv").read_bytes() == (
            tmp_path / "b" / "e2e_marginals.csv"
        ).read_bytes()


class TestManifest:
    def test_manifest_fields(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"family": "toy"})
        run("validate-codes", cfg, tmp_path / "out")
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["command"] == "validate-codes"
        assert len(manifest["config_hash"]) == 64
        assert manifest["code_version"]
        assert manifest["start"] and manifest["end"]
        assert "validation.csv" in manifest["outputs"]
