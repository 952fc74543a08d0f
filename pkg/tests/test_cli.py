import json

import pytest

from ptfsynth.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, OUTPUT_DIR_ENV, RunManifest, main


def run_json(capsys, *argv):
    code = main([*argv, "--json", "--workers", "1"])
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture(autouse=True)
def no_output_dir(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


class TestEnumerate:
    def test_all_two_variable(self, capsys):
        code, doc = run_json(capsys, "enumerate", "--n", "2", "--all")
        assert code == EXIT_OK
        assert len(doc["results"]) == 16 and all(r["representable"] for r in doc["results"])
        assert doc["manifest"]["command"] == "enumerate"

    def test_four_variables_point_to_synthesis(self, capsys):
        assert main(["enumerate", "--n", "4", "--all"]) == EXIT_USAGE
        assert "synthesize" in capsys.readouterr().err

    def test_unknown_op_lists_registry(self, capsys):
        assert main(["enumerate", "--n", "2", "--op", "nope"]) == EXIT_USAGE
        assert "xnor" in capsys.readouterr().err

    def test_needs_selection(self):
        assert main(["enumerate", "--n", "3"]) == EXIT_USAGE

    def test_text_table(self, capsys):
        assert main(["enumerate", "--n", "3", "--op", "majority_3", "--workers", "1"]) == EXIT_OK
        assert "majority_3" in capsys.readouterr().out


class TestSynthesize:
    def test_single_op(self, capsys):
        code, doc = run_json(capsys, "synthesize", "--op", "xor_4")
        assert code == EXIT_OK
        run, = doc["runs"]
        assert run["trace"]["final_accuracy"] == 1.0
        assert sum(1 for c in run["mask"]["coeffs"] if c) == 1

    def test_seed_list(self, capsys):
        code, doc = run_json(capsys, "synthesize", "--op", "majority_4", "--seeds", "3")
        assert [r["trace"]["seed"] for r in doc["runs"]] == [0, 1, 2]
        assert doc["manifest"]["seeds"] == [0, 1, 2]

    @pytest.mark.parametrize("flag, value", [("--tau", "2"), ("--max-sweeps", "-1")])
    def test_bad_config(self, flag, value):
        assert main(["synthesize", "--op", "and_4", flag, value]) == EXIT_USAGE


class TestWarmstart:
    def test_zero_seeds(self):
        assert main(["warmstart", "--seeds", "0"]) == EXIT_USAGE

    def test_small_run(self, capsys):
        code, doc = run_json(capsys, "warmstart", "--op", "majority_4", "--seeds", "2", "--max-sweeps", "5000")
        assert code == EXIT_OK
        assert {r["strategy"] for r in doc["summary"]} == {"random_ternary", "wht_threshold"}
        assert len(doc["traces"]) == 4


class TestCompose:
    def test_adder_sampled(self, capsys):
        code, doc = run_json(capsys, "compose", "adder", "--bits", "16", "--samples", "5000")
        assert code == EXIT_OK
        assert doc["report"]["errors"] == 0
        assert doc["report"]["error_bound"] == pytest.approx(3 / 5000)
        assert doc["netlist"]["bits"] == 16

    def test_exhaustive(self, capsys):
        code, doc = run_json(capsys, "compose", "comparator", "--bits", "4", "--exhaustive")
        assert code == EXIT_OK and doc["report"]["exhaustive"] and doc["report"]["samples"] == 256

    def test_full_adder_text(self, capsys):
        assert main(["compose", "full_adder", "--exhaustive", "--workers", "1"]) == EXIT_OK
        assert "errors     0" in capsys.readouterr().out

    @pytest.mark.parametrize("bits", ["0", "129"])
    def test_bits_range(self, bits):
        assert main(["compose", "equality", "--bits", bits]) == EXIT_USAGE

    def test_exhaustive_too_wide(self):
        assert main(["compose", "adder", "--bits", "32", "--exhaustive"]) == EXIT_USAGE

    def test_unknown_kind(self):
        assert main(["compose", "multiplier"]) == EXIT_USAGE


class TestRouteAndBench:
    def test_route(self, capsys):
        code, doc = run_json(capsys, "route")
        assert code == EXIT_OK
        assert all(a == 1.0 for a in doc["accuracy"].values())
        assert doc["negation_boundary"]["nor"] == [0.5, 1.0]

    def test_route_without_signs_fails(self, capsys):
        assert main(["route", "--no-signs"]) == EXIT_FAIL

    def test_bench_fwht(self, capsys):
        code, doc = run_json(capsys, "bench", "fwht", "--n-min", "4", "--n-max", "6", "--reps", "1")
        assert code == EXIT_OK and [r["n"] for r in doc["rows"]] == [4, 5, 6]

    def test_bench_fwht_range(self):
        assert main(["bench", "fwht", "--n-min", "8", "--n-max", "4"]) == EXIT_USAGE

    def test_bench_inference(self, capsys):
        code, doc = run_json(capsys, "bench", "inference", "--batch", "512", "--reps", "1")
        assert [r["kernel"] for r in doc["rows"]] == ["packed", "naive"]
        assert all(r["ops"] == 10 for r in doc["rows"])


class TestOutput:
    def test_env_directory(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        assert main(["route", "--workers", "1"]) == EXIT_OK
        doc = json.loads((tmp_path / "route.json").read_text())
        assert doc["manifest"]["outputs"] == [str(tmp_path / "route.json")]

    def test_explicit_output(self, capsys, tmp_path):
        path = tmp_path / "sub" / "x.json"
        assert main(["enumerate", "--n", "2", "--op", "and", "--output", str(path), "--workers", "1"]) == EXIT_OK
        manifest = RunManifest.from_dict(json.loads(path.read_text())["manifest"])
        assert manifest.params["n"] == 2 and manifest.params["op"] == ["and"]

    def test_manifest_round_trip(self):
        m = RunManifest("compose", {"bits": 8}, [0], outputs=["a.json"], argv=["compose"])
        assert RunManifest.from_json(m.to_json()) == m

    def test_bad_workers(self):
        assert main(["route", "--workers", "0"]) == EXIT_USAGE

    def test_no_command(self):
        assert main([]) == EXIT_USAGE
