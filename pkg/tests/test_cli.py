import csv
import io
import json

import pytest

from mgonal.cli import cache_file_name, load_or_build_set, main
from mgonal.errors import CacheFormatError
from mgonal.forms import Domain, MgonalForm
from mgonal.represent import RepresentedSet, represented_set


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_eval(capsys):
    code, out = run_cli(capsys, "eval", "--m", "5", "--x", "3")
    assert code == 0 and out == "12\n"


def test_invert(capsys):
    code, out = run_cli(capsys, "invert", "--m", "5", "--n", "12")
    assert code == 0 and out == "3\n"
    code, out = run_cli(capsys, "invert", "--m", "5", "--n", "2")
    assert code == 0 and out == "none\n"


def test_represent_json(capsys):
    code, out = run_cli(
        capsys, "represent", "--m", "5", "--coeffs", "1,1", "--n", "6", "--format", "json"
    )
    assert code == 0
    payload = json.loads(out)
    assert sorted(payload["witness"]) == [1, 2]


def test_usage_error_exit_2(capsys):
    assert main(["represent", "--m", "5", "--coeffs", "1,x", "--n", "6"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["eval", "--m", "5"]) == 2  # missing --x


def test_resource_error_exit_3(capsys):
    # sieve bound above the hard cap
    code = main(["set", "--m", "3", "--coeffs", "1", "--bound", str(1 << 30)])
    assert code == 3


def test_local_json(capsys):
    code, out = run_cli(
        capsys, "local", "--m", "4", "--coeffs", "1,1", "--n", "3", "--format", "json"
    )
    payload = json.loads(out)
    assert payload["overall"] is False
    assert {v["p"] for v in payload["verdicts"]} >= {2}


def test_tree_json_matches_figure(capsys):
    code, out = run_cli(
        capsys, "tree", "--m", "8", "--depth", "3", "--bound", "100000", "--format", "json"
    )
    payload = json.loads(out)
    assert payload["m"] == 8 and payload["bound"] == 100000

    def collect(node):
        yield tuple(node["coeffs"])
        for child in node["children"]:
            yield from collect(child)

    got = list(collect(payload["node"]))
    assert got == [
        (),
        (1,),
        (1, 1),
        (1, 1, 1),
        (1, 1, 2),
        (1, 1, 3),
        (1, 2),
        (1, 2, 2),
        (1, 2, 3),
        (1, 2, 4),
    ]


def test_exceptions_csv(capsys):
    code, out = run_cli(
        capsys,
        "exceptions",
        "--m", "8", "--coeffs", "1,1,1,1,1", "--bound", "2000", "--format", "csv",
    )
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["form", "m", "N"]
    assert all(r[0] == "<1,1,1,1,1>_8" and r[1] == "8" for r in rows[1:])
    assert len(rows) > 1


def test_growth_csv_with_summary_line(capsys):
    code, out = run_cli(
        capsys,
        "growth",
        "--coeffs", "1,1,1,1,1", "--m-from", "6", "--m-to", "8",
        "--bound", "5000", "--format", "csv",
    )
    *csv_lines, summary = out.strip().split("\n")
    rows = list(csv.reader(io.StringIO("\n".join(csv_lines))))
    assert rows[0] == ["m", "largest_exception", "ratio"]
    assert [r[0] for r in rows[1:]] == ["6", "7", "8"]
    parsed = json.loads(summary)
    assert "fit_exponent" in parsed


def test_kwindow_and_feasible_k(capsys):
    code, out = run_cli(
        capsys, "kwindow", "--m", "5", "--coeffs", "1,1,1,1,1", "--n", "1000", "--format", "json"
    )
    payload = json.loads(out)
    assert payload["A"] == 333 and payload["B"] == 1
    assert payload["alpha_plus"] is not None

    code, out = run_cli(
        capsys,
        "feasible-k",
        "--m", "5", "--coeffs", "1,1,1,1,1", "--n", "1000",
        "--k-max", "100", "--format", "json",
    )
    payload = json.loads(out)
    assert payload["feasible"], "k values should exist at this size"


def test_growth_parallel_matches_serial(capsys):
    argv = ["growth", "--coeffs", "1,1,1,1,1", "--m-from", "6", "--m-to", "9",
            "--bound", "4000", "--format", "json"]
    _, serial = run_cli(capsys, *argv)
    _, parallel = run_cli(capsys, *argv, "--jobs", "3")
    assert serial == parallel


def test_td5_count(capsys):
    code, out = run_cli(capsys, "td5", "--count-only")
    assert code == 0 and int(out) == 192


def test_gamma(capsys):
    code, out = run_cli(capsys, "gamma", "--m", "12", "--bound", "10000", "--depth", "4", "--format", "json")
    payload = json.loads(out)
    assert payload["gamma_lower"] >= 11


def test_byte_identical_reports(capsys):
    argv = ["exceptions", "--m", "7", "--coeffs", "1,1,1,1,1", "--bound", "3000", "--format", "json"]
    _, first = run_cli(capsys, *argv)
    _, second = run_cli(capsys, *argv)
    assert first == second
    # --stamp introduces the only nondeterministic field
    _, stamped = run_cli(capsys, *argv + ["--stamp"])
    assert json.loads(stamped)["exceptions"] == json.loads(first)["exceptions"]


def test_output_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out = run_cli(
        capsys, "eval", "--m", "6", "--x", "4", "--format", "json", "--output", str(target)
    )
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["value"] == 28


class TestCacheLayer:
    def test_round_trip_bit_exact(self, tmp_path):
        f = MgonalForm.make(6, [1, 2])
        first = load_or_build_set(f, 500, Domain.NONNEG, tmp_path)
        path = tmp_path / cache_file_name(f, Domain.NONNEG, 500)
        assert path.exists()
        again = RepresentedSet.from_bytes(path.read_bytes())
        assert again == first == represented_set(f, 500)

    def test_larger_bound_reuses_cache(self, tmp_path):
        f = MgonalForm.make(6, [1, 2])
        load_or_build_set(f, 800, Domain.NONNEG, tmp_path)
        small = load_or_build_set(f, 300, Domain.NONNEG, tmp_path)
        assert small == represented_set(f, 300)
        # only the 800 file exists; the 300 answer came from truncation
        assert [p.name for p in tmp_path.glob("*.bin")] == [cache_file_name(f, Domain.NONNEG, 800)]

    def test_extension_replaces_smaller(self, tmp_path):
        f = MgonalForm.make(6, [1, 2])
        load_or_build_set(f, 200, Domain.NONNEG, tmp_path)
        load_or_build_set(f, 1000, Domain.NONNEG, tmp_path)
        names = sorted(p.name for p in tmp_path.glob("*.bin"))
        assert names == [cache_file_name(f, Domain.NONNEG, 1000)]

    def test_corrupt_cache_detected(self, tmp_path):
        f = MgonalForm.make(6, [1, 2])
        load_or_build_set(f, 200, Domain.NONNEG, tmp_path)
        path = tmp_path / cache_file_name(f, Domain.NONNEG, 200)
        blob = bytearray(path.read_bytes())
        blob[0] = ord("X")
        path.write_bytes(bytes(blob))
        with pytest.raises(CacheFormatError):
            load_or_build_set(f, 200, Domain.NONNEG, tmp_path)

    def test_domain_and_form_keys_disjoint(self, tmp_path):
        f = MgonalForm.make(6, [1, 2])
        g = MgonalForm.make(6, [1, 3])
        load_or_build_set(f, 100, Domain.NONNEG, tmp_path)
        load_or_build_set(f, 100, Domain.INT, tmp_path)
        load_or_build_set(g, 100, Domain.NONNEG, tmp_path)
        assert len(list(tmp_path.glob("*.bin"))) == 3

    def test_env_var_overrides_flag(self, tmp_path, capsys, monkeypatch):
        env_dir = tmp_path / "envcache"
        flag_dir = tmp_path / "flagcache"
        monkeypatch.setenv("MGONAL_CACHE_DIR", str(env_dir))
        code, _ = run_cli(
            capsys,
            "set", "--m", "5", "--coeffs", "1,1", "--bound", "400",
            "--cache-dir", str(flag_dir),
        )
        assert code == 0
        assert list(env_dir.glob("*.bin")) and not flag_dir.exists()
