"""Command-line interface: exit codes, report files, determinism."""

import json
import os

import pytest

from ainfquot.cli import (
    EXIT_MATH,
    EXIT_OK,
    EXIT_RESOURCE,
    EXIT_USAGE,
    main,
)

A2_SETUP = {
    "algebra": {"vertices": ["1", "2"], "arrows": [["1", "2"]]},
    "complexes": [
        {"name": "S1", "modules": {"0": {"dims": {"1": 1, "2": 0}, "arrows": {}}},
         "diff": {}},
        {"name": "S2", "modules": {"0": {"dims": {"1": 0, "2": 1}, "arrows": {}}},
         "diff": {}},
        {"name": "P", "modules": {"0": {"dims": {"1": 1, "2": 1},
                                         "arrows": {"1->2": [[1]]}}},
         "diff": {}},
        {"name": "Ac", "modules": {
            "0": {"dims": {"1": 1, "2": 0}, "arrows": {}},
            "1": {"dims": {"1": 1, "2": 0}, "arrows": {}},
        }, "diff": {"0": {"1": [[1]], "2": []}}},
    ],
}


@pytest.fixture(scope="module")
def setup_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "setup.json"
    path.write_text(json.dumps(A2_SETUP))
    return str(path)


def run(argv):
    return main(argv)


class TestUsageErrors:
    def test_no_subcommand(self, capsys):
        assert run([]) == EXIT_USAGE
        capsys.readouterr()

    def test_missing_input_file(self, tmp_path):
        assert run(["--out", str(tmp_path), "quotient", "/no/such/file.json"]) == EXIT_USAGE

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["--out", str(tmp_path), "quotient", str(bad)]) == EXIT_USAGE

    def test_missing_schema_key(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"complexes": []}))
        assert run(["--out", str(tmp_path), "quotient", str(bad)]) == EXIT_USAGE


class TestCommands:
    def test_check_ainf_random_category(self, tmp_path):
        out = str(tmp_path / "r")
        assert run(["--out", out, "--seed", "3", "check-ainf"]) == EXIT_OK
        payload = json.load(open(os.path.join(out, "check_ainf.json")))
        assert payload["ok"] is True
        assert open(os.path.join(out, "check_ainf.tsv")).read().startswith("status")

    def test_quotient(self, setup_path, tmp_path):
        out = str(tmp_path / "q")
        assert run(["--out", out, "--max-len", "3", "quotient", setup_path]) == EXIT_OK
        payload = json.load(open(os.path.join(out, "quotient.json")))
        assert payload["acyclic"] == ["Ac"]
        assert payload["ok"] is True

    def test_invalid_differential_is_a_math_failure(self, tmp_path):
        # d squares to the identity, not zero
        raw = {
            "algebra": {"vertices": ["1", "2"], "arrows": [["1", "2"]]},
            "complexes": [
                {"name": "B", "modules": {
                    "0": {"dims": {"1": 1, "2": 0}, "arrows": {}},
                    "1": {"dims": {"1": 1, "2": 0}, "arrows": {}},
                    "2": {"dims": {"1": 1, "2": 0}, "arrows": {}},
                }, "diff": {"0": {"1": [[1]]}, "1": {"1": [[1]]}}},
            ],
        }
        bad = tmp_path / "bad_diff.json"
        bad.write_text(json.dumps(raw))
        out = str(tmp_path / "qbad")
        code = run(["--out", out, "--max-len", "3", "quotient", str(bad)])
        assert code == EXIT_MATH

    def test_homotopies(self, setup_path, tmp_path):
        out = str(tmp_path / "h")
        assert run([
            "--out", out, "--max-len", "3", "--max-words", "40",
            "homotopies", setup_path,
        ]) == EXIT_OK
        payload = json.load(open(os.path.join(out, "homotopies.json")))
        assert payload["two_formula_mismatches"] == 0
        assert payload["concat_roundtrip_failures"] == []

    def test_extend(self, setup_path, tmp_path):
        out = str(tmp_path / "e")
        assert run([
            "--out", out, "--max-len", "4", "--arity", "2", "--max-words", "40",
            "extend", setup_path,
        ]) == EXIT_OK
        payload = json.load(open(os.path.join(out, "extend.json")))
        assert payload["ok"] is True

    def test_invert(self, setup_path, tmp_path):
        out = str(tmp_path / "i")
        assert run([
            "--out", out, "--max-len", "3", "--arity", "2",
            "invert", setup_path,
        ]) == EXIT_OK
        payload = json.load(open(os.path.join(out, "invert.json")))
        assert payload["ok"] is True
        assert all(not v for v in payload["residuals"].values())

    def test_contract(self, setup_path, tmp_path):
        out = str(tmp_path / "c")
        assert run([
            "--out", out, "--max-len", "3", "contract", setup_path,
        ]) == EXIT_OK
        payload = json.load(open(os.path.join(out, "contract.json")))
        assert payload["full_strings_contractible"] is True
        assert payload["flat_strings_contractible"] is True

    def test_derived_compare_writes_figure(self, setup_path, tmp_path, capsys):
        out = str(tmp_path / "d")
        code = run([
            "--out", out, "--min-len", "3", "--max-len", "5",
            "derived-compare", setup_path,
        ])
        assert code == EXIT_OK
        printed = capsys.readouterr().out.splitlines()
        assert len(printed) == 3
        for p in printed:
            assert os.path.exists(p)
        assert any(p.endswith(".png") for p in printed)
        assert os.path.getsize(os.path.join(out, "derived_compare.png")) > 0

    def test_unresolvable_complex_exits_with_resource_code(self, tmp_path):
        # two-term complex with homology in both degrees: neither
        # injective, nor acyclic, nor a stalk
        raw = {
            "algebra": {"vertices": ["1", "2"], "arrows": [["1", "2"]]},
            "complexes": [
                {"name": "W", "modules": {
                    "0": {"dims": {"1": 1, "2": 1}, "arrows": {}},
                    "1": {"dims": {"1": 1, "2": 1}, "arrows": {}},
                }, "diff": {"0": {"1": [[0]], "2": [[0]]}}},
            ],
        }
        path = tmp_path / "wild.json"
        path.write_text(json.dumps(raw))
        out = str(tmp_path / "w")
        code = run([
            "--out", out, "--min-len", "2", "--max-len", "3",
            "derived-compare", str(path),
        ])
        assert code == EXIT_RESOURCE


class TestDeterminism:
    def test_reports_byte_identical_under_fixed_seed(self, setup_path, tmp_path):
        outs = []
        for tag in ("a", "b"):
            out = str(tmp_path / tag)
            assert run([
                "--out", out, "--max-len", "3", "--seed", "11",
                "--max-words", "30", "homotopies", setup_path,
            ]) == EXIT_OK
            outs.append(out)
        for name in ("homotopies.json", "homotopies.tsv"):
            a = open(os.path.join(outs[0], name), "rb").read()
            b = open(os.path.join(outs[1], name), "rb").read()
            assert a == b
