import json
from collections import Counter

import numpy as np
import pytest

from lineal_lab import corpus
from lineal_lab.cli import main
from lineal_lab.execute import run, sample
from lineal_lab.oracle import read_vector
from lineal_lab.rewrite import EngineConfig
from lineal_lab.syntax import parse, pretty
from lineal_lab.terms import ODOT, alpha_ac_eq

PROGRAMS = corpus.example_programs()


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def same_term(a: str, b: str, dialect: str) -> bool:
    ta, tb = parse(a, dialect), parse(b, dialect)
    if dialect == ODOT:
        # 1.* and * are the same amplitude
        return np.allclose(read_vector(ta, "odot"), read_vector(tb, "odot"))
    return alpha_ac_eq(ta, tb)


class TestCorpus:
    def test_bundle_is_not_empty(self):
        assert {".lineal", ".lams", ".sup"} <= {name[name.rfind(".") :] for name in PROGRAMS}

    def test_headers(self):
        program = PROGRAMS["measure-demo.lams"]
        assert program.headers["expect-type"] == "B"
        assert program.expected_dist == {"|0>": 0.75, "|1>": 0.25}

    def test_unknown_extension(self, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("x")
        with pytest.raises(ValueError):
            corpus.load(path)

    def test_file_on_disk_wins(self, tmp_path):
        path = tmp_path / "hadamard.lineal"
        path.write_text("-- expect: |1>\n|1>\n")
        assert corpus.resolve(path).headers == {"expect": "|1>"}

    @pytest.mark.parametrize("name", sorted(n for n, p in PROGRAMS.items() if "expect" in p.headers))
    def test_expected_normal_form(self, capsys, name):
        program = PROGRAMS[name]
        code, out, _ = invoke(capsys, "reduce", name)
        assert code == 0
        assert same_term(out.strip(), program.headers["expect"], program.dialect)

    @pytest.mark.parametrize("name", sorted(n for n, p in PROGRAMS.items() if "expect-type" in p.headers))
    def test_expected_type(self, capsys, name):
        code, out, _ = invoke(capsys, "check", name)
        assert code == 0
        assert out.strip() == PROGRAMS[name].headers["expect-type"]

    @pytest.mark.parametrize("name", sorted(n for n, p in PROGRAMS.items() if "expect-exit" in p.headers))
    def test_expected_exit(self, capsys, name):
        code, _, _ = invoke(capsys, "reduce", name, "--fuel", "200")
        assert code == int(PROGRAMS[name].headers["expect-exit"])

    @pytest.mark.parametrize("name", sorted(n for n, p in PROGRAMS.items() if "expect-dist" in p.headers))
    def test_expected_distribution(self, capsys, name):
        program = PROGRAMS[name]
        code, out, _ = invoke(capsys, "sample", name, "--shots", "4000", "--seed", "5", "--json")
        assert code == 0
        got = {row["term"]: row["freq"] for row in json.loads(out)["outcomes"]}
        for term, p in program.expected_dist.items():
            match = [f for text, f in got.items() if same_term(text, term, program.dialect)]
            assert (match[0] if match else 0.0) == pytest.approx(p, abs=0.03)


class TestCommands:
    def test_parse(self, capsys):
        code, out, _ = invoke(capsys, "parse", "hadamard-applied.lineal", "--json")
        assert code == 0
        assert json.loads(out)["dialect"] == "lineal"

    def test_check_lineal_is_untyped(self, capsys):
        code, out, _ = invoke(capsys, "check", "hadamard.lineal")
        assert code == 0 and "untyped" in out

    def test_reduce_json(self, capsys):
        code, out, _ = invoke(capsys, "reduce", "hadamard-applied.lineal", "--json")
        data = json.loads(out)
        assert code == 0 and data["outcome"] == "normal" and data["steps"] > 0

    def test_trace_is_jsonl(self, capsys):
        code, out, _ = invoke(capsys, "trace", "hadamard-applied.lineal")
        rows = [json.loads(line) for line in out.splitlines()]
        assert code == 0
        assert same_term(rows[-1]["term"], "(1/sqrt2).|0> + (1/sqrt2).|1>", "lineal")
        assert all({"rule", "pos", "term"} <= set(r) for r in rows)

    def test_trace_fuel(self, capsys):
        code, out, _ = invoke(capsys, "trace", "ybomb.lineal", "--fuel", "5")
        assert code == 3 and len(out.splitlines()) == 5

    def test_fuel_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv("LINEAL_LAB_FUEL", "3")
        code, out, _ = invoke(capsys, "trace", "ybomb.lineal")
        assert code == 3 and len(out.splitlines()) == 3

    def test_parse_error(self, capsys, tmp_path):
        path = tmp_path / "bad.lineal"
        path.write_text("(\\x.x")
        code, _, err = invoke(capsys, "reduce", str(path))
        assert code == 1 and "1:" in err

    def test_dialect_error(self, capsys, tmp_path):
        path = tmp_path / "bad.lineal"
        path.write_text("pi |0>")
        assert invoke(capsys, "parse", str(path))[0] == 1

    def test_missing_file(self, capsys):
        assert invoke(capsys, "parse", "no-such-program.lineal")[0] == 1

    def test_type_error(self, capsys, tmp_path):
        path = tmp_path / "bad.lams"
        path.write_text("|0> |1>")
        code, _, err = invoke(capsys, "check", str(path))
        assert code == 2 and "type error" in err

    def test_linearity_error(self, capsys, tmp_path):
        path = tmp_path / "clone.lams"
        path.write_text("(\\x:S B. (x, x)) |0>")
        assert invoke(capsys, "reduce", str(path))[0] == 2

    def test_degenerate_measurement(self, capsys, tmp_path):
        path = tmp_path / "zero.lams"
        path.write_text("pi zero")
        assert invoke(capsys, "sample", str(path), "--shots", "3")[0] == 4

    def test_restriction_off(self, capsys, tmp_path):
        path = tmp_path / "a.lineal"
        path.write_text("|0> + |0>")
        _, on, _ = invoke(capsys, "reduce", str(path))
        _, off, _ = invoke(capsys, "reduce", str(path), "--restriction", "off")
        assert same_term(on.strip(), "2.|0>", "lineal") and same_term(off.strip(), "2.|0>", "lineal")

    def test_bad_fuel(self, capsys):
        assert invoke(capsys, "reduce", "hadamard.lineal", "--fuel", "0")[0] == 1


class TestSample:
    def test_deterministic(self, capsys):
        first = invoke(capsys, "sample", "measure-demo.lams", "--shots", "200", "--seed", "9")
        second = invoke(capsys, "sample", "measure-demo.lams", "--shots", "200", "--seed", "9")
        assert first == second and first[0] == 0

    def test_shots_are_independent_runs(self):
        program = PROGRAMS["measure-demo.lams"]
        t = parse(program.source, program.dialect)
        cfg = EngineConfig(dialect=program.dialect)
        counts = dict((pretty(k, program.dialect), n) for k, n in sample(t, 60, 11, cfg))
        expected = Counter(pretty(run(t, [11, i], cfg), program.dialect) for i in range(60))
        assert counts == dict(expected)

    def test_text_output(self, capsys):
        code, out, _ = invoke(capsys, "sample", "measure-demo.sup", "--shots", "100")
        assert code == 0
        assert sum(int(line.split()[-2]) for line in out.splitlines()) == 100


class TestCompareOracle:
    def test_hadamard(self, capsys):
        code, out, _ = invoke(capsys, "compare-oracle", "hadamard-applied.lineal", "--circuit", "H")
        assert code == 0 and "deviation" in out

    def test_deviation_exit(self, capsys):
        code, _, _ = invoke(capsys, "compare-oracle", "hadamard-applied.lineal", "--circuit", "X")
        assert code == 5

    def test_json(self, capsys):
        code, out, _ = invoke(
            capsys, "compare-oracle", "deutsch-constant.lams", "--circuit", "H,X,Z,X,Z,H", "--json"
        )
        data = json.loads(out)
        assert code == 0 and data["deviation"] < 1e-9

    def test_unreadable(self, capsys):
        code, _, _ = invoke(capsys, "compare-oracle", "hadamard.lineal", "--circuit", "H")
        assert code == 6

    def test_bad_circuit(self, capsys):
        assert invoke(capsys, "compare-oracle", "hadamard.lineal", "--circuit", "T")[0] == 1


class TestRepl:
    def test_session(self, capsys, monkeypatch):
        import io

        lines = "(\\x.x) |1>\n:dialect lambda-s\n:check (1/sqrt2).|0> + (1/sqrt2).|1>\nbad (\n:q\n"
        monkeypatch.setattr("sys.stdin", io.StringIO(lines))
        code, out, _ = invoke(capsys, "repl")
        rows = out.splitlines()
        assert code == 0
        assert same_term(rows[0], "|1>", "lineal")
        assert rows[1] == "S B"
        assert rows[2].startswith("error:")
