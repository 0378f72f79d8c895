import pathlib
import shutil
import subprocess
import sys

import pytest

from linnum import automata as fa
from linnum.automata import Dfa
from linnum.cli import EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_USAGE, run
from linnum.langs import default_language
from linnum.systems import named

GOLDEN = pathlib.Path(__file__).parent / "golden"


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_seq(capsys):
    assert call(capsys, "seq", "--system", "toy", "-n", "6") == (0, "1 13 163 2046 25686 322464 4048236\n", "")


def test_rep_and_val(capsys):
    code, out, _ = call(capsys, "rep", "--system", "fib", "20", "7")
    assert code == 0 and out.splitlines() == ["20\t101010", "7\t1010"]
    code, out, _ = call(capsys, "val", "--system", "fib", "1010", "11")
    assert out.splitlines() == ["1010\t7\tgreedy=True", "11\t3\tgreedy=False"]


def test_zeta(capsys):
    code, out, _ = call(capsys, "zeta")
    first, bits = out.split()
    assert code == 0 and first == "660098850944665"
    assert int(bits, 2) == 660098850944665 and len(bits) == 50


def test_padic_val(capsys):
    code, out, _ = call(capsys, "padic-val", "--system", "toy", "-p", "2", "-i", "41..43")
    assert out.splitlines() == ["41\t24", "42\t20", "43\t21"]


def test_decide_machine_golden(capsys):
    argv = ("decide", "--system", "toy", "--dfa", "cong:3:1", "--format", "machine")
    code, out, _ = call(capsys, *argv)
    assert code == 0
    assert out == (GOLDEN / "decide_toy_cong3_1.txt").read_text()
    assert call(capsys, *argv)[1] == out


def test_decide_from_file_and_strict(capsys, tmp_path):
    lang = default_language(named("toy")).dfa
    powers = Dfa(lang.m, [[0, 1] + [2] * (lang.m - 2), [1] + [2] * (lang.m - 1), [2] * lang.m], 0, [1])
    path = tmp_path / "powers.dfa"
    path.write_text(fa.intersect(powers, lang).dumps())
    code, out, _ = call(capsys, "decide", "--system", "toy", "--dfa", str(path), "--format", "machine")
    assert code == 0 and out.startswith("outcome=Inconclusive")
    code, _, _ = call(capsys, "decide", "--system", "toy", "--dfa", str(path), "--strict")
    assert code == EXIT_INCONCLUSIVE


def test_reduce(capsys):
    code, out, _ = call(capsys, "reduce", "--system", "merge", "--dfa", "cong:5:2")
    assert code == 0 and out.startswith("# b=6 u=2 N=0 exactness=exact\n")
    d = Dfa.loads(out.split("\n", 1)[1])
    assert d.n == 5


def test_checks(capsys):
    code, out, _ = call(capsys, "check-nu2", "--max", "200")
    assert code == 0 and out.strip() == "checked=191\tmismatches=0"
    code, out, _ = call(capsys, "blocks", "--upto", "20")
    assert code == 0 and "19\t4" in out.splitlines()


def test_oracle(capsys):
    code, out, _ = call(capsys, "oracle", "--system", "fib", "--dfa", "cong:2:0", "-n", "5")
    assert [l.split("\t")[1] for l in out.splitlines()] == ["1", "0", "1", "0", "1", "0"]


def test_exit_codes(capsys):
    assert call(capsys, "seq")[0] == EXIT_USAGE
    assert call(capsys, "bogus")[0] == EXIT_USAGE
    assert call(capsys, "seq", "--system", "no-such-system", "-n", "3")[0] == EXIT_INVALID
    code, _, err = call(capsys, "reduce", "--system", "toy", "--dfa", "cong:5:2")
    assert code == EXIT_INVALID and "merge form" in err


@pytest.mark.skipif(shutil.which("linnum") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["linnum", "seq", "--system", "fib", "-n", "5"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == "1 2 3 5 8 13\n"
