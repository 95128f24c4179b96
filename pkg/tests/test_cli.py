import pytest

from e8frodo.cli import main
from e8frodo.noise import build_chi, support_radius
from e8frodo.params import PUBLISHED


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_demo(capsys):
    code, out, err = run(capsys, "demo", "--paramset", "modified-bw-640", "--trials", "100", "--seed", "1")
    assert code == 0
    assert "100/100" in out
    assert "9072 bytes" in out
    assert "wall time" in err


def test_demo_zero_trials(capsys):
    code, out, _ = run(capsys, "demo", "--paramset", "frodo-640", "--trials", "0")
    assert code == 0 and "no trials run" in out


def test_demo_csv_deterministic(capsys):
    argv = ("demo", "--paramset", "modified-sec-640", "--trials", "5", "--seed", "3", "--csv")
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    header, row = first.strip().splitlines()
    assert header.startswith("paramset,") and row.split(",")[2] == "5"


def test_demo_explicit_params(capsys):
    code, out, _ = run(capsys, "demo", "--n", "64", "--q", "32768", "--sigma", "2.0", "--ell", "128", "--trials", "3")
    assert code == 0 and "3/3" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("demo", "--paramset", "frodo-9999"),
        ("demo", "--n", "640"),
        ("demo", "--n", "63", "--q", "32768", "--sigma", "2", "--ell", "128"),
        ("demo", "--paramset", "frodo-640", "--trials", "-1"),
        ("chi-table", "--sigma", "-1"),
        ("chi-table",),
        ("frobnicate",),
        ("demo", "--trials", "many"),
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "error" in err


def test_computation_limit(capsys, monkeypatch):
    from e8frodo import failure_analysis

    monkeypatch.setattr(failure_analysis, "MAX_SUPPORT", 100)
    code, _, err = run(capsys, "analyze", "--paramset", "modified-bw-640")
    assert code == 2 and "limit" in err


def test_chi_table(capsys, tmp_path):
    path = tmp_path / "chi.txt"
    assert run(capsys, "chi-table", "--sigma", "2.8", "--out", str(path))[0] == 0
    lines = path.read_text().splitlines()
    assert lines[0].split()[0] == "2.8"
    assert sum(int(ln.split()[1]) for ln in lines[1:]) == 65536
    assert path.read_text() == build_chi(2.8).to_text()


def test_chi_table_support(capsys):
    _, out, _ = run(capsys, "chi-table", "--sigma", "1.14")
    s = int(out.splitlines()[0].split()[1])
    assert s == support_radius(1.14)
    assert len(out.splitlines()) == 2 * s + 2


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "--paramset", "modified-bw-640", "--csv")
    assert code == 0
    header, row = out.strip().splitlines()
    fields = dict(zip(header.split(","), row.split(",")))
    assert fields["beta"] == "4096"
    assert fields["bandwidth_bytes"] == "9072"
    assert abs(float(fields["log2_pe_bound"]) - (-152)) <= 4
    assert float(fields["log2_cca_bound"]) < 0


@pytest.mark.slow
def test_table2_csv(capsys):
    code, out, _ = run(capsys, "table2", "--csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 10
    for line in lines[1:]:
        name, sigma, logq, bw, bw_pub, pe, pe_pub, sec = line.split(",")
        assert int(bw) == int(bw_pub) == PUBLISHED[name][1]


def test_help_exits_cleanly(capsys):
    assert run(capsys, "--help")[0] == 0
