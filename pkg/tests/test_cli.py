import math

import pytest

from spspec.cli import (
    CSV_HEADER,
    CliError,
    cmd_bench,
    cmd_converge,
    cmd_count,
    fit_slope,
    main,
)
from spspec.evaluators import dense_oracle_fourier
from spspec.spectral import Basis, SpectralVector, read_vector, write_vector


# ---------------------------------------------------------------- slope fit

def test_fit_slope_recovers_a_power_law():
    ns = [8, 16, 32, 64]
    errors = [4.0 * n**-2.0 for n in ns]
    assert abs(fit_slope(ns, errors) + 2.0) < 1e-12


def test_fit_slope_excludes_saturated_rows():
    ns = [8, 16, 32, 64]
    errors = [4.0 * n**-2.0 for n in ns[:-1]] + [5e-14]
    assert abs(fit_slope(ns, errors) + 2.0) < 1e-12


def test_fit_slope_needs_two_points():
    assert math.isnan(fit_slope([8], [0.1]))
    assert math.isnan(fit_slope([8, 16], [1e-14, 1e-15]))


# ---------------------------------------------------------------- converge

def test_converge_fourier_records():
    records, slope, notes = cmd_converge("fourier", 2, 3.0, [4, 8, 16], 0, "direct")
    assert [r.N for r in records] == [4, 8, 16]
    assert all(r.method == "direct" and r.basis == "fourier" for r in records)
    errs = [r.error_l1 for r in records]
    assert errs[0] > errs[1] > errs[2] > 0
    assert slope < -1.0
    assert any("tail" in n for n in notes)


def test_converge_is_deterministic_across_threads():
    seq, slope_a, _ = cmd_converge("fourier", 2, 3.0, [4, 8, 16], 0, "direct")
    par, slope_b, _ = cmd_converge("fourier", 2, 3.0, [4, 8, 16], 0, "direct", threads=3)
    assert [(r.N, r.terms, r.error_l1) for r in seq] == [
        (r.N, r.terms, r.error_l1) for r in par
    ]
    assert slope_a == slope_b


def test_converge_refuses_weak_fourier_reference():
    with pytest.raises(CliError, match="reference"):
        cmd_converge("fourier", 2, 3.0, [4, 8, 16], 0, "direct", cutoff=8)


def test_converge_refuses_weak_hermite_reference():
    with pytest.raises(CliError, match="reference"):
        cmd_converge("hermite", 2, 6.0, [4, 8], 1, "direct", ref_jmax=6)


def test_converge_hermite_transform_method():
    records, slope, _ = cmd_converge("hermite", 2, 6.0, [4, 8, 16], 1, "transform")
    errs = [r.error_l1 for r in records]
    assert errs[0] > errs[-1]
    assert slope < -1.0


def test_converge_fit_window():
    full, slope_full, _ = cmd_converge("fourier", 2, 3.0, [4, 8, 16, 32], 0, "direct")
    _, slope_tail, _ = cmd_converge(
        "fourier", 2, 3.0, [4, 8, 16, 32], 0, "direct", fit_window=(16, 32)
    )
    tail = fit_slope([r.N for r in full[-2:]], [r.error_l1 for r in full[-2:]])
    assert abs(slope_tail - tail) < 1e-12
    assert slope_tail != slope_full


# ---------------------------------------------------------------- count/bench

def test_count_rows_and_normalization():
    rows = cmd_count(2, 0, [1, 2, 4])
    assert [r[0] for r in rows] == [1, 2, 4]
    assert rows[0][1] == 9  # every pair from {-1,0,1}^2 at unit budget
    assert rows[1][1] == 21
    for n, count, normalized in rows:
        assert abs(normalized - count / (n * math.log(n + 1.0))) < 1e-12


def test_count_momentum_restricted_growth():
    rows = cmd_count(3, 0, [2**i for i in range(4, 11)], q=0)
    normalized = [z for _, _, z in rows]
    tail = normalized[-5:]
    assert max(tail) / min(tail) < 3.0


def test_count_momentum_mode_validation():
    with pytest.raises(CliError):
        cmd_count(2, 1, [8], q=0)
    with pytest.raises(CliError):
        cmd_count(2, 0, [8], q=0, lattice_kind="N")
    with pytest.raises(CliError):
        cmd_count(2, 0, [8], q=-1)


def test_bench_median_rows():
    records = cmd_bench("fourier", 2, 3.0, [4, 8], 0, "direct", repeats=3)
    assert [r.N for r in records] == [4, 8]
    assert all(math.isnan(r.error_l1) for r in records)
    assert all(r.wall_time_s >= 0 for r in records)
    with pytest.raises(CliError):
        cmd_bench("fourier", 2, 3.0, [4], 0, "direct", repeats=2)


def test_bench_direct_equals_iterative_terms_at_p_two():
    a = cmd_bench("fourier", 2, 3.0, [16], 0, "direct", repeats=3)
    b = cmd_bench("fourier", 2, 3.0, [16], 0, "iterative", repeats=3)
    assert a[0].terms == b[0].terms


# ---------------------------------------------------------------- main()

def run_main(args):
    return main(args)


def test_main_converge_writes_csv(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code = run_main(
        ["converge", "--basis", "fourier", "--p", "2", "--alpha", "0",
         "--N", "4,8,16", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[:6] == ["direct", "fourier", "2", "3.0", "0", "4"]
    assert "slope=" in capsys.readouterr().err


def test_main_single_point_slope_is_nan(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code = run_main(
        ["converge", "--basis", "fourier", "--p", "2", "--alpha", "0",
         "--N", "8", "--out", str(out)]
    )
    assert code == 0
    assert len(out.read_text().splitlines()) == 2
    assert "slope=nan" in capsys.readouterr().err


def test_main_count(tmp_path):
    out = tmp_path / "n.csv"
    code = run_main(["count", "--p", "2", "--alpha", "0", "--N", "1,2", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "N,count,normalized"
    assert lines[1].startswith("1,9,")
    assert lines[2].startswith("2,21,")


def test_main_validation_failures_exit_2(tmp_path):
    # transform is hermite-only
    assert run_main(
        ["converge", "--basis", "fourier", "--p", "2", "--alpha", "0",
         "--N", "4,8", "--method", "transform"]
    ) == 2
    # hermite alpha=0 eval needs an ell cap
    vec = tmp_path / "u.tsv"
    write_vector(SpectralVector(Basis.hermite(), {(0,): 1.0}), vec)
    assert run_main(
        ["eval", str(vec), "--basis", "hermite", "--p", "2", "--alpha", "0",
         "--N", "4", "--out", str(tmp_path / "o.tsv")]
    ) == 2
    # malformed N list
    assert run_main(
        ["count", "--p", "2", "--alpha", "0", "--N", "4,x"]
    ) == 2
    # bad flag value is caught by argparse
    assert run_main(
        ["converge", "--basis", "nope", "--p", "2", "--alpha", "0", "--N", "4"]
    ) == 2


def test_main_coeffs_idempotent(tmp_path, capsys):
    out = tmp_path / "h.cache"
    assert run_main(["coeffs", "--p", "2", "--jmax", "1", "--out", str(out)]) == 0
    first = out.read_bytes()
    assert run_main(["coeffs", "--p", "2", "--jmax", "1", "--out", str(out)]) == 0
    assert out.read_bytes() == first
    assert "wrote 2 coefficients" in capsys.readouterr().err


def test_main_eval_round_trip(tmp_path):
    basis = Basis.fourier(1)
    u = SpectralVector(basis, {(-1,): 0.5, (0,): 1.0, (2,): 0.25})
    vec = tmp_path / "u.tsv"
    write_vector(u, vec)
    out = tmp_path / "x.tsv"
    code = run_main(
        ["eval", str(vec), "--basis", "fourier", "--p", "2", "--alpha", "0",
         "--N", "4", "--out", str(out)]
    )
    assert code == 0
    got = read_vector(out, basis)
    assert got == dense_oracle_fourier((u, u))


def test_main_eval_hermite_with_cache(tmp_path):
    cache = tmp_path / "h.cache"
    assert run_main(["coeffs", "--p", "2", "--jmax", "8", "--out", str(cache)]) == 0
    u = SpectralVector(Basis.hermite(), {(0,): 1.0, (1,): 0.5})
    vec = tmp_path / "u.tsv"
    write_vector(u, vec)
    out = tmp_path / "x.tsv"
    code = run_main(
        ["eval", str(vec), "--basis", "hermite", "--p", "2", "--alpha", "1",
         "--N", "4", "--cache", str(cache), "--out", str(out)]
    )
    assert code == 0
    got = read_vector(out, Basis.hermite())
    assert (0,) in got and (2,) in got


def test_main_rejects_missing_input_file(tmp_path):
    assert run_main(
        ["eval", str(tmp_path / "absent.tsv"), "--basis", "fourier", "--p", "2",
         "--alpha", "0", "--N", "4", "--out", str(tmp_path / "o.tsv")]
    ) == 2
