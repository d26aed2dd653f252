import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbdflow import io
from sbdflow.cli import main
from sbdflow.core import ValidationError

CUSTOM = """\
[run]
scenario = custom
model = {model}
[geometry]
Lx = 1.0
Ly = 1.2
y_gamma_pm = 0.6
y_gamma_ff = 0.8
nx = 10
ny = 12
[bc]
ff_left = no_slip
ff_right = do_nothing
ff_top = {top}
tr_left = no_slip
tr_right = no_slip
pm_left = flux:0
pm_right = flux:0
pm_bottom = pressure:zero
gamma_left = dirichlet:0,0
gamma_right = dirichlet:0,0
"""


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_defaults():
    cfg = io.parse_config_text("[run]\nscenario = mms-full\n")
    assert cfg.method == "direct" and cfg.levels == (20, 40, 80)
    assert (cfg.closure.lambda1, cfg.closure.lambda2) == (4.0, 2.0)


def test_nonpositive_d_names_the_key():
    with pytest.raises(ValidationError) as exc:
        io.parse_config_text("[geometry]\ny_gamma_pm = 1.0\ny_gamma_ff = 1.0\n")
    assert any(e.startswith("geometry.y_gamma_ff (line 3)") for e in exc.value.errors)


def test_unknown_key_reports_line():
    with pytest.raises(ValidationError) as exc:
        io.parse_config_text("[run]\nscenario = mms-full\n\n[params]\nmew = 2\n")
    assert exc.value.errors == ["params.mew (line 5): unknown key"]


def test_errors_are_collected():
    with pytest.raises(ValidationError) as exc:
        io.parse_config_text("[run]\nmodel = half\n[solver]\ntol = -1\n[params]\nK_tr = 1, 2, 1\n")
    assert len(exc.value.errors) == 3


def test_custom_run_needs_every_segment():
    with pytest.raises(ValidationError, match="missing boundary condition"):
        io.parse_config_text("[run]\nscenario = custom\n")


def test_bad_boundary_data():
    with pytest.raises(ValidationError, match="bc.ff_top"):
        io.parse_config_text("[bc]\nff_top = velocity:1\n")


@settings(max_examples=40, deadline=None)
@given(mu=st.floats(1e-4, 10), alpha=st.floats(1e-3, 5), k=st.floats(1e-6, 1),
       nx=st.integers(5, 200), method=st.sampled_from(["direct", "krylov", "auto"]),
       tol=st.floats(1e-14, 1e-4), profile=st.sampled_from(["linear", "piecewise_linear",
                                                           "quadratic"]))
def test_round_trip(mu, alpha, k, nx, method, tol, profile):
    cfg = io.RunConfig(mu=mu, mu_eff=mu, alpha=alpha, K_tr=(k, 0.0, k), K_pm=(k, 0.0, k),
                       nx=nx, method=method, tol=tol, profile=profile,
                       bc={"ff_top": io.BCEntry("velocity", (1.0, 0.0)),
                           "pm_bottom": io.BCEntry("flux", "parabola_inflow")})
    assert io.parse_config_text(io.serialize_config(cfg)) == cfg


def test_exit_code_success_and_csv(tmp_path, capsys):
    assert main(["converge-full", "--levels", "3", "--base", "10", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "convergence_full.csv").read_text()
    assert text.splitlines()[0] == "h,field,error,order"
    assert "slope" in capsys.readouterr().out


def test_exit_code_invalid_input(tmp_path, capsys):
    p = _write(tmp_path, "[geometry]\ny_gamma_pm = 1.0\ny_gamma_ff = 0.9\n")
    assert main(["run", "--config", str(p)]) == 1
    assert "y_gamma_ff" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.ini")]) == 1


def test_exit_code_solver_failure(tmp_path, capsys):
    # only Neumann-type data in the free flow and a closed porous medium
    text = CUSTOM.format(model="full", top="no_slip").replace("pressure:zero", "flux:0")
    text = text.replace("ff_right = do_nothing", "ff_right = no_slip")
    p = _write(tmp_path, text + "\n[solver]\nmethod = direct\n")
    code = main(["run", "--config", str(p)])
    err = capsys.readouterr().err
    assert code in (1, 2)
    if code == 1:
        assert "pressure level undetermined" in err
    else:
        assert "solver failure" in err


def test_singular_system_exits_2(tmp_path, monkeypatch, capsys):
    from sbdflow import cli
    from sbdflow.solver import SolverError

    def boom(*a, **k):
        raise SolverError("factorization failed", float("inf"))
    p = _write(tmp_path, CUSTOM.format(model="full", top="no_slip"))
    monkeypatch.setattr(cli, "solve", boom)
    assert main(["run", "--config", str(p)]) == 2
    assert "solver failure" in capsys.readouterr().err


def test_zero_field_vtk(tmp_path, monkeypatch):
    monkeypatch.setenv(io.OUTPUT_ENV, str(tmp_path))
    p = _write(tmp_path, CUSTOM.format(model="full", top="no_slip"))
    assert main(["run", "--config", str(p)]) == 0
    lines = (tmp_path / "solution_full.vtk").read_text().splitlines()
    assert "DIMENSIONS 11 13 1" in lines
    assert "CELL_DATA 120" in lines and "POINT_DATA 143" in lines
    i = lines.index("CELL_DATA 120")
    vals = np.array(" ".join(lines[i + 3:i + 3 + 120]).split(), float)
    assert vals.size == 120 and np.all(vals == 0.0)


def test_reduced_custom_run_writes_gamma_fields(tmp_path):
    text = CUSTOM.format(model="reduced", top="velocity:1,0").replace("ny = 12", "ny = 10")
    text = text.replace("[run]", f"[run]\noutput = {tmp_path}")
    p = _write(tmp_path, text)
    assert main(["run", "--config", str(p)]) == 0
    rows = (tmp_path / "gamma_fields.csv").read_text().splitlines()
    assert rows[0] == "s,U,V,P"
    assert len(rows) == 11


def test_csv_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["converge-reduced", "--levels", "3", "--base", "10", "--out", str(d)]) == 0
    assert (a / "convergence_reduced.csv").read_bytes() == (b / "convergence_reduced.csv").read_bytes()


def test_dump_matrix(tmp_path):
    from scipy.io import mmread
    out = tmp_path / "A.mtx"
    assert main(["dump-matrix", "--n", "10", "--output", str(out)]) == 0
    A = mmread(str(out))
    assert A.shape[0] == A.shape[1] and A.nnz > 0
