"""End-to-end smoke tests for the python bindings."""

import os
import subprocess

import numpy as np
import pytest

import eidesign as ed


def make_logistic_1d():
    basis = ed.Basis.intercept_plus_linear(1)
    box = ed.Box(lower=np.array([-1.0]), upper=np.array([1.0]))
    return ed.GlmModel(basis, ed.Link.logit(), np.array([0.2, 1.6]), box)


def test_version():
    assert ed.__version__


def test_model_basics():
    m = make_logistic_1d()
    g = ed.basis_eval(m, np.array([0.5]))
    assert g.tolist() == [1.0, 0.5]
    assert ed.glm_weight(m, np.array([0.5])) == pytest.approx(0.19661193324148185)
    assert ed.mean_deriv_sq(m, np.array([0.5])) == pytest.approx(
        0.19661193324148185**2
    )


def test_moment_matrix_and_criterion():
    m = make_logistic_1d()
    meas = ed.Measure.uniform_box(ed.Box(np.array([-1.0]), np.array([1.0])))
    quad = ed.Quadrature.auto_for(meas, 1)
    A = ed.moment_matrix(m, meas, quad)
    assert A.positive_definite
    crit = ed.CriterionSpec.ei(A)
    design = ed.Design(np.array([[-1.0], [1.0]]), np.array([0.5, 0.5]))
    value = ed.criterion_value(design, m, crit)
    assert value > 0


def test_run_sequential_certifies():
    m = make_logistic_1d()
    meas = ed.Measure.uniform_box(ed.Box(np.array([-1.0]), np.array([1.0])))
    A = ed.moment_matrix(m, meas, ed.Quadrature.auto_for(meas, 1))
    crit = ed.CriterionSpec.ei(A)
    pool = ed.grid_pool(m.domain, 100)
    cfg = ed.SeqConfig()
    cfg.seed = 11
    design, report = ed.run_sequential(m, crit, pool, cfg)
    assert report.converged
    assert report.final_equivalence_gap <= 1e-4 * report.final_value
    assert design.weights.sum() == pytest.approx(1.0)
    rounds = report.criterion_per_round
    assert all(b <= a + 1e-12 * abs(a) for a, b in zip(rounds, rounds[1:]))


def test_optimize_weights_symmetric():
    box = ed.Box(np.array([-1.0]), np.array([1.0]))
    m = ed.GlmModel(
        ed.Basis.intercept_plus_linear(1), ed.Link.identity(), np.zeros(2), box
    )
    start = ed.Design(np.array([[-1.0], [1.0]]), np.array([0.9, 0.1]))
    crit = ed.CriterionSpec.a_optimality(2)
    design, report = ed.optimize_weights(start, m, crit, ed.WeightOptConfig())
    assert report.converged
    assert design.weights == pytest.approx([0.5, 0.5], abs=1e-8)


def test_sobol_matches_scipy_when_available():
    qmc = pytest.importorskip("scipy.stats.qmc")
    box = ed.Box(np.zeros(3), np.ones(3))
    ours = ed.sobol_pool(box, 16, skip=0).points
    ref = qmc.Sobol(d=3, scramble=False).random(16)
    assert np.allclose(ours, ref, atol=0)


def test_errors_surface_as_python_exceptions():
    with pytest.raises(ed.EidesignError):
        ed.Design(np.array([[0.0], [0.0]]), np.array([0.5, 0.5]))


def test_cli_end_to_end(tmp_path):
    cli = os.environ.get("EIDESIGN_CLI")
    if not cli:
        pytest.skip("EIDESIGN_CLI not set")
    config = tmp_path / "problem.json"
    config.write_text(
        """
        {
          "model": {"link": "logit", "basis": {"kind": "intercept-plus-linear"},
                    "beta": [0.2, 1.6], "domain": {"lower": [-1], "upper": [1]}},
          "measure": {"kind": "uniform-box", "lower": [-1], "upper": [1]},
          "criterion": {"kind": "ei"},
          "pool": {"kind": "grid", "levels_per_axis": 101},
          "algorithm": {"seed": 5}
        }
        """
    )
    out = tmp_path / "out"
    proc = subprocess.run(
        [cli, "--config", str(config), "--out", str(out), "--quiet"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    weights = []
    with open(out / "design.csv") as fh:
        header = next(fh)
        assert header.strip() == "x1,weight"
        for line in fh:
            weights.append(float(line.split(",")[1]))
    assert sum(weights) == pytest.approx(1.0, abs=1e-9)
