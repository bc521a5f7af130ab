import math

import numpy as np
import pytest

from src.config import Tolerances
from src.eikonal import as_field
from src.errors import EmptySetError
from src.scenarios import cap_pole, scenario
from src.viscosity_checks import (
    LevelSetEvaluator,
    MinStabilityEvaluator,
    ResidualEvaluator,
    SemiconcavityEvaluator,
    SingularEvaluator,
    c1_candidate,
    eikonal_residual,
    levelset_distance_check,
    levelset_reconstruct,
    min_combine,
    min_laws_hold,
    sample_segments,
    semiconcavity_probe,
    singular_set,
)


@pytest.fixture
def fields(flat, flat_center, coords):
    """Named fields on the flat chart, reliable off the truncation boundary."""
    inside = ~flat.boundary
    x, y = coords[:, 0], coords[:, 1]

    def make(values):
        return as_field(flat, values, reliable=inside, base_node=flat_center)

    return {
        "minus_x": make(-x),
        "plus_x": make(x),
        "minus_abs_x": make(-np.abs(x)),
        "abs_x": make(np.abs(x)),
        "kink": make(np.maximum(-x, -y)),
        "shallow_abs_x": make(0.45 * np.abs(x)),
        "cone": make(np.array(flat.distances_from(flat_center))),
    }


def test_linear_field_passes_residual(flat, fields):
    result = ResidualEvaluator().evaluate(flat, fields["minus_x"], "minus_x")
    assert result.passed
    assert result.check == "eikonal_residual[minus_x]"
    assert result.metric <= 1e-9
    assert result.details["frac_regular"] == pytest.approx(1.0)


def test_min_of_linear_fields_is_a_solution(flat, fields):
    report = eikonal_residual(flat, fields["minus_abs_x"])
    assert report.max_abs_dev <= 1e-9
    assert not report.violations
    assert report.singular_nodes
    assert ResidualEvaluator().evaluate(flat, fields["minus_abs_x"]).passed


@pytest.mark.parametrize("name", ["abs_x", "cone", "kink"])
def test_controls_fail_residual(flat, fields, name):
    result = ResidualEvaluator().evaluate(flat, fields[name], name)
    assert not result.passed
    assert result.details["violations"] > 0
    assert result.offending_nodes


def test_semiconcavity(flat, fields):
    tol = Tolerances.for_manifold(flat)
    evaluator = SemiconcavityEvaluator(tol)
    assert evaluator.evaluate(flat, fields["minus_x"]).passed
    assert evaluator.evaluate(flat, fields["minus_abs_x"]).passed
    failing = evaluator.evaluate(flat, fields["abs_x"], "abs_x")
    assert not failing.passed
    # The midpoint test across the valley gives C = 1/h exactly.
    assert failing.metric == pytest.approx(1.0 / flat.spacing)
    assert failing.metric >= 1.0 / (2.0 * flat.spacing)
    assert failing.tolerance == pytest.approx(10 * flat.stencil_bound)
    assert not evaluator.evaluate(flat, fields["cone"]).passed
    assert not evaluator.evaluate(flat, fields["minus_abs_x"], negate=True).passed
    assert evaluator.evaluate(flat, fields["minus_abs_x"], negate=True).check == "semiconcavity_neg"


def test_semiconcavity_bound_does_not_scale_with_resolution(flat, fields):
    # A convex kink of slope jump 0.9 gives C = 0.45/h, far above 10 eps.
    result = SemiconcavityEvaluator().evaluate(flat, fields["shallow_abs_x"], "shallow")
    assert not result.passed
    assert result.metric == pytest.approx(0.45 / flat.spacing)
    assert result.tolerance == pytest.approx(10 * flat.stencil_bound)
    assert result.offending_nodes


def test_tilted_kink_fails_semiconcavity(flat, fields):
    C = semiconcavity_probe(flat, fields["kink"])
    assert C * flat.spacing == pytest.approx(0.5)
    assert not SemiconcavityEvaluator().evaluate(flat, fields["kink"]).passed


def test_segment_lengths(flat):
    segments = sample_segments(flat)
    h = flat.spacing
    assert len(segments) > 0
    assert np.all(segments.length >= 2 * h - 1e-12)
    assert np.all(segments.length <= 2 * math.sqrt(5) * h + 1e-12)
    assert segments.clearance(flat).min() == np.inf


def test_min_stability(flat, fields):
    result = MinStabilityEvaluator().evaluate(flat, fields["minus_x"], fields["plus_x"], "pair")
    assert result.passed
    assert result.details["laws_exact"]
    assert min_laws_hold(fields["minus_x"], fields["plus_x"], fields["kink"])


def test_min_combine(flat, fields):
    f = min_combine(fields["minus_x"], fields["plus_x"])
    np.testing.assert_array_equal(f.values, fields["minus_abs_x"].values)
    assert f.source == "min-combination"
    disjoint = as_field(flat, np.zeros(flat.n_nodes), reliable=flat.boundary)
    with pytest.raises(EmptySetError):
        min_combine(fields["minus_x"], disjoint)


def test_levelset_reconstruct_linear_field(flat, flat_center, coords):
    f = as_field(flat, -coords[:, 0], base_node=flat_center)
    g = levelset_reconstruct(flat, f, flat_center, 0.5)
    assert g.source == "reconstruction"
    assert g.metadata["deviation"] <= 1e-9
    assert g[flat_center] == 0.0


def test_levelset_reconstruct_errors(flat, flat_center, fields):
    with pytest.raises(ValueError):
        levelset_reconstruct(flat, fields["minus_x"], flat_center, 0.0)
    with pytest.raises(EmptySetError, match="increase window"):
        levelset_reconstruct(flat, fields["minus_x"], flat_center, 100.0)


def test_levelset_distance_check(flat, flat_center, coords):
    f = as_field(flat, -coords[:, 0], base_node=flat_center)
    dev = levelset_distance_check(flat, f, 0.0, -0.5)
    assert dev <= Tolerances.for_manifold(flat).check_tol(0.0, -0.5)
    with pytest.raises(ValueError):
        levelset_distance_check(flat, f, -0.5, 0.0)


def test_levelset_evaluator_on_linear_field(flat, flat_center, coords):
    f = as_field(flat, -coords[:, 0], base_node=flat_center)
    evaluator = LevelSetEvaluator()
    reconstruction = evaluator.evaluate_reconstruction(flat, f, flat_center, depths=[0.4, 0.8])
    assert reconstruction.passed, reconstruction.to_text()
    assert max(reconstruction.details["deviations"]) <= 1e-9
    identity = evaluator.evaluate_distance_identity(flat, f, flat_center, pairs=[(0.0, -0.5)])
    assert identity.passed, identity.to_text()


def test_reconstruction_of_control_fails(flat, flat_center, fields):
    result = LevelSetEvaluator().evaluate_reconstruction(flat, fields["abs_x"], flat_center,
                                                         depths=[0.4])
    assert not result.passed
    assert "error" in result.details


def test_singular_set(flat, fields):
    sing = singular_set(flat, fields["minus_abs_x"])
    column = flat.coords[sing.nodes, 0]
    assert len(sing) > 0
    np.testing.assert_allclose(column, 0.0, atol=1e-12)
    node = int(sing.nodes[0])
    assert node in sing
    assert sing.witnesses[node][2] == pytest.approx(180.0)
    assert len(singular_set(flat, fields["minus_x"])) == 0


def test_singular_evaluator(flat, fields):
    evaluator = SingularEvaluator()
    assert evaluator.evaluate(flat, fields["minus_abs_x"], label="valley").passed
    assert evaluator.evaluate(flat, fields["minus_x"], expect_nonempty=False).passed
    region = flat.coords[:, 0] > 0.5
    assert not evaluator.evaluate(flat, fields["minus_abs_x"], region).passed


def test_c1_candidate(flat, fields):
    assert c1_candidate(flat, fields["minus_x"])
    assert not c1_candidate(flat, fields["minus_abs_x"])


def test_smooth_field_between_stencil_directions_is_regular(flat, flat_center, coords):
    # Axis and diagonal both descend at rate cos(22.5 deg) > 1 - grad_tol.
    theta = math.radians(22.5)
    f = as_field(flat, -(coords[:, 0] * math.cos(theta) + coords[:, 1] * math.sin(theta)),
                 reliable=~flat.boundary, base_node=flat_center)
    assert len(singular_set(flat, f)) == 0


def test_cap_pole_is_singular():
    M, inst = scenario("capped_half_cylinder", window=3.0)
    d = M.distances_from(M.chart("tube").nodes[-1])
    f = as_field(M, d - d[inst.x0], base_node=inst.x0)
    sing = singular_set(M, f)
    pole = cap_pole(M)
    assert pole in sing
    assert sing.witnesses[pole][2] == pytest.approx(180.0)
