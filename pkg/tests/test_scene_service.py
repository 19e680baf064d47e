import numpy as np
import pytest
from pydantic import ValidationError

from app.config.scene import SceneConfig
from app.exception.global_handler import ConfigurationError, ErrorCodes
from app.geometry.metric import TableRow
from app.service.export import render_obj, render_report, write_obj, write_report_json
from app.service.scene_service import evaluate, make_check


class TestSceneConfig:
    def test_defaults(self):
        config = SceneConfig(scene="polar-dual")
        assert config.depth == 3
        assert config.seed == 0
        assert config.preset == "cube"
        assert config.export == {"obj", "json"}

    def test_string_inputs_are_parsed(self):
        config = SceneConfig(scene="fuchsian-hyperbolic", base_point="0.1, 0.2,0.3", export="json")
        assert config.base_point == (0.1, 0.2, 0.3)
        assert config.export == {"json"}

    @pytest.mark.parametrize(
        "options",
        [
            {"scene": "nope"},
            {"scene": "polar-dual", "depth": 9},
            {"scene": "polar-dual", "depth": -1},
            {"scene": "rigidity", "preset": "hyperideal-cube"},
            {"scene": "parabolic-torus", "preset": "cube"},
            {"scene": "fuchsian-genus2", "base_point": "1,2"},
            {"scene": "polar-dual", "export": "obj,stl"},
            {"scene": "polar-dual", "colour": "red"},
        ],
    )
    def test_invalid_options(self, options):
        with pytest.raises(ValidationError):
            SceneConfig(**options)

    @pytest.mark.parametrize("scene", ["fuchsian-genus2", "parabolic-torus", "fuchsian-hyperbolic"])
    def test_orbit_scene_depth_leaves_room_for_stability_horizon(self, scene):
        # 궤도는 depth + 2 까지 열거되므로 상한 8 에서 6 이 최대
        assert SceneConfig(scene=scene, depth=6).depth == 6
        with pytest.raises(ValidationError, match="at most 6"):
            SceneConfig(scene=scene, depth=7)

    def test_non_orbit_scene_keeps_full_depth_range(self):
        assert SceneConfig(scene="polar-dual", depth=8).depth == 8

    def test_export_serialized_sorted_and_out_dir_excluded(self):
        dumped = SceneConfig(scene="polar-dual", export="obj,json").model_dump(mode="json")
        assert dumped["export"] == ["json", "obj"]
        assert "out_dir" not in dumped


def test_evaluate_relations():
    assert evaluate(1e-10, "<=", 1e-9)
    assert not evaluate(None, "<=", 1e-9)
    assert evaluate("-", "==", "-")
    assert make_check("x", np.float64(0.5), ">", 0.0).measured == 0.5


class TestScenes:
    def test_fuchsian_genus2(self, scene_service):
        report = scene_service.run(SceneConfig(scene="fuchsian-genus2", depth=3)).report
        assert report.passed, report.failures
        metric = report.metric
        assert (metric.genus, metric.K, metric.epsilon) == (2, 0, "-")
        assert report.measurements["cone_angle"] == pytest.approx(6.0 * np.pi, abs=1e-6)
        assert report.rows["metric"].row == 9
        assert report.equivariance.violations == []
        assert report.stability.stable_faces > 0

    def test_orbit_growth_measurements(self, scene_service):
        report = scene_service.run(SceneConfig(scene="fuchsian-genus2", depth=3)).report
        assert 1.5 <= np.log10(report.measurements["median_height_length_2"]) <= 2.5
        assert 2.5 <= np.log10(report.measurements["median_height_length_3"]) <= 3.5

    def test_parabolic_torus(self, scene_service):
        result = scene_service.run(SceneConfig(scene="parabolic-torus", depth=3))
        report = result.report
        assert report.passed, report.failures
        assert (report.metric.genus, report.metric.K) == (1, -1)
        assert len(report.metric.cone_points) == 1
        assert report.metric.cone_points[0].curvature == pytest.approx(report.metric.total_area, abs=1e-6)
        assert report.rows["metric"].row == 5
        assert report.rows["dual_metric"].row == 6
        assert report.measurements["horosphere_residual"] <= 1e-9

    @pytest.mark.parametrize("preset", ["cube", "tetrahedron", "octahedron", "random"])
    def test_polar_dual(self, scene_service, preset):
        result = scene_service.run(SceneConfig(scene="polar-dual", preset=preset))
        assert result.report.passed, result.report.failures
        assert {key: row.row for key, row in result.report.rows.items()} == {"metric": 1, "dual_metric": 4}
        assert [name for name, _ in result.meshes] == ["klein_polytope", "polar_dual"]

    @pytest.mark.parametrize("preset, kind, count", [("ideal-tetrahedron", "ideal", 4), ("hyperideal-cube", "hyperideal", 8)])
    def test_generalized(self, scene_service, preset, kind, count):
        report = scene_service.run(SceneConfig(scene="generalized", preset=preset)).report
        assert report.passed, report.failures
        assert sum(c.kind == kind for c in report.generalized) == count

    def test_overtruncated_cube_fails_with_error_code(self, scene_service):
        report = scene_service.run(SceneConfig(scene="generalized", preset="overtruncated-cube")).report
        assert not report.passed
        assert report.failures[0]["error_code"] == ErrorCodes.GEOM_NOT_GENERALIZED
        assert report.generalized is None

    @pytest.mark.parametrize("preset", ["tetrahedron", "octahedron", "cube", "random"])
    def test_rigidity(self, scene_service, preset):
        report = scene_service.run(SceneConfig(scene="rigidity", preset=preset)).report
        assert report.passed, report.failures
        assert report.rigidity.deformation_dim == 6
        assert report.projective.passed

    def test_fuchsian_hyperbolic(self, scene_service):
        report = scene_service.run(SceneConfig(scene="fuchsian-hyperbolic", depth=3)).report
        assert report.passed, report.failures
        assert isinstance(report.rows["metric"], TableRow)
        assert report.rows["metric"].row == 7
        assert report.rows["dual_metric"].row == 10

    def test_base_point_off_the_invariant_surface(self, scene_service):
        with pytest.raises(ConfigurationError):
            scene_service.run(SceneConfig(scene="fuchsian-genus2", base_point=(0.0, 0.0, 2.0)))
        with pytest.raises(ConfigurationError):
            scene_service.run(SceneConfig(scene="fuchsian-hyperbolic", base_point=(0.1, 0.0, 0.0)))


def test_timing_is_opt_in(settings, scene_service):
    config = SceneConfig(scene="rigidity", preset="tetrahedron")
    assert scene_service.run(config).report.timing_ms is None
    timed = type(scene_service)(settings.model_copy(update={"REPORT_TIMING": True}))
    assert timed.run(config).report.timing_ms is not None


def test_exports_are_deterministic(scene_service, tmp_path):
    config = SceneConfig(scene="polar-dual", preset="random", seed=7)
    first = scene_service.run(config)
    second = type(scene_service)().run(config)
    assert render_report(first.report) == render_report(second.report)
    assert render_obj(first.meshes) == render_obj(second.meshes)

    obj = write_obj(tmp_path / "surface.obj", first.meshes, comment="scene polar-dual")
    report = write_report_json(tmp_path / "report.json", first.report)
    lines = obj.read_text().splitlines()
    assert lines[0] == "# obj export"
    vertices = sum(line.startswith("v ") for line in lines)
    assert vertices == sum(mesh.n_vertices for _, mesh in first.meshes)
    indices = [int(i) for line in lines if line.startswith("f ") for i in line.split()[1:]]
    assert min(indices) == 1 and max(indices) == vertices
    assert '"scene": "polar-dual"' in report.read_text()
