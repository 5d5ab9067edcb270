import pytest
from pydantic import ValidationError

from core.config.run_config import RunConfig
from core.config.settings import Settings
from core.exceptions.custom_exceptions import ConfigurationException
from domain.value_objects.index_field import SumProfile

from conftest import CONFIG_DIR


@pytest.mark.parametrize("name", ["default.yaml", "decoupled.yaml", "gapped.yaml"])
def test_shipped_configs_load(name):
    config = RunConfig.from_yaml(CONFIG_DIR / name)
    assert config.geometry.height == pytest.approx(0.54)
    assert config.cell_geometry().strip_height == pytest.approx(0.54)


def test_default_config_builds_two_term_direction():
    config = RunConfig.from_yaml(CONFIG_DIR / "default.yaml")
    direction = config.index_field().direction
    assert isinstance(direction, SumProfile)
    assert len(direction.terms) == 2
    assert config.search.beta_variant == "squared"
    assert config.checks.limit_eps_list == [4e-2, 1e-2, 2.5e-3]


def test_missing_file_is_configuration_error(tmp_path):
    with pytest.raises(ConfigurationException):
        RunConfig.from_yaml(tmp_path / "nope.yaml")


def test_malformed_yaml_is_configuration_error(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("geometry: [1, 2\n", encoding="utf-8")
    with pytest.raises(ConfigurationException):
        RunConfig.from_yaml(path)


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigurationException):
        RunConfig.from_dict({"geometry": {"height": 0.54, "width": 1.0}})


def test_eps_list_cannot_contain_zero():
    with pytest.raises(ConfigurationException):
        RunConfig.from_dict({"perturbation": {"eps_list": [1e-2, 0.0]}})


def test_mesh_scale_above_cell_is_rejected():
    with pytest.raises(ConfigurationException):
        RunConfig.from_dict({"geometry": {"height": 0.3}, "discretization": {"h": 0.4}})


def test_config_hash_is_stable_and_sensitive():
    a = RunConfig.from_dict({})
    b = RunConfig.from_dict({"discretization": {"h": 0.05}})
    c = RunConfig.from_dict({"discretization": {"h": 0.1}})
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()


def test_obstacle_radius_reaching_half_height_is_domain_error():
    from core.exceptions.custom_exceptions import UnmeshableGeometryException
    from application.services.mesh_service import MeshService

    config = RunConfig.from_dict(
        {"geometry": {"height": 0.54, "obstacles": [{"center": [0.5, 0.27], "radius": 0.3}]}}
    )
    with pytest.raises(UnmeshableGeometryException):
        MeshService().build_mesh(config.cell_geometry())


def test_settings_validators():
    with pytest.raises(ValidationError):
        Settings(max_workers=0)
    with pytest.raises(ValidationError):
        Settings(contour_nodes=0)
    assert Settings(max_workers=2).max_workers == 2
