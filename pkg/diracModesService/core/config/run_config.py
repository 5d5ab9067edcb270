"""
Configuración de una corrida (archivo YAML único).
Validada con Pydantic; las secciones tienen valores por defecto y rechazan claves desconocidas.
"""
import hashlib
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.exceptions.custom_exceptions import ConfigurationException
from domain.value_objects.cell_geometry import CellGeometry
from domain.value_objects.index_field import (
    ConstantProfile,
    CosineProfile,
    IndexField,
    IndexProfile,
    PiecewiseRegionsProfile,
    Region,
    SumProfile,
)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# --- geometría ---

class ObstacleConfig(_Section):
    center: Tuple[float, float]
    radius: float = Field(gt=0)


class GeometryConfig(_Section):
    height: float = Field(default=0.54, gt=0)
    obstacles: List[ObstacleConfig] = Field(default_factory=list)


# --- perfiles de índice ---

class ConstantConfig(_Section):
    kind: Literal["constant"] = "constant"
    value: float = 1.0

    def build(self) -> IndexProfile:
        return ConstantProfile(self.value)


class CosineConfig(_Section):
    kind: Literal["cosine_profile"] = "cosine_profile"
    amplitude: float
    frequency: float = 1.0
    transverse_mode: int = Field(default=0, ge=0)
    window: Optional[Tuple[float, float]] = None

    def build(self) -> IndexProfile:
        return CosineProfile(self.amplitude, self.frequency, self.transverse_mode, self.window)


class RegionConfig(_Section):
    shape: Literal["disk", "rectangle"]
    value: float
    center: Optional[Tuple[float, float]] = None
    radius: Optional[float] = None
    x_range: Optional[Tuple[float, float]] = None
    y_range: Optional[Tuple[float, float]] = None

    def build(self) -> Region:
        try:
            return Region(self.shape, self.value, self.center, self.radius, self.x_range, self.y_range)
        except ValueError as error:
            raise ConfigurationException(f"Región inválida: {error}")


class PiecewiseConfig(_Section):
    kind: Literal["piecewise_regions"] = "piecewise_regions"
    background: float = 1.0
    regions: List[RegionConfig] = Field(default_factory=list)

    def build(self) -> IndexProfile:
        return PiecewiseRegionsProfile(self.background, tuple(r.build() for r in self.regions))


class SumConfig(_Section):
    kind: Literal["sum"] = "sum"
    terms: List["ProfileConfig"]

    def build(self) -> IndexProfile:
        return SumProfile(tuple(term.build() for term in self.terms))


ProfileConfig = Annotated[
    Union[ConstantConfig, CosineConfig, PiecewiseConfig, SumConfig],
    Field(discriminator="kind"),
]
SumConfig.model_rebuild()


class IndexConfig(_Section):
    base: ProfileConfig = Field(default_factory=ConstantConfig)
    direction: ProfileConfig = Field(default_factory=lambda: ConstantConfig(value=0.0))


# --- discretización y etapas ---

class DiscretizationConfig(_Section):
    h: float = Field(default=0.05, gt=0)


class DiracConfig(_Section):
    grid_points: int = Field(default=64, ge=8)
    n_bands: int = Field(default=8, ge=2)
    lambda_guess: Optional[float] = None
    degeneracy_rel_tol: float = Field(default=1e-6, gt=0)


class PerturbationConfig(_Section):
    eps_list: List[float] = Field(default_factory=lambda: [1e-2, 1e-3])
    p_factors: List[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 5.0])
    gate_fraction: float = Field(default=1e-2, gt=0)
    fold_offsets: List[float] = Field(default_factory=lambda: [1e-3, 3e-3, 1e-2, 3e-2])

    @field_validator("eps_list")
    @classmethod
    def check_eps(cls, v):
        if not v or any(e == 0 for e in v):
            raise ValueError("eps_list no puede estar vacía ni contener 0")
        return v


class ContoursConfig(_Section):
    piece_nodes: int = Field(default=64, ge=4)
    arc_nodes: int = Field(default=64, ge=4)
    radius_exponent: float = Field(default=1.0 / 3.0, gt=0, lt=1)
    tau_list: List[float] = Field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3])
    self_convergence_tol: float = Field(default=1e-8, gt=0)


class SearchConfig(_Section):
    c0: float = Field(default=0.5, gt=0, lt=1)
    moment_nodes: int = Field(default=64, ge=8)
    simplex_budget: int = Field(default=200, ge=10)
    newton_max_iter: int = Field(default=30, ge=1)
    sigma_rel_tol: float = Field(default=1e-8, gt=0)
    window_cells: int = Field(default=8, ge=2)
    scan_grid: int = Field(default=21, ge=3)
    beta_variant: Literal["squared", "linear"] = "squared"
    dirac_weight: float = 2.0


class SupercellConfig(_Section):
    n_cells_per_side: int = Field(default=16, ge=1)
    bc: Literal["neumann", "dirichlet"] = "neumann"
    n_eigs: int = Field(default=10, ge=1)
    window_factor: float = Field(default=1.0, gt=0)


class ChecksConfig(_Section):
    eps: float = 1e-2
    lambda_offsets: List[float] = Field(default_factory=lambda: [-0.25, 0.0, 0.25])
    h_samples_real: List[float] = Field(default_factory=lambda: [-0.8, -0.4, 0.0, 0.4, 0.8])
    h_samples_complex: List[Tuple[float, float]] = Field(
        default_factory=lambda: [(0.3, 0.3), (-0.3, 0.3), (0.3, -0.3), (-0.3, -0.3)]
    )
    limit_eps_list: List[float] = Field(default_factory=lambda: [4e-2, 1e-2, 2.5e-3])


class RunConfig(_Section):
    """Configuración completa de una corrida."""

    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    index: IndexConfig = Field(default_factory=IndexConfig)
    discretization: DiscretizationConfig = Field(default_factory=DiscretizationConfig)
    dirac: DiracConfig = Field(default_factory=DiracConfig)
    perturbation: PerturbationConfig = Field(default_factory=PerturbationConfig)
    contours: ContoursConfig = Field(default_factory=ContoursConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    supercell: SupercellConfig = Field(default_factory=SupercellConfig)
    checks: ChecksConfig = Field(default_factory=ChecksConfig)

    @model_validator(mode="after")
    def check_mesh_scale(self):
        if self.discretization.h > min(self.geometry.height, 0.5):
            raise ValueError("discretization.h excede la escala de la celda")
        return self

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "RunConfig":
        """
        Carga y valida un archivo YAML.

        Raises:
            ConfigurationException: archivo inexistente, YAML mal formado o valores inválidos
        """
        path = Path(path)
        if not path.exists():
            raise ConfigurationException(f"No existe el archivo de configuración: {path}")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as error:
            raise ConfigurationException(f"YAML mal formado en {path}: {error}")
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigurationException("La configuración debe ser un mapa de secciones")
        try:
            return cls.model_validate(data)
        except ValidationError as error:
            raise ConfigurationException(f"Configuración inválida: {error}")

    def canonical_dump(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=True, default_flow_style=False)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_dump().encode("utf-8")).hexdigest()

    # --- conversión a objetos de dominio ---

    def cell_geometry(self) -> CellGeometry:
        try:
            return CellGeometry.create(
                strip_height=self.geometry.height,
                mesh_target_h=self.discretization.h,
                obstacles=[(o.center[0], o.center[1], o.radius) for o in self.geometry.obstacles],
            )
        except ValueError as error:
            raise ConfigurationException(f"Geometría inválida: {error}")

    def index_field(self) -> IndexField:
        return IndexField.create(self.index.base.build(), self.index.direction.build())
