from src.models.run_models import ModelSpec
from typing import Dict

VERSION = "0.1.0"

DEFAULT_PRECISION = 60
DEFAULT_SEED = 2024
DEFAULT_DATABASE_URL = "sqlite:///hurwitz_cache.db"
DEFAULT_LOG_LEVEL = "INFO"

# Ranges of the curated verification suite
SUITE_G_MAX = 1
SUITE_N_MAX = 2
SUITE_R_MAX = 3
SUITE_K_MAX = 5

# Curated models; polynomials lowest degree first
_SUITE: Dict[str, ModelSpec] = {
    "simple": ModelSpec(family="I", name="simple", P1=[0, 1], R1=[0, 1]),
    "monotone": ModelSpec(family="I", name="monotone", P3=[1, -1]),
    "strictly_monotone": ModelSpec(family="I", name="strictly_monotone", P2=[1, 1]),
    "dessins": ModelSpec(family="I", name="dessins", P2=[1, 1], R1=[0, 0, 1]),
    "hypermaps": ModelSpec(family="I", name="hypermaps", P2=[1, 3, 2]),
    "bms": ModelSpec(family="I", name="bms", P2=[1, 2, 1]),
    "r_spin": ModelSpec(family="I", name="r_spin", P1=[0, 0, 0, 1]),
    "orbifold": ModelSpec(family="I", name="orbifold", P1=[0, 1], R1=[0, 0, 1]),
    "usual_double": ModelSpec(family="I", name="usual_double", P1=[0, 1], R1=[0, 1, 1]),
    "cubic_branch": ModelSpec(family="I", name="cubic_branch", P1=[0, 1], R1=[0, 2, "-0.5"]),
    "ooguri_vafa": ModelSpec(family="II", name="ooguri_vafa", alpha="1/2", R1=[0], R3=[1, "-1/2"], R4=[1, -2]),
}

# ψ̂ = ψ = y³ without the S(ħ∂_y) deformation; its H_{g,n} leave Θ
UNDEFORMED_R_SPIN = ModelSpec(family="raw", name="r_spin_undeformed", psi=[0, 0, 0, 1])

# Models whose undeformed variant must fail the projection test
PROJECTION_CONTROLS = ("r_spin",)


def suite_models() -> Dict[str, ModelSpec]:
    return dict(_SUITE)
