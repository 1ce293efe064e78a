"""Random-forest regression with arbitrary bootstrap rates."""
from .dataset import Dataset
from .errors import DomainError
from .forest import (BR_GRID, PRESET_NAMES, PRESETS, ForestConfig, RandomForest, fit_forest,
                     oob_predictions, oob_r2, predict_forest, preset)
from .sampling import (BootstrapSpec, SeededRng, bootstrap_indices, derive, expected_distinct,
                       expected_distinct_limit)
from .tree import RegressionTree, TreeConfig, fit_tree, predict_tree

__version__ = "0.1.0"
