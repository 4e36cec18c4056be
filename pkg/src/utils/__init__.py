from utils.settings import EnvSetting, Setting, resolveDevice
from utils.config_file import loadYamlDocument, checkKeys
from utils.model_spec import Family, ModelSpec
from utils.bn_stats import BNStats
from utils.train_config import TrainConfig
from utils.zoo_entry import ModelZooEntry
from utils.image_splits import ImageSplits
from utils.mix_mask import MixMask
from utils.synthesis_config import BnLossKind, SynthesisConfig
from utils.synthesized_dataset import SynthesizedDataset
from utils.constraint_system import ConstraintSystem
from utils.quant_spec import Granularity, QuantSpec
from utils.prune_spec import PruneSpec
from utils.rounding_state import RoundingState
from utils.compression_config import DistillConfig, PruneConfig, PtqConfig, QatConfig, TaskConfig
from utils.compression_report import CompressionReport
from utils.results_table import ResultsTable
from utils.experiment_plan import ExperimentPlan
