from loanbandit.config import Architecture as Architecture
from loanbandit.config import BaselineConfig as BaselineConfig
from loanbandit.config import DatasetSpec as DatasetSpec
from loanbandit.config import ExperimentConfig as ExperimentConfig
from loanbandit.config import PlotConfig as PlotConfig
from loanbandit.config import TrainConfig as TrainConfig
from loanbandit.env import BLPEnvironment as BLPEnvironment
from loanbandit.env import RegretLedger as RegretLedger
from loanbandit.harness import run_experiment as run_experiment
from loanbandit.harness import run_single as run_single
from loanbandit.policies import PlotPolicy as PlotPolicy
from loanbandit.policies import build_policy as build_policy
from loanbandit.scorer import LabeledDataset as LabeledDataset
from loanbandit.scorer import ScorerParams as ScorerParams
