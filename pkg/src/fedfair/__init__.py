"""Federated-learning simulator with fairness-aware bias mitigation."""

from .data import Dataset, load_adult, load_compas, load_dataset, save_dataset, stratified_split
from .federation import Party, preprocess, run_round, run_training
from .harness import ExperimentConfig, ExperimentResult, run_baseline, run_experiment
from .metrics import FairnessReport, fairness_report, underestimation_index
from .model import LogisticModel, TrainConfig, train_local
from .partition import Partition, PartitionSpec, make_partition
from .reweighing import CountTable, WeightTable, local_reweigh, weights_from_counts

__version__ = "0.1.0"

__all__ = [
    "Dataset", "load_adult", "load_compas", "load_dataset", "save_dataset",
    "stratified_split", "Party", "preprocess", "run_round", "run_training",
    "ExperimentConfig", "ExperimentResult", "run_baseline", "run_experiment",
    "FairnessReport", "fairness_report", "underestimation_index",
    "LogisticModel", "TrainConfig", "train_local",
    "Partition", "PartitionSpec", "make_partition",
    "CountTable", "WeightTable", "local_reweigh", "weights_from_counts",
]
