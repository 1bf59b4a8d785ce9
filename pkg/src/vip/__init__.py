"""Variational information pursuit: sequential query selection that asks
interpretable queries in order of information gain, verified against an
exact oracle on small discrete models."""

from .queries import (AnswerDomain, AnswerVector, History, Posterior,
                      QuerySet, QuerySpec, StopReason, Trajectory,
                      append_answer, encode_answer, posterior_entropy,
                      to_masked_vector)
from .oracle import (DiscreteJointModel, conditional_mutual_information,
                     exact_posterior, ip_next_query, run_exact_ip,
                     sample_from_model)
from .networks import (ClassifierNet, QuerierNet, TemperatureSchedule,
                       load_checkpoint, serialize_checkpoint,
                       straight_through_select)
from .pursuit import StoppingRule, Strategy, batch_evaluate, run_pursuit
from .trainer import TrainConfig, TrainReport, train, vip_loss
from .data import Dataset, SyntheticSpec, generate_synthetic, load_csv, split
from .metrics import normalized_auc, oracle_agreement

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
