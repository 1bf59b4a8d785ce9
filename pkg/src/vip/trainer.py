"""Two-phase training of the querier/classifier pair.

Phase 1 samples histories uniformly at random; phase 2 fine-tunes with
histories rolled out by the current querier, refreshing the rollout
policy every batch (an epoch-frequency override is available). Both use
Adam (AMSGrad) with cosine-annealed learning rate and a linearly annealed
selection temperature; SGD with momentum can be swapped in for phase 2.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import autodiff as ad
from .autodiff import AdamState, CosineLrSchedule, SgdState, Tensor
from .data import Dataset, split
from .errors import EmptyDataset, ShapeMismatch
from .networks import (ClassifierNet, QuerierNet, TemperatureSchedule,
                       differentiable_history_update, straight_through_select)
from .pursuit import Strategy, batch_evaluate
from .sampler import SamplerConfig, SamplerMode, sample_batch


@dataclass
class TrainConfig:
    epochs_initial: int = 500
    epochs_biased: int = 100
    batch_size: int = 128
    lr: float = 1e-4
    hidden: tuple[int, ...] = (512, 512)
    cosine_t_max: int = 50
    tau_start: float = 1.0
    tau_end: float = 0.2
    # phase-2 anneal floor; None reuses tau_end. Keeping the fine-tuning
    # temperature high leaves the selection surrogate spread over all
    # queries, which preserves the score ordering the first phase learned.
    tau_end_biased: float | None = None
    seed: int = 0
    # phase-2 optimizer: "adam" (default) or "sgd" (lr 1e-4, momentum 0.9)
    biased_optimizer: str = "adam"
    sgd_lr: float = 1e-4
    sgd_momentum: float = 0.9
    # 0 = refresh the rollout querier every batch; k > 0 = every k epochs
    rollout_refresh_epochs: int = 0
    validation_fraction: float = 0.1
    val_budget: int | None = None

    @classmethod
    def fast(cls, **overrides) -> "TrainConfig":
        """Desk-scale profile; the defaults above are the paper profile."""
        base = dict(epochs_initial=100, epochs_biased=50, batch_size=64,
                    cosine_t_max=100, hidden=(128, 128), lr=1e-3)
        base.update(overrides)
        return cls(**base)

    def to_json(self) -> str:
        doc = asdict(self)
        doc["hidden"] = list(self.hidden)
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "TrainConfig":
        doc = json.loads(text)
        if "hidden" in doc:
            doc["hidden"] = tuple(doc["hidden"])
        return cls(**doc)


@dataclass
class EpochRecord:
    phase: str
    epoch: int
    loss: float
    val_accuracy: float
    lr: float
    tau: float


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    wall_time: float = 0.0
    config: TrainConfig | None = None

    def losses(self) -> list[float]:
        return [e.loss for e in self.epochs]

    def to_json_lines(self) -> str:
        return "\n".join(json.dumps(asdict(e)) for e in self.epochs)


def vip_loss(answers, labels, classifier: ClassifierNet, querier: QuerierNet,
             history_values, history_mask, tau: float) -> Tensor:
    """Mean cross entropy after one differentiable query selection.

    answers/history_values are (m, |Q|) matrices; history_mask marks the
    already-sampled entries (not applied to the selection, matching the
    unconstrained training-time argmax).
    """
    answers = np.asarray(answers, dtype=np.float64)
    history_values = np.asarray(history_values, dtype=np.float64)
    if answers.shape != history_values.shape:
        raise ShapeMismatch("answers and histories must align")
    hist = Tensor(history_values)
    scores = querier.forward(hist)
    one_hot = straight_through_select(scores, tau)
    updated = differentiable_history_update(hist, one_hot, answers)
    logits = classifier.forward(updated)
    return ad.cross_entropy(logits, labels)


def _epoch_seed(base_seed: int, phase: int, epoch: int, batch: int) -> int:
    return int(np.random.SeedSequence(
        (base_seed, phase, epoch, batch)).generate_state(1)[0])


def train(dataset: Dataset, config: TrainConfig):
    """Run both phases; returns (classifier, querier, report)."""
    if len(dataset) == 0:
        raise EmptyDataset("training dataset is empty")
    if dataset.num_labels < 2:
        raise EmptyDataset("need at least 2 labels")

    num_queries = dataset.query_set.size
    rng = np.random.default_rng(config.seed)
    classifier = ClassifierNet(num_queries, dataset.num_labels,
                               hidden=config.hidden, rng=rng)
    querier = QuerierNet(num_queries, hidden=config.hidden, rng=rng)
    params = classifier.parameters() + querier.parameters()

    train_set, val_set = split(dataset, 1.0 - config.validation_fraction,
                               seed=config.seed)
    if len(train_set) == 0 or len(val_set) == 0:
        train_set = val_set = dataset
    val_budget = config.val_budget or min(num_queries, 10)

    report = TrainReport(config=config)
    start = time.monotonic()

    for phase_idx, (phase, epochs) in enumerate(
            [("initial", config.epochs_initial),
             ("biased", config.epochs_biased)]):
        if epochs == 0:
            continue
        mode = (SamplerMode.INITIAL_RANDOM if phase == "initial"
                else SamplerMode.BIASED)
        if phase == "biased" and config.biased_optimizer == "sgd":
            opt_state = SgdState(lr=config.sgd_lr, momentum=config.sgd_momentum)
            step = ad.sgd_step
        else:
            opt_state = AdamState(lr=config.lr, amsgrad=True)
            step = ad.adam_step
        lr_schedule = CosineLrSchedule(
            opt_state.lr, min(config.cosine_t_max, epochs))
        # temperature restarts at tau_start for each phase
        tau_end = config.tau_end
        if phase == "biased" and config.tau_end_biased is not None:
            tau_end = config.tau_end_biased
        tau_schedule = TemperatureSchedule(config.tau_start, tau_end, epochs)
        shuffle_rng = np.random.default_rng(
            np.random.SeedSequence((config.seed, phase_idx)))
        rollout_querier = querier

        for epoch in range(epochs):
            lr = lr_schedule.lr(epoch)
            tau = tau_schedule.tau(epoch)
            if (phase == "biased" and config.rollout_refresh_epochs > 0
                    and epoch % config.rollout_refresh_epochs == 0):
                rollout_querier = _snapshot(querier)
            perm = shuffle_rng.permutation(len(train_set))
            losses = []
            for b0 in range(0, len(perm), config.batch_size):
                idx = perm[b0:b0 + config.batch_size]
                xs = train_set.answers[idx]
                ys = train_set.labels[idx]
                sampler_cfg = SamplerConfig(
                    mode, _epoch_seed(config.seed, phase_idx, epoch, b0),
                    num_queries)
                hv, hm = sample_batch(
                    xs, sampler_cfg,
                    querier=(querier if config.rollout_refresh_epochs == 0
                             else rollout_querier)
                    if mode is SamplerMode.BIASED else None)
                loss = vip_loss(xs, ys, classifier, querier, hv, hm, tau)
                for p in params:
                    p.zero_grad()
                loss.backward()
                step(params, opt_state, lr)
                losses.append(float(loss.data))
            val_acc = batch_evaluate(
                val_set.answers, val_set.labels, Strategy.learned(querier),
                classifier, [val_budget])[0]
            report.epochs.append(EpochRecord(
                phase, epoch, float(np.mean(losses)), val_acc, lr, tau))

    report.wall_time = time.monotonic() - start
    return classifier, querier, report


def _snapshot(querier: QuerierNet) -> QuerierNet:
    copy = QuerierNet(querier.num_queries,
                      hidden=querier.layer_sizes[1:-1],
                      rng=np.random.default_rng(0))
    for dst, src in zip(copy.parameters(), querier.parameters()):
        dst.data = src.data.copy()
    return copy


def evaluate_loss(dataset: Dataset, classifier: ClassifierNet,
                  querier: QuerierNet, sampler_config: SamplerConfig,
                  tau: float = 1.0) -> float:
    """Mean vip_loss over the whole dataset, no gradients recorded."""
    hv, hm = sample_batch(dataset.answers, sampler_config,
                          querier=querier if sampler_config.mode
                          is SamplerMode.BIASED else None)
    total = 0.0
    for b0 in range(0, len(dataset), 512):
        sl = slice(b0, b0 + 512)
        loss = vip_loss(dataset.answers[sl], dataset.labels[sl], classifier,
                        querier, hv[sl], hm[sl], tau)
        total += float(loss.data) * len(dataset.labels[sl])
    return total / len(dataset)
