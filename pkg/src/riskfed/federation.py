"""Round orchestration: participation, dropout, client work, aggregation.

One experiment is fully determined by its configuration, including every
random stream: data generation, partitioning, weight initialization, and
the per-round participation and dropout draws all derive from the single
experiment seed through fixed stream tags. Per-client dropout draws are
seeded by (seed, round, client), so scheduling and worker count can never
change an outcome.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, objective, sensitivity
from .data import LabeledDataset, generate_synthetic, load_csv, temporal_split
from .errors import ConfigurationError, ExperimentError
from .metrics import RoundRecord
from .model import init_weights
from .partition import PartitionPlan, exdir_partition

ALGORITHMS = ("fral_cse", "fedavg", "fedprox")

# stream tags keep derived generators disjoint
_DATA_STREAM = 1
_PARTITION_STREAM = 2
_INIT_STREAM = 3
_PARTICIPATION_STREAM = 4
_DROPOUT_STREAM = 5


def _child_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, np.uint64)[0])


@dataclass
class ExperimentConfig:
    """All knobs of one experiment; defaults resolve in __post_init__."""

    algorithm: str
    clients: int
    samples_per_client: int
    rounds: int
    seed: int
    d: int = 130
    num_sectors: int | None = None
    signal: float = 1.0
    data_csv: str = ""
    train_fraction: float = 0.8
    labels_per_client: int = 1
    dirichlet_alpha: float = 1.0
    beta: float = 0.8
    c: float = 1.0
    epsilon: float = sensitivity.DEFAULT_EPSILON
    participation_rate: float = 1.0
    dropout_rate: float = 0.0
    local_epochs: int | None = None
    local_lr: float = 0.05
    mu: float = 0.0
    workers: int | None = None

    def __post_init__(self):
        if self.num_sectors is None:
            self.num_sectors = min(self.clients, 5)
        if self.local_epochs is None:
            self.local_epochs = 0 if self.algorithm == "fral_cse" else 1
        if self.workers is None:
            self.workers = os.cpu_count() or 1

    def validate(self) -> None:
        checks = [
            (self.algorithm in ALGORITHMS, "algorithm", f"one of {ALGORITHMS}"),
            (self.clients >= 1, "clients", ">= 1"),
            (self.samples_per_client >= 1, "samples_per_client", ">= 1"),
            (self.rounds >= 0, "rounds", ">= 0"),
            (self.seed >= 0, "seed", ">= 0"),
            (self.d >= 2, "d", ">= 2"),
            (self.num_sectors >= 1, "num_sectors", ">= 1"),
            (self.signal > 0, "signal", "> 0"),
            (0 < self.train_fraction < 1, "train_fraction", "in (0, 1)"),
            (self.labels_per_client >= 1, "C", ">= 1"),
            (self.dirichlet_alpha > 0, "alpha", "> 0"),
            (0 < self.beta < 1, "beta", "in (0, 1)"),
            (self.c >= 0, "c", ">= 0"),
            (self.epsilon >= 0, "epsilon", ">= 0"),
            (0 < self.participation_rate <= 1, "participation_rate", "in (0, 1]"),
            (0 <= self.dropout_rate < 1, "dropout_rate", "in [0, 1)"),
            (self.local_epochs >= 0, "local_epochs", ">= 0"),
            (self.local_lr > 0, "local_lr", "> 0"),
            (self.mu >= 0, "mu", ">= 0"),
            (self.workers >= 1, "workers", ">= 1"),
        ]
        for ok, key, expected in checks:
            if not ok:
                raise ConfigurationError(
                    f"{key} = {getattr(self, _FIELD_BY_KEY.get(key, key))!r} "
                    f"out of range, expected {expected}"
                )
        if self.mu != 0.0 and self.algorithm != "fedprox":
            raise ConfigurationError("mu applies to the fedprox algorithm only")


_FIELD_BY_KEY = {"C": "labels_per_client", "alpha": "dirichlet_alpha"}


@dataclass(frozen=True)
class ClientState:
    """One simulated client: id plus its temporal train/test shards."""

    client_id: int
    train: LabeledDataset
    test: LabeledDataset


@dataclass
class ExperimentResult:
    """Everything a run produces beyond the metrics rows."""

    records: list
    initial_weights: np.ndarray
    final_weights: np.ndarray
    plan: PartitionPlan
    clients: list = field(default_factory=list)


def sample_participants(
    num_clients: int, rate: float, round_index: int, seed: int
) -> np.ndarray:
    """Uniformly draw max(1, floor(rate * K)) distinct client ids, sorted."""
    if not 0 < rate <= 1:
        raise ConfigurationError(f"participation rate must lie in (0, 1], got {rate}")
    count = max(1, int(np.floor(rate * num_clients)))
    rng = np.random.default_rng([seed, round_index, _PARTICIPATION_STREAM])
    return np.sort(rng.choice(num_clients, size=count, replace=False))


def apply_dropout(
    participants: np.ndarray, rate: float, round_index: int, seed: int
) -> np.ndarray:
    """Drop each participant independently with probability rate."""
    if not 0 <= rate < 1:
        raise ConfigurationError(f"dropout rate must lie in [0, 1), got {rate}")
    survivors = [
        int(cid)
        for cid in np.asarray(participants)
        if np.random.default_rng([seed, round_index, _DROPOUT_STREAM, int(cid)]).random()
        >= rate
    ]
    return np.asarray(sorted(survivors), dtype=np.int64)


class _TestUnion:
    """Concatenated test shards so accuracy is one pass per round."""

    def __init__(self, clients):
        self.features = np.ascontiguousarray(
            np.concatenate([c.test.features for c in clients])
        )
        self.labels = np.concatenate([c.test.labels for c in clients])


def _round_record(w_next, w_prev, clients, test_union, config, round_index,
                  participants, completed) -> RoundRecord:
    total = sum(len(c.train) for c in clients)
    train_loss = 0.0
    for c in clients:
        loss, _, _ = _kernels.local_loss_eval(
            c.train.features, c.train.labels, w_next, config.beta, config.c
        )
        train_loss += (len(c.train) / total) * loss
    scores = _kernels.linear_scores(test_union.features, w_next)
    acc = float(np.count_nonzero(test_union.labels * scores > 0.0))
    acc /= test_union.labels.size
    return RoundRecord(
        round=round_index,
        global_train_loss=train_loss,
        test_accuracy=acc,
        participants=int(participants),
        completed=int(completed),
        step_norm=float(np.linalg.norm(w_next - w_prev)),
    )


def _survivors(config, round_index):
    participants = sample_participants(
        config.clients, config.participation_rate, round_index, config.seed
    )
    survivors = apply_dropout(
        participants, config.dropout_rate, round_index, config.seed
    )
    return participants, survivors


def _map_clients(fn, survivors, workers):
    ids = [int(cid) for cid in survivors]
    if workers <= 1 or len(ids) <= 1:
        return [fn(cid) for cid in ids]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, ids))


def run_round_fral(w, clients, config, round_index, test_union=None):
    """One curvature-accelerated round: reports at the broadcast weights,
    aggregation, damped second-order central update."""
    test_union = test_union or _TestUnion(clients)
    participants, survivors = _survivors(config, round_index)
    if survivors.size == 0:
        record = _round_record(w, w, clients, test_union, config, round_index,
                               participants.size, 0)
        return w.copy(), record

    def evaluate(cid):
        shard = clients[cid].train
        report = sensitivity.client_report(w, shard, config.beta, config.c)
        if config.local_epochs > 0:
            # drift pass only; aggregation stays at the broadcast point
            _kernels.local_sgd(
                shard.features, shard.labels, w, w, config.beta, config.c,
                config.local_epochs, config.local_lr, 0.0,
            )
        return report

    reports = _map_clients(evaluate, survivors, config.workers)
    total_n = sum(r.n_k for r in reports)
    g = objective.aggregate_gradient(reports, total_n)
    s = sensitivity.aggregate_sensitivity(reports, config.c, total_n)
    w_next = sensitivity.central_update(w, s, g, config.epsilon)
    record = _round_record(w_next, w, clients, test_union, config, round_index,
                           participants.size, survivors.size)
    return w_next, record


def _run_round_averaging(w, clients, config, round_index, test_union, mu):
    test_union = test_union or _TestUnion(clients)
    participants, survivors = _survivors(config, round_index)
    if survivors.size == 0:
        record = _round_record(w, w, clients, test_union, config, round_index,
                               participants.size, 0)
        return w.copy(), record

    def train(cid):
        shard = clients[cid].train
        local_w = _kernels.local_sgd(
            shard.features, shard.labels, w, w, config.beta, config.c,
            config.local_epochs, config.local_lr, mu,
        )
        return len(shard), local_w

    results = _map_clients(train, survivors, config.workers)
    total_n = sum(n for n, _ in results)
    w_next = np.zeros_like(w)
    for n, local_w in results:
        w_next += (n / total_n) * local_w
    record = _round_record(w_next, w, clients, test_union, config, round_index,
                           participants.size, survivors.size)
    return w_next, record


def run_round_fedavg(w, clients, config, round_index, test_union=None):
    """One averaging round: local full-batch descent, size-weighted mean."""
    return _run_round_averaging(w, clients, config, round_index, test_union, 0.0)


def run_round_fedprox(w, clients, config, round_index, test_union=None):
    """Averaging round whose local steps add the proximal pull mu*(w - w_t)."""
    return _run_round_averaging(w, clients, config, round_index, test_union,
                                config.mu)


_ROUND_FN = {
    "fral_cse": run_round_fral,
    "fedavg": run_round_fedavg,
    "fedprox": run_round_fedprox,
}


def build_data_and_plan(config: ExperimentConfig):
    """Materialize the dataset (synthetic or CSV) and its partition plan."""
    if config.data_csv:
        data = load_csv(config.data_csv)
    else:
        data = generate_synthetic(
            n=config.clients * config.samples_per_client,
            d=config.d,
            num_sectors=config.num_sectors,
            seed=_child_seed(config.seed, _DATA_STREAM),
            signal=config.signal,
        )
    plan = exdir_partition(
        data,
        num_clients=config.clients,
        labels_per_client=config.labels_per_client,
        alpha=config.dirichlet_alpha,
        seed=_child_seed(config.seed, _PARTITION_STREAM),
    )
    return data, plan


def build_clients(config: ExperimentConfig):
    """Materialize data, partition, and per-client temporal splits."""
    data, plan = build_data_and_plan(config)
    clients = []
    for cid, idx in enumerate(plan.assignments):
        split = temporal_split(data.subset(idx), config.train_fraction)
        clients.append(ClientState(client_id=cid, train=split.train, test=split.test))
    return data, plan, clients


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run all rounds; deterministic per configuration."""
    config.validate()
    _, plan, clients = build_clients(config)
    dim = clients[0].train.dim
    w = init_weights(dim, _child_seed(config.seed, _INIT_STREAM))
    w0 = w.copy()
    test_union = _TestUnion(clients)
    round_fn = _ROUND_FN[config.algorithm]
    records = []
    for round_index in range(1, config.rounds + 1):
        try:
            w, record = round_fn(w, clients, config, round_index, test_union)
        except ExperimentError as exc:
            raise type(exc)(f"round {round_index}: {exc}") from exc
        records.append(record)
    return ExperimentResult(
        records=records,
        initial_weights=w0,
        final_weights=w,
        plan=plan,
        clients=clients,
    )
