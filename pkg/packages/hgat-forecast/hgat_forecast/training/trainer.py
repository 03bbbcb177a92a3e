"""Training loop for the three regimes.

Every optimizer step runs a batch of scenes through independent
snapshots of the parameter store, sums their gradients in batch order
and applies one Adam update. The reduction order never depends on the
number of worker threads, so a run is reproducible from its seed.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Union

import numpy as np
from hgat_common.logger import logger, run_log
from hgat_forecast.exceptions import TrainingConfigError
from hgat_forecast.graph.builder import assemble_scene_graph
from hgat_forecast.graph.relations import check_removable
from hgat_forecast.graph.tables import HeteroGraph
from hgat_forecast.model import BASE_PREFIXES, REFINEMENT_PREFIX, HgatForecaster
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.optim import AdamState, adam_step, learning_rate
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.numerics.tensor import Tape
from hgat_forecast.scenario.types import Scenario
from hgat_forecast.schemas.options import ModelOptions, Regime, TrainingOptions
from hgat_forecast.training.checkpoint import load_base, save_checkpoint
from hgat_forecast.training.losses import LossBreakdown, total_loss

LOSS_COLUMNS = ("step", "L_traj", "L_conf", "total")
PathLike = Union[str, Path]


@dataclass
class StepLoss:
    step: int
    traj: float
    conf: float
    total: float

    def row(self) -> List:
        return [self.step, repr(self.traj), repr(self.conf), repr(self.total)]


@dataclass
class TrainingResult:
    model: HgatForecaster
    regime: Regime
    losses: List[StepLoss] = field(default_factory=list)
    checkpoints: List[Path] = field(default_factory=list)

    @property
    def final_checkpoint(self) -> Optional[Path]:
        return self.checkpoints[-1] if self.checkpoints else None


@dataclass
class _SceneResult:
    grads: Dict[str, np.ndarray]
    buffers: Dict[str, np.ndarray]
    loss: LossBreakdown
    total: float


def loss_log_path(checkpoint_path: PathLike) -> Path:
    path = Path(checkpoint_path)
    return path.with_name(path.name + ".loss.csv")


def run_log_path(checkpoint_path: PathLike) -> Path:
    path = Path(checkpoint_path)
    return path.with_name(path.name + ".log")


def build_scene_graphs(
    scenarios: Sequence[Scenario],
    options: ModelOptions,
    removed_relations: Sequence[str] = (),
) -> List[HeteroGraph]:
    """Scene graphs of ``scenarios``; every scenario must match the
    model's timestep layout and carry a ground-truth future."""
    if not scenarios:
        raise TrainingConfigError("the dataset is empty")
    removed = check_removable(removed_relations)
    graphs = []
    for scenario in scenarios:
        if scenario.num_observed != options.t_obs or scenario.num_future != options.t_fut:
            raise TrainingConfigError(
                f"scenario {scenario.id} has {scenario.num_observed}/{scenario.num_future}"
                f" observed/future steps, the model expects {options.t_obs}/{options.t_fut}"
            )
        graphs.append(assemble_scene_graph(scenario, options.graph, removed))
    return graphs


def batches(count: int, batch_size: int, seed: int) -> Iterator[List[int]]:
    """Endless stream of scene index batches; each epoch is a fresh
    seeded permutation."""
    rng = np.random.default_rng(seed)
    batch_size = min(batch_size, count)
    while True:
        order = rng.permutation(count)
        for start in range(0, count - batch_size + 1, batch_size):
            yield [int(i) for i in order[start : start + batch_size]]


class Trainer:
    """Runs one training regime on a fixed set of scene graphs.

    none:   proposals only, refinement weights frozen at init.
    frozen: base network loaded from ``base_checkpoint`` and frozen,
            refinement trained on the refined output.
    e2e:    everything trained on the refined output, plus the weighted
            proposal loss when ``proposal_loss`` is on.
    """

    def __init__(
        self,
        model: HgatForecaster,
        training: TrainingOptions,
        base_checkpoint: Optional[PathLike] = None,
    ):
        self.model = model
        self.training = training
        self.regime = Regime(training.regime)
        self.state = AdamState()

        frozen: tuple = ()
        if self.regime == Regime.none:
            frozen = (REFINEMENT_PREFIX,)
        elif self.regime == Regime.frozen:
            if base_checkpoint is None:
                raise TrainingConfigError("the frozen regime needs a pretrained base checkpoint")
            load_base(model, base_checkpoint)
            frozen = BASE_PREFIXES
        elif base_checkpoint is not None:
            load_base(model, base_checkpoint)
        model.store.freeze(frozen)
        logger.info(
            "training regime {regime}: {n} trainable tensors, frozen {frozen}",
            regime=self.regime.value,
            n=len(model.store.trainable()),
            frozen=list(frozen),
        )

    @property
    def refine(self) -> bool:
        return self.regime != Regime.none

    def scene_loss(self, ps: ParameterStore, graph: HeteroGraph) -> LossBreakdown:
        if graph.agents.future is None:
            raise TrainingConfigError(f"scenario {graph.scenario_id} has no ground-truth future")
        t = self.training
        out = self.model.forward(ps, graph, refine=self.refine)
        loss = total_loss(
            out.final, graph.agents.future, graph.agents.categories, t.importance, t.traj_weight, t.margin
        )
        if self.regime == Regime.e2e and t.proposal_loss and t.proposal_loss_weight > 0:
            auxiliary = total_loss(
                out.proposals, graph.agents.future, graph.agents.categories, t.importance, t.traj_weight, t.margin
            )
            loss.total = ops.add(loss.total, ops.scale(auxiliary.total, t.proposal_loss_weight))
        return loss

    def _run_scene(self, graph: HeteroGraph) -> _SceneResult:
        ps = self.model.store.snapshot(training=True)
        with Tape() as tape:
            loss = self.scene_loss(ps, graph)
            tape.backward(loss.total)
        return _SceneResult(ps.grads(), ps.buffers(), loss, loss.total.item())

    def _run_batch(self, graphs: Sequence[HeteroGraph], pool: Optional[ThreadPoolExecutor]) -> List[_SceneResult]:
        if pool is None:
            return [self._run_scene(g) for g in graphs]
        return list(pool.map(self._run_scene, graphs))

    def _reduce(self, results: List[_SceneResult]) -> Dict[str, np.ndarray]:
        store = self.model.store
        scale = 1.0 / len(results)
        grads = {}
        for name in store.trainable():
            total = results[0].grads[name].copy()
            for result in results[1:]:
                total += result.grads[name]
            grads[name] = total * scale
        for name in store.buffer_names():
            if store.is_frozen(name):
                continue
            total = results[0].buffers[name].copy()
            for result in results[1:]:
                total += result.buffers[name]
            store.buffer(name)[...] = total * scale
        return grads

    def step(self, step: int, graphs: Sequence[HeteroGraph], pool: Optional[ThreadPoolExecutor] = None) -> StepLoss:
        t = self.training
        results = self._run_batch(graphs, pool)
        grads = self._reduce(results)
        lr = learning_rate(t.learning_rate, step, t.steps, t.lr_schedule)
        adam_step(
            self.model.store,
            grads,
            self.state,
            lr,
            t.adam_beta1,
            t.adam_beta2,
            t.adam_eps,
            names=self.model.store.trainable(),
        )
        n = len(results)
        record = StepLoss(
            step=step,
            traj=sum(r.loss.weighted_traj for r in results) / n,
            conf=sum(r.loss.weighted_conf for r in results) / n,
            total=sum(r.total for r in results) / n,
        )
        if step == 1 or step % t.log_every == 0 or step == t.steps:
            logger.info(
                "step {step}/{steps}: L_traj={traj:.4f} L_conf={conf:.4f} total={total:.4f} lr={lr:.2e}",
                step=step,
                steps=t.steps,
                traj=record.traj,
                conf=record.conf,
                total=record.total,
                lr=lr,
            )
        return record

    def fit(
        self,
        graphs: Sequence[HeteroGraph],
        checkpoint_path: Optional[PathLike] = None,
    ) -> TrainingResult:
        t = self.training
        if not graphs:
            raise TrainingConfigError("the training dataset is empty")
        result = TrainingResult(self.model, self.regime)
        log_file = None
        writer = None
        if checkpoint_path is not None:
            log_path = loss_log_path(checkpoint_path)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            log_file = open(log_path, "w", newline="")
            writer = csv.writer(log_file)
            writer.writerow(LOSS_COLUMNS)

        pool = ThreadPoolExecutor(max_workers=t.threads) if t.threads > 1 else None
        schedule = batches(len(graphs), t.batch_scenes, t.seed)
        try:
            for step in range(1, t.steps + 1):
                batch = [graphs[i] for i in next(schedule)]
                record = self.step(step, batch, pool)
                result.losses.append(record)
                if writer is not None:
                    writer.writerow(record.row())
                if checkpoint_path is not None and (step % t.checkpoint_every == 0 or step == t.steps):
                    result.checkpoints.append(self.save(checkpoint_path, step))
        finally:
            if pool is not None:
                pool.shutdown()
            if log_file is not None:
                log_file.close()
        return result

    def save(self, path: PathLike, step: int) -> Path:
        return save_checkpoint(
            path,
            self.model.store,
            self.model.options,
            self.regime,
            step,
            self.training.removed_relations,
        )


def train(
    scenarios: Sequence[Scenario],
    options: ModelOptions,
    training: TrainingOptions,
    checkpoint_path: Optional[PathLike] = None,
    base_checkpoint: Optional[PathLike] = None,
) -> TrainingResult:
    """Build the graphs of ``scenarios`` and train a fresh network seeded
    with ``training.seed``. With a checkpoint path the run's records are
    also written to ``<checkpoint>.log``."""
    if checkpoint_path is not None:
        with run_log(run_log_path(checkpoint_path)):
            return _train(scenarios, options, training, checkpoint_path, base_checkpoint)
    return _train(scenarios, options, training, checkpoint_path, base_checkpoint)


def _train(
    scenarios: Sequence[Scenario],
    options: ModelOptions,
    training: TrainingOptions,
    checkpoint_path: Optional[PathLike],
    base_checkpoint: Optional[PathLike],
) -> TrainingResult:
    graphs = build_scene_graphs(scenarios, options, training.removed_relations)
    model = HgatForecaster(options, seed=training.seed)
    trainer = Trainer(model, training, base_checkpoint)
    logger.info(
        "training on {n} scenes for {steps} steps ({batch} scenes per step, {threads} threads)",
        n=len(graphs),
        steps=training.steps,
        batch=training.batch_scenes,
        threads=training.threads,
    )
    return trainer.fit(graphs, checkpoint_path)
