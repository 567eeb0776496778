# -*- coding: utf-8 -*-
"""
Executor de experimentos do dual learner.

Roda uma sequência de tarefas com FAME (ramo por valor: FAME-Q; ramo por
política: FAME-KL e FAME-WD) ou com os baselines Reset e Finetune, registra
curvas de aprendizado, decisões de warm-up, objetivos de integração e CF, e
grava CSVs e checkpoints de forma atômica. Também expõe as verificações de
oráculo, a agregação de métricas e as ablações.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

import config
import shared_state
from buffers import FastBuffer, MetaBuffer, MetaRecord, estimate_weights, record_meta
from distance import DivergenceSpec, cf_pi, cf_q
from errors import ConfigError, ContractViolation, EmptyBucketError
from fast_learner import (FastLearner, LearnerConfig, act_epsilon_greedy, bc_regularized_q_update,
                          gaussian_policy_update, td_update_inplace)
from file_handlers import carregar_checkpoint, ler_csv, limpar_nome_arquivo, salvar_checkpoint, salvar_csv
from mdp_core import (ContinuousEpisode, ContinuousTask, TabularMdp, TaskSequence, Transition, continuous_step,
                      discounted_visitation, greedy_policy, one_hot_policy, run_continuous_episode,
                      run_tabular_episode, sample_start, step)
from meta_learner import (MetaState, gaussian_nll_objective, integrate_policy_kl, integrate_policy_wd,
                          integrate_q_l2, integrate_softmax_kl, kl_objective, l2_objective, wd_objective)
from metrics import (LearningCurve, MetricReport, compute_report, forward_transfer, normalize_curves,
                     normalize_forgetting_across_methods, summarize_reports, summarize_values, uniform_grid,
                     warmup_selection_ratio)
from oracles import SUITES, OracleResult, run_suite
from tables import CategoricalPolicyTable, GaussianPolicyTable
from warmup import (FAST, META, RANDOM, WarmupDecision, apply_warmup, evaluate_candidates, forced_decision,
                    one_vs_all_test)

COLUNAS_CURVAS = ("run_id", "seed", "method", "task_index", "env_seed", "t", "p_raw", "p_norm", "learner")
COLUNAS_DECISOES = ("run_id", "seed", "method", "task_index", "env_seed", "chosen", "mode", "p_meta_fast",
                    "p_meta_random", "p_fast_random", "mean_meta", "mean_fast", "mean_random", "bc_enabled",
                    "eval_steps", "steps_used", "cf_fast", "cf_meta", "objective_before", "objective_after")
COLUNAS_RELATORIO = ("method", "metric", "mean", "stderr", "n")
COLUNAS_BUFFER = ("task_id", "state", "action")
COLUNAS_TABELA = ("method", "avg_perf", "ft", "forgetting", "forgetting_norm", "warmup_meta", "warmup_fast",
                  "warmup_random")

# Decisão fixa de warm-up dos baselines
WARMUP_BASELINE = {"Reset": RANDOM, "Finetune": FAST}
PARAMETROS_ABLACAO = ("bc_steps", "bc_lambda", "tail_size", "n_eval")


# ================== CONFIGURAÇÃO E REGISTRO ==================

@dataclass(frozen=True)
class RunConfig:
    """
    Configuração completa de uma execução. `tail_size` (N) igual a 0 é
    trocado por 2% de T. λ, L, α, ε e τ ficam em `learner`.
    """
    method: str
    sequence: TaskSequence
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    tail_size: int = 0
    n_eval: int = config.EPISODIOS_AVALIACAO_WARMUP
    eval_horizon: int = config.HORIZONTE_AVALIACAO_WARMUP
    alpha: float = config.ALPHA_TESTE
    warmup_mode: str = config.MODO_WARMUP_PADRAO
    value_integration: str = "kl"
    seed: int = 0
    output_dir: Optional[str] = None
    points_per_task: int = config.PONTOS_POR_TAREFA
    episodes_per_point: int = config.EPISODIOS_POR_PONTO
    episode_horizon: int = config.HORIZONTE_EPISODIO
    force_warmup: Optional[str] = None
    integrate: bool = True
    checkpoint: bool = False
    resume: bool = False
    fast_buffer_capacity: int = config.CAPACIDADE_FAST_BUFFER
    show_progress: bool = False

    def __post_init__(self) -> None:
        T = self.sequence.steps_per_task
        if self.tail_size == 0:
            object.__setattr__(self, "tail_size", max(1, round(config.FRACAO_META_BUFFER * T)))

        if self.method not in config.METODOS:
            raise ConfigError(f"Método desconhecido: {self.method}. Opções: {', '.join(config.METODOS)}")
        validos = config.METODOS_POR_VALOR if self.value_based else config.METODOS_POR_POLITICA
        if self.method not in validos:
            raise ConfigError(f"O método {self.method} não se aplica ao gerador '{self.sequence.generator}'.")
        if self.value_integration not in config.INTEGRACOES_POR_VALOR:
            raise ConfigError(f"Integração por valor desconhecida: {self.value_integration}.")
        if self.warmup_mode not in config.MODOS_WARMUP:
            raise ConfigError(f"Modo de warm-up desconhecido: {self.warmup_mode}.")
        if self.force_warmup not in (None, FAST, RANDOM):
            raise ConfigError("force_warmup aceita apenas Fast ou Random.")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("α deve estar em (0, 1).")
        if self.evaluates_candidates and self.n_eval < 2:
            raise ConfigError("O warm-up exige n_eval ≥ 2 episódios por candidato.")
        if min(self.points_per_task, self.episodes_per_point, self.episode_horizon, self.eval_horizon) < 1:
            raise ConfigError("Pontos, episódios e horizontes de avaliação devem ser ≥ 1.")
        if self.resume and not (self.checkpoint and self.output_dir):
            raise ConfigError("Retomar exige checkpoint habilitado e um diretório de saída.")

        try:
            self.learner.check_budget(T)
        except ContractViolation as e:
            raise ConfigError(str(e)) from e
        orcamento = self.eval_budget
        if not 1 <= self.tail_size <= T:
            raise ConfigError(f"N = {self.tail_size} deve estar em [1, T = {T}].")
        if self.learner.bc_steps + orcamento > T:
            raise ConfigError(f"L + passos de avaliação ({self.learner.bc_steps} + {orcamento}) excedem T = {T}.")
        if self.tail_size + orcamento > T:
            raise ConfigError(f"N + passos de avaliação ({self.tail_size} + {orcamento}) excedem T = {T}.")

    @property
    def value_based(self) -> bool:
        return self.sequence.generator == "gridworld"

    @property
    def is_fame(self) -> bool:
        return self.method.startswith("FAME")

    @property
    def evaluates_candidates(self) -> bool:
        return self.is_fame and self.force_warmup is None

    @property
    def eval_budget(self) -> int:
        """Máximo de passos que a avaliação dos candidatos pode consumir por tarefa."""
        return 3 * self.n_eval * self.eval_horizon if self.evaluates_candidates else 0

    @property
    def run_id(self) -> str:
        return limpar_nome_arquivo(f"{self.method}_seed{self.seed}")


@dataclass
class RunRecord:
    """Tudo que uma execução (método, semente) produz."""
    method: str
    seed: int
    run_id: str
    steps_per_task: int
    env_seeds: List[int]
    decisions: List[WarmupDecision] = field(default_factory=list)
    eval_steps: List[int] = field(default_factory=list)
    steps_used: List[int] = field(default_factory=list)
    objectives: List[Optional[Tuple[float, float]]] = field(default_factory=list)
    cf_fast: List[Optional[float]] = field(default_factory=list)
    cf_meta: List[Optional[float]] = field(default_factory=list)
    fast_snapshots: List[FastLearner] = field(default_factory=list)
    meta_snapshots: List[MetaState] = field(default_factory=list)
    fast_curve: Optional[LearningCurve] = None
    meta_curve: Optional[LearningCurve] = None
    report: Optional[MetricReport] = None
    meta_buffer: Optional[MetaBuffer] = None
    cancelled: bool = False

    @property
    def primary_curve(self) -> Optional[LearningCurve]:
        """Curva do meta learner no FAME, do fast learner nos baselines."""
        return self.meta_curve if self.meta_curve is not None else self.fast_curve


# ================== EXECUÇÃO ==================

def _escalar_nativo(valor: object) -> object:
    if isinstance(valor, np.generic):
        return valor.item()
    raise TypeError(f"Valor não serializável no checkpoint: {type(valor).__name__}")


def _json_para_array(valor: object) -> np.ndarray:
    return np.frombuffer(json.dumps(valor, default=_escalar_nativo).encode("utf-8"), dtype=np.uint8)


def _array_para_json(array: np.ndarray):
    return json.loads(np.asarray(array, dtype=np.uint8).tobytes().decode("utf-8"))


class _Execucao:
    """Laço comum aos dois ramos; as subclasses definem aprendiz, treino e integração."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.tarefas = cfg.sequence.build()
        self.K = cfg.sequence.n_tasks
        self.T = cfg.sequence.steps_per_task
        self.P = cfg.points_per_task
        self.rng = np.random.default_rng(cfg.seed)
        self.meta = MetaState()
        self.fast = self._aprendiz_inicial()
        self.fast_buffer = FastBuffer(cfg.fast_buffer_capacity)
        self.meta_buffer = self._meta_buffer_inicial()
        n_pontos = self.K * self.P + 1
        self.valores_fast = np.zeros((self.K, n_pontos))
        self.valores_meta: Dict[int, np.ndarray] = {}
        self._proximo_ponto = 1
        self.registro = RunRecord(cfg.method, cfg.seed, cfg.run_id, self.T,
                                  [entrada.seed for entrada in cfg.sequence.tasks])

    # ---- ganchos dos ramos
    def _aprendiz_inicial(self) -> FastLearner:
        raise NotImplementedError

    def _meta_buffer_inicial(self) -> MetaBuffer:
        raise NotImplementedError

    def _atores_warmup(self, k: int, tarefa):
        raise NotImplementedError

    def _treinar(self, k: int, tarefa, t0: int) -> int:
        raise NotImplementedError

    def _integrar(self, k: int) -> Optional[Tuple[float, float]]:
        raise NotImplementedError

    def _cf(self, k: int) -> Tuple[Optional[float], Optional[float]]:
        raise NotImplementedError

    def _desempenho(self, tarefa, fonte: str, rng: np.random.Generator) -> float:
        raise NotImplementedError

    # ---- curvas
    def _avaliar(self, indice: int, fonte: str) -> np.ndarray:
        codigo = 0 if fonte == "fast" else 1
        return np.array([
            self._desempenho(tarefa, fonte, np.random.default_rng([self.cfg.seed, indice, i, codigo]))
            for i, tarefa in enumerate(self.tarefas)
        ])

    def _pontos_vencidos(self, k: int, t: int) -> None:
        """Avalia o fast learner em todos os pontos da grade já alcançados na tarefa k."""
        while self._proximo_ponto <= self.P and t * self.P >= self._proximo_ponto * self.T:
            indice = k * self.P + self._proximo_ponto
            self.valores_fast[:, indice] = self._avaliar(indice, "fast")
            self._proximo_ponto += 1

    # ---- warm-up
    def _warmup(self, k: int, tarefa) -> Tuple[WarmupDecision, int, List[Transition]]:
        cfg = self.cfg
        if cfg.force_warmup is not None:
            return forced_decision(cfg.force_warmup), 0, []
        if not cfg.is_fame:
            return forced_decision(WARMUP_BASELINE[cfg.method]), 0, []
        meta_act, fast_act, random_act = self._atores_warmup(k, tarefa)
        resumos, passos, transicoes = evaluate_candidates(tarefa, meta_act, fast_act, random_act, cfg.n_eval,
                                                          self.rng, cfg.eval_horizon, k)
        decisao = one_vs_all_test(resumos, cfg.alpha, cfg.warmup_mode, value_based=cfg.value_based)
        logging.info(f"Tarefa {k}: warm-up escolheu {decisao.chosen} "
                     f"(médias {', '.join(f'{c}={m:.3f}' for c, m in decisao.means.items())}).")
        return decisao, passos, transicoes

    # ---- checkpoints
    def _caminho_checkpoint(self, k: int) -> Path:
        return Path(self.cfg.output_dir) / "checkpoints" / f"{self.cfg.run_id}_task{k}.npz"

    def _salvar_checkpoint(self, k: int) -> None:
        registro = self.registro
        decisao = registro.decisions[k]
        tarefa = {
            "decision": {"chosen": decisao.chosen, "mode": decisao.mode, "p_values": decisao.p_values,
                         "p_fast_random": decisao.p_fast_random, "bc_enabled": decisao.bc_enabled,
                         "means": decisao.means},
            "eval_steps": registro.eval_steps[k], "steps_used": registro.steps_used[k],
            "objective": registro.objectives[k], "cf_fast": registro.cf_fast[k], "cf_meta": registro.cf_meta[k],
        }
        pontos = sorted(self.valores_meta)
        arrays = {
            **self.fast.as_arrays(), **self.meta.as_arrays(), **self.meta_buffer.as_arrays(),
            "task_index": np.array([k, self.K]),
            "task_record": _json_para_array(tarefa),
            "rng_state": _json_para_array(self.rng.bit_generator.state),
            "curve_fast": self.valores_fast,
            "curve_meta_points": np.array(pontos, dtype=np.int64),
            "curve_meta": np.array([self.valores_meta[p] for p in pontos]).reshape(len(pontos), self.K),
        }
        salvar_checkpoint(self._caminho_checkpoint(k), arrays)

    def _retomar(self) -> int:
        """
        Restaura o estado a partir dos checkpoints task0..task{k} contíguos;
        devolve o índice da próxima tarefa (0 quando não há checkpoint).
        """
        registro = self.registro
        dados: Dict[str, np.ndarray] = {}
        k = 0
        while k < self.K and self._caminho_checkpoint(k).exists():
            dados = carregar_checkpoint(self._caminho_checkpoint(k))
            if tuple(int(x) for x in dados["task_index"]) != (k, self.K):
                raise ContractViolation(f"Checkpoint '{self._caminho_checkpoint(k)}' não pertence a esta sequência.")
            tarefa = _array_para_json(dados["task_record"])
            d = tarefa["decision"]
            registro.decisions.append(WarmupDecision(
                d["chosen"], d["mode"], None if d["p_values"] is None else tuple(d["p_values"]),
                d["p_fast_random"], d["bc_enabled"], dict(d["means"])))
            registro.eval_steps.append(tarefa["eval_steps"])
            registro.steps_used.append(tarefa["steps_used"])
            registro.objectives.append(None if tarefa["objective"] is None else tuple(tarefa["objective"]))
            registro.cf_fast.append(tarefa["cf_fast"])
            registro.cf_meta.append(tarefa["cf_meta"])
            registro.fast_snapshots.append(FastLearner.from_arrays(dados))
            registro.meta_snapshots.append(MetaState.from_arrays(dados))
            k += 1

        if k == 0:
            logging.warning(f"Nenhum checkpoint de {self.cfg.run_id}; a execução começa do início.")
            return 0
        self.fast = registro.fast_snapshots[-1].copy()
        self.meta = registro.meta_snapshots[-1].copy()
        self.meta_buffer = MetaBuffer.from_arrays(dados)
        self.rng.bit_generator.state = _array_para_json(dados["rng_state"])
        self.valores_fast = np.array(dados["curve_fast"], dtype=float)
        self.valores_meta = {int(p): np.array(v, dtype=float)
                             for p, v in zip(dados["curve_meta_points"], dados["curve_meta"])}
        logging.info(f"Execução {self.cfg.run_id} retomada após a tarefa {k - 1}.")
        return k

    # ---- laço principal
    def executar(self) -> RunRecord:
        cfg, registro = self.cfg, self.registro
        inicio = self._retomar() if cfg.resume else 0
        if inicio == 0:
            self.valores_fast[:, 0] = self._avaliar(0, "fast")
            if cfg.is_fame:
                self.valores_meta[0] = self._avaliar(0, "meta")

        barra = tqdm(range(inicio, self.K), desc=f"{cfg.method} (semente {cfg.seed})", unit="tarefa",
                     initial=inicio, total=self.K, disable=not cfg.show_progress)
        for k in barra:
            tarefa = self.tarefas[k]
            decisao, passos_avaliacao, transicoes = self._warmup(k, tarefa)
            self.fast = apply_warmup(decisao, self.fast, self.meta)
            self.fast_buffer.clear()
            self.fast_buffer.extend(transicoes)
            self._proximo_ponto = 1
            usados = self._treinar(k, tarefa, passos_avaliacao)
            self.fast_buffer.clear()

            objetivo = self._integrar(k) if cfg.is_fame and cfg.integrate else None
            if cfg.is_fame:
                self.valores_meta[(k + 1) * self.P] = self._avaliar((k + 1) * self.P, "meta")

            registro.decisions.append(decisao)
            registro.eval_steps.append(passos_avaliacao)
            registro.steps_used.append(usados)
            registro.objectives.append(objetivo)
            registro.fast_snapshots.append(self.fast.copy())
            registro.meta_snapshots.append(self.meta.copy())
            cf_fast, cf_meta = self._cf(k)
            registro.cf_fast.append(cf_fast)
            registro.cf_meta.append(cf_meta)

            if cfg.checkpoint and cfg.output_dir:
                self._salvar_checkpoint(k)

            if shared_state.CANCELAR_PROCESSAMENTO:
                logging.warning(f"Execução {cfg.run_id} interrompida após a tarefa {k}.")
                registro.cancelled = True
                break

        registro.meta_buffer = self.meta_buffer
        if not registro.cancelled:
            self._finalizar()
        return registro

    def _finalizar(self) -> None:
        registro = self.registro
        grade = uniform_grid(self.K, self.T, self.P)
        registro.fast_curve = LearningCurve(grade, self.valores_fast, self.T)
        if self.cfg.is_fame:
            meta = np.zeros_like(self.valores_fast)
            ultimo = self.valores_meta[0]
            for g in range(grade.size):
                ultimo = self.valores_meta.get(g, ultimo)
                meta[:, g] = ultimo
            registro.meta_curve = LearningCurve(grade, meta, self.T)
        primaria = registro.primary_curve
        registro.report = compute_report(primaria, primaria)
        if self.cfg.output_dir:
            write_run_outputs(registro, self.cfg.output_dir)


class _ExecucaoPorValor(_Execucao):
    """FAME-Q, Reset e Finetune em gridworlds (Q-learning tabular)."""

    def _aprendiz_inicial(self) -> FastLearner:
        mdp = self.tarefas[0]
        for outra in self.tarefas:
            if (outra.n_states, outra.n_actions) != (mdp.n_states, mdp.n_actions):
                raise ConfigError("Todas as tarefas devem compartilhar S e A.")
        return FastLearner.fresh_value(mdp.n_states, mdp.n_actions, self.cfg.learner.temperature)

    def _meta_buffer_inicial(self) -> MetaBuffer:
        mdp = self.tarefas[0]
        return MetaBuffer(self.cfg.tail_size, self.K, mdp.n_states, mdp.n_actions)

    def _atores_warmup(self, k: int, tarefa: TabularMdp):
        rng, A = self.rng, tarefa.n_actions
        meta_act = None
        if self.meta.available:
            politica = self.meta.meta_policy.copy()
            meta_act = lambda s: politica.sample(s, rng)
        fast_act = None
        if k > 0:
            q = self.fast.q.values.copy()
            fast_act = lambda s: int(np.argmax(q[s]))
        return meta_act, fast_act, lambda s: int(rng.integers(A))

    def _atualizar(self, tr: Transition) -> None:
        learner = self.cfg.learner
        self.fast_buffer.add(tr)
        replay = self.fast_buffer.sample(learner.replay_batch, self.rng) if learner.replay_batch else []
        if self.fast.bc_active(learner):
            self.fast.q = bc_regularized_q_update(self.fast.q, [tr, *replay], self.fast.bc_target, learner)
            return
        td_update_inplace(self.fast.q.values, tr, learner)
        for anterior in replay:
            td_update_inplace(self.fast.q.values, anterior, learner)

    def _treinar(self, k: int, mdp: TabularMdp, t0: int) -> int:
        cfg, rng = self.cfg, self.rng
        t = t0
        self._pontos_vencidos(k, t)
        estado, duracao = sample_start(mdp, rng), 0
        while t < self.T:
            if estado in mdp.terminal or duracao >= cfg.episode_horizon:
                estado, duracao = sample_start(mdp, rng), 0
            acao = act_epsilon_greedy(self.fast.q, estado, self.fast.steps, cfg.learner, rng)
            proximo, recompensa, done = step(mdp, estado, acao, rng)
            t += 1
            self._atualizar(Transition(estado, acao, recompensa, proximo, done, k))
            record_meta(self.meta_buffer, MetaRecord(estado, acao, k), t, self.T, cfg.tail_size, k)
            self.fast.steps += 1
            estado, duracao = proximo, duracao + 1
            self._pontos_vencidos(k, t)
        return t

    def _integrar(self, k: int) -> Optional[Tuple[float, float]]:
        tau = self.cfg.learner.temperature
        anterior = self.meta
        if self.cfg.value_integration == "kl":
            probs = anterior.meta_policy.probs if anterior.available else \
                CategoricalPolicyTable.uniform(self.meta_buffer.n_states, self.meta_buffer.n_actions).probs
            self.meta = integrate_softmax_kl(anterior, self.meta_buffer, tau, fast_q=self.fast.q, task_id=k)
            if self.meta.cumulative_weight is None:
                return None
            pesos = self.meta.cumulative_weight
            return kl_objective(probs, pesos), kl_objective(self.meta.meta_policy.probs, pesos)

        try:
            pesos = estimate_weights(self.meta_buffer, k)
        except EmptyBucketError as e:
            logging.warning(f"Integração ℓ2 pulada: {e}")
            return None
        q_fast = self.fast.q.values
        q_prev = anterior.meta_q.values if anterior.meta_q is not None else np.zeros_like(q_fast)
        acumulado = anterior.cumulative_weight if anterior.cumulative_weight is not None else np.zeros_like(q_fast)
        antes = l2_objective(q_prev, q_prev, acumulado, q_fast, pesos.state_action)
        self.meta = integrate_q_l2(anterior, self.fast.q, pesos)
        return antes, l2_objective(self.meta.meta_q.values, q_prev, acumulado, q_fast, pesos.state_action)

    def _cf(self, k: int) -> Tuple[Optional[float], Optional[float]]:
        if k == 0:
            return None, None
        mdp_prev = self.tarefas[k - 1]
        q_prev = self.registro.fast_snapshots[k - 1].q
        gulosa = greedy_policy(q_prev)
        mu = discounted_visitation(mdp_prev, gulosa, "exact", task_id=k - 1)
        cf_fast = cf_q(q_prev, self.fast.q, mu.compose(one_hot_policy(gulosa, mdp_prev.n_actions)))

        meta_prev = self.registro.meta_snapshots[k - 1]
        if meta_prev.meta_q is None or self.meta.meta_q is None:
            return cf_fast, None
        mu_meta = discounted_visitation(mdp_prev, meta_prev.meta_policy.probs, "exact", task_id=k - 1)
        cf_meta = cf_q(meta_prev.meta_q, self.meta.meta_q, mu_meta.compose(meta_prev.meta_policy.probs))
        return cf_fast, cf_meta

    def _desempenho(self, mdp: TabularMdp, fonte: str, rng: np.random.Generator) -> float:
        """Retorno médio não descontado: fast guloso, meta amostrando de π^M."""
        if fonte == "fast":
            q = self.fast.q.values.copy()
            act = lambda s: int(np.argmax(q[s]))
        else:
            politica = self.meta.meta_policy if self.meta.available else \
                CategoricalPolicyTable.uniform(mdp.n_states, mdp.n_actions)
            act = lambda s: politica.sample(s, rng)
        retornos = [run_tabular_episode(mdp, act, rng, self.cfg.episode_horizon).total_return
                    for _ in range(self.cfg.episodes_per_point)]
        return float(np.mean(retornos))


class _ExecucaoPorPolitica(_Execucao):
    """FAME-KL, FAME-WD, Reset e Finetune em tarefas de ponto-massa (política gaussiana)."""

    def _aprendiz_inicial(self) -> FastLearner:
        tarefa = self.tarefas[0]
        for outra in self.tarefas:
            if (outra.n_cells, outra.action_dim) != (tarefa.n_cells, tarefa.action_dim):
                raise ConfigError("Todas as tarefas devem compartilhar a grade de estados e a dimensão da ação.")
        return FastLearner.fresh_policy(tarefa.n_cells, tarefa.action_dim)

    def _meta_buffer_inicial(self) -> MetaBuffer:
        return MetaBuffer(self.cfg.tail_size, self.K, self.tarefas[0].n_cells)

    def _atores_warmup(self, k: int, tarefa: ContinuousTask):
        rng, D = self.rng, tarefa.action_dim
        meta_act = None
        if self.meta.available:
            meta = self.meta.meta_policy.copy()
            meta_act = lambda x: meta.sample(tarefa.cell_index(x), rng)
        fast_act = None
        if k > 0:
            anterior = self.fast.policy.copy()
            fast_act = lambda x: anterior.sample(tarefa.cell_index(x), rng)
        return meta_act, fast_act, lambda x: rng.standard_normal(D)

    def _fechar_episodio(self, episodio: ContinuousEpisode, lote: List[ContinuousEpisode]) -> None:
        lote.append(episodio)
        if len(lote) >= self.cfg.learner.episodes_per_update:
            self.fast.policy = gaussian_policy_update(self.fast.policy, lote, self.cfg.learner)
            lote.clear()

    def _treinar(self, k: int, tarefa: ContinuousTask, t0: int) -> int:
        cfg, rng = self.cfg, self.rng
        guarda_acao = cfg.method != "FAME-WD"
        t = t0
        self._pontos_vencidos(k, t)
        lote: List[ContinuousEpisode] = []
        episodio, estado = ContinuousEpisode(), tarefa.start.copy()
        while t < self.T:
            celula = tarefa.cell_index(estado)
            acao = self.fast.policy.sample(celula, rng)
            proximo, recompensa, done = continuous_step(tarefa, estado, acao, rng)
            t += 1
            episodio.cells.append(celula)
            episodio.actions.append(acao)
            episodio.rewards.append(recompensa)
            transicao = Transition(estado, acao, recompensa, proximo, done, k)
            episodio.transitions.append(transicao)
            self.fast_buffer.add(transicao)
            record_meta(self.meta_buffer, MetaRecord(celula, acao if guarda_acao else None, k),
                        t, self.T, cfg.tail_size, k)
            self.fast.steps += 1
            estado = proximo
            if done or episodio.steps >= tarefa.horizon:
                episodio.success = done
                self._fechar_episodio(episodio, lote)
                episodio, estado = ContinuousEpisode(), tarefa.start.copy()
            self._pontos_vencidos(k, t)

        if episodio.steps:
            lote.append(episodio)
        if lote:
            self.fast.policy = gaussian_policy_update(self.fast.policy, lote, cfg.learner)
        return t

    def _integrar(self, k: int) -> Optional[Tuple[float, float]]:
        anterior = self.meta
        politica_prev = anterior.meta_policy if anterior.available else \
            GaussianPolicyTable.fresh(self.fast.policy.n_cells, self.fast.policy.action_dim)
        if self.cfg.method == "FAME-KL":
            antes = gaussian_nll_objective(politica_prev, self.meta_buffer)
            self.meta = integrate_policy_kl(anterior, self.meta_buffer, self.fast.policy.action_dim,
                                            self.cfg.learner.sigma_min)
            return antes, gaussian_nll_objective(self.meta.meta_policy, self.meta_buffer)

        try:
            mu = estimate_weights(self.meta_buffer, k)
        except EmptyBucketError as e:
            logging.warning(f"Integração WD pulada: {e}")
            return None
        acumulado = anterior.cumulative_weight if anterior.cumulative_weight is not None else np.zeros_like(mu.state)
        antes = wd_objective(politica_prev, politica_prev, acumulado, self.fast.policy, mu.state)
        self.meta = integrate_policy_wd(anterior, self.fast.policy, mu)
        return antes, wd_objective(self.meta.meta_policy, politica_prev, acumulado, self.fast.policy, mu.state)

    def _cf(self, k: int) -> Tuple[Optional[float], Optional[float]]:
        if k == 0:
            return None, None
        try:
            mu = estimate_weights(self.meta_buffer, k - 1)
        except EmptyBucketError:
            return None, None
        d = DivergenceSpec(pi_metric="squared-w2")
        cf_fast = cf_pi(self.registro.fast_snapshots[k - 1].policy, self.fast.policy, mu, d)
        meta_prev = self.registro.meta_snapshots[k - 1].meta_policy
        if not isinstance(meta_prev, GaussianPolicyTable) or not self.meta.available:
            return cf_fast, None
        return cf_fast, cf_pi(meta_prev, self.meta.meta_policy, mu, d)

    def _desempenho(self, tarefa: ContinuousTask, fonte: str, rng: np.random.Generator) -> float:
        """Taxa de sucesso amostrando da política gaussiana."""
        if fonte == "fast":
            politica = self.fast.policy
        else:
            politica = self.meta.meta_policy if self.meta.available else \
                GaussianPolicyTable.fresh(tarefa.n_cells, tarefa.action_dim)
        act = lambda x: politica.sample(tarefa.cell_index(x), rng)
        sucessos = [run_continuous_episode(tarefa, act, rng).success for _ in range(self.cfg.episodes_per_point)]
        return float(np.mean(sucessos))


def run_value_sequence(cfg: RunConfig) -> RunRecord:
    """Executa a sequência no ramo por valor (gridworlds)."""
    if not cfg.value_based:
        raise ConfigError("run_value_sequence exige uma sequência de gridworlds.")
    return _ExecucaoPorValor(cfg).executar()


def run_policy_sequence(cfg: RunConfig) -> RunRecord:
    """Executa a sequência no ramo por política (ponto-massa)."""
    if cfg.value_based:
        raise ConfigError("run_policy_sequence exige uma sequência de ponto-massa.")
    return _ExecucaoPorPolitica(cfg).executar()


def run_sequence(cfg: RunConfig) -> RunRecord:
    """Despacha para o ramo correspondente ao gerador da sequência."""
    return run_value_sequence(cfg) if cfg.value_based else run_policy_sequence(cfg)


def attach_baseline(record: RunRecord, baseline: RunRecord) -> MetricReport:
    """
    FT do fast learner contra o Reset com a mesma semente; as duas curvas
    são normalizadas em conjunto (min-max por tarefa).
    """
    if record.report is None or record.fast_curve is None or baseline.fast_curve is None:
        raise ContractViolation("FT exige execuções completas.")
    if baseline.method != "Reset":
        logging.warning(f"Baseline de FT com método {baseline.method} (esperado Reset).")
    if baseline.seed != record.seed:
        logging.warning(f"Baseline com semente {baseline.seed} diferente da execução ({record.seed}).")
    normalizadas = normalize_curves({"run": record.fast_curve, "baseline": baseline.fast_curve})
    record.report.ft, record.report.ft_per_task = forward_transfer(normalizadas["run"], normalizadas["baseline"])
    return record.report


# ================== SAÍDAS ==================

def _celula(valor: Optional[float]) -> object:
    return "" if valor is None else valor


def curve_rows(record: RunRecord) -> List[Dict[str, object]]:
    curvas = {"fast": record.fast_curve}
    if record.meta_curve is not None:
        curvas["meta"] = record.meta_curve
    normalizadas = normalize_curves(curvas)
    linhas = []
    for aprendiz, curva in curvas.items():
        for i in range(curva.n_tasks):
            for g, t in enumerate(curva.grid):
                linhas.append({
                    "run_id": record.run_id, "seed": record.seed, "method": record.method, "task_index": i,
                    "env_seed": record.env_seeds[i], "t": float(t), "p_raw": float(curva.values[i, g]),
                    "p_norm": float(normalizadas[aprendiz].values[i, g]), "learner": aprendiz,
                })
    return linhas


def decision_rows(record: RunRecord) -> List[Dict[str, object]]:
    linhas = []
    for k, decisao in enumerate(record.decisions):
        p_meta = decisao.p_values or (None, None)
        objetivo = record.objectives[k] or (None, None)
        linhas.append({
            "run_id": record.run_id, "seed": record.seed, "method": record.method, "task_index": k,
            "env_seed": record.env_seeds[k], "chosen": decisao.chosen, "mode": decisao.mode,
            "p_meta_fast": _celula(p_meta[0]), "p_meta_random": _celula(p_meta[1]),
            "p_fast_random": _celula(decisao.p_fast_random),
            "mean_meta": _celula(decisao.means.get(META)), "mean_fast": _celula(decisao.means.get(FAST)),
            "mean_random": _celula(decisao.means.get(RANDOM)), "bc_enabled": int(decisao.bc_enabled),
            "eval_steps": record.eval_steps[k], "steps_used": record.steps_used[k],
            "cf_fast": _celula(record.cf_fast[k]), "cf_meta": _celula(record.cf_meta[k]),
            "objective_before": _celula(objetivo[0]), "objective_after": _celula(objetivo[1]),
        })
    return linhas


def write_run_outputs(record: RunRecord, output_dir: Union[str, Path]) -> List[Path]:
    """Grava curvas, decisões e relatório da execução (um arquivo de cada por execução)."""
    destino = Path(output_dir)
    arquivos = [
        salvar_csv(destino / f"{record.run_id}_curves.csv", COLUNAS_CURVAS, curve_rows(record)),
        salvar_csv(destino / f"{record.run_id}_decisions.csv", COLUNAS_DECISOES, decision_rows(record)),
    ]
    if record.report is not None:
        linhas = summarize_reports({record.method: [record.report]})
        arquivos.append(salvar_csv(destino / f"{record.run_id}_report.csv", COLUNAS_RELATORIO, linhas))
    return arquivos


def dump_buffer(checkpoint_path: Union[str, Path], csv_path: Union[str, Path]) -> int:
    """Lê o meta buffer de um checkpoint e grava em CSV; devolve o número de registros."""
    buffer = MetaBuffer.from_arrays(carregar_checkpoint(checkpoint_path))
    linhas = buffer.to_rows()
    salvar_csv(csv_path, COLUNAS_BUFFER, linhas)
    return len(linhas)


# ================== AGREGAÇÃO DE MÉTRICAS ==================

def _curvas_do_csv(linhas: Sequence[Mapping[str, str]]) -> Dict[Tuple[str, int, str], LearningCurve]:
    """Reconstrói as curvas p_raw por (método, semente, aprendiz)."""
    grupos: Dict[Tuple[str, int, str], List[Mapping[str, str]]] = {}
    for linha in linhas:
        grupos.setdefault((linha["method"], int(linha["seed"]), linha["learner"]), []).append(linha)
    curvas = {}
    for chave, grupo in grupos.items():
        grade = np.array(sorted({float(l["t"]) for l in grupo}))
        K = max(int(l["task_index"]) for l in grupo) + 1
        valores = np.zeros((K, grade.size))
        for l in grupo:
            valores[int(l["task_index"]), int(np.searchsorted(grade, float(l["t"])))] = float(l["p_raw"])
        curvas[chave] = LearningCurve(grade, valores, int(round(grade[-1] / K)))
    return curvas


def aggregate_results(results_dir: Union[str, Path]) -> List[Dict[str, object]]:
    """
    Agrega os *_curves.csv de um diretório: normaliza por semente entre os
    métodos, calcula Avg. Perf, F e (com Reset presente) FT, e grava
    report.csv e summary_table.csv.
    """
    diretorio = Path(results_dir)
    linhas: List[Mapping[str, str]] = []
    for arquivo in sorted(diretorio.glob("*_curves.csv")):
        linhas.extend(ler_csv(arquivo))
    if not linhas:
        raise ContractViolation(f"Nenhum *_curves.csv em '{diretorio}'.")
    curvas = _curvas_do_csv(linhas)

    relatorios: Dict[str, List[MetricReport]] = {}
    extras: Dict[Tuple[str, str], List[float]] = {}
    for semente in sorted({s for _, s, _ in curvas}):
        primarias = {m: curvas.get((m, s, "meta"), c) for (m, s, a), c in curvas.items()
                     if s == semente and a == "fast"}
        normalizadas = normalize_curves(primarias)
        rapidas = normalize_curves({m: c for (m, s, a), c in curvas.items() if s == semente and a == "fast"})
        da_semente: Dict[str, MetricReport] = {}
        for metodo, curva in normalizadas.items():
            baseline = rapidas.get("Reset")
            relatorio = compute_report(curva, curva, rapidas[metodo], baseline)
            relatorios.setdefault(metodo, []).append(relatorio)
            da_semente[metodo] = relatorio

        tamanhos = {len(r.forgetting_per_task) for r in da_semente.values()}
        if len(da_semente) > 1 and len(tamanhos) == 1:
            por_metodo = normalize_forgetting_across_methods(
                {m: r.forgetting_per_task for m, r in da_semente.items()})
            for metodo, valores in por_metodo.items():
                extras.setdefault((metodo, "forgetting_norm"), []).append(float(np.mean(valores)))

    for metodo, semente, escolhas in _escolhas_warmup(diretorio):
        for candidato, proporcao in warmup_selection_ratio(escolhas).items():
            extras.setdefault((metodo, f"warmup_{candidato.lower()}"), []).append(proporcao)

    resumo = summarize_reports(relatorios)
    for (metodo, metrica), valores in extras.items():
        linha_extra = summarize_values(metodo, metrica, valores)
        if linha_extra is not None:
            resumo.append(linha_extra)
    salvar_csv(diretorio / "report.csv", COLUNAS_RELATORIO, resumo)
    tabela = []
    for metodo in relatorios:
        linha: Dict[str, object] = {"method": metodo}
        for r in resumo:
            if r["method"] == metodo:
                linha[r["metric"]] = f"{r['mean']:.3f} ± {r['stderr']:.3f}"
        tabela.append(linha)
    salvar_csv(diretorio / "summary_table.csv", COLUNAS_TABELA, tabela)
    return resumo


def _escolhas_warmup(diretorio: Path) -> List[Tuple[str, int, List[str]]]:
    """Escolhas de warm-up das execuções FAME por (método, semente), a partir da segunda tarefa."""
    grupos: Dict[Tuple[str, int], List[str]] = {}
    for arquivo in sorted(diretorio.glob("*_decisions.csv")):
        for linha in ler_csv(arquivo):
            if linha["method"].startswith("FAME") and int(linha["task_index"]) > 0:
                grupos.setdefault((linha["method"], int(linha["seed"])), []).append(linha["chosen"])
    return [(m, s, escolhas) for (m, s), escolhas in sorted(grupos.items())]


# ================== ORÁCULOS E ABLAÇÕES ==================

def oracle_check(suite: str, n_instances: int = 100, seed: int = 0) -> List[OracleResult]:
    """Roda uma suíte de oráculos (ou todas, com suite='all')."""
    nomes = list(SUITES) if suite == "all" else [suite]
    resultados = []
    for nome in nomes:
        resultado = run_suite(nome, n_instances, seed)
        if not resultado.passed:
            logging.error(f"Suíte '{nome}' falhou; reproduza com as sementes {resultado.failed_seeds}.")
        resultados.append(resultado)
    return resultados


def _com_parametro(cfg: RunConfig, parametro: str, valor: float, semente: int) -> RunConfig:
    if parametro == "tail_size":
        return replace(cfg, tail_size=int(valor), seed=semente, output_dir=None, checkpoint=False, resume=False)
    if parametro == "n_eval":
        return replace(cfg, n_eval=int(valor), seed=semente, output_dir=None, checkpoint=False, resume=False)
    if parametro == "bc_steps":
        learner = replace(cfg.learner, bc_steps=int(valor))
    elif parametro == "bc_lambda":
        learner = replace(cfg.learner, bc_lambda=float(valor))
    else:
        raise ConfigError(f"Parâmetro de ablação desconhecido: {parametro}. Opções: {', '.join(PARAMETROS_ABLACAO)}")
    return replace(cfg, learner=learner, seed=semente, output_dir=None, checkpoint=False, resume=False)


def run_ablation(cfg: RunConfig, parameter: str, values: Sequence[float],
                 seeds: Sequence[int]) -> List[Dict[str, object]]:
    """
    Varre L, N, λ ou n_eval: para cada valor e semente roda o método de `cfg` e o
    Reset com a mesma semente (baseline de FT). Uma linha por (valor, métrica).
    """
    for valor in values:
        _com_parametro(cfg, parameter, valor, seeds[0])
    baselines: Dict[int, RunRecord] = {}
    linhas: List[Dict[str, object]] = []
    for valor in values:
        relatorios = []
        for semente in tqdm(seeds, desc=f"{parameter}={valor}", unit="semente"):
            if semente not in baselines:
                base_cfg = replace(cfg, method="Reset", seed=semente, output_dir=None, checkpoint=False, resume=False)
                baselines[semente] = run_sequence(base_cfg)
            registro = run_sequence(_com_parametro(cfg, parameter, valor, semente))
            if registro.cancelled:
                logging.warning("Ablação interrompida.")
                return linhas
            attach_baseline(registro, baselines[semente])
            relatorios.append(registro.report)
        for linha in summarize_reports({cfg.method: relatorios}):
            linhas.append({"parameter": parameter, "value": valor, **linha})
    if cfg.output_dir:
        salvar_csv(Path(cfg.output_dir) / f"ablation_{parameter}.csv",
                   ("parameter", "value", *COLUNAS_RELATORIO), linhas)
    return linhas
