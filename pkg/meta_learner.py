# -*- coding: utf-8 -*-
"""
Meta learner: integração de conhecimento na fronteira de cada tarefa,
minimizando o esquecimento catastrófico somado sobre todas as tarefas vistas.

Regras disponíveis:
- integrate_q_l2: média ponderada incremental de Q (perda ℓ2);
- integrate_softmax_kl: MLE categórico com pesos μ̂_k(s)·softmax(Q_k/τ) (π^M = softmax(Q^M/τ));
- integrate_policy_kl: MLE gaussiano sobre ações do meta buffer (destilação);
- integrate_policy_wd: média incremental de (ν, σ) sob W2² (forma fechada).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

import config
from buffers import MetaBuffer, estimate_weights
from errors import ContractViolation, EmptyBucketError
from fast_learner import gaussian_log_likelihood
from tables import CategoricalPolicyTable, GaussianPolicyTable, QTable, VisitationWeights, softmax_rows

GaussianParams = Tuple[np.ndarray, np.ndarray]


@dataclass
class MetaState:
    """
    Estado do meta learner. `cumulative_weight` acumula Σ_{i<k} w_i(s,a)
    (ramo por valor) ou Σ_{i<k} μ_i(s) (ramo por política).
    """
    meta_policy: Optional[Union[CategoricalPolicyTable, GaussianPolicyTable]] = None
    meta_q: Optional[QTable] = None
    cumulative_weight: Optional[np.ndarray] = None
    tasks_integrated: int = 0

    @property
    def available(self) -> bool:
        return self.meta_policy is not None

    def copy(self) -> "MetaState":
        return MetaState(
            None if self.meta_policy is None else self.meta_policy.copy(),
            None if self.meta_q is None else self.meta_q.copy(),
            None if self.cumulative_weight is None else self.cumulative_weight.copy(),
            self.tasks_integrated,
        )

    def as_arrays(self) -> Dict[str, np.ndarray]:
        arrays = {"meta_tasks_integrated": np.array([self.tasks_integrated])}
        politica = self.meta_policy
        if isinstance(politica, CategoricalPolicyTable):
            arrays["meta_probs"] = politica.probs
        elif isinstance(politica, GaussianPolicyTable):
            arrays["meta_mean"], arrays["meta_std"] = politica.mean, politica.std
        if self.meta_q is not None:
            arrays["meta_q"], arrays["meta_tau"] = self.meta_q.values, np.array([self.meta_q.temperature])
        if self.cumulative_weight is not None:
            arrays["meta_weight"] = self.cumulative_weight
        return arrays

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray]) -> "MetaState":
        politica: Optional[Union[CategoricalPolicyTable, GaussianPolicyTable]] = None
        if "meta_probs" in arrays:
            politica = CategoricalPolicyTable(np.array(arrays["meta_probs"], dtype=float))
        elif "meta_mean" in arrays:
            politica = GaussianPolicyTable(np.array(arrays["meta_mean"], dtype=float),
                                           np.array(arrays["meta_std"], dtype=float))
        meta_q = None
        if "meta_q" in arrays:
            meta_q = QTable(np.array(arrays["meta_q"], dtype=float), float(arrays["meta_tau"][0]))
        peso = np.array(arrays["meta_weight"], dtype=float) if "meta_weight" in arrays else None
        return cls(politica, meta_q, peso, int(arrays["meta_tasks_integrated"][0]))


# ================== W2 EM FORMA FECHADA ==================

def w2_squared_diag_gaussian(p: GaussianParams, q: GaussianParams) -> Union[float, np.ndarray]:
    """
    W2² entre gaussianas diagonais: ‖ν_p − ν_q‖² + ‖σ_p − σ_q‖².
    Soma na última dimensão; aceita lotes de estados.
    """
    mean_p, std_p = (np.asarray(x, dtype=float) for x in p)
    mean_q, std_q = (np.asarray(x, dtype=float) for x in q)
    if np.any(std_p <= 0) or np.any(std_q <= 0):
        raise ContractViolation("W2² exige desvios padrão positivos.")
    total = np.sum((mean_p - mean_q) ** 2, axis=-1) + np.sum((std_p - std_q) ** 2, axis=-1)
    return float(total) if np.ndim(total) == 0 else total


# ================== RAMO POR VALOR ==================

def integrate_q_l2(meta: MetaState, fast_q: QTable, weights_k: VisitationWeights) -> MetaState:
    """
    Q^M_k(s,a) = (W_prev·Q^M_{k-1} + w_k·Q_k) / (W_prev + w_k), por (s,a).
    Entradas com peso total zero mantêm Q^M_{k-1}.
    """
    if weights_k.state_action is None:
        raise ContractViolation("integrate_q_l2 exige pesos w_k(s,a).")
    w = weights_k.state_action
    if np.any(w < 0):
        raise ContractViolation("Pesos negativos na integração ℓ2.")
    if w.shape != fast_q.values.shape:
        raise ContractViolation("Pesos e Q_k com formatos diferentes.")

    anterior = meta.meta_q.values if meta.meta_q is not None else np.zeros_like(fast_q.values)
    W = meta.cumulative_weight if meta.cumulative_weight is not None else np.zeros_like(w)
    total = W + w
    com_peso = total > 0
    novo = anterior.copy()
    novo[com_peso] = (W[com_peso] * anterior[com_peso] + w[com_peso] * fast_q.values[com_peso]) / total[com_peso]

    meta_q = QTable(novo, fast_q.temperature)
    return MetaState(CategoricalPolicyTable(meta_q.softmax()), meta_q, total, meta.tasks_integrated + 1)


def _contagens_por_tarefa(buffer: MetaBuffer) -> np.ndarray:
    """Σ_i w_i(s,a) com cada w_i normalizado dentro da própria tarefa."""
    contagens = np.zeros((buffer.n_states, buffer.n_actions))
    for tarefa in buffer.task_ids():
        try:
            contagens += estimate_weights(buffer, tarefa).state_action
        except EmptyBucketError:
            continue
    return contagens


def softmax_kl_weights(buffer: MetaBuffer, task_id: int, fast_q: QTable,
                       tau: float = config.TEMPERATURA_PADRAO) -> VisitationWeights:
    """
    w_k(s,a) = μ̂_k(s)·softmax(Q_k/τ)(a|s): estados da cauda da tarefa k,
    ações pela política softmax do fast learner (contagens esperadas).
    """
    if fast_q.values.shape != (buffer.n_states, buffer.n_actions):
        raise ContractViolation("Q_k e meta buffer com formatos diferentes.")
    return estimate_weights(buffer, task_id).compose(softmax_rows(fast_q.values, tau))


def _politica_suavizada(contagens: np.ndarray, smoothing: float) -> np.ndarray:
    A = contagens.shape[1]
    por_estado = contagens.sum(axis=1, keepdims=True)
    visitados = por_estado[:, 0] > 0
    probs = np.full_like(contagens, 1.0 / A)
    probs[visitados] = (1.0 - smoothing) * contagens[visitados] / por_estado[visitados] + smoothing / A
    return probs


def integrate_softmax_kl(meta: MetaState, buffer: MetaBuffer, tau: float = config.TEMPERATURA_PADRAO,
                         smoothing: float = config.EPSILON_SUAVIZACAO_META, fast_q: Optional[QTable] = None,
                         task_id: Optional[int] = None) -> MetaState:
    """
    MLE categórico de Σ_i E_{w_i}[log π̃^M], suavizado com `smoothing` de
    massa uniforme; estados sem peso recebem linha uniforme.

    Sem `fast_q`, w_i são as frequências empíricas (estado, ação) de cada
    tarefa do buffer, com massa 1 por tarefa. Com `fast_q` (o Q_k da tarefa
    `task_id`), w_k = μ̂_k(s)·softmax(Q_k/τ)(a|s) é somado ao peso acumulado
    do meta: com uma única tarefa, π^M coincide com a política softmax do
    fast learner nos estados do buffer, a menos da suavização.
    Q^M = τ·log π^M (definido a menos de uma constante por estado).
    """
    if buffer.n_actions is None:
        raise ContractViolation("integrate_softmax_kl exige registros (estado, ação) discretos.")
    if fast_q is None:
        if buffer.total_records() == 0:
            logging.warning("Meta buffer vazio: política meta mantida.")
            return replace(meta.copy(), tasks_integrated=meta.tasks_integrated + 1)
        contagens = _contagens_por_tarefa(buffer)
    else:
        tarefa = max(buffer.task_ids(), default=0) if task_id is None else task_id
        try:
            w_k = softmax_kl_weights(buffer, tarefa, fast_q, tau).state_action
        except EmptyBucketError as e:
            logging.warning(f"Política meta mantida: {e}")
            return replace(meta.copy(), tasks_integrated=meta.tasks_integrated + 1)
        anterior = meta.cumulative_weight
        contagens = w_k if anterior is None or anterior.shape != w_k.shape else anterior + w_k

    probs = _politica_suavizada(contagens, smoothing)
    meta_q = QTable(tau * np.log(np.maximum(probs, np.finfo(float).tiny)), tau)
    return MetaState(CategoricalPolicyTable(probs), meta_q, contagens, meta.tasks_integrated + 1)


# ================== RAMO POR POLÍTICA ==================

def integrate_policy_kl(meta: MetaState, buffer: MetaBuffer, action_dim: Optional[int] = None,
                        sigma_min: float = config.SIGMA_MIN) -> MetaState:
    """
    MLE gaussiano por célula sobre as ações do meta buffer (destilação de
    política). Cada tarefa contribui com massa 1. Células com menos de duas
    amostras mantêm os valores anteriores do meta.
    """
    n_cells = buffer.n_states
    registros = [r for tarefa in buffer.task_ids() for r in buffer.records(tarefa)]
    if action_dim is None:
        if isinstance(meta.meta_policy, GaussianPolicyTable):
            action_dim = meta.meta_policy.action_dim
        elif registros:
            action_dim = int(np.size(registros[0].action))
        else:
            raise ContractViolation("Dimensão da ação desconhecida para meta vazio.")

    anterior = meta.meta_policy if isinstance(meta.meta_policy, GaussianPolicyTable) \
        else GaussianPolicyTable.fresh(n_cells, action_dim)
    novo = anterior.parameters_only()
    acumulado = np.zeros(n_cells)
    if not registros:
        logging.warning("Meta buffer vazio: política meta gaussiana mantida.")
        return MetaState(novo, None, acumulado, meta.tasks_integrated + 1)

    celulas = np.array([r.state for r in registros], dtype=int)
    acoes = np.array([np.atleast_1d(r.action) for r in registros], dtype=float)
    tamanho = {t: len(buffer.records(t)) for t in buffer.task_ids()}
    pesos = np.array([1.0 / tamanho[r.task_id] for r in registros])
    np.add.at(acumulado, celulas, pesos)

    for celula in np.unique(celulas):
        selecao = celulas == celula
        if selecao.sum() < 2:
            continue
        media = np.average(acoes[selecao], axis=0, weights=pesos[selecao])
        variancia = np.average((acoes[selecao] - media) ** 2, axis=0, weights=pesos[selecao])
        novo.mean[celula] = media
        novo.std[celula] = np.maximum(np.sqrt(variancia), sigma_min)

    return MetaState(novo, None, acumulado, meta.tasks_integrated + 1)


def integrate_policy_wd(meta: MetaState, fast_pi: GaussianPolicyTable, mu_k: VisitationWeights) -> MetaState:
    """
    Atualização incremental sob W2² com gaussianas independentes:
    ν^M_k(s) = (W_prev(s)·ν^M_{k-1}(s) + μ_k(s)·ν_k(s)) / (W_prev(s) + μ_k(s)),
    e a mesma média para σ. Estados com peso total zero ficam inalterados.
    """
    mu = mu_k.state
    if np.any(mu < 0):
        raise ContractViolation("μ_k negativo na integração WD.")
    if mu.shape[0] != fast_pi.n_cells:
        raise ContractViolation("μ_k e a política rápida com números de células diferentes.")

    anterior = meta.meta_policy if isinstance(meta.meta_policy, GaussianPolicyTable) \
        else GaussianPolicyTable.fresh(fast_pi.n_cells, fast_pi.action_dim)
    W = meta.cumulative_weight if meta.cumulative_weight is not None else np.zeros_like(mu)
    total = W + mu
    com_peso = total > 0
    novo = anterior.parameters_only()
    fator_prev = (W[com_peso] / total[com_peso])[:, None]
    fator_fast = (mu[com_peso] / total[com_peso])[:, None]
    novo.mean[com_peso] = fator_prev * anterior.mean[com_peso] + fator_fast * fast_pi.mean[com_peso]
    novo.std[com_peso] = fator_prev * anterior.std[com_peso] + fator_fast * fast_pi.std[com_peso]
    return MetaState(novo, None, total, meta.tasks_integrated + 1)


# ================== OBJETIVOS ==================

def l2_objective(candidate: np.ndarray, meta_prev: np.ndarray, cumulative_prev: np.ndarray,
                 fast: np.ndarray, w_k: np.ndarray) -> float:
    """Σ W_prev (Q̃ − Q^M_{k-1})² + w_k (Q̃ − Q_k)²."""
    return float(np.sum(cumulative_prev * (candidate - meta_prev) ** 2 + w_k * (candidate - fast) ** 2))


def l2_batch_objective(candidate: np.ndarray, q_tables: Sequence[np.ndarray],
                       weights: Sequence[np.ndarray]) -> float:
    """Σ_i Σ_{s,a} w_i(s,a) (Q̃ − Q_i)²."""
    return float(sum(np.sum(w * (candidate - q) ** 2) for q, w in zip(q_tables, weights)))


def wd_objective(candidate: GaussianPolicyTable, meta_prev: GaussianPolicyTable, cumulative_prev: np.ndarray,
                 fast: GaussianPolicyTable, mu_k: np.ndarray) -> float:
    """Σ_s W_prev(s) W2²(π̃(s), π^M_{k-1}(s)) + μ_k(s) W2²(π̃(s), π_k(s))."""
    ate_meta = w2_squared_diag_gaussian((candidate.mean, candidate.std), (meta_prev.mean, meta_prev.std))
    ate_fast = w2_squared_diag_gaussian((candidate.mean, candidate.std), (fast.mean, fast.std))
    return float(np.sum(cumulative_prev * ate_meta + mu_k * ate_fast))


def kl_objective(probs: np.ndarray, weights: Union[MetaBuffer, np.ndarray]) -> float:
    """
    −Σ_i E_{w_i}[log π] com pesos por (s,a) já somados ou tirados do meta
    buffer (infinito se π zera uma ação com peso).
    """
    if isinstance(weights, MetaBuffer):
        contagens = _contagens_por_tarefa(weights)
    else:
        contagens = np.asarray(weights, dtype=float)
    with np.errstate(divide="ignore"):
        log_probs = np.log(probs)
    usados = contagens > 0
    return float(-np.sum(contagens[usados] * log_probs[usados]))


def gaussian_nll_objective(table: GaussianPolicyTable, buffer: MetaBuffer) -> float:
    """−Σ_i E_{w_i}[log N(a; ν(s), σ(s))] sobre o meta buffer."""
    total = 0.0
    for tarefa in buffer.task_ids():
        registros = buffer.records(tarefa)
        for r in registros:
            verossimilhanca = gaussian_log_likelihood(np.atleast_1d(r.action), table.mean[r.state], table.std[r.state])
            total -= verossimilhanca / len(registros)
    return float(total)
