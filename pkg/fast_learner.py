# -*- coding: utf-8 -*-
"""
Fast learner: plasticidade por tarefa.

- Ramo por valor: Q-learning tabular (TD(0)) com exploração ε-greedy e, durante
  o warm-up com o meta, regularização de behavior cloning KL(π^M ‖ softmax(Q/τ)).
- Ramo por política: política gaussiana tabular por célula, atualizada por
  REINFORCE com gradiente natural e baseline por célula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from errors import ContractViolation
from mdp_core import ContinuousEpisode, Transition
from tables import CategoricalPolicyTable, GaussianPolicyTable, QTable, softmax_rows

__all__ = ["QTable", "GaussianPolicyTable", "LearnerConfig", "FastLearner", "epsilon_at", "q_update",
           "td_update_inplace", "bc_kl_gradient", "bc_regularized_q_update", "act_epsilon_greedy",
           "gaussian_log_likelihood", "gaussian_log_likelihood_grad", "gaussian_policy_update"]


@dataclass(frozen=True)
class LearnerConfig:
    """Hiperparâmetros do fast learner (α, agenda de ε, λ, L, γ, τ)."""
    learning_rate: float = config.TAXA_APRENDIZADO_Q
    epsilon_start: float = config.EPSILON_INICIAL
    epsilon_end: float = config.EPSILON_FINAL
    epsilon_decay_steps: int = 1000
    bc_lambda: float = config.BC_LAMBDA_PADRAO
    bc_steps: int = 0
    gamma: float = 0.9
    temperature: float = config.TEMPERATURA_PADRAO
    policy_learning_rate: float = config.TAXA_APRENDIZADO_POLITICA
    sigma_min: float = config.SIGMA_MIN
    sigma_max: float = config.SIGMA_MAX
    replay_batch: int = config.REPLAY_BATCH
    episodes_per_update: int = config.EPISODIOS_POR_ATUALIZACAO

    def __post_init__(self) -> None:
        if self.bc_lambda < 0:
            raise ContractViolation(f"λ deve ser ≥ 0 (recebido {self.bc_lambda}).")
        if self.learning_rate < 0 or self.policy_learning_rate < 0:
            raise ContractViolation("Taxas de aprendizado devem ser ≥ 0.")
        if not (0.0 <= self.epsilon_end <= 1.0 and 0.0 <= self.epsilon_start <= 1.0):
            raise ContractViolation("ε deve estar em [0, 1].")
        if self.epsilon_decay_steps < 0 or self.bc_steps < 0:
            raise ContractViolation("Passos de decaimento e de BC devem ser ≥ 0.")
        if not 0.0 < self.gamma < 1.0 or self.temperature <= 0:
            raise ContractViolation("γ em (0,1) e τ > 0 são obrigatórios.")
        if not 0.0 < self.sigma_min < self.sigma_max:
            raise ContractViolation("Exige-se 0 < σ_min < σ_max.")
        if self.replay_batch < 0 or self.episodes_per_update < 1:
            raise ContractViolation("replay_batch ≥ 0 e episodes_per_update ≥ 1.")

    def check_budget(self, steps_per_task: int) -> None:
        if self.bc_steps > steps_per_task:
            raise ContractViolation(f"L = {self.bc_steps} excede T = {steps_per_task}.")


@dataclass
class FastLearner:
    """
    Estado do aprendiz rápido de uma tarefa. `bc_target` é a política meta
    usada como alvo do BC enquanto `steps < bc_steps`.
    """
    q: Optional[QTable] = None
    policy: Optional[GaussianPolicyTable] = None
    bc_target: Optional[CategoricalPolicyTable] = None
    steps: int = 0

    @classmethod
    def fresh_value(cls, n_states: int, n_actions: int,
                    temperature: float = config.TEMPERATURA_PADRAO) -> "FastLearner":
        return cls(q=QTable.zeros(n_states, n_actions, temperature))

    @classmethod
    def fresh_policy(cls, n_cells: int, action_dim: int) -> "FastLearner":
        return cls(policy=GaussianPolicyTable.fresh(n_cells, action_dim))

    @property
    def value_based(self) -> bool:
        return self.q is not None

    def bc_active(self, cfg: LearnerConfig) -> bool:
        return self.bc_target is not None and self.steps < cfg.bc_steps and cfg.bc_lambda > 0

    def copy(self) -> "FastLearner":
        return FastLearner(
            None if self.q is None else self.q.copy(),
            None if self.policy is None else self.policy.copy(),
            None if self.bc_target is None else self.bc_target.copy(),
            self.steps,
        )

    def as_arrays(self) -> Dict[str, np.ndarray]:
        if self.q is not None:
            return {"fast_q": self.q.values, "fast_tau": np.array([self.q.temperature])}
        assert self.policy is not None
        return {"fast_mean": self.policy.mean, "fast_std": self.policy.std,
                "fast_baseline": self.policy.baseline, "fast_visits": self.policy.visits}

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray]) -> "FastLearner":
        if "fast_q" in arrays:
            return cls(q=QTable(np.array(arrays["fast_q"], dtype=float), float(arrays["fast_tau"][0])))
        return cls(policy=GaussianPolicyTable(np.array(arrays["fast_mean"], dtype=float),
                                              np.array(arrays["fast_std"], dtype=float),
                                              np.array(arrays["fast_baseline"], dtype=float),
                                              np.array(arrays["fast_visits"], dtype=np.int64)))


# ================== RAMO POR VALOR ==================

def epsilon_at(step: int, cfg: LearnerConfig) -> float:
    """Decaimento linear de ε_start para ε_end em `epsilon_decay_steps` passos."""
    if cfg.epsilon_decay_steps == 0:
        return cfg.epsilon_end
    fracao = min(max(step, 0) / cfg.epsilon_decay_steps, 1.0)
    return cfg.epsilon_start + fracao * (cfg.epsilon_end - cfg.epsilon_start)


def td_update_inplace(values: np.ndarray, tr: Transition, cfg: LearnerConfig) -> None:
    s, a, s2 = int(tr.state), int(tr.action), int(tr.next_state)
    alvo = tr.reward + (0.0 if tr.done else cfg.gamma * float(np.max(values[s2])))
    values[s, a] += cfg.learning_rate * (alvo - values[s, a])


def q_update(q: QTable, tr: Transition, cfg: LearnerConfig) -> QTable:
    """Q(s,a) ← Q(s,a) + α[r + γ max Q(s',·)(1−done) − Q(s,a)]; só (s,a) muda."""
    novo = q.copy()
    td_update_inplace(novo.values, tr, cfg)
    return novo


def bc_kl_gradient(q: QTable, states: Sequence[int], meta_pi: CategoricalPolicyTable,
                   lam: float) -> np.ndarray:
    """
    Gradiente de λ·média_s KL(π^M(·|s) ‖ softmax(Q/τ)(·|s)) em relação a Q:
    λ/τ · (softmax(Q/τ)(a|s) − π^M(a|s)), acumulado por estado do lote.
    """
    gradiente = np.zeros_like(q.values)
    if lam == 0 or len(states) == 0:
        return gradiente
    estados = np.asarray(states, dtype=int)
    diferenca = softmax_rows(q.values[estados], q.temperature) - meta_pi.probs[estados]
    np.add.at(gradiente, estados, lam / q.temperature * diferenca / len(estados))
    return gradiente


def bc_regularized_q_update(q: QTable, batch: Sequence[Transition], meta_pi: CategoricalPolicyTable,
                            cfg: LearnerConfig) -> QTable:
    """Passo TD sobre o lote mais um passo de gradiente no termo de BC (calculado no Q de entrada)."""
    if cfg.bc_lambda < 0:
        raise ContractViolation("λ negativo no behavior cloning.")
    gradiente = bc_kl_gradient(q, [int(tr.state) for tr in batch], meta_pi, cfg.bc_lambda)
    novo = q.copy()
    for tr in batch:
        td_update_inplace(novo.values, tr, cfg)
    novo.values -= cfg.learning_rate * gradiente
    return novo


def act_epsilon_greedy(q: QTable, state: int, step: int, cfg: LearnerConfig,
                       rng: np.random.Generator) -> int:
    """Ação uniforme com probabilidade ε(step), senão gulosa (empate → menor índice)."""
    if rng.random() < epsilon_at(step, cfg):
        return int(rng.integers(q.n_actions))
    return int(np.argmax(q.values[state]))


# ================== RAMO POR POLÍTICA ==================

def gaussian_log_likelihood(action: np.ndarray, mean: np.ndarray, std: np.ndarray) -> float:
    z = (np.asarray(action, dtype=float) - mean) / std
    return float(np.sum(-0.5 * z ** 2 - np.log(std) - 0.5 * math.log(2.0 * math.pi)))


def gaussian_log_likelihood_grad(action: np.ndarray, mean: np.ndarray,
                                 std: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(∂/∂ν, ∂/∂σ) do log-verossimilhança de uma gaussiana diagonal."""
    desvio = np.asarray(action, dtype=float) - mean
    return desvio / std ** 2, (desvio ** 2 - std ** 2) / std ** 3


def _retornos_descontados(rewards: Sequence[float], gamma: float) -> np.ndarray:
    retornos = np.zeros(len(rewards))
    acumulado = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        acumulado = rewards[i] + gamma * acumulado
        retornos[i] = acumulado
    return retornos


def gaussian_policy_update(pi: GaussianPolicyTable, episodes: Sequence[ContinuousEpisode],
                           cfg: LearnerConfig) -> GaussianPolicyTable:
    """
    Um passo de gradiente natural por célula com vantagens G_t − b(s)
    (baseline de média móvel por célula, escaladas pelo desvio do lote).
    O gradiente do log-verossimilhança é pré-multiplicado pela inversa da
    informação de Fisher, diag(σ², σ²/2):
    Δν = η·média(A·(a−ν)), Δσ = η·média(A·((a−ν)² − σ²)/(2σ)).
    σ é limitado a [σ_min, σ_max].
    """
    novo = pi.copy()
    celulas: List[int] = []
    acoes: List[np.ndarray] = []
    retornos: List[float] = []
    for episodio in episodes:
        celulas.extend(episodio.cells)
        acoes.extend(np.atleast_1d(a) for a in episodio.actions)
        retornos.extend(_retornos_descontados(episodio.rewards, cfg.gamma))
    if not celulas:
        return novo

    celulas_arr = np.asarray(celulas, dtype=int)
    acoes_arr = np.asarray(acoes, dtype=float).reshape(len(celulas), pi.action_dim)
    retornos_arr = np.asarray(retornos, dtype=float)
    vantagens = retornos_arr - pi.baseline[celulas_arr]
    escala = float(np.std(vantagens))
    if escala > 0:
        vantagens = vantagens / escala

    for celula in np.unique(celulas_arr):
        selecao = celulas_arr == celula
        a, adv = acoes_arr[selecao], vantagens[selecao][:, None]
        media, desvio = pi.mean[celula], pi.std[celula]
        grad_media, grad_desvio = gaussian_log_likelihood_grad(a, media, desvio)
        passo_media = desvio ** 2 * np.mean(adv * grad_media, axis=0)
        passo_sigma = 0.5 * desvio ** 2 * np.mean(adv * grad_desvio, axis=0)
        novo.mean[celula] = media + cfg.policy_learning_rate * passo_media
        novo.std[celula] = np.clip(desvio + cfg.policy_learning_rate * passo_sigma, cfg.sigma_min, cfg.sigma_max)

    for celula, retorno in zip(celulas_arr, retornos_arr):
        novo.visits[celula] += 1
        passo = max(1.0 / novo.visits[celula], config.PASSO_BASELINE_MIN)
        novo.baseline[celula] += passo * (retorno - novo.baseline[celula])
    return novo
