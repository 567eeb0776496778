# -*- coding: utf-8 -*-
"""
Warm-up adaptativo: avalia as três inicializações candidatas (Meta, Fast,
Random) na nova tarefa, decide entre elas por teste de hipótese um-contra-todos
(Welch unilateral, hipótese nula composta) ou por ranking empírico, e configura
o fast learner de acordo.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

import config
from errors import ContractViolation
from fast_learner import FastLearner
from mdp_core import ContinuousTask, TabularMdp, Transition, run_continuous_episode, run_tabular_episode
from meta_learner import MetaState
from tables import CategoricalPolicyTable, GaussianPolicyTable, QTable

META, FAST, RANDOM = "Meta", "Fast", "Random"
CANDIDATOS: Tuple[str, ...] = (META, FAST, RANDOM)
# Ordem de desempate: conhecimento retido primeiro
PRIORIDADE_EMPATE: Tuple[str, ...] = (FAST, RANDOM, META)

Actor = Callable[..., Union[int, np.ndarray]]


@dataclass(frozen=True)
class EvalSummary:
    """Retornos não descontados por episódio de um candidato."""
    candidate: str
    returns: Tuple[float, ...] = ()
    available: bool = True

    def __post_init__(self) -> None:
        if self.candidate not in CANDIDATOS:
            raise ContractViolation(f"Candidato desconhecido: {self.candidate}.")
        object.__setattr__(self, "returns", tuple(float(r) for r in self.returns))

    @property
    def n(self) -> int:
        return len(self.returns)

    @property
    def mean(self) -> float:
        return float(np.mean(self.returns)) if self.returns else math.nan

    @property
    def variance(self) -> float:
        return float(np.var(self.returns, ddof=1)) if self.n >= 2 else 0.0


@dataclass(frozen=True)
class WarmupDecision:
    chosen: str
    mode: str
    p_values: Optional[Tuple[float, float]] = None   # (Meta>Fast, Meta>Random)
    p_fast_random: Optional[float] = None
    bc_enabled: bool = False
    means: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.chosen not in CANDIDATOS:
            raise ContractViolation(f"Escolha inválida: {self.chosen}.")
        if self.bc_enabled and self.chosen != META:
            raise ContractViolation("BC só pode ser habilitado quando o Meta é escolhido.")


def forced_decision(candidate: str, mode: str = "forced") -> WarmupDecision:
    """Decisão fixa dos baselines (Reset → Random, Finetune → Fast)."""
    return WarmupDecision(candidate, mode)


# ================== AVALIAÇÃO ==================

def evaluate_candidates(task: Union[TabularMdp, ContinuousTask], meta_act: Optional[Actor],
                        fast_act: Optional[Actor], random_act: Actor, n_episodes: int,
                        rng: np.random.Generator, horizon: int = config.HORIZONTE_AVALIACAO_WARMUP,
                        task_id: int = 0) -> Tuple[List[EvalSummary], int, List[Transition]]:
    """
    Roda `n_episodes` episódios de cada candidato disponível na nova tarefa.
    Devolve os resumos, os passos de ambiente consumidos (debitados de T) e
    as transições coletadas (destinadas ao fast buffer). Com um único
    candidato disponível nada é avaliado.
    """
    atores = {META: meta_act, FAST: fast_act, RANDOM: random_act}
    disponiveis = [c for c in CANDIDATOS if atores[c] is not None]
    if len(disponiveis) < 2:
        return [EvalSummary(c, (), c in disponiveis) for c in CANDIDATOS], 0, []
    if n_episodes < 2:
        raise ContractViolation("A avaliação dos candidatos exige n_episodes ≥ 2.")

    resumos: List[EvalSummary] = []
    passos = 0
    transicoes: List[Transition] = []
    for candidato in CANDIDATOS:
        ator = atores[candidato]
        if ator is None:
            resumos.append(EvalSummary(candidato, (), False))
            continue
        retornos = []
        for _ in range(n_episodes):
            if isinstance(task, TabularMdp):
                episodio = run_tabular_episode(task, ator, rng, horizon, task_id)
            else:
                episodio = run_continuous_episode(task, ator, rng, task_id, max_steps=horizon)
            retornos.append(episodio.total_return)
            passos += episodio.steps
            transicoes.extend(episodio.transitions)
        resumos.append(EvalSummary(candidato, tuple(retornos)))
    return resumos, passos, transicoes


# ================== TESTE UM-CONTRA-TODOS ==================

def welch_one_sided(a: EvalSummary, b: EvalSummary) -> float:
    """p-valor de Welch para H1: média(a) > média(b). Variâncias nulas são tratadas sem o teste."""
    if a.n < 2 or b.n < 2:
        raise ContractViolation("O teste de Welch exige n ≥ 2 em cada amostra.")
    if a.variance == 0.0 and b.variance == 0.0:
        return 0.0 if a.mean > b.mean else 1.0
    return float(stats.ttest_ind(a.returns, b.returns, equal_var=False, alternative="greater").pvalue)


def _maior_media(resumos: Sequence[EvalSummary]) -> str:
    melhor = max(r.mean for r in resumos)
    empatados = {r.candidate for r in resumos if r.mean == melhor}
    return next(c for c in PRIORIDADE_EMPATE if c in empatados)


def one_vs_all_test(summaries: Sequence[EvalSummary], alpha: float = config.ALPHA_TESTE,
                    mode: str = config.MODO_WARMUP_PADRAO, value_based: bool = True) -> WarmupDecision:
    """
    Decide a inicialização da nova tarefa.

    strict-test: o Meta é escolhido só se os testes de Welch Meta>Fast e
    Meta>Random derem ambos p < α (interseção-união para H0 composta). Caso
    contrário Fast vs Random é decidido por Welch a α, com empate resolvido
    pela média empírica e depois pela ordem Fast > Random.
    empirical-ranking: maior média amostral, empates na ordem Fast > Random > Meta.
    """
    if mode not in config.MODOS_WARMUP:
        raise ContractViolation(f"Modo de warm-up desconhecido: {mode}.")
    if not 0.0 < alpha < 1.0:
        raise ContractViolation("α deve estar em (0, 1).")
    por_nome = {s.candidate: s for s in summaries if s.available}
    if not por_nome:
        raise ContractViolation("Nenhum candidato disponível.")
    medias = {c: s.mean for c, s in por_nome.items()}

    def decidir(escolha: str, **extras) -> WarmupDecision:
        bc = escolha == META and value_based
        return WarmupDecision(escolha, mode, bc_enabled=bc, means=medias, **extras)

    if len(por_nome) == 1:
        return decidir(next(iter(por_nome)))

    if mode == "empirical-ranking":
        return decidir(_maior_media(list(por_nome.values())))

    for resumo in por_nome.values():
        if resumo.n < 2:
            raise ContractViolation(f"Modo estrito exige n ≥ 2 (candidato {resumo.candidate}).")

    p_meta: Optional[Tuple[float, float]] = None
    if META in por_nome:
        meta = por_nome[META]
        p_fast = welch_one_sided(meta, por_nome[FAST]) if FAST in por_nome else 0.0
        p_random = welch_one_sided(meta, por_nome[RANDOM]) if RANDOM in por_nome else 0.0
        p_meta = (p_fast, p_random)
        if p_fast < alpha and p_random < alpha:
            return decidir(META, p_values=p_meta)

    if FAST in por_nome and RANDOM in por_nome:
        fast, aleatorio = por_nome[FAST], por_nome[RANDOM]
        p_fr = welch_one_sided(fast, aleatorio)
        if p_fr < alpha:
            escolha = FAST
        elif welch_one_sided(aleatorio, fast) < alpha:
            escolha = RANDOM
        else:
            escolha = _maior_media([fast, aleatorio])
        return decidir(escolha, p_values=p_meta, p_fast_random=p_fr)

    restante = FAST if FAST in por_nome else RANDOM
    return decidir(restante, p_values=p_meta)


# ================== CONFIGURAÇÃO DO FAST LEARNER ==================

def apply_warmup(decision: WarmupDecision, fast_learner: FastLearner, meta_state: MetaState) -> FastLearner:
    """
    Ramo por valor: Meta → Q reiniciado + BC na direção de π^M por L passos;
    Fast → cópia de Q_{k-1}; Random → Q zerado.
    Ramo por política: os parâmetros escolhidos são copiados diretamente.
    """
    if decision.chosen == META and not meta_state.available:
        raise ContractViolation("Meta escolhido sem meta learner disponível.")

    if fast_learner.value_based:
        anterior: QTable = fast_learner.q  # type: ignore[assignment]
        if decision.chosen == FAST:
            return FastLearner(q=anterior.copy())
        zerado = QTable.zeros(anterior.n_states, anterior.n_actions, anterior.temperature)
        if decision.chosen == META and decision.bc_enabled:
            alvo = meta_state.meta_policy
            if not isinstance(alvo, CategoricalPolicyTable):
                raise ContractViolation("BC exige uma política meta categórica.")
            logging.debug("Warm-up com BC na direção da política meta.")
            return FastLearner(q=zerado, bc_target=alvo.copy())
        return FastLearner(q=zerado)

    politica: GaussianPolicyTable = fast_learner.policy  # type: ignore[assignment]
    if decision.chosen == FAST:
        return FastLearner(policy=politica.copy())
    if decision.chosen == META:
        meta = meta_state.meta_policy
        if not isinstance(meta, GaussianPolicyTable):
            raise ContractViolation("Warm-up por política exige uma política meta gaussiana.")
        return FastLearner(policy=meta.parameters_only())
    return FastLearner(policy=GaussianPolicyTable.fresh(politica.n_cells, politica.action_dim))
