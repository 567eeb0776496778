#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes do warm-up adaptativo: avaliação dos candidatos, teste um-contra-todos
e configuração do fast learner.
"""
import numpy as np
import pytest

from errors import ContractViolation
from fast_learner import FastLearner
from meta_learner import MetaState
from mdp_core import GridworldSpec, generate_gridworld
from tables import CategoricalPolicyTable, GaussianPolicyTable, QTable
from warmup import (FAST, META, RANDOM, EvalSummary, WarmupDecision, apply_warmup, evaluate_candidates,
                    forced_decision, one_vs_all_test, welch_one_sided)


def resumos(meta, fast, rand):
    return [EvalSummary(META, meta), EvalSummary(FAST, fast), EvalSummary(RANDOM, rand)]


# ================== TESTE UM-CONTRA-TODOS ==================

def test_meta_claramente_melhor_e_escolhido():
    rng = np.random.default_rng(0)
    s = resumos(rng.normal(10, 1, 10), rng.normal(0, 1, 10), rng.normal(0, 1, 10))
    decisao = one_vs_all_test(s, 0.05, "strict-test")
    assert decisao.chosen == META
    assert decisao.bc_enabled
    assert max(decisao.p_values) < 0.05


def test_meta_melhor_so_que_um_rival_nao_e_escolhido():
    rng = np.random.default_rng(1)
    bons = rng.normal(10, 1, 10)
    s = resumos(bons, bons, rng.normal(0, 1, 10))
    decisao = one_vs_all_test(s, 0.05, "strict-test")
    assert decisao.chosen == FAST
    assert decisao.p_values[0] == pytest.approx(0.5)
    assert decisao.p_fast_random < 0.05


def test_empate_estrito_fica_com_fast():
    s = resumos([1.0, 1.0], [1.0, 1.0], [1.0, 1.0])
    assert one_vs_all_test(s, 0.05, "strict-test").chosen == FAST


def test_random_vence_fast_quando_significativo():
    s = resumos([0.0, 0.1], [0.0, 0.1], [5.0, 5.1])
    assert one_vs_all_test(s, 0.05, "strict-test").chosen == RANDOM


def test_ranking_empirico_usa_maior_media():
    s = resumos([1.0, 2.0], [0.0, 0.5], [3.0, 3.5])
    assert one_vs_all_test(s, mode="empirical-ranking").chosen == RANDOM


def test_ranking_empirico_desempata_fast_random_meta():
    s = resumos([1.0, 1.0], [1.0, 1.0], [1.0, 1.0])
    assert one_vs_all_test(s, mode="empirical-ranking").chosen == FAST
    s = [EvalSummary(META, [1.0, 1.0]), EvalSummary(FAST, (), False), EvalSummary(RANDOM, [1.0, 1.0])]
    assert one_vs_all_test(s, mode="empirical-ranking").chosen == RANDOM


def test_sem_meta_na_primeira_tarefa():
    s = [EvalSummary(META, (), False), EvalSummary(FAST, (), False), EvalSummary(RANDOM, ())]
    decisao = one_vs_all_test(s, mode="strict-test")
    assert decisao.chosen == RANDOM and not decisao.bc_enabled


def test_bc_desligado_no_ramo_por_politica():
    s = resumos([9.0, 9.5, 10.0], [0.0, 0.5, 0.2], [0.1, 0.0, 0.3])
    decisao = one_vs_all_test(s, 0.05, "strict-test", value_based=False)
    assert decisao.chosen == META and not decisao.bc_enabled


def test_welch_bate_com_scipy_e_variancia_nula():
    from scipy import stats
    a = EvalSummary(META, [1.0, 2.0, 3.0, 4.0])
    b = EvalSummary(FAST, [0.0, 1.0, 1.5, 0.5])
    esperado = stats.ttest_ind(a.returns, b.returns, equal_var=False, alternative="greater").pvalue
    assert welch_one_sided(a, b) == pytest.approx(esperado)
    assert welch_one_sided(EvalSummary(META, [2.0, 2.0]), EvalSummary(FAST, [1.0, 1.0])) == 0.0
    assert welch_one_sided(EvalSummary(META, [1.0, 1.0]), EvalSummary(FAST, [1.0, 1.0])) == 1.0


def test_modo_e_alpha_invalidos():
    s = resumos([1.0, 2.0], [1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ContractViolation):
        one_vs_all_test(s, mode="votacao")
    with pytest.raises(ContractViolation):
        one_vs_all_test(s, alpha=1.5)


def test_bc_exige_escolha_meta():
    with pytest.raises(ContractViolation):
        WarmupDecision(FAST, "strict-test", bc_enabled=True)


# ================== AVALIAÇÃO ==================

def test_avaliacao_conta_passos_e_transicoes():
    mdp = generate_gridworld(GridworldSpec(width=3, height=3), 0)
    rng = np.random.default_rng(0)
    meta_act = lambda s: 0
    random_act = lambda s: int(rng.integers(4))
    lista, passos, transicoes = evaluate_candidates(mdp, meta_act, None, random_act, 3, rng, horizon=5)
    assert [r.candidate for r in lista] == [META, FAST, RANDOM]
    assert not lista[1].available and lista[0].n == 3 and lista[2].n == 3
    assert passos == len(transicoes) <= 2 * 3 * 5


def test_candidato_unico_nao_consome_passos():
    mdp = generate_gridworld(GridworldSpec(width=3, height=3), 0)
    lista, passos, transicoes = evaluate_candidates(mdp, None, None, lambda s: 0, 10, np.random.default_rng(0))
    assert passos == 0 and transicoes == []
    assert [r.available for r in lista] == [False, False, True]


# ================== CONFIGURAÇÃO ==================

def meta_categorico():
    probs = np.array([[0.7, 0.3], [0.2, 0.8]])
    return MetaState(CategoricalPolicyTable(probs), QTable(np.log(probs)), None, 1)


def test_warmup_fast_copia_q():
    anterior = FastLearner(q=QTable(np.array([[1.0, 2.0], [3.0, 4.0]])), steps=99)
    novo = apply_warmup(forced_decision(FAST), anterior, MetaState())
    assert np.array_equal(novo.q.values, anterior.q.values)
    assert novo.steps == 0 and novo.bc_target is None
    novo.q.values[0, 0] = -1.0
    assert anterior.q.values[0, 0] == 1.0


def test_warmup_random_zera_q():
    anterior = FastLearner(q=QTable(np.ones((2, 2))))
    novo = apply_warmup(forced_decision(RANDOM), anterior, MetaState())
    assert np.all(novo.q.values == 0.0)


def test_warmup_meta_liga_bc():
    meta = meta_categorico()
    decisao = WarmupDecision(META, "strict-test", bc_enabled=True)
    novo = apply_warmup(decisao, FastLearner(q=QTable(np.ones((2, 2)))), meta)
    assert np.all(novo.q.values == 0.0)
    assert np.array_equal(novo.bc_target.probs, meta.meta_policy.probs)


def test_warmup_meta_sem_meta_disponivel_falha():
    with pytest.raises(ContractViolation):
        apply_warmup(WarmupDecision(META, "strict-test"), FastLearner(q=QTable.zeros(2, 2)), MetaState())


def test_warmup_por_politica_copia_parametros_do_meta():
    meta_pi = GaussianPolicyTable(np.full((3, 1), 0.4), np.full((3, 1), 0.2))
    meta = MetaState(meta_pi, None, np.ones(3), 1)
    novo = apply_warmup(WarmupDecision(META, "strict-test"), FastLearner.fresh_policy(3, 1), meta)
    assert np.array_equal(novo.policy.mean, meta_pi.mean)
    assert np.array_equal(novo.policy.std, meta_pi.std)
    assert np.all(novo.policy.visits == 0)


# ================== CALIBRAÇÃO ==================

@pytest.mark.slow
def test_modo_estrito_controla_o_erro_tipo_um():
    rng = np.random.default_rng(42)
    tentativas, escolhas_meta = 10_000, 0
    for _ in range(tentativas):
        s = resumos(rng.normal(0, 1, 10), rng.normal(0, 1, 10), rng.normal(0, 1, 10))
        escolhas_meta += one_vs_all_test(s, 0.05, "strict-test").chosen == META
    assert escolhas_meta / tentativas <= 0.05 + 0.02


@pytest.mark.slow
def test_modo_estrito_detecta_meta_separado_por_tres_sigmas():
    rng = np.random.default_rng(43)
    tentativas, escolhas_meta = 2_000, 0
    for _ in range(tentativas):
        s = resumos(rng.normal(3, 1, 10), rng.normal(0, 1, 10), rng.normal(0, 1, 10))
        escolhas_meta += one_vs_all_test(s, 0.05, "strict-test").chosen == META
    assert escolhas_meta / tentativas >= 0.95


def test_ranking_empirico_acerta_meta_com_medias_separadas():
    rng = np.random.default_rng(7)
    tentativas, escolhas_meta = 1_000, 0
    for _ in range(tentativas):
        s = resumos(rng.normal(10, 1, 10), rng.normal(2, 1, 10), rng.normal(0, 1, 10))
        escolhas_meta += one_vs_all_test(s, 0.05, "empirical-ranking").chosen == META
    assert escolhas_meta / tentativas >= 0.99
