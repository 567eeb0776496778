#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes do fast learner: TD(0), ε-greedy, behavior cloning e REINFORCE gaussiano.
"""
import numpy as np
import pytest

from errors import ContractViolation
from fast_learner import (FastLearner, LearnerConfig, act_epsilon_greedy, bc_kl_gradient,
                          bc_regularized_q_update, epsilon_at, gaussian_log_likelihood,
                          gaussian_log_likelihood_grad, gaussian_policy_update, q_update)
from mdp_core import ContinuousEpisode, TabularMdp, Transition, value_iteration
from tables import CategoricalPolicyTable, GaussianPolicyTable, QTable


def test_td_altera_apenas_o_par_visitado():
    cfg = LearnerConfig(learning_rate=0.5, gamma=0.9)
    q = QTable(np.array([[0.0, 0.0], [2.0, 1.0]]))
    novo = q_update(q, Transition(0, 1, 1.0, 1, False), cfg)
    assert novo.values[0, 1] == pytest.approx(0.5 * (1.0 + 0.9 * 2.0))
    mascara = np.ones_like(q.values, dtype=bool)
    mascara[0, 1] = False
    assert np.array_equal(novo.values[mascara], q.values[mascara])
    assert q.values[0, 1] == 0.0


def test_td_sem_bootstrap_no_terminal():
    cfg = LearnerConfig(learning_rate=1.0)
    q = QTable(np.array([[0.0], [10.0]]))
    novo = q_update(q, Transition(0, 0, 1.0, 1, True), cfg)
    assert novo.values[0, 0] == 1.0


def test_epsilon_decai_linearmente():
    cfg = LearnerConfig(epsilon_start=1.0, epsilon_end=0.1, epsilon_decay_steps=100)
    assert epsilon_at(0, cfg) == 1.0
    assert epsilon_at(50, cfg) == pytest.approx(0.55)
    assert epsilon_at(1000, cfg) == pytest.approx(0.1)


def test_gulosa_com_epsilon_zero():
    cfg = LearnerConfig(epsilon_start=0.0, epsilon_end=0.0)
    q = QTable(np.array([[0.0, 3.0, 3.0]]))
    assert act_epsilon_greedy(q, 0, 0, cfg, np.random.default_rng(0)) == 1


def test_gradiente_de_bc_anula_quando_politicas_coincidem():
    q = QTable(np.array([[1.0, 0.0], [0.0, 2.0]]))
    meta = CategoricalPolicyTable(q.softmax())
    assert np.allclose(bc_kl_gradient(q, [0, 1, 1], meta, 1.0), 0.0)


def test_gradiente_de_bc_bate_com_diferencas_finitas():
    from distance import kl_categorical
    q = QTable(np.array([[0.3, -0.2, 0.1]]), temperature=0.7)
    meta = CategoricalPolicyTable(np.array([[0.6, 0.3, 0.1]]))
    analitico = bc_kl_gradient(q, [0], meta, 2.0)
    h = 1e-6
    for a in range(3):
        mais, menos = q.values.copy(), q.values.copy()
        mais[0, a] += h
        menos[0, a] -= h
        f = lambda v: 2.0 * kl_categorical(meta.probs, QTable(v, 0.7).softmax(), 0.0)[0]
        assert analitico[0, a] == pytest.approx((f(mais) - f(menos)) / (2 * h), abs=1e-6)


def test_bc_com_lambda_zero_reduz_a_td():
    cfg = LearnerConfig(bc_lambda=0.0)
    q = QTable(np.zeros((2, 2)))
    lote = [Transition(0, 1, 1.0, 1, False), Transition(1, 0, 0.0, 0, False)]
    meta = CategoricalPolicyTable(np.array([[1.0, 0.0], [0.0, 1.0]]))
    regularizado = bc_regularized_q_update(q, lote, meta, cfg)
    puro = q
    for tr in lote:
        puro = q_update(puro, tr, cfg)
    assert np.allclose(regularizado.values, puro.values)


def test_bc_puxa_para_a_politica_meta():
    cfg = LearnerConfig(bc_lambda=5.0, learning_rate=0.5)
    q = QTable(np.zeros((1, 2)))
    meta = CategoricalPolicyTable(np.array([[0.9, 0.1]]))
    lote = [Transition(0, 0, 0.0, 0, False)]
    novo = bc_regularized_q_update(q, lote, meta, cfg)
    assert novo.softmax()[0, 0] > 0.5


def test_bc_ativo_so_nos_primeiros_passos():
    cfg = LearnerConfig(bc_steps=10)
    aprendiz = FastLearner(q=QTable.zeros(2, 2), bc_target=CategoricalPolicyTable.uniform(2, 2))
    assert aprendiz.bc_active(cfg)
    aprendiz.steps = 10
    assert not aprendiz.bc_active(cfg)


def test_lambda_negativo_e_rejeitado():
    with pytest.raises(ContractViolation):
        LearnerConfig(bc_lambda=-1.0)


def test_l_maior_que_t_e_rejeitado():
    with pytest.raises(ContractViolation):
        LearnerConfig(bc_steps=500).check_budget(100)


# ================== RAMO POR POLÍTICA ==================

def test_gradiente_da_log_verossimilhanca():
    a, m, s = np.array([0.4]), np.array([0.1]), np.array([0.5])
    g_media, g_desvio = gaussian_log_likelihood_grad(a, m, s)
    h = 1e-6
    assert g_media[0] == pytest.approx((gaussian_log_likelihood(a, m + h, s)
                                        - gaussian_log_likelihood(a, m - h, s)) / (2 * h), abs=1e-6)
    assert g_desvio[0] == pytest.approx((gaussian_log_likelihood(a, m, s + h)
                                         - gaussian_log_likelihood(a, m, s - h)) / (2 * h), abs=1e-6)


def episodio(celulas, acoes, recompensas):
    ep = ContinuousEpisode()
    ep.cells.extend(celulas)
    ep.actions.extend(np.array([a]) for a in acoes)
    ep.rewards.extend(recompensas)
    return ep


def test_reinforce_move_a_media_para_a_acao_melhor():
    cfg = LearnerConfig(policy_learning_rate=0.1, gamma=0.9)
    pi = GaussianPolicyTable.fresh(1, 1)
    lote = [episodio([0], [1.0], [1.0]), episodio([0], [-1.0], [-1.0])]
    novo = gaussian_policy_update(pi, lote, cfg)
    assert novo.mean[0, 0] > 0.0
    assert pi.mean[0, 0] == 0.0


def test_sigma_fica_nos_limites():
    cfg = LearnerConfig(policy_learning_rate=100.0, sigma_min=0.05, sigma_max=1.5)
    pi = GaussianPolicyTable.fresh(1, 1)
    lote = [episodio([0], [0.0], [1.0]), episodio([0], [3.0], [-1.0])]
    novo = gaussian_policy_update(pi, lote, cfg)
    assert cfg.sigma_min <= novo.std[0, 0] <= cfg.sigma_max


def test_baseline_acompanha_os_retornos():
    cfg = LearnerConfig(gamma=0.5)
    pi = GaussianPolicyTable.fresh(2, 1)
    novo = gaussian_policy_update(pi, [episodio([0, 1], [0.0, 0.0], [1.0, 2.0])], cfg)
    # retornos descontados: G_0 = 1 + 0.5·2 = 2, G_1 = 2; primeira visita usa passo 1
    assert novo.baseline[0] == pytest.approx(2.0)
    assert novo.baseline[1] == pytest.approx(2.0)
    assert list(novo.visits) == [1, 1]


def test_lote_vazio_nao_altera():
    pi = GaussianPolicyTable.fresh(2, 1)
    novo = gaussian_policy_update(pi, [ContinuousEpisode()], LearnerConfig())
    assert np.array_equal(novo.mean, pi.mean) and np.array_equal(novo.std, pi.std)


def test_passo_natural_da_media():
    cfg = LearnerConfig(policy_learning_rate=0.1, gamma=0.9)
    pi = GaussianPolicyTable.fresh(1, 1)
    # retornos ±1 com baseline 0: vantagens já têm desvio 1
    novo = gaussian_policy_update(pi, [episodio([0], [1.0], [1.0]), episodio([0], [-1.0], [-1.0])], cfg)
    assert novo.mean[0, 0] == pytest.approx(0.1)
    assert novo.std[0, 0] == pytest.approx(1.0)


def test_retorno_zero_nao_altera_a_politica():
    pi = GaussianPolicyTable.fresh(2, 1)
    lote = [episodio([0, 1, 0], [0.3, -0.7, 1.2], [0.0, 0.0, 0.0])]
    novo = gaussian_policy_update(pi, lote, LearnerConfig(policy_learning_rate=0.5))
    assert np.array_equal(novo.mean, pi.mean)
    assert np.array_equal(novo.std, pi.std)


def test_media_deriva_para_acoes_recompensadas():
    cfg = LearnerConfig(policy_learning_rate=0.05)
    finais = []
    for semente in range(20):
        rng = np.random.default_rng(semente)
        pi = GaussianPolicyTable.fresh(1, 1)
        for _ in range(50):
            acoes = [float(pi.sample(0, rng)[0]) for _ in range(8)]
            pi = gaussian_policy_update(pi, [episodio([0], [a], [a]) for a in acoes], cfg)
        finais.append(pi.mean[0, 0])
    assert all(m > 0.0 for m in finais)


# ================== CONVERGÊNCIA ==================

def cadeia_deterministica():
    P = np.zeros((3, 2, 3))
    for s in range(3):
        P[s, 0, max(s - 1, 0)] = 1.0
        P[s, 1, min(s + 1, 2)] = 1.0
    R = np.zeros((3, 2))
    R[2, 1] = 1.0
    return TabularMdp(P, R, 0.9, np.array([1.0, 0.0, 0.0]))


def test_q_learning_converge_para_q_otimo():
    mdp = cadeia_deterministica()
    cfg = LearnerConfig(learning_rate=0.5, gamma=mdp.gamma)
    q = QTable.zeros(3, 2)
    for _ in range(500):
        for s in range(3):
            for a in range(2):
                proximo = int(np.argmax(mdp.transition[s, a]))
                q = q_update(q, Transition(s, a, float(mdp.reward[s, a]), proximo, False), cfg)
    otimo = value_iteration(mdp, tol=1e-10)
    assert np.max(np.abs(q.values - otimo.values)) <= 1e-3


def test_bc_converge_para_a_politica_meta():
    cfg = LearnerConfig(bc_lambda=5.0, learning_rate=0.5)
    meta = CategoricalPolicyTable(np.array([[0.7, 0.2, 0.1]]))
    q = QTable.zeros(1, 3)
    lote = [Transition(0, 0, 0.0, 0, True)]
    for _ in range(500):
        q = bc_regularized_q_update(q, lote, meta, cfg)
    assert 0.5 * np.abs(q.softmax()[0] - meta.probs[0]).sum() <= 1e-3


def test_epsilon_um_e_uniforme():
    cfg = LearnerConfig(epsilon_start=1.0, epsilon_end=1.0)
    q = QTable(np.array([[5.0, 0.0, 0.0, 0.0]]))
    rng = np.random.default_rng(0)
    n = 10_000
    contagem = np.bincount([act_epsilon_greedy(q, 0, 0, cfg, rng) for _ in range(n)], minlength=4)
    sigma = np.sqrt(n * 0.25 * 0.75)
    assert np.all(np.abs(contagem - n / 4) <= 3 * sigma)
