#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes de distância entre MDPs e do esquecimento catastrófico (CF).
"""
import math

import numpy as np
import pytest

from distance import DivergenceSpec, cf_pi, cf_q, kl_categorical, kl_diag_gaussian, mdp_distance
from errors import ContractViolation
from tables import GaussianPolicyTable, QTable, VisitationWeights


def pesos_uniformes(S, A):
    return VisitationWeights(np.full(S, 1.0 / S)).compose(np.full((S, A), 1.0 / A))


def test_cf_zero_quando_q_nao_muda():
    q = QTable(np.random.default_rng(0).normal(size=(4, 3)))
    assert cf_q(q, q.copy(), pesos_uniformes(4, 3)) == 0.0


def test_cf_quadratico_ponderado():
    q_prev = np.zeros((2, 2))
    q_cur = np.array([[1.0, 0.0], [0.0, 2.0]])
    w = VisitationWeights(np.array([0.5, 0.5]), np.array([[0.5, 0.0], [0.0, 0.5]]))
    assert cf_q(q_prev, q_cur, w) == pytest.approx(0.5 * 1.0 + 0.5 * 4.0)


def test_cf_sup_norm_so_olha_o_suporte():
    q_prev = np.zeros((2, 2))
    q_cur = np.array([[1.0, 0.0], [0.0, 9.0]])
    w = VisitationWeights(np.array([1.0, 0.0]), np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert cf_q(q_prev, q_cur, w, DivergenceSpec(q_metric="sup-norm")) == 1.0


def test_cf_q_exige_pesos_conjuntos():
    with pytest.raises(ContractViolation):
        cf_q(np.zeros((2, 2)), np.ones((2, 2)), VisitationWeights(np.array([0.5, 0.5])))


def test_pesos_que_nao_somam_um_sao_rejeitados():
    with pytest.raises(ContractViolation):
        VisitationWeights(np.array([0.5, 0.4]))


def test_kl_com_suporte_incompativel_e_infinito():
    mu = VisitationWeights(np.array([1.0]))
    anterior = np.array([[1.0, 0.0]])
    atual = np.array([[0.5, 0.5]])
    assert cf_pi(anterior, atual, mu, epsilon=0.0) == math.inf


def test_kl_com_piso_fica_finito():
    mu = VisitationWeights(np.array([1.0]))
    valor = cf_pi(np.array([[1.0, 0.0]]), np.array([[0.5, 0.5]]), mu)
    assert math.isfinite(valor) and valor > 0


def test_kl_categorico_nulo_para_distribuicoes_iguais():
    p = np.array([[0.2, 0.8], [0.5, 0.5]])
    assert np.allclose(kl_categorical(p, p, 0.0), 0.0)


def test_kl_gaussiano_em_forma_fechada():
    # KL(N(1, 1) ‖ N(0, 2)) = log 2 + (1 + 1) / 8 − 1/2
    valor = kl_diag_gaussian(np.array([1.0]), np.array([1.0]), np.array([0.0]), np.array([2.0]))
    assert float(valor) == pytest.approx(math.log(2.0) + 2.0 / 8.0 - 0.5)


def test_cf_gaussiano_com_w2():
    anterior = GaussianPolicyTable(np.zeros((2, 1)), np.ones((2, 1)))
    atual = GaussianPolicyTable(np.array([[1.0], [0.0]]), np.array([[1.0], [3.0]]))
    mu = VisitationWeights(np.array([0.25, 0.75]))
    valor = cf_pi(anterior, atual, mu, DivergenceSpec(pi_metric="squared-w2"))
    assert valor == pytest.approx(0.25 * 1.0 + 0.75 * 4.0)


def test_politicas_de_tipos_diferentes_sao_rejeitadas():
    with pytest.raises(ContractViolation):
        cf_pi(GaussianPolicyTable.fresh(1, 1), np.array([[1.0]]), VisitationWeights(np.array([1.0])))


def test_distancia_entre_mdps_e_simetrica_e_nula_na_diagonal():
    rng = np.random.default_rng(1)
    q1, q2 = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    assert mdp_distance(q1, q1) == 0.0
    assert mdp_distance(q1, q2) == pytest.approx(mdp_distance(q2, q1))
    assert mdp_distance(q1, q2, kind="policy") == pytest.approx(mdp_distance(q2, q1, kind="policy"))


def test_metrica_desconhecida_e_rejeitada():
    with pytest.raises(ContractViolation):
        DivergenceSpec(q_metric="l1")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
