#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes do núcleo de MDPs: geradores, contrato de simulação e solvers exatos.
"""
import numpy as np
import pytest

from errors import ContractViolation, GenerationFailure
from mdp_core import (GridworldSpec, PointmassSpec, TabularMdp, aba_sequence, continuous_step,
                      discounted_visitation, generate_gridworld, generate_pointmass, greedy_policy,
                      mdp_from_flat, mdp_to_flat, policy_evaluation, random_sequence, run_continuous_episode,
                      run_tabular_episode, step, value_iteration)


def mdp_duas_acoes(gamma=0.9):
    """Estado 0: ação 0 fica (r=0), ação 1 vai ao terminal 1 (r=1)."""
    P = np.zeros((2, 2, 2))
    P[0, 0, 0] = 1.0
    P[0, 1, 1] = 1.0
    P[1, :, 1] = 1.0
    R = np.array([[0.0, 1.0], [0.0, 0.0]])
    return TabularMdp(P, R, gamma, np.array([1.0, 0.0]), frozenset({1}))


def mdp_ciclo(gamma=0.8):
    """Três estados sem terminal, transições estocásticas."""
    rng = np.random.default_rng(7)
    P = rng.random((3, 2, 3))
    P /= P.sum(axis=2, keepdims=True)
    R = rng.normal(size=(3, 2))
    return TabularMdp(P, R, gamma, np.array([0.5, 0.5, 0.0]))


# ================== CONTRATO DO MDP ==================

def test_linha_nao_estocastica_e_rejeitada():
    P = np.zeros((2, 1, 2))
    P[0, 0, 0] = 0.9
    P[1, 0, 1] = 1.0
    with pytest.raises(ContractViolation):
        TabularMdp(P, np.zeros((2, 1)), 0.9, np.array([1.0, 0.0]))


def test_gamma_fora_do_intervalo_e_rejeitado():
    mdp = mdp_duas_acoes()
    with pytest.raises(ContractViolation):
        TabularMdp(mdp.transition, mdp.reward, 1.0, mdp.start_dist, mdp.terminal)


def test_terminal_precisa_ser_auto_laco():
    P = np.zeros((2, 1, 2))
    P[:, 0, 0] = 1.0
    with pytest.raises(ContractViolation):
        TabularMdp(P, np.zeros((2, 1)), 0.9, np.array([1.0, 0.0]), frozenset({1}))


def test_step_em_terminal_falha():
    mdp = mdp_duas_acoes()
    with pytest.raises(ContractViolation):
        step(mdp, 1, 0, np.random.default_rng(0))


def test_step_acao_invalida_falha():
    with pytest.raises(ContractViolation):
        step(mdp_duas_acoes(), 0, 5, np.random.default_rng(0))


def test_step_deterministico():
    proximo, recompensa, done = step(mdp_duas_acoes(), 0, 1, np.random.default_rng(0))
    assert (proximo, recompensa, done) == (1, 1.0, True)


# ================== GERADORES ==================

def test_gridworld_e_funcao_da_semente():
    spec = GridworldSpec(width=5, height=5, wall_density=0.2, slip=0.1)
    a, b = generate_gridworld(spec, 3), generate_gridworld(spec, 3)
    assert np.array_equal(a.transition, b.transition)
    assert np.array_equal(a.reward, b.reward)
    assert a.terminal == b.terminal


def test_gridworld_gerado_respeita_invariantes():
    spec = GridworldSpec(width=4, height=3, wall_density=0.2, slip=0.2, n_penalty=1)
    mdp = generate_gridworld(spec, 11)
    assert mdp.n_states == 12 and mdp.n_actions == 4
    assert np.allclose(mdp.transition.sum(axis=2), 1.0, atol=1e-12)
    for s in mdp.terminal:
        assert np.all(mdp.transition[s, :, s] == 1.0)
        assert np.all(mdp.reward[s] == 0.0)
    assert mdp.start_dist[0] == 1.0


def test_gridworld_desconectado_esgota_tentativas():
    spec = GridworldSpec(width=5, height=5, wall_density=0.9, goal=(4, 4), max_retries=3)
    with pytest.raises(GenerationFailure):
        generate_gridworld(spec, 0)


def test_grid_maior_que_o_limite_e_rejeitado():
    with pytest.raises(ContractViolation):
        GridworldSpec(width=13, height=2)


def test_pointmass_respeita_distancia_minima():
    spec = PointmassSpec(state_dim=2, min_goal_distance=0.5)
    for semente in range(5):
        tarefa = generate_pointmass(spec, semente)
        assert np.linalg.norm(tarefa.goal - tarefa.start) >= 0.5
        assert np.all(np.abs(tarefa.goal) <= spec.state_limit)
        assert tarefa.n_cells == spec.grid_cells ** 2


def test_sequencia_aba_repete_a_primeira_tarefa():
    seq = aba_sequence("gridworld", GridworldSpec(), 1, 2, 100)
    assert [t.seed for t in seq.tasks] == [1, 2, 1]
    assert seq.n_tasks == 3 and seq.steps_per_task == 100


def test_sequencia_aleatoria_reprodutivel():
    a = random_sequence("gridworld", GridworldSpec(), [1, 2, 3], 6, 100, seed=4)
    b = random_sequence("gridworld", GridworldSpec(), [1, 2, 3], 6, 100, seed=4)
    assert [t.seed for t in a.tasks] == [t.seed for t in b.tasks]
    assert set(t.seed for t in a.tasks) <= {1, 2, 3}


# ================== SIMULAÇÃO CONTÍNUA ==================

def test_acao_e_limitada_pelos_bounds():
    tarefa = generate_pointmass(PointmassSpec(goal=(0.9,), max_action=0.25), 0)
    proximo, _, _ = continuous_step(tarefa, np.zeros(1), np.array([5.0]), np.random.default_rng(0))
    assert proximo[0] == pytest.approx(0.25)


def test_sucesso_no_inicio_tem_zero_passos():
    tarefa = generate_pointmass(PointmassSpec(goal=(0.0,), start=(0.05,)), 0)
    episodio = run_continuous_episode(tarefa, lambda x: np.zeros(1), np.random.default_rng(0))
    assert episodio.success and episodio.steps == 0


def test_episodio_tabular_para_no_terminal():
    episodio = run_tabular_episode(mdp_duas_acoes(), lambda s: 1, np.random.default_rng(0), horizon=10)
    assert episodio.steps == 1 and episodio.reached_terminal
    assert episodio.total_return == 1.0


# ================== SOLVERS ==================

def test_iteracao_de_valor_no_caso_analitico():
    q = value_iteration(mdp_duas_acoes(0.9), tol=1e-10)
    assert q.values[0, 1] == pytest.approx(1.0, abs=1e-9)
    assert q.values[0, 0] == pytest.approx(0.9, abs=1e-9)
    assert np.all(q.values[1] == 0.0)


def test_residuo_de_bellman_abaixo_da_tolerancia():
    mdp = mdp_ciclo()
    q = value_iteration(mdp, tol=1e-6)
    bellman = mdp.reward + mdp.gamma * (mdp.transition @ q.values.max(axis=1))
    assert np.max(np.abs(bellman - q.values)) <= 1e-6


def test_avaliacao_da_politica_gulosa_bate_com_q_otimo():
    mdp = mdp_ciclo()
    q = value_iteration(mdp, tol=1e-10)
    _, q_pi = policy_evaluation(mdp, greedy_policy(q))
    assert np.allclose(q_pi, q.values, atol=1e-8)


def test_empate_na_gulosa_vai_para_menor_indice():
    assert greedy_policy(np.array([[1.0, 1.0, 0.0]]))[0] == 0


def test_visitacao_exata_soma_um_e_ignora_terminais():
    mdp = generate_gridworld(GridworldSpec(width=3, height=3, wall_density=0.2), 2)
    mu = discounted_visitation(mdp, np.full((mdp.n_states, mdp.n_actions), 0.25), "exact")
    assert mu.state.sum() == pytest.approx(1.0, abs=1e-10)
    assert np.all(mu.state[list(mdp.terminal)] == 0.0)


def test_visitacao_empirica_aproxima_a_exata():
    mdp = mdp_ciclo()
    politica = np.full((3, 2), 0.5)
    exata = discounted_visitation(mdp, politica, "exact")
    empirica = discounted_visitation(mdp, politica, "empirical", np.random.default_rng(0), n_steps=100_000)
    assert np.allclose(exata.state, empirica.state, atol=0.02)


def test_layout_plano_preserva_o_mdp():
    mdp = generate_gridworld(GridworldSpec(width=3, height=2, slip=0.1), 5)
    copia = mdp_from_flat(mdp_to_flat(mdp))
    assert np.array_equal(copia.transition, mdp.transition)
    assert copia.terminal == mdp.terminal and copia.gamma == mdp.gamma


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
