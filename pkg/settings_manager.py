# -*- coding: utf-8 -*-
"""
Módulo para gerir o arquivo de configurações (settings.ini).
Lê e grava a configuração de uma execução e a converte em RunConfig.
Chaves ausentes assumem os padrões de config.py.
"""
from __future__ import annotations

import configparser
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

import config
from errors import ConfigError, ContractViolation
from fast_learner import LearnerConfig
from harness import PARAMETROS_ABLACAO, RunConfig
from mdp_core import GridworldSpec, PointmassSpec, TaskEntry, TaskSequence, aba_sequence, random_sequence

# Nome do arquivo de configuração
SETTINGS_FILE = "settings.ini"

# Estrutura das configurações (valores padrão)
CONFIG: Dict[str, Dict[str, str]] = {
    'Geral': {
        'metodo': 'FAME-Q',
        'semente': '0',
        'saida': 'resultados',
        'checkpoint': 'false',
    },
    'Sequencia': {
        'gerador': 'gridworld',
        'tipo': 'aba',
        'sementes': '1, 2',
        'n_tarefas': '3',
        'semente_sequencia': '0',
        'passos_por_tarefa': '2000',
    },
    'Gridworld': {
        'largura': '5',
        'altura': '5',
        'densidade_paredes': '0.1',
        'slip': '0.0',
        'gamma': '0.9',
        'n_penalidades': '0',
        'recompensa_objetivo': '100.0',
        'recompensa_penalidade': '-100.0',
        'recompensa_passo': '0.0',
    },
    'Pointmass': {
        'dimensao': '1',
        'limite_estado': '1.0',
        'acao_maxima': '0.25',
        'ruido': '0.0',
        'horizonte': '20',
        'raio_sucesso': '0.1',
        'celulas_grade': '11',
        'distancia_minima_objetivo': '0.5',
    },
    'Aprendiz': {
        'taxa_aprendizado': str(config.TAXA_APRENDIZADO_Q),
        'epsilon_inicial': str(config.EPSILON_INICIAL),
        'epsilon_final': str(config.EPSILON_FINAL),
        'fracao_decaimento_epsilon': str(config.FRACAO_DECAIMENTO_EPSILON),
        'gamma': '0.9',
        'taxa_politica': str(config.TAXA_APRENDIZADO_POLITICA),
        'replay_batch': str(config.REPLAY_BATCH),
        'episodios_por_atualizacao': str(config.EPISODIOS_POR_ATUALIZACAO),
    },
    'FAME': {
        'lambda_bc': str(config.BC_LAMBDA_PADRAO),
        'fracao_bc': str(config.FRACAO_BC_STEPS),
        'fracao_meta_buffer': str(config.FRACAO_META_BUFFER),
        'temperatura': str(config.TEMPERATURA_PADRAO),
        'integracao_valor': 'kl',
        'modo_warmup': config.MODO_WARMUP_PADRAO,
        'alpha': str(config.ALPHA_TESTE),
        'episodios_avaliacao': str(config.EPISODIOS_AVALIACAO_WARMUP),
        'horizonte_avaliacao': str(config.HORIZONTE_AVALIACAO_WARMUP),
    },
    'Avaliacao': {
        'pontos_por_tarefa': str(config.PONTOS_POR_TAREFA),
        'episodios_por_ponto': str(config.EPISODIOS_POR_PONTO),
        'horizonte_episodio': str(config.HORIZONTE_EPISODIO),
    },
    'Ablacao': {
        'parametro': 'n_eval',
        'valores': '5, 10, 20',
        'sementes': '0, 1, 2',
    },
}


def _parser_padrao() -> configparser.ConfigParser:
    config_parser = configparser.ConfigParser()
    config_parser.read_dict(CONFIG)
    return config_parser


def carregar_configuracoes(caminho: str | Path = SETTINGS_FILE) -> configparser.ConfigParser:
    """
    Carrega as configurações do arquivo. Se o arquivo não existir, cria com
    os valores padrão. Seções e chaves ausentes ficam com os padrões.
    """
    caminho = Path(caminho)
    if not caminho.exists():
        print(f"Arquivo '{caminho}' não encontrado. Criando com valores padrão.")
        salvar_configuracoes(_parser_padrao(), caminho)
    config_parser = _parser_padrao()
    try:
        config_parser.read(caminho, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(f"Arquivo de configuração inválido '{caminho}': {e}") from e
    return config_parser


def salvar_configuracoes(config_parser: configparser.ConfigParser, caminho: str | Path = SETTINGS_FILE) -> None:
    """Salva as configurações no arquivo."""
    Path(caminho).parent.mkdir(parents=True, exist_ok=True)
    with open(caminho, 'w', encoding='utf-8') as configfile:
        config_parser.write(configfile)
    logging.info(f"Configurações salvas em '{caminho}'.")


def obter_configuracao(config_parser: configparser.ConfigParser, secao: str, chave: str) -> str | None:
    """Retorna o valor de uma chave de configuração."""
    return config_parser.get(secao, chave, fallback=None)

# ================== CONVERSÃO PARA RunConfig ==================

def _lista_inteiros(texto: str) -> Tuple[int, ...]:
    return tuple(int(x) for x in texto.replace(';', ',').split(',') if x.strip())


def _montar_sequencia(cp: configparser.ConfigParser) -> TaskSequence:
    sec = cp['Sequencia']
    gerador = sec.get('gerador').strip().lower()
    T = sec.getint('passos_por_tarefa')
    if gerador == 'gridworld':
        g = cp['Gridworld']
        spec = GridworldSpec(
            width=g.getint('largura'), height=g.getint('altura'),
            wall_density=g.getfloat('densidade_paredes'), slip=g.getfloat('slip'),
            gamma=g.getfloat('gamma'), n_penalty=g.getint('n_penalidades'),
            goal_reward=g.getfloat('recompensa_objetivo'), penalty_reward=g.getfloat('recompensa_penalidade'),
            step_reward=g.getfloat('recompensa_passo'),
        )
    elif gerador == 'pointmass':
        p = cp['Pointmass']
        spec = PointmassSpec(
            state_dim=p.getint('dimensao'), state_limit=p.getfloat('limite_estado'),
            max_action=p.getfloat('acao_maxima'), noise_std=p.getfloat('ruido'),
            horizon=p.getint('horizonte'), success_radius=p.getfloat('raio_sucesso'),
            grid_cells=p.getint('celulas_grade'), min_goal_distance=p.getfloat('distancia_minima_objetivo'),
        )
    else:
        raise ConfigError(f"Gerador desconhecido: '{gerador}' (use gridworld ou pointmass).")

    sementes = _lista_inteiros(sec.get('sementes'))
    tipo = sec.get('tipo').strip().lower()
    if tipo == 'aba':
        if len(sementes) != 2:
            raise ConfigError("Sequência ABA exige exatamente duas sementes de ambiente.")
        return aba_sequence(gerador, spec, sementes[0], sementes[1], T)
    if tipo == 'random':
        return random_sequence(gerador, spec, sementes, sec.getint('n_tarefas'), T, sec.getint('semente_sequencia'))
    if tipo == 'lista':
        return TaskSequence(tuple(TaskEntry(gerador, s, spec) for s in sementes), T)
    raise ConfigError(f"Tipo de sequência desconhecido: '{tipo}' (use aba, random ou lista).")


def montar_run_config(cp: configparser.ConfigParser, seed: Optional[int] = None, method: Optional[str] = None,
                      output: Optional[str] = None) -> RunConfig:
    """Converte o INI em RunConfig, aplicando as sobrescritas da CLI."""
    try:
        sequencia = _montar_sequencia(cp)
        T = sequencia.steps_per_task
        a, f, av = cp['Aprendiz'], cp['FAME'], cp['Avaliacao']
        gamma = cp['Gridworld'].getfloat('gamma') if sequencia.generator == 'gridworld' else a.getfloat('gamma')
        learner = LearnerConfig(
            learning_rate=a.getfloat('taxa_aprendizado'),
            epsilon_start=a.getfloat('epsilon_inicial'), epsilon_end=a.getfloat('epsilon_final'),
            epsilon_decay_steps=round(a.getfloat('fracao_decaimento_epsilon') * T),
            bc_lambda=f.getfloat('lambda_bc'), bc_steps=round(f.getfloat('fracao_bc') * T),
            gamma=gamma, temperature=f.getfloat('temperatura'),
            policy_learning_rate=a.getfloat('taxa_politica'),
            replay_batch=a.getint('replay_batch'), episodes_per_update=a.getint('episodios_por_atualizacao'),
        )
        return RunConfig(
            method=method or cp.get('Geral', 'metodo'),
            sequence=sequencia,
            learner=learner,
            tail_size=max(1, round(f.getfloat('fracao_meta_buffer') * T)),
            n_eval=f.getint('episodios_avaliacao'),
            eval_horizon=f.getint('horizonte_avaliacao'),
            alpha=f.getfloat('alpha'),
            warmup_mode=f.get('modo_warmup').strip(),
            value_integration=f.get('integracao_valor').strip().lower(),
            seed=cp.getint('Geral', 'semente') if seed is None else seed,
            output_dir=output or cp.get('Geral', 'saida'),
            points_per_task=av.getint('pontos_por_tarefa'),
            episodes_per_point=av.getint('episodios_por_ponto'),
            episode_horizon=av.getint('horizonte_episodio'),
            checkpoint=cp.getboolean('Geral', 'checkpoint'),
        )
    except ConfigError:
        raise
    except (ValueError, KeyError, configparser.Error) as e:
        # ContractViolation herda de ValueError: specs inválidas caem aqui também
        raise ConfigError(f"Configuração inválida: {e}") from e


def ler_ablacao(cp: configparser.ConfigParser) -> Tuple[str, Tuple[float, ...], Tuple[int, ...]]:
    """Lê [Ablacao]: parâmetro varrido, valores e sementes."""
    sec = cp['Ablacao']
    parametro = sec.get('parametro').strip()
    if parametro not in PARAMETROS_ABLACAO:
        raise ConfigError(f"Parâmetro de ablação desconhecido: '{parametro}'. "
                          f"Opções: {', '.join(PARAMETROS_ABLACAO)}")
    try:
        valores = tuple(float(x) for x in sec.get('valores').replace(';', ',').split(',') if x.strip())
        sementes = _lista_inteiros(sec.get('sementes'))
    except ValueError as e:
        raise ConfigError(f"Ablação inválida: {e}") from e
    if not valores or not sementes:
        raise ConfigError("A ablação exige ao menos um valor e uma semente.")
    return parametro, valores, sementes
