# -*- coding: utf-8 -*-
"""
Núcleo de MDPs: MDPs tabulares, tarefas contínuas de ponto-massa, geradores
procedurais de sequências de tarefas, solvers exatos (iteração de valor,
avaliação de política, visitação descontada) e o contrato de simulação.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from errors import ContractViolation, GenerationFailure
from tables import QTable, VisitationWeights, softmax_rows

Cell = Tuple[int, int]
StochasticPolicy = np.ndarray      # [estado][ação], linhas no simplex
DeterministicPolicy = np.ndarray   # [estado] -> índice da ação


# ================== TIPOS ==================

@dataclass(frozen=True, eq=False)
class TabularMdp:
    """MDP finito ⟨S, A, P, R, γ⟩ com distribuição inicial e estados terminais."""
    transition: np.ndarray
    reward: np.ndarray
    gamma: float
    start_dist: np.ndarray
    terminal: FrozenSet[int] = frozenset()
    name: str = ""

    def __post_init__(self) -> None:
        transition = np.array(self.transition, dtype=float)
        reward = np.array(self.reward, dtype=float)
        start = np.array(self.start_dist, dtype=float)
        for arr in (transition, reward, start):
            arr.setflags(write=False)
        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "reward", reward)
        object.__setattr__(self, "start_dist", start)
        object.__setattr__(self, "terminal", frozenset(int(s) for s in self.terminal))
        self.validate()

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]

    @cached_property
    def cdf(self) -> np.ndarray:
        acumulada = np.cumsum(self.transition, axis=2)
        acumulada[..., -1] = 1.0
        return acumulada

    @cached_property
    def terminal_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_states, dtype=bool)
        mask[list(self.terminal)] = True
        return mask

    def validate(self) -> None:
        """Verifica todos os invariantes de um MDP tabular."""
        P, R = self.transition, self.reward
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ContractViolation(f"Tensor de transição com formato inválido: {P.shape}.")
        if R.shape != P.shape[:2]:
            raise ContractViolation("Tabela de recompensas não bate com [estado][ação].")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=2) - 1.0) > config.TOLERANCIA_LINHA_ESTOCASTICA):
            raise ContractViolation("Linhas de transição devem ser estocásticas (soma 1 ± 1e-12).")
        if not np.all(np.isfinite(R)):
            raise ContractViolation("Recompensas devem ser finitas.")
        if not 0.0 < self.gamma < 1.0:
            raise ContractViolation(f"γ deve estar em (0,1) (recebido {self.gamma}).")
        if self.start_dist.shape != (P.shape[0],) or np.any(self.start_dist < 0) \
                or abs(self.start_dist.sum() - 1.0) > config.TOLERANCIA_SOMA:
            raise ContractViolation("Distribuição inicial deve ser um vetor de probabilidade sobre S.")
        for s in self.terminal:
            if not 0 <= s < P.shape[0]:
                raise ContractViolation(f"Estado terminal fora de S: {s}.")
            if np.any(P[s, :, s] != 1.0) or np.any(R[s] != 0.0):
                raise ContractViolation(f"Estado terminal {s} deve ser auto-laço com recompensa zero.")


@dataclass(frozen=True)
class GridworldSpec:
    """Parâmetros do gerador de gridworlds (células como (linha, coluna))."""
    width: int = 5
    height: int = 5
    wall_density: float = 0.0
    slip: float = 0.0
    gamma: float = 0.9
    goal: Optional[Cell] = None
    start: Optional[Cell] = (0, 0)
    n_penalty: int = 0
    penalty_cells: Tuple[Cell, ...] = ()
    goal_reward: float = 1.0
    penalty_reward: float = -1.0
    step_reward: float = 0.0
    max_retries: int = config.TENTATIVAS_GERACAO

    def __post_init__(self) -> None:
        if not (1 <= self.width <= config.LADO_MAXIMO_GRID and 1 <= self.height <= config.LADO_MAXIMO_GRID):
            raise ContractViolation(f"Grid limitado a {config.LADO_MAXIMO_GRID}x{config.LADO_MAXIMO_GRID}.")
        if self.width * self.height < 2:
            raise ContractViolation("O grid precisa de ao menos duas células.")
        if not 0.0 <= self.slip < 0.5:
            raise ContractViolation(f"slip deve estar em [0, 0.5) (recebido {self.slip}).")
        if not 0.0 <= self.wall_density < 1.0:
            raise ContractViolation("wall_density deve estar em [0, 1).")
        if not 0.0 < self.gamma < 1.0:
            raise ContractViolation("γ deve estar em (0,1).")
        for celula in (self.goal, self.start, *self.penalty_cells):
            if celula is not None and not self.contains(celula):
                raise ContractViolation(f"Célula fora do grid: {celula}.")

    def contains(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def index(self, cell: Cell) -> int:
        return cell[0] * self.width + cell[1]


@dataclass(frozen=True)
class GridLayout:
    start: Cell
    goal: Cell
    walls: FrozenSet[Cell]
    penalties: FrozenSet[Cell]


@dataclass(frozen=True)
class PointmassSpec:
    """Parâmetros do gerador de tarefas contínuas de ponto-massa (1-D ou 2-D)."""
    state_dim: int = 1
    state_limit: float = 1.0
    max_action: float = 0.25
    noise_std: float = 0.0
    horizon: int = 20
    success_radius: float = 0.1
    grid_cells: int = 11
    goal: Optional[Tuple[float, ...]] = None
    start: Optional[Tuple[float, ...]] = None
    min_goal_distance: float = 0.0
    max_retries: int = config.TENTATIVAS_GERACAO

    def __post_init__(self) -> None:
        if self.state_dim not in (1, 2):
            raise ContractViolation("state_dim deve ser 1 ou 2.")
        if self.success_radius <= 0 or self.horizon < 1 or self.max_action <= 0:
            raise ContractViolation("success_radius > 0, horizon ≥ 1 e max_action > 0 são obrigatórios.")
        if self.noise_std < 0 or self.state_limit <= 0 or self.grid_cells < 1:
            raise ContractViolation("noise_std ≥ 0, state_limit > 0 e grid_cells ≥ 1 são obrigatórios.")
        for vetor in (self.goal, self.start):
            if vetor is not None and len(vetor) != self.state_dim:
                raise ContractViolation("goal/start devem ter state_dim componentes.")


@dataclass(frozen=True, eq=False)
class ContinuousTask:
    """Tarefa de alcance com ações contínuas e grade de estados para políticas tabulares."""
    state_dim: int
    goal: np.ndarray
    start: np.ndarray
    action_bounds: np.ndarray     # [dimensão][low, high]
    state_bounds: np.ndarray      # [dimensão][low, high]
    dynamics_noise_std: float
    horizon: int
    success_radius: float
    grid_cells: int

    def __post_init__(self) -> None:
        if self.success_radius <= 0 or self.horizon < 1:
            raise ContractViolation("success_radius > 0 e horizon ≥ 1 são obrigatórios.")
        if np.any(self.action_bounds[:, 0] >= self.action_bounds[:, 1]):
            raise ContractViolation("Cada dimensão de ação exige low < high.")

    @property
    def action_dim(self) -> int:
        return self.state_dim

    @property
    def n_cells(self) -> int:
        return self.grid_cells ** self.state_dim

    @cached_property
    def state_grid(self) -> Tuple[np.ndarray, ...]:
        """Bordas internas da discretização por dimensão."""
        return tuple(np.linspace(lo, hi, self.grid_cells + 1)[1:-1] for lo, hi in self.state_bounds)

    def cell_index(self, state: np.ndarray) -> int:
        indice = 0
        for d, bordas in enumerate(self.state_grid):
            indice = indice * self.grid_cells + int(np.searchsorted(bordas, state[d], side="right"))
        return indice

    def is_success(self, state: np.ndarray) -> bool:
        return float(np.linalg.norm(state - self.goal)) <= self.success_radius


@dataclass(frozen=True)
class TaskEntry:
    """Uma tarefa da sequência: identificador do gerador + semente + parâmetros."""
    generator: str
    seed: int
    spec: Union[GridworldSpec, PointmassSpec]

    def __post_init__(self) -> None:
        esperado = GridworldSpec if self.generator == "gridworld" else PointmassSpec
        if self.generator not in ("gridworld", "pointmass") or not isinstance(self.spec, esperado):
            raise ContractViolation(f"Gerador desconhecido ou parâmetros de gerador incompatíveis: {self.generator}.")

    def build(self) -> Union[TabularMdp, "ContinuousTask"]:
        if self.generator == "gridworld":
            return generate_gridworld(self.spec, self.seed)  # type: ignore[arg-type]
        return generate_pointmass(self.spec, self.seed)  # type: ignore[arg-type]


@dataclass(frozen=True)
class TaskSequence:
    """K tarefas ordenadas (com repetições permitidas) e T passos por tarefa."""
    tasks: Tuple[TaskEntry, ...]
    steps_per_task: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if len(self.tasks) < 1:
            raise ContractViolation("A sequência precisa de ao menos uma tarefa.")
        if self.steps_per_task < 1:
            raise ContractViolation("steps_per_task deve ser ≥ 1.")
        if len({t.generator for t in self.tasks}) != 1:
            raise ContractViolation("Todas as tarefas devem compartilhar o mesmo gerador (mesmos S e A).")

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def generator(self) -> str:
        return self.tasks[0].generator

    def build(self) -> List[Union[TabularMdp, ContinuousTask]]:
        return [entrada.build() for entrada in self.tasks]


@dataclass(frozen=True)
class Transition:
    state: Union[int, np.ndarray]
    action: Union[int, np.ndarray]
    reward: float
    next_state: Union[int, np.ndarray]
    done: bool
    task_id: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.reward):
            raise ContractViolation("Recompensa de transição deve ser finita.")


@dataclass
class TabularEpisode:
    transitions: List[Transition] = field(default_factory=list)
    total_return: float = 0.0
    reached_terminal: bool = False

    @property
    def steps(self) -> int:
        return len(self.transitions)


@dataclass
class ContinuousEpisode:
    cells: List[int] = field(default_factory=list)
    actions: List[np.ndarray] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    transitions: List[Transition] = field(default_factory=list)
    success: bool = False

    @property
    def steps(self) -> int:
        return len(self.rewards)

    @property
    def total_return(self) -> float:
        return float(sum(self.rewards))


# ================== GERADORES ==================

def _sortear_layout(spec: GridworldSpec, rng: np.random.Generator) -> Optional[GridLayout]:
    celulas = [(r, c) for r in range(spec.height) for c in range(spec.width)]

    def sortear(candidatas: List[Cell]) -> Cell:
        return candidatas[int(rng.integers(len(candidatas)))]

    start = spec.start if spec.start is not None else sortear(celulas)
    livres = [c for c in celulas if c != start]
    goal = spec.goal if spec.goal is not None else sortear(livres)
    if goal == start:
        return None
    livres = [c for c in livres if c != goal]

    if spec.penalty_cells:
        penalidades = frozenset(c for c in spec.penalty_cells if c not in (start, goal))
    else:
        n = min(spec.n_penalty, len(livres))
        escolhidas = rng.permutation(len(livres))[:n] if n else []
        penalidades = frozenset(livres[i] for i in escolhidas)
    livres = [c for c in livres if c not in penalidades]

    sorteio = rng.random(len(livres))
    paredes = frozenset(c for c, u in zip(livres, sorteio) if u < spec.wall_density)
    return GridLayout(start, goal, paredes, penalidades)


def _conectado(spec: GridworldSpec, layout: GridLayout) -> bool:
    """Todas as células abertas alcançáveis a partir do início."""
    abertas = {(r, c) for r in range(spec.height) for c in range(spec.width)} - layout.walls
    vistos = {layout.start}
    fila = deque([layout.start])
    while fila:
        r, c = fila.popleft()
        for dr, dc in config.DELTAS_GRID:
            viz = (r + dr, c + dc)
            if viz in abertas and viz not in vistos:
                vistos.add(viz)
                fila.append(viz)
    return vistos == abertas


def _construir_gridworld(spec: GridworldSpec, layout: GridLayout, seed: int) -> TabularMdp:
    S, A = spec.width * spec.height, len(config.DELTAS_GRID)
    P = np.zeros((S, A, S))
    R = np.zeros((S, A))
    terminais = {spec.index(c) for c in layout.walls} | {spec.index(layout.goal)}

    recompensa_celula = np.zeros(S)
    recompensa_celula[spec.index(layout.goal)] = spec.goal_reward
    for c in layout.penalties:
        recompensa_celula[spec.index(c)] = spec.penalty_reward

    def mover(cell: Cell, direcao: int) -> int:
        dr, dc = config.DELTAS_GRID[direcao]
        alvo = (cell[0] + dr, cell[1] + dc)
        if not spec.contains(alvo) or alvo in layout.walls:
            return spec.index(cell)
        return spec.index(alvo)

    for r in range(spec.height):
        for c in range(spec.width):
            s = spec.index((r, c))
            if s in terminais:
                P[s, :, s] = 1.0
                continue
            for a in range(A):
                P[s, a, mover((r, c), a)] += 1.0 - spec.slip
                if spec.slip > 0:
                    for outra in range(A):
                        if outra != a:
                            P[s, a, mover((r, c), outra)] += spec.slip / (A - 1)
                R[s, a] = P[s, a] @ recompensa_celula + spec.step_reward

    start = np.zeros(S)
    start[spec.index(layout.start)] = 1.0
    return TabularMdp(P, R, spec.gamma, start, frozenset(terminais),
                      name=f"grid{spec.height}x{spec.width}-seed{seed}")


def generate_gridworld(spec: GridworldSpec, seed: int) -> TabularMdp:
    """
    Gera um gridworld conectado, função determinística de (spec, seed).
    Layouts desconectados são descartados e sorteados de novo até
    spec.max_retries tentativas.
    """
    rng = np.random.default_rng(seed)
    for tentativa in range(spec.max_retries):
        layout = _sortear_layout(spec, rng)
        if layout is not None and _conectado(spec, layout):
            return _construir_gridworld(spec, layout, seed)
        logging.debug(f"Layout {tentativa + 1} descartado (semente {seed}).")
    raise GenerationFailure(f"Nenhum gridworld conectado após {spec.max_retries} tentativas (semente {seed}).")


def generate_pointmass(spec: PointmassSpec, seed: int) -> ContinuousTask:
    """Gera uma tarefa de alcance; o objetivo é sorteado dentro dos limites."""
    rng = np.random.default_rng(seed)
    D = spec.state_dim
    start = np.zeros(D) if spec.start is None else np.asarray(spec.start, dtype=float)
    for _ in range(spec.max_retries):
        if spec.goal is not None:
            goal = np.asarray(spec.goal, dtype=float)
        else:
            goal = rng.uniform(-spec.state_limit, spec.state_limit, size=D)
        if np.linalg.norm(goal - start) >= spec.min_goal_distance:
            break
    else:
        raise GenerationFailure(f"Objetivo a ≥ {spec.min_goal_distance} do início não encontrado (semente {seed}).")

    limites_estado = np.tile([-spec.state_limit, spec.state_limit], (D, 1))
    limites_acao = np.tile([-spec.max_action, spec.max_action], (D, 1))
    return ContinuousTask(D, goal, start, limites_acao, limites_estado, spec.noise_std,
                          spec.horizon, spec.success_radius, spec.grid_cells)


def aba_sequence(generator: str, spec: Union[GridworldSpec, PointmassSpec],
                 seed_a: int, seed_b: int, steps_per_task: int) -> TaskSequence:
    """Sequência A, B, A (reencontro de uma tarefa conhecida)."""
    entradas = tuple(TaskEntry(generator, s, spec) for s in (seed_a, seed_b, seed_a))
    return TaskSequence(entradas, steps_per_task)


def random_sequence(generator: str, spec: Union[GridworldSpec, PointmassSpec],
                    seed_pool: Sequence[int], n_tasks: int, steps_per_task: int,
                    seed: int) -> TaskSequence:
    """Sorteia K tarefas (com repetição) de um conjunto de sementes de ambiente."""
    rng = np.random.default_rng(seed)
    escolhidas = rng.choice(np.asarray(seed_pool), size=n_tasks, replace=True)
    return TaskSequence(tuple(TaskEntry(generator, int(s), spec) for s in escolhidas), steps_per_task)


# ================== SIMULAÇÃO ==================

def sample_start(mdp: TabularMdp, rng: np.random.Generator) -> int:
    acumulada = np.cumsum(mdp.start_dist)
    return int(min(np.searchsorted(acumulada, rng.random(), side="right"), mdp.n_states - 1))


def step(mdp: TabularMdp, state: int, action: int, rng: np.random.Generator) -> Tuple[int, float, bool]:
    """Um passo do MDP: (próximo estado, recompensa, done)."""
    if state in mdp.terminal:
        raise ContractViolation(f"step chamado em estado terminal {state}.")
    if not 0 <= action < mdp.n_actions:
        raise ContractViolation(f"Ação {action} fora de [0, {mdp.n_actions}).")
    proximo = int(np.searchsorted(mdp.cdf[state, action], rng.random(), side="right"))
    proximo = min(proximo, mdp.n_states - 1)
    return proximo, float(mdp.reward[state, action]), proximo in mdp.terminal


def continuous_step(task: ContinuousTask, state: np.ndarray, action: np.ndarray,
                    rng: np.random.Generator) -> Tuple[np.ndarray, float, bool]:
    """Dinâmica s' = clip(s + clip(a) + ruído); recompensa = -distância + bônus de sucesso."""
    acao = np.clip(action, task.action_bounds[:, 0], task.action_bounds[:, 1])
    ruido = rng.normal(0.0, task.dynamics_noise_std, task.state_dim) if task.dynamics_noise_std > 0 else 0.0
    proximo = np.clip(state + acao + ruido, task.state_bounds[:, 0], task.state_bounds[:, 1])
    sucesso = task.is_success(proximo)
    recompensa = -float(np.linalg.norm(proximo - task.goal)) + (1.0 if sucesso else 0.0)
    return proximo, recompensa, sucesso


def run_tabular_episode(mdp: TabularMdp, act: Callable[[int], int], rng: np.random.Generator,
                        horizon: int, task_id: int = 0, max_steps: Optional[int] = None) -> TabularEpisode:
    """Executa um episódio até o terminal, o horizonte ou o limite de passos."""
    episodio = TabularEpisode()
    limite = horizon if max_steps is None else min(horizon, max_steps)
    estado = sample_start(mdp, rng)
    while episodio.steps < limite and estado not in mdp.terminal:
        acao = act(estado)
        proximo, recompensa, done = step(mdp, estado, acao, rng)
        episodio.transitions.append(Transition(estado, acao, recompensa, proximo, done, task_id))
        episodio.total_return += recompensa
        episodio.reached_terminal = done
        estado = proximo
    return episodio


def run_continuous_episode(task: ContinuousTask, act: Callable[[np.ndarray], np.ndarray],
                           rng: np.random.Generator, task_id: int = 0,
                           max_steps: Optional[int] = None) -> ContinuousEpisode:
    """Executa um episódio contínuo; sucesso já no início conta com zero passos."""
    episodio = ContinuousEpisode()
    estado = task.start.copy()
    if task.is_success(estado):
        episodio.success = True
        return episodio
    limite = task.horizon if max_steps is None else min(task.horizon, max_steps)
    while episodio.steps < limite:
        celula = task.cell_index(estado)
        acao = np.asarray(act(estado), dtype=float)
        proximo, recompensa, done = continuous_step(task, estado, acao, rng)
        episodio.cells.append(celula)
        episodio.actions.append(acao)
        episodio.rewards.append(recompensa)
        episodio.transitions.append(Transition(estado, acao, recompensa, proximo, done, task_id))
        estado = proximo
        if done:
            episodio.success = True
            break
    return episodio


# ================== POLÍTICAS E SOLVERS ==================

def greedy_policy(q: Union[QTable, np.ndarray]) -> DeterministicPolicy:
    """Ação gulosa por estado; empates vão para o menor índice de ação."""
    valores = q.values if isinstance(q, QTable) else np.asarray(q, dtype=float)
    if not np.all(np.isfinite(valores)):
        raise ContractViolation("greedy_policy exige Q finito em todos os estados.")
    return np.argmax(valores, axis=1)


def one_hot_policy(actions: np.ndarray, n_actions: int) -> StochasticPolicy:
    return np.eye(n_actions)[np.asarray(actions, dtype=int)]


def softmax_policy(q: QTable, tau: Optional[float] = None) -> StochasticPolicy:
    return softmax_rows(q.values, q.temperature if tau is None else tau)


def _como_estocastica(mdp: TabularMdp, policy: np.ndarray) -> StochasticPolicy:
    policy = np.asarray(policy)
    if policy.ndim == 1:
        policy = one_hot_policy(policy, mdp.n_actions)
    if policy.shape != (mdp.n_states, mdp.n_actions):
        raise ContractViolation("Política com formato incompatível com o MDP.")
    vivos = ~mdp.terminal_mask
    if np.any(policy < 0) or np.any(np.abs(policy[vivos].sum(axis=1) - 1.0) > config.TOLERANCIA_SOMA):
        raise ContractViolation("Política deve estar definida (no simplex) em todos os estados não-terminais.")
    return policy.astype(float)


def value_iteration(mdp: TabularMdp, tol: float, temperature: float = config.TEMPERATURA_PADRAO,
                    max_sweeps: int = 100_000) -> QTable:
    """
    Q* por iteração de valor. Para quando o resíduo de Bellman fica abaixo de
    tol·(1−γ), o que garante resíduo ≤ tol e erro ≤ tol em norma do supremo.
    """
    if tol <= 0:
        raise ContractViolation("tol deve ser positivo.")
    q = np.zeros((mdp.n_states, mdp.n_actions))
    limiar = tol * (1.0 - mdp.gamma)
    for _ in range(max_sweeps):
        bellman = mdp.reward + mdp.gamma * (mdp.transition @ q.max(axis=1))
        residuo = float(np.max(np.abs(bellman - q)))
        if residuo <= limiar:
            return QTable(q, temperature)
        q = bellman
    logging.warning(f"Iteração de valor parou após {max_sweeps} varreduras (resíduo {residuo:.3e}).")
    return QTable(q, temperature)


def policy_evaluation(mdp: TabularMdp, policy: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """V^π e Q^π exatos pela solução do sistema linear de Bellman."""
    pi = _como_estocastica(mdp, policy)
    P_pi = np.einsum("sa,sat->st", pi, mdp.transition)
    r_pi = np.einsum("sa,sa->s", pi, mdp.reward)
    v = np.linalg.solve(np.eye(mdp.n_states) - mdp.gamma * P_pi, r_pi)
    q = mdp.reward + mdp.gamma * (mdp.transition @ v)
    return v, q


def discounted_visitation(mdp: TabularMdp, policy: np.ndarray, mode: str = "exact",
                          rng: Optional[np.random.Generator] = None,
                          n_steps: int = 100_000, task_id: Optional[int] = None) -> VisitationWeights:
    """
    Ocupação descontada μ^π sobre estados não-terminais, normalizada para somar 1.
    O modo 'exact' resolve o sistema linear; 'empirical' estima por rollouts
    que continuam com probabilidade γ a cada passo e reiniciam no terminal.
    """
    pi = _como_estocastica(mdp, policy)
    vivos = ~mdp.terminal_mask
    if mdp.start_dist[vivos].sum() <= 0:
        raise ContractViolation("A distribuição inicial não tem massa em estados não-terminais.")

    if mode == "exact":
        P_pi = np.einsum("sa,sat->st", pi, mdp.transition)[np.ix_(vivos, vivos)]
        rho = mdp.start_dist[vivos]
        ocupacao = np.linalg.solve((np.eye(int(vivos.sum())) - mdp.gamma * P_pi).T, rho)
        mu = np.zeros(mdp.n_states)
        mu[vivos] = np.maximum(ocupacao, 0.0)
    elif mode == "empirical":
        if rng is None:
            raise ContractViolation("O modo empírico exige um gerador aleatório.")
        mu = np.zeros(mdp.n_states)
        acumulada_pi = np.cumsum(pi, axis=1)
        estado = sample_start(mdp, rng)
        for _ in range(n_steps):
            mu[estado] += 1.0
            acao = int(min(np.searchsorted(acumulada_pi[estado], rng.random(), side="right"), mdp.n_actions - 1))
            proximo, _, done = step(mdp, estado, acao, rng)
            estado = sample_start(mdp, rng) if done or rng.random() >= mdp.gamma else proximo
    else:
        raise ContractViolation(f"Modo de visitação desconhecido: {mode}.")

    mu = mu / mu.sum()
    return VisitationWeights(mu, task_id=task_id)


# ================== LAYOUT NUMÉRICO PLANO ==================

def mdp_to_flat(mdp: TabularMdp) -> np.ndarray:
    """[S, A, γ, P.ravel(), R.ravel(), start_dist, máscara terminal]."""
    return np.concatenate([
        [mdp.n_states, mdp.n_actions, mdp.gamma],
        mdp.transition.ravel(), mdp.reward.ravel(), mdp.start_dist,
        mdp.terminal_mask.astype(float),
    ])


def mdp_from_flat(flat: np.ndarray, name: str = "") -> TabularMdp:
    S, A = int(flat[0]), int(flat[1])
    gamma = float(flat[2])
    pos = 3
    P = flat[pos:pos + S * A * S].reshape(S, A, S)
    pos += S * A * S
    R = flat[pos:pos + S * A].reshape(S, A)
    pos += S * A
    start = flat[pos:pos + S]
    pos += S
    mascara = flat[pos:pos + S]
    if pos + S != flat.size:
        raise ContractViolation("Layout plano com tamanho inconsistente.")
    return TabularMdp(P, R, gamma, start, frozenset(np.flatnonzero(mascara > 0.5).tolist()), name)
