# -*- coding: utf-8 -*-
"""
Exceções do laboratório. Pré-condições violadas levantam ContractViolation;
as demais classes sinalizam falhas que o chamador pode tratar.
"""
from __future__ import annotations


class ContractViolation(ValueError):
    """Entrada fora do contrato de uma operação."""


class ConfigError(ContractViolation):
    """Configuração de execução inválida (rejeitada antes de rodar)."""


class GenerationFailure(RuntimeError):
    """O gerador de tarefas esgotou o número de tentativas."""


class EmptyBucketError(LookupError):
    """A tarefa não tem registros no meta buffer; a integração deve ser pulada."""
