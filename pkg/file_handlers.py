# -*- coding: utf-8 -*-
"""
Manipulação de arquivos: gravação atômica de CSV, leitura de CSV de
resultados e checkpoints .npz do estado de uma execução.
"""
from __future__ import annotations

import csv
import io
import os
import re
import tempfile
import unicodedata
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np

# ================== NOMES DE ARQUIVO ==================

def limpar_nome_arquivo(nome: str) -> str:
    """Limpa e sanitiza um nome de arquivo, removendo caracteres especiais."""
    nome_sem_ext, ext = os.path.splitext(nome)
    nome_normalizado = unicodedata.normalize('NFKD', nome_sem_ext).encode('ascii', 'ignore').decode('ascii')
    nome_limpo = re.sub(r'[^\w\s.-]', '', nome_normalizado).strip()
    nome_limpo = re.sub(r'[\s]+', '_', nome_limpo)
    return nome_limpo + ext if ext else nome_limpo

# ================== GRAVAÇÃO ATÔMICA ==================

def _substituir_atomico(caminho: Path, escrever) -> None:
    """Escreve num arquivo temporário do mesmo diretório e troca com os.replace."""
    caminho.parent.mkdir(parents=True, exist_ok=True)
    fd, temporario = tempfile.mkstemp(prefix=f".{caminho.name}.", dir=caminho.parent)
    try:
        with os.fdopen(fd, 'wb') as f:
            escrever(f)
        os.replace(temporario, caminho)
    except BaseException:
        Path(temporario).unlink(missing_ok=True)
        raise

# ================== CSV ==================

def salvar_csv(caminho: str | Path, colunas: Sequence[str], linhas: Sequence[Mapping[str, Any]]) -> Path:
    """Grava as linhas em CSV (UTF-8, '\\n') de forma atômica; colunas extras são ignoradas."""
    caminho = Path(caminho)

    def escrever(f) -> None:
        texto = io.StringIO()
        w = csv.DictWriter(texto, fieldnames=list(colunas), extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for linha in linhas:
            w.writerow({k: linha.get(k, "") for k in colunas})
        f.write(texto.getvalue().encode('utf-8'))

    _substituir_atomico(caminho, escrever)
    return caminho


def ler_csv(caminho: str | Path) -> List[Dict[str, str]]:
    """Lê um CSV com cabeçalho como lista de dicionários."""
    try:
        with open(caminho, 'r', encoding='utf-8', newline='') as f:
            return list(csv.DictReader(f))
    except FileNotFoundError:
        print(f"❌ Arquivo não encontrado: '{caminho}'")
        raise

# ================== CHECKPOINTS ==================

def salvar_checkpoint(caminho: str | Path, arrays: Mapping[str, np.ndarray]) -> Path:
    """Salva um dicionário de arrays num .npz (gravação atômica)."""
    caminho = Path(caminho)
    if caminho.suffix != '.npz':
        caminho = caminho.with_suffix('.npz')
    _substituir_atomico(caminho, lambda f: np.savez(f, **{k: np.asarray(v) for k, v in arrays.items()}))
    return caminho


def carregar_checkpoint(caminho: str | Path) -> Dict[str, np.ndarray]:
    """Carrega um .npz salvo por salvar_checkpoint."""
    with np.load(caminho, allow_pickle=False) as dados:
        return {k: dados[k] for k in dados.files}
