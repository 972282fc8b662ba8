# Services/gbt.py
"""
Gradient tree boosting regularizado con pérdida logística binaria.

Árboles CART de profundidad acotada, búsqueda exacta de splits con gradiente y
hessiano, dirección por defecto aprendida para valores faltantes y búsqueda
aleatoria de hiperparámetros por validación cruzada.
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import expit

from Services.dataset import FeatureSnapshot, labels_array, to_matrix
from Services.errors import TrainingError
from Services.metrics import cross_validate, derive_seed

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12
MIN_HESSIAN = 1e-16
MODEL_VERSION = 1


# ------------------------------------------------------
#   MODELOS
# ------------------------------------------------------

class GbtParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    num_trees: int = Field(16, ge=0)
    max_depth: int = Field(3, ge=0)
    learning_rate: float = Field(0.3, gt=0.0, le=1.0)
    reg_lambda: float = Field(1.0, ge=0.0)
    gamma: float = Field(0.0, ge=0.0)
    min_child_weight: float = Field(1.0, ge=0.0)
    colsample: float = Field(1.0, gt=0.0, le=1.0)
    seed: int = 0


class LeafNode(BaseModel):
    model_config = ConfigDict(frozen=True)

    leaf: float
    cover: float = 0.0  # suma de hessianos al construir la hoja


class SplitNode(BaseModel):
    model_config = ConfigDict(frozen=True)

    feature: int
    threshold: float
    default: Literal["left", "right"]
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[SplitNode, LeafNode]
SplitNode.model_rebuild()


class GbtModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["gbt"] = "gbt"
    version: int = MODEL_VERSION
    base_score: float = 0.0
    params: GbtParams = Field(default_factory=GbtParams)
    trees: Tuple[TreeNode, ...] = ()

    @model_validator(mode="after")
    def check_tree_count(self) -> "GbtModel":
        if len(self.trees) > self.params.num_trees:
            raise ValueError("el modelo tiene más árboles que num_trees")
        return self


class SearchSpace(BaseModel):
    """Rangos (lo, hi) muestreados uniformemente; max_depth es entero inclusivo."""

    model_config = ConfigDict(frozen=True)

    reg_lambda: Tuple[float, float] = (0.0, 5.0)
    gamma: Tuple[float, float] = (0.0, 2.0)
    min_child_weight: Tuple[float, float] = (0.0, 5.0)
    colsample: Tuple[float, float] = (0.5, 1.0)
    max_depth: Tuple[int, int] = (2, 5)
    learning_rate: Tuple[float, float] = (0.05, 0.5)

    @model_validator(mode="after")
    def check_bounds(self) -> "SearchSpace":
        for name in ("reg_lambda", "gamma", "min_child_weight", "colsample", "max_depth", "learning_rate"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"rango inválido para {name}: {lo} > {hi}")
        return self

    def sample(self, rng: np.random.Generator, base: GbtParams, seed: int) -> GbtParams:
        return base.model_copy(
            update={
                "reg_lambda": float(rng.uniform(*self.reg_lambda)),
                "gamma": float(rng.uniform(*self.gamma)),
                "min_child_weight": float(rng.uniform(*self.min_child_weight)),
                "colsample": float(rng.uniform(*self.colsample)),
                "max_depth": int(rng.integers(self.max_depth[0], self.max_depth[1] + 1)),
                "learning_rate": float(rng.uniform(*self.learning_rate)),
                "seed": seed,
            }
        )


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float
    default_direction: Literal["left", "right"]
    gain: float


# ------------------------------------------------------
#   PÉRDIDA / HOJAS
# ------------------------------------------------------

def logistic_grad_hess(y, f):
    """
    Gradiente y hessiano de la pérdida logística respecto al log-odds.

    Args:
        y: etiqueta en {1, 0} (escalar o array)
        f: log-odds actual

    Returns:
        (g, h) con g = p - y, h = p(1 - p) > 0
    """
    p = expit(f)
    g = p - y
    h = np.maximum(p * (1.0 - p), MIN_HESSIAN)
    if np.ndim(g) == 0:
        return float(g), float(h)
    return g, h


def logistic_loss(y01: np.ndarray, f: np.ndarray) -> float:
    """Pérdida logística media; logaddexp evita overflow."""
    return float(np.mean(np.logaddexp(0.0, f) - y01 * f))


def leaf_score(G: float, H: float, reg_lambda: float, learning_rate: float) -> float:
    """-eta * G / (H + lambda); 0 si H + lambda = 0."""
    denom = H + reg_lambda
    if denom == 0:
        return 0.0
    return -learning_rate * G / denom


def _structure_score(G, H, reg_lambda):
    denom = H + reg_lambda
    return np.where(denom > 0, np.square(G) / np.where(denom > 0, denom, 1.0), 0.0)


# ------------------------------------------------------
#   SPLITS
# ------------------------------------------------------

def find_best_split(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    params: GbtParams,
    allowed_features: Sequence[int],
) -> Optional[SplitCandidate]:
    """
    Búsqueda exacta del mejor split sobre las filas de X.

    Para cada feature permitida y cada punto medio entre valores distintos,
    evalúa la ganancia enviando los faltantes a la izquierda y a la derecha.
    Se descartan candidatos sin ganancia positiva o con algún hijo con
    sum(h) < min_child_weight. Empates: menor feature, menor umbral, izquierda.

    Returns:
        SplitCandidate o None si ningún split es válido
    """
    lam, gamma, mcw = params.reg_lambda, params.gamma, params.min_child_weight
    G_total, H_total = float(g.sum()), float(h.sum())
    parent = float(_structure_score(G_total, H_total, lam))

    evaluated = []
    best_gain = -math.inf
    for feature in sorted(allowed_features):
        values = X[:, feature]
        present = ~np.isnan(values)
        if present.sum() < 2:
            continue
        order = np.argsort(values[present], kind="stable")
        sorted_values = values[present][order]
        changes = np.nonzero(sorted_values[1:] != sorted_values[:-1])[0] + 1
        if changes.size == 0:
            continue
        thresholds = (sorted_values[changes - 1] + sorted_values[changes]) / 2.0

        cum_g = np.cumsum(g[present][order])
        cum_h = np.cumsum(h[present][order])
        gl, hl = cum_g[changes - 1], cum_h[changes - 1]
        gr, hr = cum_g[-1] - gl, cum_h[-1] - hl
        g_miss, h_miss = float(g[~present].sum()), float(h[~present].sum())

        gains, valid = [], []
        for gl_d, hl_d, gr_d, hr_d in (
            (gl + g_miss, hl + h_miss, gr, hr),   # faltantes a la izquierda
            (gl, hl, gr + g_miss, hr + h_miss),   # faltantes a la derecha
        ):
            gain = 0.5 * (_structure_score(gl_d, hl_d, lam) + _structure_score(gr_d, hr_d, lam) - parent) - gamma
            ok = (gain > TIE_TOLERANCE) & (hl_d >= mcw) & (hr_d >= mcw)
            gains.append(np.where(ok, gain, -np.inf))
        gain_matrix = np.column_stack(gains)
        evaluated.append((feature, thresholds, gain_matrix.ravel()))
        best_gain = max(best_gain, float(gain_matrix.max()))

    if not math.isfinite(best_gain):
        return None
    for feature, thresholds, gains in evaluated:
        hits = np.nonzero(gains >= best_gain - TIE_TOLERANCE)[0]
        if hits.size:
            pick = int(hits[0])
            return SplitCandidate(
                feature=feature,
                threshold=float(thresholds[pick // 2]),
                default_direction="left" if pick % 2 == 0 else "right",
                gain=float(gains[pick]),
            )
    return None


def _goes_left(values: np.ndarray, threshold: float, default: str) -> np.ndarray:
    return np.where(np.isnan(values), default == "left", values < threshold)


def _grow(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    rows: np.ndarray,
    depth: int,
    params: GbtParams,
    features: Sequence[int],
) -> TreeNode:
    G, H = float(g[rows].sum()), float(h[rows].sum())
    if depth < params.max_depth and rows.size >= 2:
        split = find_best_split(X[rows], g[rows], h[rows], params, features)
        if split is not None:
            go_left = _goes_left(X[rows, split.feature], split.threshold, split.default_direction)
            return SplitNode(
                feature=split.feature,
                threshold=split.threshold,
                default=split.default_direction,
                left=_grow(X, g, h, rows[go_left], depth + 1, params, features),
                right=_grow(X, g, h, rows[~go_left], depth + 1, params, features),
            )
    return LeafNode(leaf=leaf_score(G, H, params.reg_lambda, params.learning_rate), cover=H)


def _fill(node: TreeNode, X: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if isinstance(node, LeafNode):
        out[rows] = node.leaf
        return
    go_left = _goes_left(X[rows, node.feature], node.threshold, node.default)
    _fill(node.left, X, rows[go_left], out)
    _fill(node.right, X, rows[~go_left], out)


def tree_values(node: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.zeros(X.shape[0], dtype=float)
    _fill(node, X, np.arange(X.shape[0]), out)
    return out


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, LeafNode):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def tree_leaves(node: TreeNode) -> List[LeafNode]:
    if isinstance(node, LeafNode):
        return [node]
    return tree_leaves(node.left) + tree_leaves(node.right)


# ------------------------------------------------------
#   ENTRENAMIENTO / PREDICCIÓN
# ------------------------------------------------------

def fit_matrix(X: np.ndarray, y: np.ndarray, params: GbtParams) -> GbtModel:
    y01 = (np.asarray(y) == 1).astype(float)
    if y01.size == 0 or y01.min() == y01.max():
        raise TrainingError("el entrenamiento requiere ambas clases")

    rate = float(y01.mean())
    base_score = math.log(rate / (1.0 - rate))
    scores = np.full(y01.size, base_score)
    rng = np.random.default_rng(params.seed)
    n_features = X.shape[1]
    n_cols = max(1, int(round(params.colsample * n_features)))
    all_rows = np.arange(y01.size)

    trees: List[TreeNode] = []
    for k in range(params.num_trees):
        g, h = logistic_grad_hess(y01, scores)
        if n_cols < n_features:
            features = sorted(int(j) for j in rng.choice(n_features, size=n_cols, replace=False))
        else:
            features = list(range(n_features))
        tree = _grow(X, g, h, all_rows, 0, params, features)
        scores = scores + tree_values(tree, X)
        trees.append(tree)
        logger.debug("Árbol %d: profundidad %d, pérdida %.6f", k + 1, tree_depth(tree), logistic_loss(y01, scores))

    logger.info("GBT: %d árboles (profundidad máx %d)", len(trees), params.max_depth)
    return GbtModel(base_score=base_score, params=params, trees=tuple(trees))


def fit(train: Sequence[FeatureSnapshot], params: Optional[GbtParams] = None) -> GbtModel:
    """
    Ajusta K árboles sobre la pérdida logística partiendo del log-odds de la clase positiva.

    Args:
        train: snapshots etiquetados con ambas clases
        params: hiperparámetros (por defecto K=16, profundidad 3)
    """
    return fit_matrix(to_matrix(train), labels_array(train), params or GbtParams())


def predict_margins(model: GbtModel, X: np.ndarray) -> np.ndarray:
    margins = np.full(X.shape[0], model.base_score)
    for tree in model.trees:
        margins = margins + tree_values(tree, X)
    return margins


def predict_probas(model: GbtModel, X: np.ndarray) -> np.ndarray:
    return expit(predict_margins(model, X))


def predict_proba(model: GbtModel, x: FeatureSnapshot) -> float:
    """sigma(base_score + suma de hojas); los faltantes siguen la dirección por defecto."""
    return float(predict_probas(model, x.vector()[None, :])[0])


# ------------------------------------------------------
#   RANDOM SEARCH
# ------------------------------------------------------

class _GbtTrainer:
    """Entrenador para `cross_validate`: ajusta con params y la semilla del fold."""

    def __init__(self, params: GbtParams) -> None:
        self.params = params

    def __call__(self, train: Sequence[FeatureSnapshot], seed: int):
        model = fit(train, self.params.model_copy(update={"seed": seed}))
        return lambda snapshots: predict_probas(model, to_matrix(snapshots))


def _score_candidate(train, params: GbtParams, folds: int, seed: int) -> float:
    _, mean_auroc = cross_validate(_GbtTrainer(params), train, k=folds, seed=seed)
    return mean_auroc


def select_best(
    train: Sequence[FeatureSnapshot],
    candidates: Sequence[GbtParams],
    *,
    folds: int = 10,
    seed: int = 0,
    n_jobs: int = 1,
) -> Tuple[GbtParams, List[float]]:
    """Evalúa cada candidato con CV disjunta por paciente; gana el mayor AUROC medio (primer índice en empate)."""
    if not candidates:
        raise TrainingError("no hay candidatos que evaluar")
    scores = Parallel(n_jobs=n_jobs)(
        delayed(_score_candidate)(train, params, folds, seed) for params in candidates
    )
    best = int(np.argmax(scores))
    for i, (params, score) in enumerate(zip(candidates, scores)):
        logger.debug("Trial %d: AUROC CV %.4f %s", i, score, params.model_dump())
    return candidates[best], list(scores)


def random_search(
    train: Sequence[FeatureSnapshot],
    space: Optional[SearchSpace] = None,
    folds: int = 10,
    trials: int = 20,
    seed: int = 0,
    *,
    base: Optional[GbtParams] = None,
    n_jobs: int = 1,
) -> GbtParams:
    """
    Búsqueda aleatoria de hiperparámetros maximizando el AUROC medio de CV.

    Args:
        train: snapshots de entrenamiento
        space: rangos de búsqueda
        folds: k de la validación cruzada
        trials: número de vectores muestreados (>= 1)
        seed: semilla; cada trial deriva la suya de (seed, índice)
        base: parámetros no muestreados (num_trees)
        n_jobs: trials en paralelo (joblib)
    """
    if trials < 1:
        raise TrainingError("random_search requiere trials >= 1")
    space = space or SearchSpace()
    base = base or GbtParams()
    candidates = []
    for trial in range(trials):
        trial_seed = derive_seed(seed, trial)
        candidates.append(space.sample(np.random.default_rng(trial_seed), base, trial_seed))

    best, scores = select_best(train, candidates, folds=folds, seed=seed, n_jobs=n_jobs)
    logger.info("Random search: mejor AUROC CV %.4f en %d trials", max(scores), trials)
    return best
