"""Knowledge workers: competence vectors, interest masks, abilities, rosters."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "KnowledgeWorker",
    "OrganizationProfile",
    "Population",
    "WorkforceError",
    "average_competence",
    "competence_bank",
    "init_workers",
    "read_roster",
    "write_roster",
]


class WorkforceError(ValueError):
    """Invalid worker parameter or malformed roster."""


@dataclass
class KnowledgeWorker:
    """One worker. ``competences`` and ``mask`` are row views into the population."""

    id: int
    competences: np.ndarray
    mask: np.ndarray
    cognitive: float
    social: float
    forgetting: float


class Population(Sequence[KnowledgeWorker]):
    """Column-oriented store for a workforce of equal-length competence vectors.

    Invariants: competences >= 0, mask entries in {0, 1}, abilities in [0, 1],
    forgetting rate in [0, 1).
    """

    def __init__(
        self,
        competences: np.ndarray,
        masks: np.ndarray,
        cognitive: np.ndarray,
        social: np.ndarray,
        forgetting: np.ndarray,
    ):
        self.competences = np.asarray(competences, dtype=float)
        self.masks = np.asarray(masks, dtype=float)
        self.cognitive = np.asarray(cognitive, dtype=float)
        self.social = np.asarray(social, dtype=float)
        self.forgetting = np.asarray(forgetting, dtype=float)
        self._validate()

    def _validate(self) -> None:
        if self.competences.ndim != 2:
            raise WorkforceError("competences must be a 2-d array (workers x competences)")
        n, m = self.competences.shape
        if m < 1:
            raise WorkforceError("competence vectors must have at least one element")
        if self.masks.shape != (n, m):
            raise WorkforceError("mask shape must match competence shape")
        for name, arr in (("cognitive", self.cognitive), ("social", self.social), ("forgetting", self.forgetting)):
            if arr.shape != (n,):
                raise WorkforceError(f"{name} must be a length-{n} vector")
        if np.any(self.competences < 0.0):
            raise WorkforceError("competences must be >= 0")
        if not np.all((self.masks == 0.0) | (self.masks == 1.0)):
            raise WorkforceError("mask entries must be 0 or 1")
        if np.any((self.cognitive < 0.0) | (self.cognitive > 1.0)):
            raise WorkforceError("cognitive ability must lie in [0, 1]")
        if np.any((self.social < 0.0) | (self.social > 1.0)):
            raise WorkforceError("social ability must lie in [0, 1]")
        if np.any((self.forgetting < 0.0) | (self.forgetting >= 1.0)):
            raise WorkforceError("forgetting rate must lie in [0, 1)")

    @property
    def n_competences(self) -> int:
        return self.competences.shape[1]

    def worker(self, i: int) -> KnowledgeWorker:
        if not (0 <= i < len(self)):
            raise WorkforceError(f"unknown worker id {i}")
        return KnowledgeWorker(
            id=i,
            competences=self.competences[i],
            mask=self.masks[i],
            cognitive=float(self.cognitive[i]),
            social=float(self.social[i]),
            forgetting=float(self.forgetting[i]),
        )

    def copy(self) -> "Population":
        return Population(
            self.competences.copy(),
            self.masks.copy(),
            self.cognitive.copy(),
            self.social.copy(),
            self.forgetting.copy(),
        )

    def __len__(self) -> int:
        return self.competences.shape[0]

    def __getitem__(self, i: int) -> KnowledgeWorker:  # type: ignore[override]
        return self.worker(i)

    def __iter__(self) -> Iterator[KnowledgeWorker]:
        for i in range(len(self)):
            yield self.worker(i)


def init_workers(
    n_workers: int,
    n_competences: int,
    competence_range: tuple[float, float],
    mask_density: float,
    cognitive_range: tuple[float, float],
    social_range: tuple[float, float],
    forgetting: float,
    rng: np.random.Generator,
) -> Population:
    """Draw a fresh workforce: uniform competences, Bernoulli masks, uniform abilities.

    Draw order is fixed (competences, masks, cognitive, social) so one seed
    always reproduces the same population.
    """
    if n_workers < 1:
        raise WorkforceError(f"need at least one worker, got {n_workers}")
    if n_competences < 1:
        raise WorkforceError(f"need at least one competence, got {n_competences}")
    if not (0.0 <= mask_density <= 1.0):
        raise WorkforceError(f"mask density must lie in [0, 1], got {mask_density}")
    if not (0.0 <= forgetting < 1.0):
        raise WorkforceError(f"forgetting rate must lie in [0, 1), got {forgetting}")
    for name, (lo, hi) in (
        ("competence_range", competence_range),
        ("cognitive_range", cognitive_range),
        ("social_range", social_range),
    ):
        if hi < lo:
            raise WorkforceError(f"{name} is reversed: [{lo}, {hi}]")
    if competence_range[0] < 0.0:
        raise WorkforceError("competence range must be non-negative")
    for name, (lo, hi) in (("cognitive_range", cognitive_range), ("social_range", social_range)):
        if lo < 0.0 or hi > 1.0:
            raise WorkforceError(f"{name} must lie within [0, 1]")

    competences = rng.uniform(competence_range[0], competence_range[1], size=(n_workers, n_competences))
    masks = (rng.random(size=(n_workers, n_competences)) < mask_density).astype(float)
    cognitive = rng.uniform(cognitive_range[0], cognitive_range[1], size=n_workers)
    social = rng.uniform(social_range[0], social_range[1], size=n_workers)
    forgetting_vec = np.full(n_workers, float(forgetting))
    return Population(competences, masks, cognitive, social, forgetting_vec)


@dataclass(frozen=True, eq=False)
class OrganizationProfile:
    """Element-wise maximum competence across the workforce plus core indices."""

    bank: np.ndarray
    core: tuple[int, ...]


def _competence_matrix(workers: Population | Iterable[KnowledgeWorker]) -> np.ndarray:
    if isinstance(workers, Population):
        return workers.competences
    rows = [w.competences for w in workers]
    if not rows:
        raise WorkforceError("need at least one worker")
    return np.vstack(rows)


def competence_bank(
    workers: Population | Iterable[KnowledgeWorker],
    core: Iterable[int] = (),
) -> OrganizationProfile:
    """Element-wise maximum over all workers' competence vectors."""
    matrix = _competence_matrix(workers)
    core_idx = tuple(sorted(int(i) for i in core))
    for i in core_idx:
        if not (0 <= i < matrix.shape[1]):
            raise WorkforceError(f"core index {i} outside competence vector of length {matrix.shape[1]}")
    return OrganizationProfile(bank=matrix.max(axis=0), core=core_idx)


def average_competence(
    workers: Population | Iterable[KnowledgeWorker],
    mask: np.ndarray | Sequence[float] | None = None,
) -> float:
    """Mean over all (worker, competence) pairs, optionally restricted by a mask.

    The mask is a 0/1 vector over competence positions applied to every worker.
    """
    matrix = _competence_matrix(workers)
    if mask is None:
        return float(matrix.mean())
    mask_arr = np.asarray(mask, dtype=float)
    if mask_arr.shape != (matrix.shape[1],):
        raise WorkforceError(
            f"mask length {mask_arr.shape} does not match competence vector length {matrix.shape[1]}"
        )
    if not np.all((mask_arr == 0.0) | (mask_arr == 1.0)):
        raise WorkforceError("mask entries must be 0 or 1")
    selected = matrix[:, mask_arr == 1.0]
    if selected.size == 0:
        raise WorkforceError("mask selects no competence positions")
    return float(selected.mean())


# -- roster interchange ---------------------------------------------------------


def write_roster(workers: Population, path: str | Path) -> None:
    """One line per worker: id, forgetting, cognitive, social, competences, mask bits."""
    n, m = workers.competences.shape
    lines = [f"# workers={n} competences={m}"]
    for i in range(n):
        cells = [
            str(i),
            repr(float(workers.forgetting[i])),
            repr(float(workers.cognitive[i])),
            repr(float(workers.social[i])),
        ]
        cells.extend(repr(float(c)) for c in workers.competences[i])
        cells.extend(str(int(b)) for b in workers.masks[i])
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_roster(path: str | Path) -> Population:
    text = Path(path).read_text()
    n_workers: int | None = None
    n_comp: int | None = None
    rows: list[list[str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].strip().split():
                if token.startswith("workers="):
                    n_workers = int(token[len("workers="):])
                elif token.startswith("competences="):
                    n_comp = int(token[len("competences="):])
            continue
        rows.append(line.split(","))
    if n_workers is None or n_comp is None:
        raise WorkforceError(f"{path}: missing '# workers=N competences=M' header")
    if len(rows) != n_workers:
        raise WorkforceError(f"{path}: header announces {n_workers} workers, found {len(rows)} rows")
    competences = np.zeros((n_workers, n_comp))
    masks = np.zeros((n_workers, n_comp))
    cognitive = np.zeros(n_workers)
    social = np.zeros(n_workers)
    forgetting = np.zeros(n_workers)
    expected = 4 + 2 * n_comp
    seen: set[int] = set()
    for cells in rows:
        if len(cells) != expected:
            raise WorkforceError(f"{path}: expected {expected} cells per row, got {len(cells)}")
        i = int(cells[0])
        if not (0 <= i < n_workers) or i in seen:
            raise WorkforceError(f"{path}: worker ids must be unique and dense in [0, {n_workers})")
        seen.add(i)
        forgetting[i] = float(cells[1])
        cognitive[i] = float(cells[2])
        social[i] = float(cells[3])
        competences[i] = [float(c) for c in cells[4:4 + n_comp]]
        masks[i] = [float(c) for c in cells[4 + n_comp:]]
    return Population(competences, masks, cognitive, social, forgetting)
