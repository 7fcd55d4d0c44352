"""
Language model data models: vocabulary and n-gram count tables
"""

from typing import Callable, Dict, List, Optional, Tuple
from pydantic import BaseModel, Field, PrivateAttr, model_validator

BOS_PIECE = "<s>"
EOS_PIECE = "</s>"
UNK_PIECE = "<unk>"
RESERVED_PIECES = [BOS_PIECE, EOS_PIECE, UNK_PIECE]


class Vocabulary(BaseModel):
    """Token pieces <-> integer ids; ids 0, 1, 2 are BOS, EOS, UNK"""

    pieces: List[str]

    _index: Dict[str, int] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def check_bijection(self) -> "Vocabulary":
        if self.pieces[:3] != RESERVED_PIECES:
            raise ValueError(f"vocabulary must start with reserved pieces {RESERVED_PIECES}")
        if len(set(self.pieces)) != len(self.pieces):
            raise ValueError("vocabulary pieces must be unique")
        self._index = {piece: i for i, piece in enumerate(self.pieces)}
        return self

    @property
    def bos_id(self) -> int:
        return 0

    @property
    def eos_id(self) -> int:
        return 1

    @property
    def unk_id(self) -> int:
        return 2

    def __len__(self) -> int:
        return len(self.pieces)

    def id_of(self, piece: str) -> int:
        """Id of a piece; unknown pieces map to UNK"""
        return self._index.get(piece, self.unk_id)

    def contains(self, piece: str) -> bool:
        return piece in self._index

    def piece_of(self, token_id: int) -> str:
        return self.pieces[token_id]


class NGramModel(BaseModel):
    """Add-alpha smoothed n-gram model with recursive backoff to lower orders"""

    order: int = Field(ge=1)
    alpha: float = Field(gt=0)
    vocabulary: Vocabulary
    merges: List[Tuple[str, str]] = Field(default_factory=list)  # BPE merges, rank order
    # order m -> context (m-1 ids) -> next id -> count
    counts: Dict[int, Dict[Tuple[int, ...], Dict[int, int]]]

    _context_totals: Dict[int, Dict[Tuple[int, ...], int]] = PrivateAttr(default_factory=dict)
    # bounded per-context log-prob cache, built on first lookup
    _cache: Optional[Callable[[Tuple[int, ...]], object]] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def index_totals(self) -> "NGramModel":
        self._context_totals = {
            m: {ctx: sum(nxt.values()) for ctx, nxt in table.items()}
            for m, table in self.counts.items()
        }
        return self

    def context_total(self, order: int, context: Tuple[int, ...]) -> int:
        return self._context_totals.get(order, {}).get(context, 0)
