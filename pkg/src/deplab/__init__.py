"""Graph-based and transition-based dependency parsing with factor-based error analysis."""

__version__ = "0.1.0"

from .treebank import (  # noqa: E402
    Arc,
    ConllError,
    DependencyGraph,
    Sentence,
    Token,
    Treebank,
    kfold_split,
    parse_conll,
    read_conll,
    serialize_conll,
    validate_graph,
    write_conll,
)
from .evaluation import EvalResult, evaluate  # noqa: E402

__all__ = [
    "Arc", "ConllError", "DependencyGraph", "Sentence", "Token", "Treebank", "kfold_split",
    "parse_conll", "read_conll", "serialize_conll", "validate_graph", "write_conll",
    "EvalResult", "evaluate",
]
